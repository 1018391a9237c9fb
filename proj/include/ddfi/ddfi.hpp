#pragma once

// Umbrella header for the full pipeline.

#include "ddfi/checkpoint.hpp"
#include "ddfi/cll.hpp"
#include "ddfi/config.hpp"
#include "ddfi/eval.hpp"
#include "ddfi/features.hpp"
#include "ddfi/graph.hpp"
#include "ddfi/io.hpp"
#include "ddfi/mae.hpp"
#include "ddfi/matrix.hpp"
#include "ddfi/propagation.hpp"
#include "ddfi/rng.hpp"
