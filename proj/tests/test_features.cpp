#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "ddfi/features.hpp"
#include "ddfi/io.hpp"

using namespace ddfi;

namespace {

struct TempFile {
  std::string path;
  explicit TempFile(const std::string& name, const std::string& contents) {
    path = (std::filesystem::temp_directory_path() / name).string();
    std::ofstream out(path);
    out << contents;
  }
  ~TempFile() { std::remove(path.c_str()); }
};

} // namespace

TEST_CASE("load_features parses known, nan and empty cells") {
  TempFile f("ddfi_feat_basic.csv",
             "node_id,f0,f1\n"
             "0,1.5,nan\n"
             "1,,2.25\n");
  const FeatureTable t = load_features(f.path, 2);
  REQUIRE(t.is_known(0, 0));
  REQUIRE(t.values(0, 0) == 1.5);
  REQUIRE_FALSE(t.is_known(0, 1));
  REQUIRE(t.values(0, 1) == 0.0);
  REQUIRE_FALSE(t.is_known(1, 0));
  REQUIRE(t.is_known(1, 1));
}

TEST_CASE("load_features error paths carry line numbers") {
  SECTION("row count mismatch") {
    TempFile f("ddfi_feat_short.csv", "node_id,f0\n0,1\n");
    REQUIRE_THROWS_AS(load_features(f.path, 2), InputError);
  }
  SECTION("ragged row") {
    TempFile f("ddfi_feat_ragged.csv", "node_id,f0,f1\n0,1\n");
    REQUIRE_THROWS_WITH(load_features(f.path, 1), Catch::Matchers::ContainsSubstring(":2:"));
  }
  SECTION("unparsable number") {
    TempFile f("ddfi_feat_bad.csv", "node_id,f0\n0,oops\n");
    REQUIRE_THROWS_WITH(load_features(f.path, 1), Catch::Matchers::ContainsSubstring(":2:"));
  }
}

TEST_CASE("feature CSV round-trips through write_features") {
  FeatureTable t(3, 2, true);
  t.values(0, 0) = 0.25;
  t.values(0, 1) = -1.75;
  t.clear(1, 0);
  t.values(1, 1) = 1e-3;
  t.values(2, 0) = 12345.678;
  t.clear(2, 1);
  TempFile f("ddfi_feat_roundtrip.csv", "");
  write_features(f.path, t);
  const FeatureTable back = load_features(f.path, 3);
  REQUIRE(back.known == t.known);
  REQUIRE(back.values.data == t.values.data);
}

TEST_CASE("mask_uniform") {
  SECTION("rate 0 is the identity") {
    FeatureTable t(10, 4, true);
    for (std::size_t i = 0; i < t.values.data.size(); ++i)
      t.values.data[i] = static_cast<double>(i);
    const FeatureTable out = mask_uniform(t, 0.0, 42);
    REQUIRE(out.known == t.known);
    REQUIRE(out.values.data == t.values.data);
  }
  SECTION("rate 0.9 over 1e6 entries lands within 3 sigma") {
    FeatureTable t(1000, 1000, true);
    const FeatureTable out = mask_uniform(t, 0.9, 7);
    const double unknown = 1.0 - out.known_fraction();
    REQUIRE(unknown == Catch::Approx(0.9).margin(0.002));
  }
  SECTION("two passes compose like independence says") {
    const double r = 0.5;
    FeatureTable t(800, 800, true);
    const FeatureTable once = mask_uniform(t, r, 3);
    const FeatureTable twice = mask_uniform(once, r, 4);
    const double unknown = 1.0 - twice.known_fraction();
    REQUIRE(unknown == Catch::Approx(1.0 - (1.0 - r) * (1.0 - r)).margin(0.003));
  }
  SECTION("never resurrects an unknown entry") {
    FeatureTable t(50, 8, true);
    const FeatureTable a = mask_uniform(t, 0.7, 1);
    const FeatureTable b = mask_uniform(a, 0.3, 2);
    for (std::size_t i = 0; i < a.known.size(); ++i)
      if (!a.known[i]) REQUIRE_FALSE(b.known[i]);
  }
  SECTION("rate out of range") {
    FeatureTable t(2, 2, true);
    REQUIRE_THROWS_AS(mask_uniform(t, 1.0, 0), InputError);
    REQUIRE_THROWS_AS(mask_uniform(t, -0.1, 0), InputError);
  }
}

TEST_CASE("mask_structural") {
  SECTION("rate 0 is the identity") {
    FeatureTable t(20, 3, true);
    const FeatureTable out = mask_structural(t, 0.0, 9);
    REQUIRE(out.known == t.known);
  }
  SECTION("rows are all-or-nothing on fully-known input") {
    FeatureTable t(500, 6, true);
    const FeatureTable out = mask_structural(t, 0.5, 11);
    for (std::size_t i = 0; i < out.num_nodes(); ++i) {
      std::size_t known = 0;
      for (std::size_t j = 0; j < out.dim(); ++j) known += out.is_known(i, j);
      REQUIRE((known == 0 || known == out.dim()));
    }
  }
  SECTION("row fraction at rate 0.9 over 1e5 nodes within 3 sigma") {
    FeatureTable t(100000, 2, true);
    const FeatureTable out = mask_structural(t, 0.9, 13);
    std::size_t cleared = 0;
    for (std::size_t i = 0; i < out.num_nodes(); ++i)
      if (!out.is_known(i, 0)) ++cleared;
    const double frac = static_cast<double>(cleared) / static_cast<double>(out.num_nodes());
    REQUIRE(frac == Catch::Approx(0.9).margin(0.003));
  }
  SECTION("partially-unknown rows are still eligible (whole row cleared)") {
    FeatureTable t(2000, 4, true);
    FeatureTable partial = mask_uniform(t, 0.5, 17);
    const FeatureTable out = mask_structural(partial, 0.6, 19);
    for (std::size_t i = 0; i < out.num_nodes(); ++i) {
      bool any_known = false;
      for (std::size_t j = 0; j < out.dim(); ++j) any_known |= out.is_known(i, j);
      if (!any_known) continue;
      // surviving rows kept exactly their previous mask
      for (std::size_t j = 0; j < out.dim(); ++j)
        REQUIRE(out.is_known(i, j) == partial.is_known(i, j));
    }
  }
}

TEST_CASE("generate_sbm block structure") {
  SECTION("p_in=1, p_out=0 with 2 classes gives 2 components and homophily 1") {
    SyntheticSpec spec;
    spec.num_nodes = 60;
    spec.num_classes = 2;
    spec.p_in = 1.0;
    spec.p_out = 0.0;
    spec.feature_dim = 4;
    spec.seed = 5;
    const SyntheticDataset ds = generate_sbm(spec);
    REQUIRE(count_components(ds.graph) == 2);
    REQUIRE(homophily_index(ds.graph, ds.labels) == 1.0);
  }
  SECTION("p_in == p_out gives chance-level homophily") {
    SyntheticSpec spec;
    spec.num_nodes = 600;
    spec.num_classes = 3;
    spec.p_in = 0.05;
    spec.p_out = 0.05;
    spec.feature_dim = 2;
    spec.seed = 21;
    const SyntheticDataset ds = generate_sbm(spec);
    // ~9000 label-independent edges; 1/3 +- 3 sigma
    REQUIRE(homophily_index(ds.graph, ds.labels) == Catch::Approx(1.0 / 3.0).margin(0.02));
  }
  SECTION("vanishing noise collapses same-class rows") {
    SyntheticSpec spec;
    spec.num_nodes = 30;
    spec.num_classes = 3;
    spec.p_in = 0.5;
    spec.p_out = 0.1;
    spec.feature_dim = 8;
    spec.noise_sigma = 1e-12;
    spec.seed = 2;
    const SyntheticDataset ds = generate_sbm(spec);
    for (std::size_t i = 0; i < spec.num_nodes; ++i)
      for (std::size_t j = 0; j < spec.num_nodes; ++j) {
        if (ds.labels.labels[i] != ds.labels.labels[j]) continue;
        for (std::size_t c = 0; c < spec.feature_dim; ++c)
          REQUIRE(ds.features.values(i, c) ==
                  Catch::Approx(ds.features.values(j, c)).margin(1e-9));
      }
  }
  SECTION("same seed is bit-identical") {
    SyntheticSpec spec;
    spec.num_nodes = 200;
    spec.seed = 77;
    const SyntheticDataset a = generate_sbm(spec);
    const SyntheticDataset b = generate_sbm(spec);
    REQUIRE(a.graph.neighbors == b.graph.neighbors);
    REQUIRE(a.features.values.data == b.features.values.data);
    REQUIRE(a.labels.labels == b.labels.labels);
    REQUIRE(a.labels.split == b.labels.split);
  }
  SECTION("split is a 40/30/30 stratified partition") {
    SyntheticSpec spec;
    spec.num_nodes = 1500;
    spec.seed = 3;
    const SyntheticDataset ds = generate_sbm(spec);
    const auto train = ds.labels.nodes_in(Split::train);
    const auto val = ds.labels.nodes_in(Split::val);
    const auto test = ds.labels.nodes_in(Split::test);
    REQUIRE(train.size() + val.size() + test.size() == spec.num_nodes);
    REQUIRE(train.size() == 600);
    REQUIRE(val.size() == 450);
    REQUIRE(test.size() == 450);
    // stratified: each class contributes 40% of its members to train
    for (int c = 0; c < spec.num_classes; ++c) {
      std::size_t members = 0, in_train = 0;
      for (std::size_t i = 0; i < spec.num_nodes; ++i) {
        if (ds.labels.labels[i] != c) continue;
        ++members;
        in_train += ds.labels.split[i] == Split::train;
      }
      REQUIRE(in_train == (members * 40) / 100);
    }
  }
}

TEST_CASE("inductive_split") {
  SyntheticSpec spec;
  spec.num_nodes = 300;
  spec.p_in = 0.08;
  spec.p_out = 0.02;
  spec.seed = 4;
  const SyntheticDataset ds = generate_sbm(spec);
  const InductiveSplit split = inductive_split(ds.graph, ds.labels);

  SECTION("train graph is a subgraph with no test-incident edges") {
    REQUIRE(split.train_graph.num_edges() <= split.full_graph.num_edges());
    for (const auto& [u, v] : split.train_graph.undirected_edges()) {
      REQUIRE(split.full_graph.has_edge(u, v));
      REQUIRE(ds.labels.split[u] != Split::test);
      REQUIRE(ds.labels.split[v] != Split::test);
    }
    // and every non-test edge of the full graph survives
    for (const auto& [u, v] : split.full_graph.undirected_edges())
      if (ds.labels.split[u] != Split::test && ds.labels.split[v] != Split::test)
        REQUIRE(split.train_graph.has_edge(u, v));
  }
  SECTION("all-train labels keep the graph unchanged") {
    LabelSet all_train = ds.labels;
    all_train.split.assign(all_train.split.size(), Split::train);
    const InductiveSplit same = inductive_split(ds.graph, all_train);
    REQUIRE(same.train_graph.neighbors == ds.graph.neighbors);
  }
}
