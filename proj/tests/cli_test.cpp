#include <regex>

#include <gtest/gtest.h>

#include "cli_fixture.hpp"
#include "infwalk/generators.hpp"

using namespace clifix;
using nlohmann::json;

namespace {

const std::regex kErrorLine("^infwalk: error=[a-z_]+(\\.[a-z_]+)* .+\n$");

// Preprocessed 3-block SBM with labels, shared by the downstream commands.
struct Pipeline {
  Scratch dir{"pipeline"};
  fs::path graph = dir / "g";

  Pipeline() {
    const auto data = infwalk::stochastic_block_model({12, 12, 12}, 0.5, 0.05, 4);
    spit(dir / "edges.txt", edge_text(data.graph));
    std::ostringstream labels;
    infwalk::write_labels(labels, data);
    spit(dir / "labels.txt", labels.str());
    const auto r = run({"preprocess", "--edges", (dir / "edges.txt").string(), "--labels", (dir / "labels.txt").string(),
                        "--out", graph.string()});
    EXPECT_EQ(r.status, 0) << r.err;
  }
};

}  // namespace

TEST(Cli, PreprocessTriangle) {
  Scratch s("pre");
  spit(s / "k3.txt", "a b\nb c\n# comment\nc a\n");
  const auto r = run({"preprocess", "--edges", (s / "k3.txt").string(), "--out", (s / "out").string()});
  ASSERT_EQ(r.status, 0) << r.err;
  const auto stats = json::parse(slurp(s / "out" / "stats.json"));
  EXPECT_EQ(stats["nodes"], 3);
  EXPECT_EQ(stats["edges"], 3);
  EXPECT_DOUBLE_EQ(stats["volume"].get<double>(), 6.0);
  EXPECT_EQ(slurp(s / "out" / "names.txt"), "0 a\n1 b\n2 c\n");
  const auto manifest = json::parse(slurp(s / "out" / "manifest.json"));
  EXPECT_EQ(manifest["command"], "preprocess");
  EXPECT_EQ(manifest["version"], infwalk::kVersion);
  EXPECT_TRUE(manifest.contains("duration_seconds"));
}

TEST(Cli, PreprocessKeepsLargestComponent) {
  Scratch s("lcc");
  spit(s / "e.txt", "0 1\n1 2\n2 0\n2 3\n5 6\n");
  const auto r = run({"preprocess", "--edges", (s / "e.txt").string(), "--out", (s / "out").string()});
  ASSERT_EQ(r.status, 0) << r.err;
  const auto stats = json::parse(slurp(s / "out" / "stats.json"));
  EXPECT_EQ(stats["nodes"], 4);
  EXPECT_EQ(stats["input_nodes"], 6);
}

TEST(Cli, BipartiteInputFailsCleanly) {
  Scratch s("bip");
  spit(s / "c4.txt", "0 1\n1 2\n2 3\n3 0\n");
  const auto r = run({"preprocess", "--edges", (s / "c4.txt").string(), "--out", (s / "out").string()});
  EXPECT_EQ(r.status, 3);
  EXPECT_TRUE(std::regex_match(r.err, kErrorLine)) << r.err;
  EXPECT_NE(r.err.find("error=graph.bipartite"), std::string::npos) << r.err;
  EXPECT_FALSE(fs::exists(s / "out"));
}

TEST(Cli, MalformedInputIsValidationError) {
  Scratch s("bad");
  spit(s / "e.txt", "0 1\n1 2 heavy\n");
  const auto r = run({"preprocess", "--edges", (s / "e.txt").string(), "--out", (s / "out").string()});
  EXPECT_EQ(r.status, 3);
  EXPECT_NE(r.err.find("line 2"), std::string::npos) << r.err;
  EXPECT_TRUE(std::regex_match(r.err, kErrorLine)) << r.err;
}

TEST(Cli, MissingFileIsIoError) {
  Scratch s("io");
  const auto r = run({"preprocess", "--edges", (s / "absent.txt").string(), "--out", (s / "out").string()});
  EXPECT_EQ(r.status, 5);
  EXPECT_TRUE(std::regex_match(r.err, kErrorLine)) << r.err;
}

TEST(Cli, UsageErrors) {
  EXPECT_EQ(run({}).status, 2);
  EXPECT_EQ(run({"frobnicate"}).status, 2);
  EXPECT_EQ(run({"spectrum", "--graph", "x"}).status, 2);
  const auto r = run({"embed", "--graph", "g", "--d", "not-a-number", "--out", "o"});
  EXPECT_EQ(r.status, 2);
  EXPECT_TRUE(std::regex_match(r.err, kErrorLine)) << r.err;
  EXPECT_EQ(run({"--version"}).status, 0);
}

TEST(Cli, SpectrumTriangle) {
  Scratch s("spectrum");
  spit(s / "k3.txt", "0 1\n1 2\n2 0\n");
  ASSERT_EQ(run({"preprocess", "--edges", (s / "k3.txt").string(), "--out", (s / "g").string()}).status, 0);
  const auto r = run({"spectrum", "--graph", (s / "g").string(), "--out", (s / "spectrum.csv").string()});
  ASSERT_EQ(r.status, 0) << r.err;
  std::istringstream csv(slurp(s / "spectrum.csv"));
  std::string line;
  std::getline(csv, line);
  EXPECT_EQ(line, "index,eigenvalue");
  std::vector<double> values;
  while (std::getline(csv, line)) values.push_back(std::stod(line.substr(line.find(',') + 1)));
  ASSERT_EQ(values.size(), 3u);
  EXPECT_NEAR(values[0], 1.0, 1e-12);
  EXPECT_NEAR(values[1], -0.5, 1e-12);
  EXPECT_NEAR(values[2], -0.5, 1e-12);
  EXPECT_TRUE(fs::exists(s / "spectrum.manifest.json"));
}

TEST(Cli, PmiCompareReport) {
  Pipeline p;
  const auto out = p.dir / "cmp.json";
  const auto r = run({"pmi-compare", "--graph", p.graph.string(), "--T", "10", "--out", out.string()});
  ASSERT_EQ(r.status, 0) << r.err;
  const auto report = json::parse(slurp(out));
  for (const char* key : {"relative_frobenius_error", "ramped_disagreement_fraction", "T", "ramp"})
    EXPECT_TRUE(report.contains(key)) << key;
  EXPECT_EQ(report["T"], 10);
  EXPECT_EQ(report["ramp"], "R1");
  EXPECT_EQ(run({"pmi-compare", "--graph", p.graph.string(), "--T", "10", "--ramp", "r2", "--out", out.string()}).status, 2);
}

TEST(Cli, EmbedAndEvaluate) {
  Pipeline p;
  const auto emb = p.dir / "iw.txt";
  auto r = run({"embed", "--graph", p.graph.string(), "--d", "4", "--out", emb.string(), "--binary"});
  ASSERT_EQ(r.status, 0) << r.err;
  EXPECT_EQ(fs::file_size(p.dir / "iw.txt.bin"), 36u * 4u * 8u);
  EXPECT_TRUE(fs::exists(p.dir / "iw.txt.bin.meta"));
  std::istringstream text(slurp(emb));
  EXPECT_EQ(infwalk::read_embedding_text(text).vectors.rows(), 36);

  const auto csv = p.dir / "eval.csv";
  r = run({"evaluate", "--embedding", emb.string(), "--labels", (p.graph / "labels.txt").string(), "--ratios", "0.3,0.7",
           "--repeats", "2", "--seed", "1", "--out", csv.string()});
  ASSERT_EQ(r.status, 0) << r.err;
  std::istringstream rows(slurp(csv));
  std::string line;
  std::getline(rows, line);
  EXPECT_EQ(line, "method,ratio,repeat_count,micro_f1_mean,micro_f1_std,macro_f1_mean,macro_f1_std");
  std::getline(rows, line);
  EXPECT_EQ(line.rfind("iw,0.3", 0), 0u) << line;
  EXPECT_TRUE(fs::exists(p.dir / "eval.json"));
  EXPECT_TRUE(fs::exists(p.dir / "eval.manifest.json"));
}

TEST(Cli, EmbedDimensionTooLarge) {
  Pipeline p;
  const auto before = p.dir.files();
  const auto r = run({"embed", "--graph", p.graph.string(), "--d", "37", "--out", (p.dir / "big.txt").string()});
  EXPECT_EQ(r.status, 2);
  EXPECT_NE(r.err.find("error=config.dimension"), std::string::npos) << r.err;
  EXPECT_EQ(p.dir.files(), before);
}

TEST(Cli, FailedRunLeavesNoPartialOutputs) {
  Scratch s("partial");
  spit(s / "e.txt", edge_text(infwalk::random_walkable_graph(120, 0.08, 9, false)));
  ASSERT_EQ(run({"preprocess", "--edges", (s / "e.txt").string(), "--out", (s / "g").string()}).status, 0);
  const auto before = s.files();
  // the CSV export refuses n > 100 after the binary and sidecars are staged
  const auto r = run({"pmi-empirical", "--graph", (s / "g").string(), "--T", "2", "--gamma", "1", "--len", "5",
                      "--out", (s / "emp.bin").string(), "--csv"});
  EXPECT_NE(r.status, 0);
  EXPECT_TRUE(std::regex_match(r.err, kErrorLine)) << r.err;
  EXPECT_EQ(s.files(), before);
}

TEST(Cli, UnwritableOutputIsIoError) {
  Pipeline p;
  spit(p.dir / "blocker", "");
  const auto r = run({"spectrum", "--graph", p.graph.string(), "--out", (p.dir / "blocker" / "s.csv").string()});
  EXPECT_EQ(r.status, 5) << r.err;
}

TEST(Cli, PmiEmpiricalOutputs) {
  Scratch s("emp");
  spit(s / "k3.txt", "0 1\n1 2\n2 0\n");
  ASSERT_EQ(run({"preprocess", "--edges", (s / "k3.txt").string(), "--out", (s / "g").string()}).status, 0);
  const auto out = s / "emp.bin";
  const auto r = run({"pmi-empirical", "--graph", (s / "g").string(), "--T", "1", "--gamma", "2000", "--len", "20",
                      "--seed", "3", "--out", out.string(), "--csv"});
  ASSERT_EQ(r.status, 0) << r.err;
  EXPECT_EQ(fs::file_size(out), 72u);
  const auto dev = json::parse(slurp(s / "emp.bin.deviation.json"));
  EXPECT_LT(dev["max_abs_deviation"].get<double>(), 0.1);
  EXPECT_TRUE(fs::exists(s / "emp.bin.csv"));
  EXPECT_NE(slurp(s / "emp.bin.meta").find("n=3\n"), std::string::npos) << slurp(s / "emp.bin.meta");
}

TEST(Cli, ReplayIsBitIdentical) {
  Pipeline p;
  struct Case {
    std::vector<std::string> args;
    std::string primary, manifest, replayed;
  };
  const std::string d = p.dir.root().string() + "/";
  const std::vector<Case> cases{
      {{"spectrum", "--graph", p.graph.string(), "--out", d + "s.csv"}, "s.csv", "s.manifest.json", "s2.csv"},
      {{"pmi-compare", "--graph", p.graph.string(), "--T", "5", "--ramp", "reps", "--out", d + "c.json"},
       "c.json", "c.manifest.json", "c2.json"},
      {{"pmi-empirical", "--graph", p.graph.string(), "--T", "3", "--gamma", "20", "--len", "10", "--seed", "7", "--out",
        d + "e.bin"},
       "e.bin", "e.bin.manifest.json", "e2.bin"},
      {{"embed", "--graph", p.graph.string(), "--method", "binlap", "--q", "0.8", "--d", "5", "--out", d + "b.txt"},
       "b.txt", "b.txt.manifest.json", "b2.txt"},
      {{"evaluate", "--embedding", d + "b.txt", "--labels", (p.graph / "labels.txt").string(), "--ratios", "0.5",
        "--repeats", "2", "--out", d + "v.csv"},
       "v.csv", "v.manifest.json", "v2.csv"},
  };
  for (const auto& c : cases) {
    auto r = run(c.args);
    ASSERT_EQ(r.status, 0) << c.args[0] << ": " << r.err;
    r = run({"replay", "--manifest", d + c.manifest, "--out", d + c.replayed});
    ASSERT_EQ(r.status, 0) << c.args[0] << ": " << r.err;
    EXPECT_EQ(slurp(d + c.primary), slurp(d + c.replayed)) << c.args[0];
  }
  // replaying in place reproduces the same bytes
  const auto before = slurp(d + "b.txt");
  ASSERT_EQ(run({"replay", "--manifest", d + "b.txt.manifest.json"}).status, 0);
  EXPECT_EQ(slurp(d + "b.txt"), before);

  const auto pre_manifest = p.graph / "manifest.json";
  ASSERT_EQ(run({"replay", "--manifest", pre_manifest.string(), "--out", d + "g2"}).status, 0);
  for (const char* f : {"edges.txt", "names.txt", "labels.txt", "stats.json"})
    EXPECT_EQ(slurp(p.graph / f), slurp(d + "g2/" + f)) << f;
}

TEST(Cli, ReplayRejectsMalformedManifest) {
  Scratch s("replay");
  spit(s / "m.json", "{not json");
  EXPECT_EQ(run({"replay", "--manifest", (s / "m.json").string()}).status, 3);
  spit(s / "m.json", "{\"argv\": 5}");
  EXPECT_EQ(run({"replay", "--manifest", (s / "m.json").string()}).status, 3);
}
