#include <sstream>

#include <gtest/gtest.h>

#include "fixtures.hpp"
#include "json.hpp"
#include "secretsweep/baseline.hpp"
#include "secretsweep/cli.hpp"
#include "secretsweep/ingestion.hpp"
#include "secretsweep/labels.hpp"
#include "secretsweep/model_file.hpp"

using namespace secretsweep;
using fixtures::read_file;
using fixtures::TempDir;
using fixtures::write_file;
using nlohmann::json;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run cli(std::vector<std::string> args) {
  args.insert(args.begin(), "secretsweep");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out;
  std::ostringstream err;
  const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

// Code fixture scanned with the keyword detector only, every finding labeled
// from ground truth.
struct LabeledTree {
  TempDir dir{"cli"};
  std::string config = (dir / "config.json").string();
  std::string tree = (dir / "tree").string();
  std::string baseline = (dir / "baseline.json").string();
  std::string labels = (dir / "labels.jsonl").string();

  explicit LabeledTree(std::uint64_t seed) {
    write_file(config, R"({"detectors": {"enabled": ["keyword"]}})");
    const auto truth = fixtures::write_code_fixture(dir / "tree", seed, 200, 600);
    const auto r = cli({"--config", config, "scan", tree, "--out", baseline});
    EXPECT_EQ(r.code, 0) << r.err;
    LabelStore store(labels);
    for (const auto& f : fixtures::label_code_findings(read_baseline(baseline).all_findings(), truth)) {
      store.append({finding_id(f), f.label, "", "fixture"});
    }
  }
};

json without_timestamps(json j) {
  if (j.is_object()) {
    for (auto it = j.begin(); it != j.end();) {
      const auto& k = it.key();
      if (k.find("_at") != std::string::npos || k == "timestamp" || k == "created") {
        it = j.erase(it);
      } else {
        *it = without_timestamps(*it);
        ++it;
      }
    }
  } else if (j.is_array()) {
    for (auto& v : j) v = without_timestamps(v);
  }
  return j;
}

}  // namespace

TEST(Cli, ScanExitCodes) {
  TempDir dir;
  write_file(dir / "clean/readme.md", "nothing to see\n");
  write_file(dir / "dirty/app.py", "password = \"Xk9mQ2vLr4\"\n");
  EXPECT_EQ(cli({"scan", (dir / "clean").string(), "--fail-on-detect"}).code, 0);
  EXPECT_EQ(cli({"scan", (dir / "dirty").string(), "--fail-on-detect"}).code, 2);
  EXPECT_EQ(cli({"scan", (dir / "dirty").string()}).code, 0);

  const auto missing = cli({"scan", (dir / "nope").string()});
  EXPECT_EQ(missing.code, 1);
  EXPECT_FALSE(missing.err.empty());
  EXPECT_EQ(cli({"scan"}).code, 1);
  EXPECT_EQ(cli({"frobnicate"}).code, 1);
  EXPECT_EQ(cli({"--help"}).code, 0);
}

TEST(Cli, ScanWritesBaselineWithoutPlaintext) {
  TempDir dir;
  write_file(dir / "tree/app.py", "password = \"Xk9mQ2vLr4\"\n");
  const auto stdout_scan = cli({"scan", (dir / "tree").string()});
  EXPECT_EQ(json::parse(stdout_scan.out).at("results").size(), 1u);
  EXPECT_EQ(stdout_scan.out.find("Xk9mQ2vLr4"), std::string::npos);

  const auto out = (dir / "b.json").string();
  EXPECT_EQ(cli({"scan", (dir / "tree").string(), "--out", out, "--keep-plaintext"}).code, 0);
  EXPECT_EQ(read_file(out).find("Xk9mQ2vLr4"), std::string::npos);
  EXPECT_NE(read_file(plaintext_sidecar_path(out)).find("Xk9mQ2vLr4"), std::string::npos);

  const auto diff = cli({"diff", out, out});
  ASSERT_EQ(diff.code, 0) << diff.err;
  EXPECT_TRUE(json::parse(diff.out).at("added").empty());
}

TEST(Cli, TrainEvalRoundTrip) {
  LabeledTree t(21);
  const auto model = (t.dir / "model.json").string();
  const auto train =
      cli({"train", "--kind", "code", "--data", t.baseline, "--labels", t.labels, "--root", t.tree, "--out", model});
  ASSERT_EQ(train.code, 0) << train.err;
  EXPECT_NE(train.out.find("Heuristic detectors"), std::string::npos);
  EXPECT_TRUE(std::holds_alternative<CodeModel>(load_model(model)));

  const auto report = (t.dir / "report.json").string();
  const auto predictions = (t.dir / "pred.jsonl").string();
  const auto eval = cli({"--config", t.config, "eval", "--model", model, "--data", t.baseline, "--labels", t.labels, "--root", t.tree,
                         "--report", report, "--predictions", predictions});
  ASSERT_EQ(eval.code, 0) << eval.err;
  const auto r = json::parse(read_file(report));
  // The heuristic flags every finding, so its recall is exactly one.
  EXPECT_EQ(r.at("heuristic").at("recall"), 1.0);
  EXPECT_NE(eval.out.find("1.00"), std::string::npos);
  std::size_t lines = 0;
  for (char c : read_file(predictions)) lines += c == '\n';
  EXPECT_EQ(lines, read_baseline(t.baseline).size());
}

TEST(Cli, TrainSeedIsDeterministic) {
  LabeledTree t(22);
  const auto a = (t.dir / "a.json").string();
  const auto b = (t.dir / "b.json").string();
  for (const auto& out : {a, b}) {
    const auto r = cli({"train", "--kind", "code", "--data", t.baseline, "--labels", t.labels, "--root", t.tree,
                        "--out", out, "--seed", "9"});
    ASSERT_EQ(r.code, 0) << r.err;
  }
  EXPECT_EQ(without_timestamps(json::parse(read_file(a))), without_timestamps(json::parse(read_file(b))));
}

TEST(Cli, HigherRecallTargetLowersThreshold) {
  LabeledTree t(23);
  double previous = 2.0;
  for (const std::string target : {"0.5", "0.9", "1.0"}) {
    const auto out = (t.dir / ("m" + target + ".json")).string();
    const auto r = cli({"train", "--kind", "code", "--data", t.baseline, "--labels", t.labels, "--root", t.tree,
                        "--out", out, "--target-recall", target});
    ASSERT_EQ(r.code, 0) << r.err;
    const double threshold = json::parse(read_file(out)).at("threshold");
    EXPECT_LE(threshold, previous) << target;
    previous = threshold;
  }
  EXPECT_EQ(cli({"train", "--kind", "code", "--data", t.baseline, "--out", (t.dir / "x.json").string(),
                 "--target-recall", "1.5"})
                .code,
            1);
}

TEST(Cli, EvalWithoutLabelsFails) {
  LabeledTree t(24);
  const auto model = (t.dir / "model.json").string();
  ASSERT_EQ(cli({"train", "--kind", "code", "--data", t.baseline, "--labels", t.labels, "--root", t.tree, "--out",
                 model})
                .code,
            0);
  const auto r = cli({"--config", t.config, "eval", "--model", model, "--data", t.baseline, "--root", t.tree});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("error"), std::string::npos);
}

TEST(Cli, DocsTrainRecordsSynthetic) {
  TempDir dir;
  const auto fixture = fixtures::make_docs_fixture(5, 150, 20);
  const auto rows = (dir / "rows.jsonl").string();
  persist_rows(fixtures::label_docs_rows(fixture), rows);
  const auto model = (dir / "docs.json").string();
  const auto r = cli({"train", "--kind", "docs", "--data", rows, "--synth", "1300", "--out", model});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("synthetic positives 1300"), std::string::npos);
  const auto loaded = load_model(model);
  ASSERT_TRUE(std::holds_alternative<DocsModel>(loaded));
  EXPECT_EQ(std::get<DocsModel>(loaded).metadata.at("synthetic_positives"), 1300);

  const auto eval = cli({"eval", "--model", model, "--data", rows});
  EXPECT_EQ(eval.code, 0) << eval.err;
}

TEST(Cli, RemediateDryRunThenApply) {
  TempDir dir;
  const std::string text = "import os\npassword = \"hunter2xyz\"\n";
  write_file(dir / "tree/app.py", text);
  const auto tree = (dir / "tree").string();
  const auto baseline = (dir / "b.json").string();
  ASSERT_EQ(cli({"scan", tree, "--out", baseline}).code, 0);
  LabelStore store(dir / "labels.jsonl");
  for (const auto& f : read_baseline(baseline).all_findings()) store.append({finding_id(f), Label::kSecret, "", "me"});
  const std::vector<std::string> base = {"remediate", "--baseline", baseline, "--labels",
                                         (dir / "labels.jsonl").string(), "--root", tree};

  auto args = base;
  args.push_back("--dry-run");
  const auto dry = cli(args);
  ASSERT_EQ(dry.code, 0) << dry.err;
  EXPECT_NE(dry.out.find("+password = get_secret(\"password\")"), std::string::npos);
  EXPECT_EQ(read_file(dir / "tree/app.py"), text);

  args = base;
  args.insert(args.end(), {"--manifest", (dir / "manifest.jsonl").string(), "--report", (dir / "r.json").string()});
  const auto applied = cli(args);
  ASSERT_EQ(applied.code, 0) << applied.err;
  EXPECT_EQ(read_file(dir / "tree/app.py"), "import os\npassword = get_secret(\"password\")\n");
  EXPECT_EQ(json::parse(read_file(dir / "r.json")).at("applied"), 1);
  EXPECT_EQ(read_file(dir / "manifest.jsonl").find("hunter2xyz"), std::string::npos);
  EXPECT_EQ(cli({"scan", tree, "--fail-on-detect"}).code, 0);
}

TEST(Cli, IngestFixtures) {
  TempDir dir;
  write_file(dir / "pages/a.html", "<h1>Setup</h1><p>password = Xk9mQ2vL</p><p>Deploy Monday</p>");
  write_file(dir / "pages/b.html", "<p>nothing</p>");
  const auto r = cli({"ingest", "--fixtures", (dir / "pages").string(), "--pages-out",
                      (dir / "pages.jsonl").string(), "--rows-out", (dir / "rows.jsonl").string()});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(load_pages(dir / "pages.jsonl").size(), 2u);
  const auto rows = load_rows(dir / "rows.jsonl");
  EXPECT_FALSE(rows.empty());
  EXPECT_NE(r.out.find("2 pages"), std::string::npos);
  EXPECT_EQ(cli({"ingest"}).code, 1);
}

TEST(Cli, BadConfigIsAnError) {
  TempDir dir;
  write_file(dir / "c.json", "{\"detectors\": {\"base64_threshold\": -1}}");
  write_file(dir / "tree/a.txt", "x\n");
  EXPECT_EQ(cli({"--config", (dir / "c.json").string(), "scan", (dir / "tree").string()}).code, 1);
  write_file(dir / "broken.json", "{");
  EXPECT_EQ(cli({"--config", (dir / "broken.json").string(), "scan", (dir / "tree").string()}).code, 1);
}
