#include "secretsweep/cli.hpp"

#include <CLI11.hpp>

#include <csignal>
#include <fstream>
#include <map>
#include <sstream>

#include "json.hpp"
#include "secretsweep/baseline.hpp"
#include "secretsweep/error.hpp"
#include "secretsweep/ingestion.hpp"
#include "secretsweep/labels.hpp"
#include "secretsweep/model_file.hpp"
#include "secretsweep/pipeline.hpp"
#include "secretsweep/remediation.hpp"
#include "secretsweep/review_service.hpp"

// Last: it pulls in <resolv.h>, whose _res macro breaks Eigen headers.
#include <httplib.h>

namespace fs = std::filesystem;
using nlohmann::json;

namespace secretsweep {

namespace {

constexpr int kExitOk = 0;
constexpr int kExitError = 1;
constexpr int kExitFindings = 2;

json read_json_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw IoError("cannot read " + p.string());
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw FormatError(p.string() + ": " + e.what());
  }
}

void write_text_file(const fs::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + p.string());
  out << text;
  if (!out) throw IoError("write failed for " + p.string());
}

struct FileConfig {
  DetectorConfig detectors;
  TrainConfig train;
};

// {"detectors": {...}, "train": {...}}; both sections optional.
FileConfig load_config(const std::string& path) {
  FileConfig c;
  if (path.empty()) return c;
  const json j = read_json_file(path);
  if (j.contains("detectors")) {
    const auto& d = j.at("detectors");
    c.detectors.keyword_denylist = d.value("keyword_denylist", c.detectors.keyword_denylist);
    c.detectors.placeholders = d.value("placeholders", c.detectors.placeholders);
    c.detectors.base64_threshold = d.value("base64_threshold", c.detectors.base64_threshold);
    c.detectors.hex_threshold = d.value("hex_threshold", c.detectors.hex_threshold);
    c.detectors.min_candidate_len = d.value("min_candidate_len", c.detectors.min_candidate_len);
    if (d.contains("enabled")) {
      c.detectors.enabled.clear();
      for (const auto& name : d.at("enabled")) c.detectors.enabled.insert(parse_detector(name.get<std::string>()));
    }
    c.detectors.validate();
  }
  if (j.contains("train")) c.train = train_config_from_json(j.at("train"));
  return c;
}

// Baseline findings with candidates restored (sidecar first, then the tree)
// and the latest labels from the store applied.
std::vector<Finding> load_labeled_findings(const fs::path& baseline_path, const std::string& labels_path,
                                           const fs::path& root, const DetectorConfig& config) {
  Baseline b = read_baseline(baseline_path);
  const auto sidecar = plaintext_sidecar_path(baseline_path);
  if (fs::exists(sidecar)) {
    std::map<std::string, std::string> known;
    for (const auto& f : read_baseline(sidecar).all_findings()) known[finding_id(f)] = f.candidate;
    for (auto& [_, list] : b.results) {
      for (auto& f : list) {
        if (auto it = known.find(finding_id(f)); it != known.end()) f.candidate = it->second;
      }
    }
  }
  recover_candidates(b, root, config);
  auto findings = b.all_findings();
  if (!labels_path.empty()) {
    const auto labels = replay_labels(labels_path);
    for (auto& f : findings) {
      if (auto it = labels.find(finding_id(f)); it != labels.end()) f.label = it->second.label;
    }
  }
  return findings;
}

std::vector<Row> load_rows_corpus(const fs::path& path) {
  auto rows = load_rows(path);
  apply_weak_labels(rows);
  return rows;
}

volatile std::sig_atomic_t g_stop = 0;
httplib::Server* g_server = nullptr;
extern "C" void on_signal(int) {
  g_stop = 1;
  if (g_server != nullptr) g_server->stop();
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"secretsweep: detect, triage and remediate secrets in code and documents"};
  app.require_subcommand(1);
  std::string config_path;
  app.add_option("--config", config_path, "JSON config with optional detectors/train sections");

  // scan
  auto* scan = app.add_subcommand("scan", "Scan a tree and write a baseline");
  std::string scan_root;
  std::string scan_out;
  bool keep_plaintext = false;
  bool fail_on_detect = false;
  scan->add_option("root", scan_root, "Directory to scan")->required();
  scan->add_option("--out", scan_out, "Baseline path (stdout when omitted)");
  scan->add_flag("--keep-plaintext", keep_plaintext, "Also write a plaintext candidate sidecar");
  scan->add_flag("--fail-on-detect", fail_on_detect, "Exit 2 when any finding exists");

  // diff
  auto* diff = app.add_subcommand("diff", "Compare two baselines and carry labels forward");
  std::string diff_old;
  std::string diff_new;
  std::string diff_out;
  diff->add_option("old", diff_old)->required();
  diff->add_option("new", diff_new)->required();
  diff->add_option("--out", diff_out, "Write the new baseline with carried labels");

  // train
  auto* train = app.add_subcommand("train", "Train a code or docs model");
  std::string kind;
  std::string train_data;
  std::string train_labels;
  std::string train_out;
  std::string train_root = ".";
  std::size_t synth = 0;
  std::optional<double> target_recall;
  std::optional<std::uint64_t> seed;
  train->add_option("--kind", kind)->required()->check(CLI::IsMember({"code", "docs"}));
  train->add_option("--data", train_data, "Baseline (code) or rows JSONL (docs)")->required();
  train->add_option("--labels", train_labels, "Label store JSONL (code)");
  train->add_option("--root", train_root, "Scanned tree, used to recover candidates (code)");
  train->add_option("--synth", synth, "Synthetic secret rows added to the train slice (docs)");
  train->add_option("--out", train_out, "Model path")->required();
  train->add_option("--target-recall", target_recall);
  train->add_option("--seed", seed);

  // eval
  auto* eval = app.add_subcommand("eval", "Compare a model against the heuristic detectors");
  std::string eval_model;
  std::string eval_data;
  std::string eval_labels;
  std::string eval_root = ".";
  std::string eval_report;
  std::string eval_predictions;
  eval->add_option("--model", eval_model)->required();
  eval->add_option("--data", eval_data)->required();
  eval->add_option("--labels", eval_labels);
  eval->add_option("--root", eval_root);
  eval->add_option("--report", eval_report, "Report JSON path");
  eval->add_option("--predictions", eval_predictions, "Per-item JSONL path");

  // remediate
  auto* rem = app.add_subcommand("remediate", "Rewrite confirmed secrets into vault lookups");
  std::string rem_baseline;
  std::string rem_labels;
  std::string rem_recipes;
  std::string rem_root = ".";
  std::string rem_manifest = "vault_manifest.jsonl";
  std::string rem_report = "remediation_report.json";
  bool dry_run = false;
  rem->add_option("--baseline", rem_baseline)->required();
  rem->add_option("--labels", rem_labels);
  rem->add_option("--recipes", rem_recipes, "Recipe catalog JSON (default catalog when omitted)");
  rem->add_option("--root", rem_root);
  rem->add_option("--manifest", rem_manifest);
  rem->add_option("--report", rem_report);
  rem->add_flag("--dry-run", dry_run);

  // serve
  auto* serve = app.add_subcommand("serve", "Run the review API");
  std::string serve_baseline;
  std::string serve_labels = "labels.jsonl";
  std::string serve_model;
  std::string serve_root = ".";
  std::string serve_ui;
  std::string host = "127.0.0.1";
  int port = 8080;
  serve->add_option("--baseline", serve_baseline)->required();
  serve->add_option("--labels", serve_labels);
  serve->add_option("--model", serve_model);
  serve->add_option("--root", serve_root);
  serve->add_option("--ui-dir", serve_ui);
  serve->add_option("--host", host);
  serve->add_option("--port", port);

  // ingest
  auto* ingest = app.add_subcommand("ingest", "Fetch or load pages and write the corpus");
  std::string base_url;
  std::string fixtures;
  std::string pages_out;
  std::string rows_out;
  ConnectorConfig connector;
  ingest->add_option("--base-url", base_url);
  ingest->add_option("--token-env", connector.auth_token_env, "Variable holding the bearer token");
  ingest->add_option("--page-size", connector.page_size);
  ingest->add_option("--max-retries", connector.max_retries);
  ingest->add_option("--timeout", connector.timeout_seconds);
  ingest->add_option("--fixtures", fixtures, "Directory of *.html pages instead of the API");
  ingest->add_option("--pages-out", pages_out);
  ingest->add_option("--rows-out", rows_out);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitError;
  }

  try {
    FileConfig cfg = load_config(config_path);
    if (target_recall) cfg.train.target_recall = *target_recall;
    if (seed) cfg.train.seed = *seed;
    cfg.train.validate();

    if (*scan) {
      const auto report = scan_tree(scan_root, cfg.detectors);
      if (scan_out.empty()) {
        out << dump_baseline(report.baseline);
      } else {
        write_baseline(scan_out, report.baseline);
        if (keep_plaintext) write_baseline(plaintext_sidecar_path(scan_out), report.baseline, true);
        out << "scanned " << report.files_scanned << " files, " << report.baseline.size()
            << " findings, " << report.binary_skipped << " binary skipped\n";
      }
      if (report.warnings > 0) err << "warning: " << report.warnings << " unreadable entries skipped\n";
      return fail_on_detect && report.baseline.size() > 0 ? kExitFindings : kExitOk;
    }

    if (*diff) {
      const Baseline old_b = read_baseline(diff_old);
      Baseline new_b = read_baseline(diff_new);
      const auto d = diff_baselines(old_b, new_b);
      json summary{{"added", json::array()}, {"removed", json::array()}};
      for (const auto& f : d.added) summary["added"].push_back({{"path", f.path}, {"line", f.line_number}, {"detector", to_string(f.detector)}});
      for (const auto& f : d.removed) summary["removed"].push_back({{"path", f.path}, {"line", f.line_number}, {"detector", to_string(f.detector)}});
      out << summary.dump(2) << "\n";
      if (!diff_out.empty()) write_baseline(diff_out, new_b);
      return kExitOk;
    }

    if (*train) {
      if (kind == "code") {
        auto findings = load_labeled_findings(train_data, train_labels, train_root, cfg.detectors);
        std::vector<Finding> labeled;
        for (auto& f : findings) {
          if (f.label != Label::kUnlabeled && !f.candidate.empty()) labeled.push_back(std::move(f));
        }
        auto result = train_code_pipeline(labeled, cfg.train);
        save_model(train_out, result.model);
        if (result.threshold.warning) err << "warning: recall target reachable only by flagging every item\n";
        out << "threshold " << result.threshold.threshold << "\n"
            << format_comparison_table(compute_metrics({result.test.counts.tp + result.test.counts.fn,
                                                        result.test.counts.fp + result.test.counts.tn, 0, 0}),
                                       result.test);
      } else {
        const auto rows = load_rows_corpus(train_data);
        auto result = train_docs_pipeline(rows, synth, default_secret_catalog(), cfg.train);
        save_model(train_out, result.model);
        if (result.threshold.warning) err << "warning: recall target reachable only by flagging every item\n";
        out << "threshold " << result.threshold.threshold << ", synthetic positives "
            << result.synthetic_positives << "\n"
            << format_comparison_table(compute_metrics({result.test.counts.tp + result.test.counts.fn,
                                                        result.test.counts.fp + result.test.counts.tn, 0, 0}),
                                       result.test);
      }
      return kExitOk;
    }

    if (*eval) {
      const auto model = load_model(eval_model);
      Evaluation e;
      if (const auto* code = std::get_if<CodeModel>(&model)) {
        const auto findings = load_labeled_findings(eval_data, eval_labels, eval_root, cfg.detectors);
        e = evaluate_code_model(*code, findings);
      } else {
        const auto rows = load_rows_corpus(eval_data);
        e = evaluate_docs_model(std::get<DocsModel>(model), rows);
      }
      out << format_comparison_table(e.heuristic, e.model);
      if (!eval_report.empty()) write_text_file(eval_report, to_json(e).dump(2) + "\n");
      if (!eval_predictions.empty()) write_text_file(eval_predictions, predictions_to_jsonl(e.predictions));
      return kExitOk;
    }

    if (*rem) {
      const auto findings = load_labeled_findings(rem_baseline, rem_labels, rem_root, cfg.detectors);
      const auto recipes = rem_recipes.empty() ? default_recipes() : recipes_from_json(read_json_file(rem_recipes));
      const auto plan = plan_remediation(findings, recipes, rem_root, cfg.detectors);
      const auto report = apply_patches(rem_root, plan.patches, dry_run);
      out << report.diff;
      for (const auto& f : plan.unremediated) {
        err << "unremediated: " << f.path << ":" << f.line_number << " (" << to_string(f.detector) << ")\n";
      }
      if (!dry_run) {
        write_text_file(rem_manifest, manifest_to_jsonl(emit_vault_manifest(plan.patches)));
        json r = to_json(report);
        r["unremediated"] = plan.unremediated.size();
        r["already_remediated"] = plan.already_remediated;
        write_text_file(rem_report, r.dump(2) + "\n");
      }
      return kExitOk;
    }

    if (*serve) {
      ReviewOptions opts;
      opts.baseline_path = serve_baseline;
      opts.labels_path = serve_labels;
      opts.root = serve_root;
      if (!serve_model.empty()) opts.model_path = serve_model;
      if (!serve_ui.empty()) opts.ui_dir = serve_ui;
      opts.detectors = cfg.detectors;
      opts.train = cfg.train;
      ReviewService service(opts);
      httplib::Server server;
      service.mount(server);
      g_server = &server;
      std::signal(SIGINT, on_signal);
      std::signal(SIGTERM, on_signal);
      out << "listening on http://" << host << ":" << port << std::endl;
      const bool ok = server.listen(host, port);
      g_server = nullptr;
      if (!ok && g_stop == 0) throw IoError("cannot listen on " + host + ":" + std::to_string(port));
      return kExitOk;
    }

    if (*ingest) {
      std::vector<Page> pages;
      if (!fixtures.empty()) {
        pages = load_fixture_dir(fixtures);
      } else if (!base_url.empty()) {
        connector.base_url = base_url;
        pages = fetch_pages(connector);
      } else {
        throw Error("ingest needs --fixtures or --base-url");
      }
      if (!pages_out.empty()) persist_pages(pages, pages_out);
      std::size_t n_rows = 0;
      if (!rows_out.empty()) {
        std::vector<Row> rows;
        for (const auto& p : pages) {
          auto r = page_to_rows(p);
          rows.insert(rows.end(), std::make_move_iterator(r.begin()), std::make_move_iterator(r.end()));
        }
        n_rows = rows.size();
        persist_rows(rows, rows_out);
      }
      out << pages.size() << " pages, " << n_rows << " rows\n";
      return kExitOk;
    }
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitError;
  }
  return kExitError;
}

}  // namespace secretsweep
