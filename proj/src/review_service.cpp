#include "secretsweep/review_service.hpp"


#include <algorithm>
#include <fstream>
#include <sstream>

#include "secretsweep/error.hpp"
#include "secretsweep/pipeline.hpp"

// Last: it pulls in <resolv.h>, whose _res macro breaks Eigen headers.
#include <httplib.h>

namespace fs = std::filesystem;
using nlohmann::json;

namespace secretsweep {

namespace {

constexpr std::size_t kContextLines = 3;
constexpr std::size_t kMaxPageSize = 1000;

json error_body(const std::string& message) { return json{{"error", message}}; }

}  // namespace

ReviewService::ReviewService(ReviewOptions options) : options_(std::move(options)) {
  Baseline b = read_baseline(options_.baseline_path);
  recover_candidates(b, options_.root, options_.detectors);
  for (auto& f : b.all_findings()) {
    Entry e{std::move(f), ""};
    e.id = finding_id(e.finding);
    index_.emplace(e.id, entries_.size());
    entries_.push_back(std::move(e));
  }
  store_ = LabelStore(options_.labels_path);
  if (options_.model_path && fs::exists(*options_.model_path)) {
    auto m = load_model(*options_.model_path);
    if (!std::holds_alternative<CodeModel>(m)) {
      throw Error("the review service scores code findings; " + options_.model_path->string() +
                  " is a docs model");
    }
    model_ = std::get<CodeModel>(std::move(m));
  }
}

Label ReviewService::current_label(const Entry& e) const {
  if (auto r = store_.latest(e.id)) return r->label;
  return e.finding.label;
}

json ReviewService::finding_view(const Entry& e) const {
  const auto& f = e.finding;
  json context = json::array();
  try {
    const auto lines = read_lines(options_.root / f.path);
    const std::size_t lo = f.line_number > kContextLines ? f.line_number - kContextLines : 1;
    const std::size_t hi = std::min(lines.size(), f.line_number + kContextLines);
    for (std::size_t n = lo; n <= hi; ++n) {
      context.push_back(json{{"line_number", n}, {"text", lines[n - 1]}});
    }
  } catch (const IoError&) {
    // Context is best effort; the file may have moved since the scan.
  }
  json score = nullptr;
  if (model_ && !f.candidate.empty()) {
    score = round4(model_->score(f));
  } else if (f.score) {
    score = round4(*f.score);
  }
  return json{{"finding_id", e.id},
              {"path", f.path},
              {"line_number", f.line_number},
              {"context", context},
              {"detector", to_string(f.detector)},
              {"entropy_bits", round4(f.entropy_bits)},
              {"score", score},
              {"label", to_string(current_label(e))}};
}

ReviewService::Response ReviewService::list_findings(const std::string& status, std::size_t offset,
                                                     std::size_t limit) const {
  if (status != "pending" && status != "labeled" && !status.empty()) {
    return {400, error_body("status must be pending or labeled")};
  }
  limit = std::min(limit, kMaxPageSize);
  std::lock_guard lock(mutex_);
  std::vector<const Entry*> selected;
  for (const auto& e : entries_) {
    const bool labeled = current_label(e) != Label::kUnlabeled;
    if (status.empty() || (status == "labeled") == labeled) selected.push_back(&e);
  }
  json items = json::array();
  for (std::size_t i = offset; i < selected.size() && i < offset + limit; ++i) {
    items.push_back(finding_view(*selected[i]));
  }
  return {200, json{{"total", selected.size()}, {"offset", offset}, {"limit", limit}, {"findings", items}}};
}

ReviewService::Response ReviewService::post_label(const std::string& body) {
  json j;
  try {
    j = json::parse(body);
  } catch (const json::exception&) {
    return {400, error_body("body is not valid JSON")};
  }
  if (!j.is_object() || !j.contains("finding_id") || !j["finding_id"].is_string()) {
    return {400, error_body("finding_id is required")};
  }
  if (!j.contains("label") || !j["label"].is_string() ||
      (j["label"] != "secret" && j["label"] != "not_secret")) {
    return {400, error_body("label must be secret or not_secret")};
  }
  if (j.contains("annotator") && !j["annotator"].is_string()) {
    return {400, error_body("annotator must be a string")};
  }
  const auto id = j["finding_id"].get<std::string>();
  std::lock_guard lock(mutex_);
  if (!index_.contains(id)) return {404, error_body("unknown finding_id " + id)};
  LabelRecord r;
  r.finding_id = id;
  r.label = parse_label(j["label"].get<std::string>());
  r.annotator = j.value("annotator", std::string{});
  try {
    store_.append(r);
  } catch (const IoError& e) {
    return {500, error_body(e.what())};
  }
  return {200, to_json(*store_.latest(id))};
}

ReviewService::Response ReviewService::stats() const {
  std::lock_guard lock(mutex_);
  std::size_t pending = 0;
  std::size_t secrets = 0;
  std::size_t not_secrets = 0;
  for (const auto& e : entries_) {
    switch (current_label(e)) {
      case Label::kUnlabeled:
        ++pending;
        break;
      case Label::kSecret:
        ++secrets;
        break;
      case Label::kNotSecret:
        ++not_secrets;
        break;
    }
  }
  json body{{"pending", pending},
            {"labeled", secrets + not_secrets},
            {"secrets", secrets},
            {"not_secrets", not_secrets},
            {"current_metrics", current_metrics_ ? to_json(*current_metrics_) : json(nullptr)}};
  return {200, body};
}

ReviewService::Response ReviewService::retrain() {
  std::lock_guard lock(mutex_);
  std::vector<Finding> labeled;
  bool pos = false;
  bool neg = false;
  for (const auto& e : entries_) {
    const Label l = current_label(e);
    if (l == Label::kUnlabeled || e.finding.candidate.empty()) continue;
    Finding f = e.finding;
    f.label = l;
    pos |= l == Label::kSecret;
    neg |= l == Label::kNotSecret;
    labeled.push_back(std::move(f));
  }
  if (!pos || !neg) {
    return {409, error_body("retraining needs at least one secret and one not_secret label")};
  }
  CodeTrainingResult result;
  try {
    result = train_code_pipeline(labeled, options_.train);
  } catch (const TrainingError& e) {
    return {409, error_body(std::string("not enough labels to retrain: ") + e.what())};
  }

  json before = nullptr;
  if (model_ && !result.split.test.empty()) {
    ConfusionCounts c;
    for (auto i : result.split.test) {
      const bool p = model_->score(labeled[i]) >= model_->threshold();
      const bool g = labeled[i].label == Label::kSecret;
      (g ? (p ? c.tp : c.fn) : (p ? c.fp : c.tn))++;
    }
    before = to_json(compute_metrics(c));
  }
  model_ = result.model;
  current_metrics_ = result.test;
  if (options_.model_path) save_model(*options_.model_path, *model_);
  return {200, json{{"before", before},
                    {"after", to_json(result.test)},
                    {"threshold", result.threshold.threshold},
                    {"held_out", result.split.test.size()}}};
}

void ReviewService::mount(httplib::Server& server) {
  auto reply = [](httplib::Response& res, const Response& r) {
    res.status = r.status;
    res.set_content(r.body.dump(), "application/json");
  };
  server.Get("/api/findings", [this, reply](const httplib::Request& req, httplib::Response& res) {
    std::size_t offset = 0;
    std::size_t limit = 50;
    try {
      if (req.has_param("offset")) offset = std::stoul(req.get_param_value("offset"));
      if (req.has_param("limit")) limit = std::stoul(req.get_param_value("limit"));
    } catch (const std::exception&) {
      reply(res, {400, error_body("offset and limit must be non-negative integers")});
      return;
    }
    reply(res, list_findings(req.get_param_value("status"), offset, limit));
  });
  server.Post("/api/labels", [this, reply](const httplib::Request& req, httplib::Response& res) {
    reply(res, post_label(req.body));
  });
  server.Get("/api/stats", [this, reply](const httplib::Request&, httplib::Response& res) {
    reply(res, stats());
  });
  server.Post("/api/retrain", [this, reply](const httplib::Request&, httplib::Response& res) {
    reply(res, retrain());
  });

  std::error_code ec;
  if (!options_.ui_dir || !fs::is_directory(*options_.ui_dir, ec)) return;
  const fs::path ui = *options_.ui_dir;
  if (fs::is_directory(ui / "assets", ec)) server.set_mount_point("/assets", (ui / "assets").string());
  server.Get("/", [ui](const httplib::Request&, httplib::Response& res) {
    std::ifstream in(ui / "index.html", std::ios::binary);
    if (!in) {
      res.status = 404;
      return;
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    res.set_content(ss.str(), "text/html");
  });
}

}  // namespace secretsweep
