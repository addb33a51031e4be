#include "secretsweep/model_file.hpp"

#include <fstream>
#include <sstream>

#include "secretsweep/error.hpp"
#include "secretsweep/hash.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace secretsweep {

double CodeModel::score(const Finding& f) const {
  return predict_logistic(model, assemble_code_features(f, file_extension(f.path), spec));
}

double DocsModel::score(const TokenList& tokens) const {
  return predict_gbdt(model, transform_tfidf(tokens, tfidf));
}

std::string fingerprint(const CodeFeatureSpec& spec) { return sha256_hex(to_json(spec).dump()); }
std::string fingerprint(const TfIdfModel& tfidf) { return sha256_hex(to_json(tfidf).dump()); }

namespace {

json tree_json(const Tree& t) {
  // One [feature, threshold, left, right, weight] tuple per node.
  json nodes = json::array();
  for (const auto& n : t.nodes) nodes.push_back({n.feature, n.threshold, n.left, n.right, n.weight});
  return nodes;
}

Tree tree_from_json(const json& j) {
  Tree t;
  for (const auto& n : j) {
    if (!n.is_array() || n.size() != 5) throw FormatError("tree node must have 5 fields");
    t.nodes.push_back({n[0].get<int>(), n[1].get<double>(), n[2].get<int>(), n[3].get<int>(),
                       n[4].get<double>()});
  }
  if (!t.well_formed()) throw FormatError("malformed tree");
  return t;
}

}  // namespace

json to_json(const TrainedModel& m) {
  if (const auto* code = std::get_if<CodeModel>(&m)) {
    std::vector<double> w(code->model.weights.data(),
                          code->model.weights.data() + code->model.weights.size());
    return json{{"kind", "logistic"},
                {"parameters", {{"weights", w}, {"bias", code->model.bias}}},
                {"features", to_json(code->spec)},
                {"threshold", code->model.threshold},
                {"metadata", code->metadata},
                {"spec_fingerprint", fingerprint(code->spec)}};
  }
  const auto& docs = std::get<DocsModel>(m);
  json trees = json::array();
  for (const auto& t : docs.model.trees) trees.push_back(tree_json(t));
  return json{{"kind", "gbdt"},
              {"parameters",
               {{"learning_rate", docs.model.learning_rate},
                {"base_logit", docs.model.base_logit},
                {"n_features", docs.model.n_features},
                {"trees", trees}}},
              {"features", to_json(docs.tfidf)},
              {"threshold", docs.model.threshold},
              {"metadata", docs.metadata},
              {"spec_fingerprint", fingerprint(docs.tfidf)}};
}

TrainedModel trained_model_from_json(const json& j) {
  try {
    const auto kind = j.at("kind").get<std::string>();
    const auto stored = j.at("spec_fingerprint").get<std::string>();
    const auto& params = j.at("parameters");
    if (kind == "logistic") {
      CodeModel m;
      m.spec = code_spec_from_json(j.at("features"));
      if (fingerprint(m.spec) != stored) throw FormatError("feature spec fingerprint mismatch");
      const auto w = params.at("weights").get<std::vector<double>>();
      if (w.size() != m.spec.dimension()) throw FormatError("weight count differs from spec dimension");
      m.model.weights = Eigen::Map<const Eigen::VectorXd>(w.data(), static_cast<Eigen::Index>(w.size()));
      m.model.bias = params.at("bias").get<double>();
      m.model.threshold = j.at("threshold").get<double>();
      m.model.spec_fingerprint = stored;
      m.metadata = j.value("metadata", json::object());
      return m;
    }
    if (kind == "gbdt") {
      DocsModel m;
      m.tfidf = tfidf_from_json(j.at("features"));
      if (fingerprint(m.tfidf) != stored) throw FormatError("feature spec fingerprint mismatch");
      m.spec_fingerprint = stored;
      m.model.learning_rate = params.at("learning_rate").get<double>();
      m.model.base_logit = params.at("base_logit").get<double>();
      m.model.n_features = params.at("n_features").get<std::size_t>();
      for (const auto& t : params.at("trees")) m.model.trees.push_back(tree_from_json(t));
      m.model.threshold = j.at("threshold").get<double>();
      m.metadata = j.value("metadata", json::object());
      return m;
    }
    throw FormatError("unknown model kind '" + kind + "'");
  } catch (const json::exception& e) {
    throw FormatError(std::string("malformed model file: ") + e.what());
  }
}

std::string dump_model(const TrainedModel& m) { return to_json(m).dump(1) + "\n"; }

void save_model(const fs::path& path, const TrainedModel& m) {
  const auto text = dump_model(m);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out << text;
  if (!out) throw IoError("write failed for " + path.string());
}

TrainedModel load_model(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  json j;
  try {
    j = json::parse(ss.str());
  } catch (const json::exception& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
  return trained_model_from_json(j);
}

}  // namespace secretsweep
