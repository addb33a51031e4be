#pragma once

#include <filesystem>
#include <string>
#include <variant>

#include "json.hpp"
#include "secretsweep/features.hpp"
#include "secretsweep/gbdt.hpp"
#include "secretsweep/logistic.hpp"

namespace secretsweep {

/// Logistic model over code findings together with the feature spec it was fit on.
struct CodeModel {
  CodeFeatureSpec spec;
  LogisticModel model;
  nlohmann::json metadata = nlohmann::json::object();

  double score(const Finding& f) const;
  double threshold() const { return model.threshold; }
};

/// Boosted trees over TF-IDF vectors of document rows.
struct DocsModel {
  TfIdfModel tfidf;
  GbdtModel model;
  nlohmann::json metadata = nlohmann::json::object();
  std::string spec_fingerprint;

  double score(const TokenList& tokens) const;
  double threshold() const { return model.threshold; }
};

using TrainedModel = std::variant<CodeModel, DocsModel>;

std::string fingerprint(const CodeFeatureSpec& spec);
std::string fingerprint(const TfIdfModel& tfidf);

nlohmann::json to_json(const TrainedModel& m);
TrainedModel trained_model_from_json(const nlohmann::json& j);

/// Pretty-printed, key-sorted JSON; doubles use shortest round-trip form.
std::string dump_model(const TrainedModel& m);
void save_model(const std::filesystem::path& path, const TrainedModel& m);
TrainedModel load_model(const std::filesystem::path& path);

}  // namespace secretsweep
