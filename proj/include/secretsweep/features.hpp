#pragma once

#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/SparseCore>

#include "json.hpp"
#include "secretsweep/finding.hpp"

namespace secretsweep {

using TokenList = std::vector<std::string>;

/// Lowercases and splits into maximal [a-z0-9_] runs of length >= 2.
TokenList tokenize(std::string_view s);

class Vocabulary {
 public:
  Vocabulary() = default;
  Vocabulary(std::vector<std::string> sorted_tokens, std::size_t fitted_on);

  std::size_t size() const { return tokens_.size(); }
  std::size_t fitted_on() const { return fitted_on_; }
  const std::vector<std::string>& tokens() const { return tokens_; }
  /// Dense index of `token`, or -1 when out of vocabulary.
  std::ptrdiff_t index_of(std::string_view token) const;

  bool operator==(const Vocabulary&) const = default;

 private:
  std::vector<std::string> tokens_;  // sorted, index = position
  std::size_t fitted_on_ = 0;
};

/// Sorted unique tokens. Throws FitError on an empty corpus.
Vocabulary fit_vocabulary(std::span<const TokenList> corpus);

/// Sparse vector; entries are sorted by strictly increasing index.
struct FeatureVector {
  std::vector<std::pair<std::size_t, double>> entries;
  std::size_t dimension = 0;

  double value_at(std::size_t index) const;
  double sum() const;
  double l2_norm() const;
  Eigen::VectorXd to_dense() const;
  bool operator==(const FeatureVector&) const = default;
};

FeatureVector vectorize_counts(std::span<const std::string> tokens, const Vocabulary& vocab);

/// Token counts of the candidate, extension one-hot with an "other" bucket,
/// then entropy_bits / 8.
struct CodeFeatureSpec {
  Vocabulary vocab;
  std::vector<std::string> extensions;  // sorted; "other" slot follows them

  std::size_t dimension() const { return vocab.size() + extensions.size() + 2; }
  std::size_t extension_offset() const { return vocab.size(); }
  std::size_t other_slot() const { return vocab.size() + extensions.size(); }
  std::size_t entropy_slot() const { return dimension() - 1; }
  bool operator==(const CodeFeatureSpec&) const = default;
};

/// Lowercased extension without the dot ("" when absent).
std::string file_extension(std::string_view path);

CodeFeatureSpec fit_code_spec(std::span<const Finding> findings);
FeatureVector assemble_code_features(const Finding& finding, std::string_view extension,
                                     const CodeFeatureSpec& spec);

struct TfIdfModel {
  Vocabulary vocab;
  std::vector<std::size_t> doc_freq;  // aligned with vocab indices
  std::size_t n_docs = 0;

  double idf(std::size_t index) const;
  bool operator==(const TfIdfModel&) const = default;
};

TfIdfModel fit_tfidf(std::span<const TokenList> rows);
FeatureVector transform_tfidf(std::span<const std::string> tokens, const TfIdfModel& model);

/// Stacks feature vectors as the rows of a sparse matrix.
Eigen::SparseMatrix<double, Eigen::RowMajor> to_sparse_rows(std::span<const FeatureVector> rows,
                                                            std::size_t dimension);

nlohmann::json to_json(const Vocabulary& v);
nlohmann::json to_json(const CodeFeatureSpec& spec);
nlohmann::json to_json(const TfIdfModel& model);
CodeFeatureSpec code_spec_from_json(const nlohmann::json& j);
TfIdfModel tfidf_from_json(const nlohmann::json& j);

}  // namespace secretsweep
