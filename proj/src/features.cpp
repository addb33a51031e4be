#include "secretsweep/features.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <set>

#include "secretsweep/error.hpp"

using nlohmann::json;

namespace secretsweep {
namespace {

bool is_token_char(char c) {
  return (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '_';
}

// Counts per vocabulary index, sorted by index.
std::vector<std::pair<std::size_t, double>> count_tokens(std::span<const std::string> tokens,
                                                         const Vocabulary& vocab) {
  std::map<std::size_t, double> counts;
  for (const auto& t : tokens) {
    const auto idx = vocab.index_of(t);
    if (idx >= 0) counts[static_cast<std::size_t>(idx)] += 1.0;
  }
  return {counts.begin(), counts.end()};
}

}  // namespace

TokenList tokenize(std::string_view s) {
  TokenList out;
  std::string cur;
  auto flush = [&] {
    if (cur.size() >= 2) out.push_back(cur);
    cur.clear();
  };
  for (char raw : s) {
    const char c = static_cast<char>(std::tolower(static_cast<unsigned char>(raw)));
    if (is_token_char(c)) {
      cur.push_back(c);
    } else {
      flush();
    }
  }
  flush();
  return out;
}

Vocabulary::Vocabulary(std::vector<std::string> sorted_tokens, std::size_t fitted_on)
    : tokens_(std::move(sorted_tokens)), fitted_on_(fitted_on) {
  if (!std::is_sorted(tokens_.begin(), tokens_.end()) ||
      std::adjacent_find(tokens_.begin(), tokens_.end()) != tokens_.end()) {
    throw FormatError("vocabulary tokens must be sorted and unique");
  }
}

std::ptrdiff_t Vocabulary::index_of(std::string_view token) const {
  const auto it = std::lower_bound(tokens_.begin(), tokens_.end(), token);
  if (it == tokens_.end() || *it != token) return -1;
  return it - tokens_.begin();
}

Vocabulary fit_vocabulary(std::span<const TokenList> corpus) {
  if (corpus.empty()) throw FitError("cannot fit a vocabulary on an empty corpus");
  std::set<std::string> unique;
  for (const auto& doc : corpus) unique.insert(doc.begin(), doc.end());
  return Vocabulary({unique.begin(), unique.end()}, corpus.size());
}

double FeatureVector::value_at(std::size_t index) const {
  const auto it = std::lower_bound(entries.begin(), entries.end(), index,
                                   [](const auto& e, std::size_t i) { return e.first < i; });
  return it != entries.end() && it->first == index ? it->second : 0.0;
}

double FeatureVector::sum() const {
  double s = 0.0;
  for (const auto& [_, v] : entries) s += v;
  return s;
}

double FeatureVector::l2_norm() const {
  double s = 0.0;
  for (const auto& [_, v] : entries) s += v * v;
  return std::sqrt(s);
}

Eigen::VectorXd FeatureVector::to_dense() const {
  Eigen::VectorXd out = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(dimension));
  for (const auto& [i, v] : entries) out(static_cast<Eigen::Index>(i)) = v;
  return out;
}

FeatureVector vectorize_counts(std::span<const std::string> tokens, const Vocabulary& vocab) {
  return {count_tokens(tokens, vocab), vocab.size()};
}

std::string file_extension(std::string_view path) {
  const auto slash = path.find_last_of('/');
  const auto name = slash == std::string_view::npos ? path : path.substr(slash + 1);
  const auto dot = name.find_last_of('.');
  if (dot == std::string_view::npos || dot == 0) return "";
  std::string ext(name.substr(dot + 1));
  std::transform(ext.begin(), ext.end(), ext.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return ext;
}

CodeFeatureSpec fit_code_spec(std::span<const Finding> findings) {
  if (findings.empty()) throw FitError("cannot fit a feature spec without findings");
  std::vector<TokenList> corpus;
  corpus.reserve(findings.size());
  std::set<std::string> exts;
  for (const auto& f : findings) {
    corpus.push_back(tokenize(f.candidate));
    exts.insert(file_extension(f.path));
  }
  CodeFeatureSpec spec;
  spec.vocab = fit_vocabulary(corpus);
  spec.extensions.assign(exts.begin(), exts.end());
  return spec;
}

FeatureVector assemble_code_features(const Finding& finding, std::string_view extension,
                                     const CodeFeatureSpec& spec) {
  FeatureVector fv;
  fv.dimension = spec.dimension();
  fv.entries = count_tokens(tokenize(finding.candidate), spec.vocab);
  const auto ext = std::lower_bound(spec.extensions.begin(), spec.extensions.end(), extension);
  const std::size_t slot = ext != spec.extensions.end() && *ext == extension
                               ? spec.extension_offset() +
                                     static_cast<std::size_t>(ext - spec.extensions.begin())
                               : spec.other_slot();
  fv.entries.emplace_back(slot, 1.0);
  const double scaled = finding.entropy_bits / 8.0;
  if (scaled != 0.0) fv.entries.emplace_back(spec.entropy_slot(), scaled);
  return fv;
}

double TfIdfModel::idf(std::size_t index) const {
  return std::log((1.0 + static_cast<double>(n_docs)) /
                  (1.0 + static_cast<double>(doc_freq.at(index)))) +
         1.0;
}

TfIdfModel fit_tfidf(std::span<const TokenList> rows) {
  TfIdfModel m;
  m.vocab = fit_vocabulary(rows);
  m.n_docs = rows.size();
  m.doc_freq.assign(m.vocab.size(), 0);
  for (const auto& row : rows) {
    std::set<std::size_t> present;
    for (const auto& t : row) present.insert(static_cast<std::size_t>(m.vocab.index_of(t)));
    for (auto i : present) ++m.doc_freq[i];
  }
  return m;
}

FeatureVector transform_tfidf(std::span<const std::string> tokens, const TfIdfModel& model) {
  FeatureVector fv{count_tokens(tokens, model.vocab), model.vocab.size()};
  double norm2 = 0.0;
  for (auto& [i, v] : fv.entries) {
    v *= model.idf(i);
    norm2 += v * v;
  }
  if (norm2 > 0.0) {
    const double inv = 1.0 / std::sqrt(norm2);
    for (auto& e : fv.entries) e.second *= inv;
  }
  return fv;
}

Eigen::SparseMatrix<double, Eigen::RowMajor> to_sparse_rows(std::span<const FeatureVector> rows,
                                                            std::size_t dimension) {
  std::vector<Eigen::Triplet<double>> triplets;
  std::size_t nnz = 0;
  for (const auto& r : rows) nnz += r.entries.size();
  triplets.reserve(nnz);
  for (std::size_t r = 0; r < rows.size(); ++r) {
    for (const auto& [c, v] : rows[r].entries) {
      if (c >= dimension) throw ShapeError("feature index out of range");
      triplets.emplace_back(static_cast<int>(r), static_cast<int>(c), v);
    }
  }
  Eigen::SparseMatrix<double, Eigen::RowMajor> m(static_cast<Eigen::Index>(rows.size()),
                                                 static_cast<Eigen::Index>(dimension));
  m.setFromTriplets(triplets.begin(), triplets.end());
  return m;
}

json to_json(const Vocabulary& v) {
  return json{{"tokens", v.tokens()}, {"fitted_on", v.fitted_on()}};
}

json to_json(const CodeFeatureSpec& spec) {
  return json{{"vocab", to_json(spec.vocab)},
              {"extensions", spec.extensions},
              {"layout", {"token_counts", "extension_one_hot", "other_extension", "entropy_bits/8"}},
              {"dimension", spec.dimension()}};
}

json to_json(const TfIdfModel& model) {
  return json{{"vocab", to_json(model.vocab)},
              {"doc_freq", model.doc_freq},
              {"n_docs", model.n_docs},
              {"layout", {"tfidf_l2"}},
              {"idf", "ln((1+n_docs)/(1+df))+1"}};
}

namespace {
Vocabulary vocab_from_json(const json& j) {
  return Vocabulary(j.at("tokens").get<std::vector<std::string>>(),
                    j.at("fitted_on").get<std::size_t>());
}
}  // namespace

CodeFeatureSpec code_spec_from_json(const json& j) {
  try {
    CodeFeatureSpec spec;
    spec.vocab = vocab_from_json(j.at("vocab"));
    spec.extensions = j.at("extensions").get<std::vector<std::string>>();
    if (!std::is_sorted(spec.extensions.begin(), spec.extensions.end())) {
      throw FormatError("extensions must be sorted");
    }
    if (j.at("dimension").get<std::size_t>() != spec.dimension()) {
      throw FormatError("feature spec dimension does not match its layout");
    }
    return spec;
  } catch (const json::exception& e) {
    throw FormatError(std::string("malformed feature spec: ") + e.what());
  }
}

TfIdfModel tfidf_from_json(const json& j) {
  try {
    TfIdfModel m;
    m.vocab = vocab_from_json(j.at("vocab"));
    m.doc_freq = j.at("doc_freq").get<std::vector<std::size_t>>();
    m.n_docs = j.at("n_docs").get<std::size_t>();
    if (m.doc_freq.size() != m.vocab.size()) throw FormatError("doc_freq not aligned with vocab");
    if (m.n_docs < 1) throw FormatError("n_docs must be at least 1");
    for (auto df : m.doc_freq) {
      if (df < 1) throw FormatError("every vocabulary token needs doc_freq >= 1");
    }
    return m;
  } catch (const json::exception& e) {
    throw FormatError(std::string("malformed tfidf model: ") + e.what());
  }
}

}  // namespace secretsweep
