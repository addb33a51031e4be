#pragma once

#include <cstdint>
#include <filesystem>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "secretsweep/finding.hpp"
#include "secretsweep/text.hpp"

namespace fixtures {

namespace fs = std::filesystem;

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag = "t");
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const fs::path& path() const { return path_; }
  fs::path operator/(const std::string& rel) const { return path_ / rel; }

 private:
  fs::path path_;
};

void write_file(const fs::path& p, const std::string& text);
std::string read_file(const fs::path& p);

/// Ground truth of a generated code tree: (path, line) of every planted secret.
struct CodeFixture {
  std::set<std::pair<std::string, std::size_t>> secret_lines;
  std::set<std::pair<std::string, std::size_t>> decoy_lines;
};

/// Python and YAML files holding `n_secrets` keyword assignments of catalog
/// samples and `n_decoys` keyword assignments of benign values.
CodeFixture write_code_fixture(const fs::path& root, std::uint64_t seed, std::size_t n_secrets,
                               std::size_t n_decoys);

/// Keyword findings of a scanned code fixture labeled from ground truth.
std::vector<secretsweep::Finding> label_code_findings(const std::vector<secretsweep::Finding>& all,
                                                      const CodeFixture& truth);

struct DocsFixture {
  std::vector<secretsweep::Page> pages;
  std::vector<std::string> planted;  // secret values embedded in pages
};

DocsFixture make_docs_fixture(std::uint64_t seed, std::size_t n_pages, std::size_t n_planted);

/// Rows of every page, labeled secret exactly when they contain a planted value.
std::vector<secretsweep::Row> label_docs_rows(const DocsFixture& f);

}  // namespace fixtures
