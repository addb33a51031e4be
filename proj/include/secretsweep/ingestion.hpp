#pragma once

#include <cstddef>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "secretsweep/text.hpp"

namespace secretsweep {

struct ConnectorConfig {
  std::string base_url;
  std::string auth_token_env;  // name of the variable holding the bearer token
  std::size_t page_size = 50;
  int max_retries = 3;
  double timeout_seconds = 30.0;
  double initial_backoff_seconds = 1.0;  // doubles after every retry

  void validate() const;
};

struct FetchStats {
  std::size_t requests = 0;
  std::size_t retries = 0;
  std::size_t pages = 0;
};

/// Pages through {base_url}/rest/api/content, handing each page to `sink` in
/// request order. Throws AuthError on 401/403, FormatError on a malformed body
/// and TransportError once retries run out.
FetchStats fetch_pages(const ConnectorConfig& config, const std::function<void(Page)>& sink);
std::vector<Page> fetch_pages(const ConnectorConfig& config);

/// Every *.html file becomes a page (id = stem, title = first heading or stem), sorted by name.
std::vector<Page> load_fixture_dir(const std::filesystem::path& dir);

void persist_pages(const std::vector<Page>& pages, const std::filesystem::path& path);
std::vector<Page> load_pages(const std::filesystem::path& path);
void persist_rows(const std::vector<Row>& rows, const std::filesystem::path& path);
std::vector<Row> load_rows(const std::filesystem::path& path);

std::string page_to_jsonl(const Page& p);
std::string row_to_jsonl(const Row& r);

}  // namespace secretsweep
