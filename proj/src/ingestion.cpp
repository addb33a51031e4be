#include "secretsweep/ingestion.hpp"


#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <regex>
#include <sstream>
#include <thread>

#include "json.hpp"
#include "secretsweep/error.hpp"

// Last: it pulls in <resolv.h>, whose _res macro breaks Eigen headers.
#include <httplib.h>

namespace fs = std::filesystem;
using nlohmann::json;

namespace secretsweep {

void ConnectorConfig::validate() const {
  if (base_url.empty()) throw Error("base_url must be set");
  if (page_size < 1) throw Error("page_size must be at least 1");
  if (max_retries < 0) throw Error("max_retries must be non-negative");
  if (!(timeout_seconds > 0.0)) throw Error("timeout must be positive");
  if (!(initial_backoff_seconds >= 0.0)) throw Error("backoff must be non-negative");
}

namespace {

struct Endpoint {
  std::string origin;  // scheme://host[:port]
  std::string prefix;  // path without trailing slash
};

Endpoint parse_base_url(const std::string& url) {
  static const std::regex re(R"(^(https?://[^/?#]+)(/[^?#]*)?$)", std::regex::icase);
  std::smatch m;
  if (!std::regex_match(url, m, re)) throw Error("base_url must look like http(s)://host[:port][/path]");
  Endpoint e{m[1].str(), m[2].str()};
  while (!e.prefix.empty() && e.prefix.back() == '/') e.prefix.pop_back();
  return e;
}

Page page_from_result(const json& r) {
  Page p;
  const auto& id = r.at("id");
  p.id = id.is_string() ? id.get<std::string>() : id.dump();
  p.title = r.value("title", std::string{});
  p.html = r.at("body").at("storage").at("value").get<std::string>();
  if (r.contains("space") && r["space"].is_object() && r["space"].contains("key")) {
    p.space = r["space"]["key"].get<std::string>();
  }
  return p;
}

}  // namespace

FetchStats fetch_pages(const ConnectorConfig& config, const std::function<void(Page)>& sink) {
  config.validate();
  const Endpoint endpoint = parse_base_url(config.base_url);

  httplib::Headers headers{{"Accept", "application/json"}};
  if (!config.auth_token_env.empty()) {
    const char* token = std::getenv(config.auth_token_env.c_str());
    if (token == nullptr || *token == '\0') {
      throw AuthError("environment variable " + config.auth_token_env + " is not set");
    }
    headers.emplace("Authorization", std::string("Bearer ") + token);
  }

  httplib::Client client(endpoint.origin);
  const auto secs = static_cast<time_t>(config.timeout_seconds);
  const auto usecs = static_cast<time_t>((config.timeout_seconds - static_cast<double>(secs)) * 1e6);
  client.set_connection_timeout(secs, usecs);
  client.set_read_timeout(secs, usecs);
  client.set_write_timeout(secs, usecs);

  FetchStats stats;
  std::size_t start = 0;
  for (;;) {
    const std::string target = endpoint.prefix + "/rest/api/content?start=" + std::to_string(start) +
                               "&limit=" + std::to_string(config.page_size) +
                               "&expand=body.storage";
    httplib::Result res;
    double backoff = config.initial_backoff_seconds;
    for (int attempt = 0;; ++attempt) {
      ++stats.requests;
      res = client.Get(target, headers);
      const bool retryable = !res || res->status >= 500;
      if (!retryable) break;
      if (attempt >= config.max_retries) {
        const std::string why = res ? "HTTP " + std::to_string(res->status)
                                    : httplib::to_string(res.error());
        throw TransportError("fetch at start=" + std::to_string(start) + " failed after " +
                             std::to_string(attempt + 1) + " attempts: " + why);
      }
      ++stats.retries;
      std::this_thread::sleep_for(std::chrono::duration<double>(backoff));
      backoff *= 2.0;
    }
    if (res->status == 401 || res->status == 403) {
      throw AuthError("document platform rejected credentials (HTTP " + std::to_string(res->status) + ")");
    }
    if (res->status != 200) {
      throw TransportError("unexpected HTTP " + std::to_string(res->status) + " at start=" +
                           std::to_string(start));
    }

    std::vector<Page> batch;
    std::size_t size = 0;
    try {
      const auto body = json::parse(res->body);
      const auto& results = body.at("results");
      if (!results.is_array()) throw FormatError("results is not an array");
      for (const auto& r : results) batch.push_back(page_from_result(r));
      size = body.contains("size") ? body.at("size").get<std::size_t>() : batch.size();
    } catch (const json::exception& e) {
      throw FormatError("malformed response at start=" + std::to_string(start) + ": " + e.what());
    } catch (const FormatError& e) {
      throw FormatError("malformed response at start=" + std::to_string(start) + ": " + e.what());
    }
    for (auto& p : batch) {
      ++stats.pages;
      sink(std::move(p));
    }
    if (size < config.page_size || size == 0) break;
    start += size;
  }
  return stats;
}

std::vector<Page> fetch_pages(const ConnectorConfig& config) {
  std::vector<Page> out;
  fetch_pages(config, [&](Page p) { out.push_back(std::move(p)); });
  return out;
}

std::vector<Page> load_fixture_dir(const fs::path& dir) {
  std::error_code ec;
  fs::directory_iterator it(dir, ec);
  if (ec) throw IoError("cannot read directory " + dir.string() + ": " + ec.message());
  std::vector<fs::path> files;
  for (; it != fs::directory_iterator(); it.increment(ec)) {
    if (ec) throw IoError("cannot read directory " + dir.string() + ": " + ec.message());
    if (it->is_regular_file(ec) && it->path().extension() == ".html") files.push_back(it->path());
  }
  std::sort(files.begin(), files.end(),
            [](const fs::path& a, const fs::path& b) { return a.filename() < b.filename(); });

  static const std::regex heading(R"(<h[1-6][^>]*>([\s\S]*?)</h[1-6]>)", std::regex::icase);
  std::vector<Page> pages;
  for (const auto& f : files) {
    std::ifstream in(f, std::ios::binary);
    if (!in) throw IoError("cannot read " + f.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    Page p;
    p.id = f.stem().string();
    p.html = ss.str();
    std::smatch m;
    std::string title;
    if (std::regex_search(p.html, m, heading)) {
      title = html_to_text(m[1].str());
      std::replace(title.begin(), title.end(), '\n', ' ');
    }
    p.title = title.empty() ? p.id : title;
    pages.push_back(std::move(p));
  }
  return pages;
}

namespace {

json page_json(const Page& p) {
  json j{{"id", p.id}, {"title", p.title}, {"html", p.html}};
  if (p.space) j["space"] = *p.space;
  return j;
}

json row_json(const Row& r) {
  return json{{"page_id", r.page_id},
              {"line_number", r.line_number},
              {"raw", r.raw},
              {"tokens", r.tokens},
              {"label", to_string(r.label)}};
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out << text;
  if (!out) throw IoError("write failed for " + path.string());
}

template <typename T, typename Parse>
std::vector<T> read_jsonl(const fs::path& path, Parse parse) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path.string());
  std::vector<T> out;
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (line.empty()) continue;
    try {
      out.push_back(parse(json::parse(line)));
    } catch (const json::exception& e) {
      throw FormatError(path.string() + " line " + std::to_string(n) + ": " + e.what());
    } catch (const Error& e) {
      throw FormatError(path.string() + " line " + std::to_string(n) + ": " + e.what());
    }
  }
  return out;
}

}  // namespace

std::string page_to_jsonl(const Page& p) { return page_json(p).dump() + "\n"; }
std::string row_to_jsonl(const Row& r) { return row_json(r).dump() + "\n"; }

void persist_pages(const std::vector<Page>& pages, const fs::path& path) {
  std::string text;
  for (const auto& p : pages) text += page_to_jsonl(p);
  write_text(path, text);
}

std::vector<Page> load_pages(const fs::path& path) {
  return read_jsonl<Page>(path, [](const json& j) {
    Page p;
    p.id = j.at("id").get<std::string>();
    p.title = j.at("title").get<std::string>();
    p.html = j.at("html").get<std::string>();
    if (j.contains("space")) p.space = j.at("space").get<std::string>();
    return p;
  });
}

void persist_rows(const std::vector<Row>& rows, const fs::path& path) {
  std::string text;
  for (const auto& r : rows) text += row_to_jsonl(r);
  write_text(path, text);
}

std::vector<Row> load_rows(const fs::path& path) {
  return read_jsonl<Row>(path, [](const json& j) {
    Row r;
    r.page_id = j.at("page_id").get<std::string>();
    r.line_number = j.at("line_number").get<std::size_t>();
    r.raw = j.at("raw").get<std::string>();
    r.tokens = j.at("tokens").get<TokenList>();
    r.label = parse_label(j.at("label").get<std::string>());
    return r;
  });
}

}  // namespace secretsweep
