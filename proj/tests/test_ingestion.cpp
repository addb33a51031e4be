#include <atomic>
#include <cstdlib>
#include <thread>

#include <gtest/gtest.h>

#include "fixtures.hpp"
#include "json.hpp"
#include "secretsweep/error.hpp"
#include "secretsweep/ingestion.hpp"

// After the Eigen-using headers: httplib pulls in <resolv.h>, whose macros clash with Eigen.
#include <httplib.h>

using namespace secretsweep;
using nlohmann::json;

namespace {

constexpr const char* kTokenEnv = "SECRETSWEEP_TEST_TOKEN";
constexpr const char* kToken = "tok-6f1d9c2e";

// Serves `n_pages` pages; `script` may override the status of the k-th request.
class FixtureServer {
 public:
  explicit FixtureServer(int n_pages, std::function<int(int)> script = {}) : n_pages_(n_pages) {
    server_.Get("/wiki/rest/api/content", [this, script](const httplib::Request& req, httplib::Response& res) {
      const int k = requests_++;
      if (req.get_header_value("Authorization") != std::string("Bearer ") + kToken) {
        res.status = 401;
        return;
      }
      if (script) {
        const int status = script(k);
        if (status == -1) {
          res.set_content("{\"results\": [", "application/json");
          return;
        }
        if (status != 200) {
          res.status = status;
          return;
        }
      }
      const int start = std::stoi(req.get_param_value("start"));
      const int limit = std::stoi(req.get_param_value("limit"));
      if (req.get_param_value("expand") != "body.storage") {
        res.status = 400;
        return;
      }
      json results = json::array();
      for (int i = start; i < std::min(start + limit, n_pages_); ++i) {
        results.push_back({{"id", std::to_string(100 + i)},
                           {"title", "Page " + std::to_string(i)},
                           {"body", {{"storage", {{"value", "<p>row " + std::to_string(i) + "</p>"}}}}}});
      }
      res.set_content(json{{"results", results}, {"size", results.size()}, {"start", start}}.dump(),
                      "application/json");
    });
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }
  ~FixtureServer() {
    server_.stop();
    thread_.join();
  }

  ConnectorConfig config(std::size_t page_size) const {
    ConnectorConfig c;
    c.base_url = "http://127.0.0.1:" + std::to_string(port_) + "/wiki";
    c.auth_token_env = kTokenEnv;
    c.page_size = page_size;
    c.timeout_seconds = 5.0;
    c.initial_backoff_seconds = 0.01;
    return c;
  }
  int requests() const { return requests_; }

 private:
  int n_pages_;
  httplib::Server server_;
  int port_ = 0;
  std::thread thread_;
  std::atomic<int> requests_{0};
};

class Ingestion : public ::testing::Test {
 protected:
  void SetUp() override { setenv(kTokenEnv, kToken, 1); }
};

}  // namespace

TEST_F(Ingestion, EmptyFirstPage) {
  FixtureServer server(0);
  const auto stats = fetch_pages(server.config(10), [](Page) {});
  EXPECT_EQ(stats.pages, 0u);
  EXPECT_EQ(server.requests(), 1);
}

TEST_F(Ingestion, ThreePagesPageSizeTwo) {
  FixtureServer server(3);
  const auto pages = fetch_pages(server.config(2));
  ASSERT_EQ(pages.size(), 3u);
  EXPECT_EQ(server.requests(), 2);
  EXPECT_EQ(pages[0].id, "100");
  EXPECT_EQ(pages[2].title, "Page 2");
  EXPECT_EQ(pages[1].html, "<p>row 1</p>");
}

TEST_F(Ingestion, PaginationComplete) {
  for (std::size_t size : {1u, 2u, 3u, 4u, 7u, 50u}) {
    FixtureServer server(7);
    const auto pages = fetch_pages(server.config(size));
    ASSERT_EQ(pages.size(), 7u) << size;
    for (std::size_t i = 0; i < pages.size(); ++i) EXPECT_EQ(pages[i].id, std::to_string(100 + i));
  }
}

TEST_F(Ingestion, UnauthorizedIsNotRetried) {
  FixtureServer server(3, [](int) { return 401; });
  try {
    fetch_pages(server.config(2));
    FAIL() << "expected AuthError";
  } catch (const AuthError& e) {
    EXPECT_EQ(std::string(e.what()).find(kToken), std::string::npos);
  }
  EXPECT_EQ(server.requests(), 1);
}

TEST_F(Ingestion, ForbiddenIsAuthError) {
  FixtureServer server(3, [](int) { return 403; });
  EXPECT_THROW(fetch_pages(server.config(2)), AuthError);
  EXPECT_EQ(server.requests(), 1);
}

TEST_F(Ingestion, ServerErrorsRetriedThenSucceed) {
  FixtureServer server(3, [](int k) { return k < 2 ? 503 : 200; });
  std::vector<Page> pages;
  const auto stats = fetch_pages(server.config(5), [&](Page p) { pages.push_back(std::move(p)); });
  EXPECT_EQ(pages.size(), 3u);
  EXPECT_EQ(stats.retries, 2u);
  EXPECT_EQ(server.requests(), 3);
}

TEST_F(Ingestion, RetriesExhausted) {
  FixtureServer server(3, [](int) { return 500; });
  auto config = server.config(5);
  config.max_retries = 2;
  try {
    fetch_pages(config);
    FAIL() << "expected TransportError";
  } catch (const TransportError& e) {
    EXPECT_NE(std::string(e.what()).find("start=0"), std::string::npos);
    EXPECT_EQ(std::string(e.what()).find(kToken), std::string::npos);
  }
  EXPECT_EQ(server.requests(), 3);
}

TEST_F(Ingestion, MalformedBodyNamesOffset) {
  FixtureServer server(5, [](int k) { return k == 1 ? -1 : 200; });
  try {
    fetch_pages(server.config(2));
    FAIL() << "expected FormatError";
  } catch (const FormatError& e) {
    EXPECT_NE(std::string(e.what()).find("start=2"), std::string::npos);
  }
}

TEST_F(Ingestion, MissingTokenNamesOnlyTheVariable) {
  FixtureServer server(1);
  unsetenv(kTokenEnv);
  try {
    fetch_pages(server.config(2));
    FAIL() << "expected AuthError";
  } catch (const AuthError& e) {
    EXPECT_NE(std::string(e.what()).find(kTokenEnv), std::string::npos);
  }
  EXPECT_EQ(server.requests(), 0);
}

TEST_F(Ingestion, UnreachableHostIsTransportError) {
  ConnectorConfig c;
  c.base_url = "http://127.0.0.1:1";
  c.auth_token_env = kTokenEnv;
  c.max_retries = 1;
  c.timeout_seconds = 1.0;
  c.initial_backoff_seconds = 0.0;
  EXPECT_THROW(fetch_pages(c), TransportError);
}

TEST_F(Ingestion, ConfigValidation) {
  ConnectorConfig c;
  c.base_url = "http://x";
  c.auth_token_env = kTokenEnv;
  c.page_size = 0;
  EXPECT_THROW(c.validate(), Error);
  c.page_size = 1;
  c.max_retries = -1;
  EXPECT_THROW(c.validate(), Error);
  c.max_retries = 0;
  EXPECT_NO_THROW(c.validate());
  c.base_url = "ftp://x";
  EXPECT_THROW(fetch_pages(c), Error);
}

TEST(FixtureDir, Loading) {
  fixtures::TempDir dir;
  EXPECT_TRUE(load_fixture_dir(dir.path()).empty());
  fixtures::write_file(dir / "b.html", "<p>no heading</p>");
  fixtures::write_file(dir / "a.html", "<h2>Alpha &amp; co</h2><p>x</p>");
  fixtures::write_file(dir / "notes.txt", "ignored");
  const auto pages = load_fixture_dir(dir.path());
  ASSERT_EQ(pages.size(), 2u);
  EXPECT_EQ(pages[0].id, "a");
  EXPECT_EQ(pages[0].title, "Alpha & co");
  EXPECT_EQ(pages[1].title, "b");
  EXPECT_THROW(load_fixture_dir(dir / "missing"), IoError);
}

TEST(Corpus, PageRoundTrip) {
  fixtures::TempDir dir;
  std::vector<Page> pages = {{"1", "One", "<p>a</p>", "ENG"}, {"2", "Two", "", std::nullopt},
                             {"3", "Three \"q\"", "<p>b\nc</p>", "OPS"}};
  persist_pages(pages, dir / "pages.jsonl");
  EXPECT_EQ(load_pages(dir / "pages.jsonl"), pages);
  persist_pages({}, dir / "empty.jsonl");
  EXPECT_EQ(fixtures::read_file(dir / "empty.jsonl"), "");
  EXPECT_TRUE(load_pages(dir / "empty.jsonl").empty());
}

TEST(Corpus, RowRoundTripAndTruncation) {
  fixtures::TempDir dir;
  auto rows = page_to_rows(Page{"p", "t", "<p>password = x1y2</p><p>Deploy on Monday</p>", std::nullopt});
  rows[0].label = Label::kSecret;
  persist_rows(rows, dir / "rows.jsonl");
  EXPECT_EQ(load_rows(dir / "rows.jsonl"), rows);

  auto text = fixtures::read_file(dir / "rows.jsonl");
  text = text.substr(0, text.size() - 10);
  fixtures::write_file(dir / "bad.jsonl", text);
  try {
    load_rows(dir / "bad.jsonl");
    FAIL() << "expected FormatError";
  } catch (const FormatError& e) {
    EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos);
  }
}
