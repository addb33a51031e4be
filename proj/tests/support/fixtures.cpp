#include "fixtures.hpp"

#include <atomic>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <unistd.h>

#include "secretsweep/pattern.hpp"
#include "secretsweep/rng.hpp"

namespace fixtures {

using secretsweep::Rng;
using secretsweep::uniform_index;

TempDir::TempDir(const std::string& tag) {
  static std::atomic<int> counter{0};
  path_ = fs::temp_directory_path() /
          ("secretsweep-" + tag + "-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
  fs::remove_all(path_);
  fs::create_directories(path_);
}

TempDir::~TempDir() {
  std::error_code ec;
  fs::remove_all(path_, ec);
}

void write_file(const fs::path& p, const std::string& text) {
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + p.string());
  out << text;
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

namespace {

template <typename T>
const T& choose(const std::vector<T>& v, Rng& rng) {
  return v[static_cast<std::size_t>(uniform_index(rng, v.size()))];
}

struct Sampler {
  std::vector<secretsweep::PatternNode> asts;
  explicit Sampler(const std::vector<secretsweep::SecretTemplate>& catalog) {
    for (const auto& t : catalog) asts.push_back(secretsweep::parse_pattern(t.pattern));
  }
  std::string operator()(Rng& rng) const { return secretsweep::sample(choose(asts, rng), rng); }
};

const std::vector<std::string> kKeywords = {
    "password", "db_password", "api_token", "secret", "auth_key",    "apikey",
    "passwd",   "pwd",         "token",     "private_key", "credential", "smtp_password"};

const std::vector<std::string> kPyDecoys = {
    R"(os.environ["DB_PASSWORD"])", "settings.API_TOKEN", R"("Enter your password")",
    R"("password_reset.html")",      "self.password_field", R"(request.form["pw"])",
    R"("********")",                 R"("<redacted>")",     R"("your-token-here")",
    "config.secret_key",             R"("templates/login.html")", R"("TODO")",
    "args.password",                 R"("Password must have 8 characters")"};

const std::vector<std::string> kYamlDecoys = {
    R"("{{ vault_lookup }}")", "provided-at-deploy", R"("********")", "see-runbook",
    "ENV_FILE_ONLY",           "managed-by-ops",     R"("<redacted>")", "rotate-monthly"};

const std::vector<std::string> kFiller = {"import os", "", "# configuration", "def main():",
                                          "    pass", "LOG_LEVEL = \"info\"", "timeout = 30"};

}  // namespace

CodeFixture write_code_fixture(const fs::path& root, std::uint64_t seed, std::size_t n_secrets,
                               std::size_t n_decoys) {
  Rng rng(seed);
  const Sampler sampler(secretsweep::default_secret_catalog());
  constexpr std::size_t kFiles = 100;

  std::vector<int> items(n_secrets, 1);
  items.resize(n_secrets + n_decoys, 0);
  secretsweep::seeded_shuffle(items, rng);

  std::map<std::string, std::vector<std::string>> files;
  CodeFixture truth;
  std::set<std::string> used;
  for (int is_secret : items) {
    const auto f = uniform_index(rng, kFiles);
    const bool yaml = f % 4 == 3;
    const std::string path = (f % 2 == 0 ? "app/" : "services/") + std::string("mod") +
                             std::to_string(f) + (yaml ? ".yaml" : ".py");
    auto& lines = files[path];
    if (!yaml && uniform_index(rng, 3) == 0) lines.push_back(choose(kFiller, rng));
    const auto& kw = choose(kKeywords, rng);
    std::string value;
    if (is_secret) {
      do {
        value = sampler(rng);
      } while (!used.insert(value).second);
      value = "\"" + value + "\"";
    } else {
      value = yaml ? choose(kYamlDecoys, rng) : choose(kPyDecoys, rng);
    }
    lines.push_back(yaml ? kw + ": " + value : kw + " = " + value);
    const std::pair<std::string, std::size_t> at{path, lines.size()};
    (is_secret ? truth.secret_lines : truth.decoy_lines).insert(at);
  }
  for (const auto& [path, lines] : files) {
    std::string text;
    for (const auto& l : lines) text += l + "\n";
    write_file(root / path, text);
  }
  return truth;
}

std::vector<secretsweep::Finding> label_code_findings(const std::vector<secretsweep::Finding>& all,
                                                      const CodeFixture& truth) {
  std::vector<secretsweep::Finding> out;
  for (const auto& f : all) {
    if (f.detector != secretsweep::Detector::kKeyword) continue;
    auto g = f;
    const std::pair<std::string, std::size_t> at{f.path, f.line_number};
    if (truth.secret_lines.contains(at)) {
      g.label = secretsweep::Label::kSecret;
    } else if (truth.decoy_lines.contains(at)) {
      g.label = secretsweep::Label::kNotSecret;
    } else {
      continue;
    }
    out.push_back(std::move(g));
  }
  return out;
}

namespace {

const std::vector<std::string> kTeams = {"platform", "payments", "search", "identity", "data",
                                         "mobile",   "infra",    "growth", "billing",  "support"};
const std::vector<std::string> kServices = {"gateway", "ledger", "indexer", "scheduler", "mailer",
                                            "reports", "catalog", "checkout", "warehouse", "portal"};
const std::vector<std::string> kDays = {"Monday", "Tuesday", "Wednesday", "Thursday", "Friday"};
const std::vector<std::string> kPeople = {"Alice", "Bruno", "Chen", "Dana", "Emeka", "Farah"};
const std::vector<std::string> kBenign = {
    "The {team} team deploys the {service} service every {day}.",
    "Reset your password through the {service} self-service page.",
    "Tokens issued by the {service} expire after {n} hours.",
    "Contact {person} for access to the {service} dashboard.",
    "Never paste a password or secret into a chat channel.",
    "See the {team} runbook at https://wiki.example.com/{service}/runbook for details.",
    "The {service} API key rotation is owned by the {team} team.",
    "Alerts from {service} page the {team} on-call engineer.",
    "Store credentials in the vault, not in this page.",
    "Latency of {service} stayed under {n} ms during the {day} release.",
    "Ask {person} before changing the {service} password policy.",
    "The {team} team reviews access tokens quarterly.",
    "Use single sign-on for the {service} console.",
    "{person} owns the migration of {service} to the new cluster.",
    "Backups for {service} run nightly at {n}:00 UTC.",
    "Email {person} at ops@example.com if the {service} job fails.",
    "Secrets management guidelines apply to every {team} repository.",
    "The {service} host 10.0.{n}.12 is reachable from the VPN only.",
    "Document every password reset request in the ticket.",
    "Meeting notes: {team} sync on {day} covered the {service} roadmap."};
const std::vector<std::string> kPlantedForms = {"{kw} = {value}", "{kw}: {value}",
                                                "staging {kw} = {value}", "{kw} for {service}: {value}"};
const std::vector<std::string> kPlantedKeywords = {"password", "token", "secret", "api_key", "pwd"};

std::string fill(std::string tpl, Rng& rng, const std::string& kw = "", const std::string& value = "") {
  const auto sub = [&](const std::string& key, const std::string& v) {
    for (auto p = tpl.find(key); p != std::string::npos; p = tpl.find(key)) tpl.replace(p, key.size(), v);
  };
  sub("{team}", choose(kTeams, rng));
  sub("{service}", choose(kServices, rng));
  sub("{day}", choose(kDays, rng));
  sub("{person}", choose(kPeople, rng));
  sub("{n}", std::to_string(1 + uniform_index(rng, 48)));
  sub("{kw}", kw);
  sub("{value}", value);
  return tpl;
}

}  // namespace

DocsFixture make_docs_fixture(std::uint64_t seed, std::size_t n_pages, std::size_t n_planted) {
  Rng rng(seed);
  const Sampler sampler(secretsweep::default_secret_catalog());
  constexpr std::size_t kParagraphs = 26;

  std::vector<std::size_t> slots(n_pages * kParagraphs);
  for (std::size_t i = 0; i < slots.size(); ++i) slots[i] = i;
  secretsweep::seeded_shuffle(slots, rng);
  std::set<std::size_t> planted_slots(slots.begin(), slots.begin() + static_cast<long>(n_planted));

  DocsFixture out;
  for (std::size_t p = 0; p < n_pages; ++p) {
    secretsweep::Page page;
    page.id = "page-" + std::to_string(p);
    page.title = fill("{team} notes for {service}", rng);
    page.space = choose(kTeams, rng);
    std::string html = "<h1>" + page.title + "</h1>\n";
    for (std::size_t k = 0; k < kParagraphs; ++k) {
      std::string text;
      if (planted_slots.contains(p * kParagraphs + k)) {
        const auto value = sampler(rng);
        out.planted.push_back(value);
        text = fill(choose(kPlantedForms, rng), rng, choose(kPlantedKeywords, rng), value);
      } else {
        text = fill(choose(kBenign, rng), rng);
      }
      html += "<p>" + text + "</p>\n";
    }
    page.html = html;
    out.pages.push_back(std::move(page));
  }
  return out;
}

std::vector<secretsweep::Row> label_docs_rows(const DocsFixture& f) {
  std::vector<secretsweep::Row> rows;
  for (const auto& page : f.pages) {
    for (auto& r : secretsweep::page_to_rows(page)) {
      bool secret = false;
      for (const auto& v : f.planted) {
        if (r.raw.find(v) != std::string::npos) {
          secret = true;
          break;
        }
      }
      r.label = secret ? secretsweep::Label::kSecret : secretsweep::Label::kNotSecret;
      rows.push_back(std::move(r));
    }
  }
  return rows;
}

}  // namespace fixtures
