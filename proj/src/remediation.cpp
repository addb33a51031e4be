#include "secretsweep/remediation.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "secretsweep/baseline.hpp"
#include "secretsweep/error.hpp"
#include "secretsweep/features.hpp"
#include "secretsweep/hash.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace secretsweep {

namespace {

bool is_ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
bool is_ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }

// Rewrites (?<name>...) into plain groups and records the name of every group.
std::string strip_named_groups(const std::string& src, std::vector<std::string>& names) {
  std::string out;
  out.reserve(src.size());
  bool in_class = false;
  for (std::size_t i = 0; i < src.size(); ++i) {
    const char c = src[i];
    if (c == '\\') {
      out += c;
      if (i + 1 < src.size()) out += src[++i];
      continue;
    }
    if (in_class) {
      if (c == ']') in_class = false;
      out += c;
      continue;
    }
    if (c == '[') {
      in_class = true;
      out += c;
      continue;
    }
    if (c != '(') {
      out += c;
      continue;
    }
    if (i + 1 < src.size() && src[i + 1] == '?') {
      if (i + 2 < src.size() && src[i + 2] == '<') {
        if (i + 3 < src.size() && (src[i + 3] == '=' || src[i + 3] == '!')) {
          throw FormatError("lookbehind is not supported in recipe patterns");
        }
        const auto close = src.find('>', i + 3);
        if (close == std::string::npos) throw FormatError("unterminated group name in " + src);
        std::string name = src.substr(i + 3, close - i - 3);
        if (name.empty() || !is_ident_start(name[0]) ||
            !std::all_of(name.begin(), name.end(), is_ident_char)) {
          throw FormatError("invalid group name '" + name + "'");
        }
        if (std::find(names.begin(), names.end(), name) != names.end()) {
          throw FormatError("duplicate group name '" + name + "'");
        }
        names.push_back(std::move(name));
        out += '(';
        i = close;
        continue;
      }
      out += c;  // (?: (?= (?! are non-capturing
      continue;
    }
    names.emplace_back();
    out += c;
  }
  return out;
}

struct TemplatePart {
  bool placeholder = false;
  std::string text;
};

// `${name}` with an identifier name is a placeholder; anything else is literal.
std::vector<TemplatePart> parse_template(const std::string& tpl) {
  std::vector<TemplatePart> parts;
  std::string literal;
  std::size_t i = 0;
  while (i < tpl.size()) {
    if (tpl.compare(i, 2, "${") == 0) {
      std::size_t j = i + 2;
      if (j < tpl.size() && is_ident_start(tpl[j])) {
        while (j < tpl.size() && is_ident_char(tpl[j])) ++j;
        if (j < tpl.size() && tpl[j] == '}') {
          if (!literal.empty()) parts.push_back({false, std::move(literal)});
          literal.clear();
          parts.push_back({true, tpl.substr(i + 2, j - i - 2)});
          i = j + 1;
          continue;
        }
      }
    }
    literal += tpl[i++];
  }
  if (!literal.empty()) parts.push_back({false, std::move(literal)});
  return parts;
}

std::string regex_escape(const std::string& s) {
  static const std::string meta = R"(\^$.|?*+()[]{}/)";
  std::string out;
  for (char c : s) {
    if (meta.find(c) != std::string::npos) out += '\\';
    out += c;
  }
  return out;
}

}  // namespace

std::string vault_ref_for(std::string_view identifier) {
  std::string out;
  bool in_run = false;
  for (char c : identifier) {
    if (std::isalnum(static_cast<unsigned char>(c))) {
      out += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
      in_run = false;
    } else if (!in_run) {
      out += '-';
      in_run = true;
    }
  }
  return out;
}

bool glob_match(std::string_view pattern, std::string_view path) {
  if (pattern.empty()) return path.empty();
  if (pattern.substr(0, 2) == "**") {
    auto rest = pattern.substr(2);
    if (!rest.empty() && rest[0] == '/') {
      // "**/" also matches zero directories.
      if (glob_match(rest.substr(1), path)) return true;
    }
    for (std::size_t k = 0; k <= path.size(); ++k) {
      if (glob_match(rest, path.substr(k))) return true;
    }
    return false;
  }
  if (pattern[0] == '*') {
    for (std::size_t k = 0; k <= path.size(); ++k) {
      if (glob_match(pattern.substr(1), path.substr(k))) return true;
      if (k < path.size() && path[k] == '/') break;
    }
    return false;
  }
  if (path.empty()) return false;
  if (pattern[0] == '?') return path[0] != '/' && glob_match(pattern.substr(1), path.substr(1));
  return pattern[0] == path[0] && glob_match(pattern.substr(1), path.substr(1));
}

Recipe::Recipe(std::string id, std::string description, std::string file_glob,
               std::vector<std::string> extensions, std::string match, std::string replacement,
               int priority)
    : id_(std::move(id)),
      description_(std::move(description)),
      file_glob_(std::move(file_glob)),
      extensions_(std::move(extensions)),
      match_source_(std::move(match)),
      replacement_(std::move(replacement)),
      priority_(priority) {
  if (id_.empty()) throw FormatError("recipe id must not be empty");
  for (auto& e : extensions_) {
    if (!e.empty() && e[0] == '.') e.erase(0, 1);
    std::transform(e.begin(), e.end(), e.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  }
  const std::string plain = strip_named_groups(match_source_, group_names_);
  for (const char* required : {"var", "secret"}) {
    if (std::find(group_names_.begin(), group_names_.end(), required) == group_names_.end()) {
      throw FormatError("recipe " + id_ + ": match must declare (?<" + required + ">...)");
    }
  }
  try {
    match_ = std::regex(plain, std::regex::ECMAScript);
  } catch (const std::regex_error& e) {
    throw FormatError("recipe " + id_ + ": match does not compile: " + e.what());
  }

  std::string remediated;
  for (const auto& part : parse_template(replacement_)) {
    if (!part.placeholder) {
      remediated += regex_escape(part.text);
      continue;
    }
    if (part.text == "secret") {
      throw FormatError("recipe " + id_ + ": replacement must not reference ${secret}");
    }
    if (part.text == "ref") {
      remediated += "[a-z0-9-]+";
    } else if (std::find(group_names_.begin(), group_names_.end(), part.text) == group_names_.end()) {
      throw FormatError("recipe " + id_ + ": replacement references undeclared ${" + part.text + "}");
    } else if (part.text == "var") {
      remediated += R"([A-Za-z_][A-Za-z0-9_.\-]*)";
    } else {
      remediated += ".*?";
    }
  }
  remediated_ = std::regex(remediated, std::regex::ECMAScript);
}

bool Recipe::applies_to(std::string_view path) const {
  if (!extensions_.empty()) {
    const auto ext = file_extension(path);
    if (std::find(extensions_.begin(), extensions_.end(), ext) == extensions_.end()) return false;
  }
  return file_glob_.empty() || glob_match(file_glob_, path);
}

std::optional<Recipe::Rewrite> Recipe::rewrite(const std::string& line,
                                               std::string_view candidate_hash) const {
  const auto group_of = [&](const std::string& name) {
    return static_cast<std::size_t>(
        std::find(group_names_.begin(), group_names_.end(), name) - group_names_.begin() + 1);
  };
  const std::size_t secret_group = group_of("secret");
  const std::size_t var_group = group_of("var");
  for (auto it = std::sregex_iterator(line.begin(), line.end(), match_); it != std::sregex_iterator();
       ++it) {
    const auto& m = *it;
    if (sha256_hex(m[secret_group].str()) != candidate_hash) continue;
    Rewrite r;
    r.var = m[var_group].str();
    r.vault_ref = vault_ref_for(r.var);
    std::string rendered;
    for (const auto& part : parse_template(replacement_)) {
      if (!part.placeholder) {
        rendered += part.text;
      } else if (part.text == "ref") {
        rendered += r.vault_ref;
      } else {
        rendered += m[group_of(part.text)].str();
      }
    }
    r.new_line = m.prefix().str() + rendered + m.suffix().str();
    if (r.new_line == line) continue;
    return r;
  }
  return std::nullopt;
}

bool Recipe::is_remediated(const std::string& line) const {
  return std::regex_search(line, remediated_);
}

std::vector<Recipe> default_recipes() {
  return {
      Recipe("python-assignment", "Python string assignment to a vault lookup", "", {"py"},
             R"re((?<var>[A-Za-z_][A-Za-z0-9_]*)\s*=\s*(["'])(?<secret>.*?)\2)re",
             R"re(${var} = get_secret("${ref}"))re", 10),
      Recipe("java-assignment", "Java string assignment to an environment lookup", "", {"java"},
             R"re((?<var>[A-Za-z_][A-Za-z0-9_]*)\s*=\s*"(?<secret>[^"]*)")re",
             R"re(${var} = System.getenv("${ref}"))re", 10),
      Recipe("ini-value", "INI/config value to a vault reference", "", {"ini", "cfg", "conf"},
             R"re((?<var>[A-Za-z_][A-Za-z0-9_.\-]*)\s*=\s*(["']?)(?<secret>[^"'\s;#]+)\2)re",
             "${var} = ${vault:${ref}}", 10),
      Recipe("yaml-value", "YAML scalar to a vault reference", "", {"yaml", "yml"},
             R"re((?<var>[A-Za-z_][A-Za-z0-9_.\-]*)\s*:\s*(["']?)(?<secret>[^"'\s#]+)\2)re",
             "${var}: ${vault:${ref}}", 10),
      Recipe("properties-value", "Java properties value to a vault reference", "", {"properties"},
             R"re((?<var>[A-Za-z_][A-Za-z0-9_.\-]*)\s*[=:]\s*(?<secret>\S+))re",
             "${var}=${vault:${ref}}", 10),
      Recipe("shell-assignment", "Shell variable to a vault command", "", {"sh", "bash"},
             R"re((?<var>[A-Za-z_][A-Za-z0-9_]*)=(["']?)(?<secret>[^"'\s;]+)\2)re",
             "${var}=$(vault_get ${ref})", 10),
  };
}

std::vector<Recipe> recipes_from_json(const json& j) {
  const json& list = j.is_object() && j.contains("recipes") ? j.at("recipes") : j;
  if (!list.is_array()) throw FormatError("recipe catalog must be an array");
  std::vector<Recipe> out;
  for (const auto& r : list) {
    try {
      out.emplace_back(r.at("id").get<std::string>(), r.value("description", std::string{}),
                       r.value("file_glob", std::string{}),
                       r.value("extensions", std::vector<std::string>{}),
                       r.at("match").get<std::string>(), r.at("replacement").get<std::string>(),
                       r.value("priority", 0));
    } catch (const json::exception& e) {
      throw FormatError(std::string("malformed recipe: ") + e.what());
    }
  }
  return out;
}

json to_json(const Recipe& r) {
  return json{{"id", r.id()},
              {"description", r.description()},
              {"file_glob", r.file_glob()},
              {"extensions", r.extensions()},
              {"match", r.match_source()},
              {"replacement", r.replacement()},
              {"priority", r.priority()}};
}

RemediationPlan plan_remediation(const std::vector<Finding>& findings,
                                 const std::vector<Recipe>& recipes, const fs::path& root,
                                 const DetectorConfig& config) {
  std::vector<const Recipe*> ordered;
  for (const auto& r : recipes) ordered.push_back(&r);
  std::stable_sort(ordered.begin(), ordered.end(),
                   [](const Recipe* a, const Recipe* b) { return a->priority() > b->priority(); });

  std::vector<Finding> secrets;
  for (const auto& f : findings) {
    if (f.label == Label::kSecret) secrets.push_back(f);
  }
  std::sort(secrets.begin(), secrets.end(), finding_less);

  std::map<std::string, std::vector<std::string>> files;
  auto lines_of = [&](const std::string& path) -> const std::vector<std::string>* {
    auto it = files.find(path);
    if (it == files.end()) {
      std::vector<std::string> lines;
      try {
        lines = read_lines(root / path);
      } catch (const IoError&) {
        return nullptr;
      }
      it = files.emplace(path, std::move(lines)).first;
    }
    return &it->second;
  };
  auto applicable = [&](const std::string& path) {
    std::vector<const Recipe*> out;
    for (const auto* r : ordered) {
      if (r->applies_to(path)) out.push_back(r);
    }
    return out;
  };

  RemediationPlan plan;
  std::vector<std::pair<const Finding*, std::string>> live;  // finding, recovered candidate
  std::vector<std::string> stale;
  for (const auto& f : secrets) {
    const auto* lines = lines_of(f.path);
    if (lines == nullptr || f.line_number == 0 || f.line_number > lines->size()) {
      stale.push_back(f.path + ":" + std::to_string(f.line_number));
      continue;
    }
    const auto& line = (*lines)[f.line_number - 1];
    std::optional<std::string> candidate;
    for (const auto& hit : run_detector(f.detector, line, config)) {
      if (hit.candidate_hash == f.candidate_hash) {
        candidate = hit.candidate;
        break;
      }
    }
    if (candidate) {
      live.emplace_back(&f, std::move(*candidate));
      continue;
    }
    const auto rs = applicable(f.path);
    if (std::any_of(rs.begin(), rs.end(), [&](const Recipe* r) { return r->is_remediated(line); })) {
      ++plan.already_remediated;
    } else {
      stale.push_back(f.path + ":" + std::to_string(f.line_number) + " (" +
                      std::string(to_string(f.detector)) + ")");
    }
  }
  if (!stale.empty()) {
    std::string msg = "stale findings, rescan required:";
    for (const auto& s : stale) msg += " " + s;
    throw StaleFindingError(msg);
  }

  std::map<std::pair<std::string, std::size_t>, std::size_t> patched;  // -> index in patches
  for (const auto& [f, candidate] : live) {
    const auto key = std::make_pair(f->path, f->line_number);
    if (auto it = patched.find(key); it != patched.end()) {
      // Another finding on this line was already rewritten.
      if (plan.patches[it->second].new_line.find(candidate) != std::string::npos) {
        plan.unremediated.push_back(*f);
      }
      continue;
    }
    const auto& line = (*lines_of(f->path))[f->line_number - 1];
    bool done = false;
    for (const auto* r : applicable(f->path)) {
      auto rw = r->rewrite(line, f->candidate_hash);
      if (!rw) continue;
      if (rw->new_line.find(candidate) != std::string::npos) continue;
      patched.emplace(key, plan.patches.size());
      plan.patches.push_back({f->path, f->line_number, line, std::move(rw->new_line), r->id(),
                              std::move(rw->vault_ref), f->candidate_hash});
      done = true;
      break;
    }
    if (!done) plan.unremediated.push_back(*f);
  }
  return plan;
}

namespace {

struct FileText {
  std::vector<std::string> lines;  // without terminators
  std::vector<std::string> endings;
};

FileText read_file_text(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw IoError("cannot read " + p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  const std::string data = ss.str();
  FileText t;
  std::size_t start = 0;
  while (start < data.size()) {
    auto nl = data.find('\n', start);
    std::string ending = "\n";
    if (nl == std::string::npos) {
      nl = data.size();
      ending.clear();
    }
    std::string line = data.substr(start, nl - start);
    if (!line.empty() && line.back() == '\r') {
      line.pop_back();
      ending.insert(ending.begin(), '\r');
    }
    t.lines.push_back(std::move(line));
    t.endings.push_back(std::move(ending));
    start = nl + 1;
  }
  return t;
}

std::string join_file_text(const FileText& t) {
  std::string out;
  for (std::size_t i = 0; i < t.lines.size(); ++i) out += t.lines[i] + t.endings[i];
  return out;
}

}  // namespace

std::string unified_diff(const std::string& path, const std::vector<std::string>& before,
                         const std::vector<std::string>& after, std::size_t context) {
  // Edit script: common prefix and suffix, then a line-by-line middle when the
  // sizes agree, otherwise a block replacement.
  struct Op {
    char kind;
    std::size_t a;
    std::size_t b;
  };
  std::size_t pre = 0;
  while (pre < before.size() && pre < after.size() && before[pre] == after[pre]) ++pre;
  std::size_t suf = 0;
  while (suf < before.size() - pre && suf < after.size() - pre &&
         before[before.size() - 1 - suf] == after[after.size() - 1 - suf]) {
    ++suf;
  }
  std::vector<Op> ops;
  for (std::size_t i = 0; i < pre; ++i) ops.push_back({' ', i, i});
  const std::size_t mid_a = before.size() - pre - suf;
  const std::size_t mid_b = after.size() - pre - suf;
  if (mid_a == mid_b) {
    for (std::size_t i = 0; i < mid_a; ++i) {
      const std::size_t k = pre + i;
      if (before[k] == after[k]) {
        ops.push_back({' ', k, k});
      } else {
        ops.push_back({'-', k, k});
        ops.push_back({'+', k, k});
      }
    }
  } else {
    for (std::size_t i = 0; i < mid_a; ++i) ops.push_back({'-', pre + i, pre});
    for (std::size_t i = 0; i < mid_b; ++i) ops.push_back({'+', pre + mid_a, pre + i});
  }
  for (std::size_t i = 0; i < suf; ++i) {
    ops.push_back({' ', before.size() - suf + i, after.size() - suf + i});
  }

  std::vector<std::size_t> changes;
  for (std::size_t i = 0; i < ops.size(); ++i) {
    if (ops[i].kind != ' ') changes.push_back(i);
  }
  if (changes.empty()) return "";

  std::ostringstream out;
  out << "--- a/" << path << "\n+++ b/" << path << "\n";
  std::size_t c = 0;
  while (c < changes.size()) {
    std::size_t first = changes[c];
    std::size_t last = changes[c];
    while (c + 1 < changes.size() && changes[c + 1] - last - 1 <= 2 * context) last = changes[++c];
    ++c;
    std::size_t lead = 0;
    while (lead < context && first > 0 && ops[first - 1].kind == ' ') {
      --first;
      ++lead;
    }
    std::size_t trail = 0;
    while (trail < context && last + 1 < ops.size() && ops[last + 1].kind == ' ') {
      ++last;
      ++trail;
    }
    std::size_t a_len = 0;
    std::size_t b_len = 0;
    std::size_t a_start = std::string::npos;
    std::size_t b_start = std::string::npos;
    for (std::size_t i = first; i <= last; ++i) {
      if (ops[i].kind != '+') {
        ++a_len;
        if (a_start == std::string::npos) a_start = ops[i].a;
      }
      if (ops[i].kind != '-') {
        ++b_len;
        if (b_start == std::string::npos) b_start = ops[i].b;
      }
    }
    // An empty side is reported at the line before the hunk.
    const std::size_t a_shown = a_len == 0 ? ops[first].a : a_start + 1;
    const std::size_t b_shown = b_len == 0 ? ops[first].b : b_start + 1;
    out << "@@ -" << a_shown << "," << a_len << " +" << b_shown << "," << b_len << " @@\n";
    for (std::size_t i = first; i <= last; ++i) {
      const auto& op = ops[i];
      out << op.kind << (op.kind == '+' ? after[op.b] : before[op.a]) << "\n";
    }
  }
  return out.str();
}

RemediationReport apply_patches(const fs::path& root, const std::vector<Patch>& patches,
                                bool dry_run) {
  RemediationReport report;
  report.dry_run = dry_run;

  std::map<std::string, std::vector<const Patch*>> by_file;
  for (const auto& p : patches) by_file[p.path].push_back(&p);

  struct Pending {
    fs::path target;
    fs::path temp;
  };
  std::vector<Pending> pending;
  auto discard = [&] {
    std::error_code ec;
    for (const auto& p : pending) fs::remove(p.temp, ec);
  };

  for (auto& [path, file_patches] : by_file) {
    const fs::path target = root / path;
    FileText text;
    try {
      text = read_file_text(target);
    } catch (const IoError&) {
      report.skipped += file_patches.size();
      continue;
    }
    const auto before = text.lines;
    std::stable_sort(file_patches.begin(), file_patches.end(),
                     [](const Patch* a, const Patch* b) { return a->line_number > b->line_number; });
    std::size_t applied_here = 0;
    for (const auto* p : file_patches) {
      if (p->line_number == 0 || p->line_number > text.lines.size() ||
          text.lines[p->line_number - 1] != p->old_line || p->old_line == p->new_line) {
        ++report.skipped;
        continue;
      }
      text.lines[p->line_number - 1] = p->new_line;
      ++applied_here;
    }
    report.applied += applied_here;
    if (applied_here == 0) continue;
    ++report.files_changed;
    report.diff += unified_diff(path, before, text.lines);
    if (dry_run) continue;

    fs::path temp = target;
    temp += ".secretsweep.tmp";
    std::ofstream out(temp, std::ios::binary | std::ios::trunc);
    if (out) {
      const auto data = join_file_text(text);
      out.write(data.data(), static_cast<std::streamsize>(data.size()));
      out.close();
    }
    if (!out) {
      std::error_code ec;
      fs::remove(temp, ec);
      discard();
      throw IoError("cannot write " + temp.string() + "; no files were changed");
    }
    std::error_code ec;
    fs::permissions(temp, fs::status(target, ec).permissions(), ec);
    pending.push_back({target, temp});
  }

  for (std::size_t i = 0; i < pending.size(); ++i) {
    std::error_code ec;
    fs::rename(pending[i].temp, pending[i].target, ec);
    if (ec) {
      for (std::size_t k = i; k < pending.size(); ++k) fs::remove(pending[k].temp, ec);
      throw IoError("cannot replace " + pending[i].target.string() + ": " + ec.message());
    }
  }
  return report;
}

json to_json(const RemediationReport& r) {
  return json{{"applied", r.applied},
              {"skipped", r.skipped},
              {"files_changed", r.files_changed},
              {"dry_run", r.dry_run}};
}

std::vector<json> emit_vault_manifest(const std::vector<Patch>& patches) {
  std::vector<json> rows;
  for (const auto& p : patches) {
    rows.push_back(json{{"vault_ref", p.vault_ref},
                        {"path", p.path},
                        {"line_number", p.line_number},
                        {"candidate_hash", p.candidate_hash},
                        {"recipe_id", p.recipe_id}});
  }
  return rows;
}

std::string manifest_to_jsonl(const std::vector<json>& rows) {
  std::string out;
  for (const auto& r : rows) out += r.dump() + "\n";
  return out;
}

}  // namespace secretsweep
