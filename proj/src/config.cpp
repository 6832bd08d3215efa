#include "wavelab/config.hpp"

#include <cstdlib>
#include <fstream>
#include <sstream>

namespace wavelab {

namespace {

std::string trim(const std::string& s) {
  size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  size_t e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

}  // namespace

void IniDoc::set(const std::string& section, const std::string& key, const std::string& value) {
  if (key.empty()) {
    sections_[section];  // touch: section exists with no keys yet
    return;
  }
  sections_[section][key] = value;
}

bool IniDoc::has_section(const std::string& section) const {
  return sections_.count(section) > 0;
}

bool IniDoc::has(const std::string& section, const std::string& key) const {
  auto it = sections_.find(section);
  return it != sections_.end() && it->second.count(key) > 0;
}

std::optional<std::string> IniDoc::raw(const std::string& section, const std::string& key) const {
  auto it = sections_.find(section);
  if (it == sections_.end()) return std::nullopt;
  auto jt = it->second.find(key);
  if (jt == it->second.end()) return std::nullopt;
  return jt->second;
}

std::string IniDoc::get_string(const std::string& s, const std::string& k,
                               const std::string& dflt) const {
  auto v = raw(s, k);
  return v ? *v : dflt;
}

double IniDoc::get_double(const std::string& s, const std::string& k, double dflt) const {
  auto v = raw(s, k);
  if (!v) return dflt;
  char* end = nullptr;
  double r = std::strtod(v->c_str(), &end);
  if (end == v->c_str() || *end != '\0')
    throw ParameterError("config key [" + s + "]." + k + " is not a number: '" + *v + "'");
  return r;
}

int IniDoc::get_int(const std::string& s, const std::string& k, int dflt) const {
  double d = get_double(s, k, static_cast<double>(dflt));
  int r = static_cast<int>(d);
  if (static_cast<double>(r) != d)
    throw ParameterError("config key [" + s + "]." + k + " is not an integer");
  return r;
}

bool IniDoc::get_bool(const std::string& s, const std::string& k, bool dflt) const {
  auto v = raw(s, k);
  if (!v) return dflt;
  if (*v == "true" || *v == "1" || *v == "yes") return true;
  if (*v == "false" || *v == "0" || *v == "no") return false;
  throw ParameterError("config key [" + s + "]." + k + " is not a boolean: '" + *v + "'");
}

double IniDoc::require_double(const std::string& s, const std::string& k) const {
  if (!has(s, k)) throw ParameterError("missing required config key [" + s + "]." + k);
  return get_double(s, k, 0.0);
}

std::string IniDoc::require_string(const std::string& s, const std::string& k) const {
  if (!has(s, k)) throw ParameterError("missing required config key [" + s + "]." + k);
  return get_string(s, k, "");
}

std::string IniDoc::canonical_text() const {
  std::ostringstream out;
  for (const auto& [sec, kv] : sections_) {
    out << "[" << sec << "]\n";
    for (const auto& [k, v] : kv) out << k << " = " << v << "\n";
  }
  return out.str();
}

std::uint64_t IniDoc::hash() const {
  std::string t = canonical_text();
  return fnv1a(t.data(), t.size());
}

IniDoc parse_ini_text(const std::string& text, const std::string& origin) {
  IniDoc doc;
  std::istringstream in(text);
  std::string line, section;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    size_t hash_pos = line.find('#');
    if (hash_pos != std::string::npos) line = line.substr(0, hash_pos);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        throw ParameterError(origin + ":" + std::to_string(lineno) + ": unterminated section header");
      section = trim(line.substr(1, line.size() - 2));
      if (section.empty())
        throw ParameterError(origin + ":" + std::to_string(lineno) + ": empty section name");
      doc.set(section, "", "");  // records the section
      continue;
    }
    size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw ParameterError(origin + ":" + std::to_string(lineno) + ": expected 'key = value'");
    std::string key = trim(line.substr(0, eq));
    std::string val = trim(line.substr(eq + 1));
    if (key.empty())
      throw ParameterError(origin + ":" + std::to_string(lineno) + ": empty key");
    if (section.empty())
      throw ParameterError(origin + ":" + std::to_string(lineno) + ": key outside any [section]");
    doc.set(section, key, val);
  }
  return doc;
}

IniDoc parse_ini_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParameterError("cannot open config file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_ini_text(ss.str(), path);
}

IniDoc merge_ini(const IniDoc& a, const IniDoc& b) {
  IniDoc out = a;
  for (const auto& [sec, kv] : b.sections())
    for (const auto& [k, v] : kv) out.set(sec, k, v);
  return out;
}

}  // namespace wavelab
