#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "wavelab/common.hpp"

namespace wavelab {

// Sectioned key-value text: [section] headers, key = value lines, '#'
// comments. Section and key names are case-sensitive.
class IniDoc {
 public:
  void set(const std::string& section, const std::string& key, const std::string& value);
  bool has_section(const std::string& section) const;
  bool has(const std::string& section, const std::string& key) const;
  std::optional<std::string> raw(const std::string& section, const std::string& key) const;

  std::string get_string(const std::string& s, const std::string& k, const std::string& dflt) const;
  double get_double(const std::string& s, const std::string& k, double dflt) const;
  int get_int(const std::string& s, const std::string& k, int dflt) const;
  bool get_bool(const std::string& s, const std::string& k, bool dflt) const;

  // Required variants throw ParameterError naming the missing key.
  double require_double(const std::string& s, const std::string& k) const;
  std::string require_string(const std::string& s, const std::string& k) const;

  // Canonical serialization (sorted sections/keys) used for config hashing.
  std::string canonical_text() const;
  std::uint64_t hash() const;

  const std::map<std::string, std::map<std::string, std::string>>& sections() const {
    return sections_;
  }

 private:
  std::map<std::string, std::map<std::string, std::string>> sections_;
};

// Throws ParameterError with a line number on malformed input.
IniDoc parse_ini_text(const std::string& text, const std::string& origin = "<string>");
IniDoc parse_ini_file(const std::string& path);

// Overlays b onto a (b wins key-by-key).
IniDoc merge_ini(const IniDoc& a, const IniDoc& b);

}  // namespace wavelab
