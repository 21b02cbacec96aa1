// SPDX-License-Identifier: Apache-2.0

#include "helmdg/config.hpp"

#include <cctype>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace helmdg {

namespace {

std::string trim(const std::string& s) {
  size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

bool valid_name(const std::string& s) {
  if (s.empty()) return false;
  for (char c : s) {
    if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_') return false;
  }
  return true;
}

}  // namespace

bool ConfigMap::has(const std::string& key) const {
  return values_.count(key) != 0;
}

std::string ConfigMap::raw(const std::string& key) const {
  auto it = values_.find(key);
  if (it == values_.end()) {
    throw SpecificationError(origin_ + ": missing required key '" + key + "'");
  }
  consumed_.insert(key);
  return it->second;
}

std::string ConfigMap::get_string(const std::string& key,
                                  const std::string& fallback) const {
  if (!has(key)) return fallback;
  return raw(key);
}

std::string ConfigMap::require_string(const std::string& key) const {
  return raw(key);
}

double ConfigMap::get_double(const std::string& key, double fallback) const {
  if (!has(key)) return fallback;
  return require_double(key);
}

double ConfigMap::require_double(const std::string& key) const {
  std::string v = raw(key);
  char* end = nullptr;
  double x = std::strtod(v.c_str(), &end);
  if (end == v.c_str() || *end != '\0') {
    throw SpecificationError(origin_ + ": key '" + key +
                             "' expects a number, got '" + v + "'");
  }
  return x;
}

int ConfigMap::get_int(const std::string& key, int fallback) const {
  if (!has(key)) return fallback;
  std::string v = raw(key);
  char* end = nullptr;
  long x = std::strtol(v.c_str(), &end, 10);
  if (end == v.c_str() || *end != '\0') {
    throw SpecificationError(origin_ + ": key '" + key +
                             "' expects an integer, got '" + v + "'");
  }
  return static_cast<int>(x);
}

bool ConfigMap::get_bool(const std::string& key, bool fallback) const {
  if (!has(key)) return fallback;
  std::string v = raw(key);
  if (v == "true" || v == "yes" || v == "1") return true;
  if (v == "false" || v == "no" || v == "0") return false;
  throw SpecificationError(origin_ + ": key '" + key +
                           "' expects true/false, got '" + v + "'");
}

std::vector<int> ConfigMap::get_int_list(
    const std::string& key, const std::vector<int>& fallback) const {
  if (!has(key)) return fallback;
  std::string v = raw(key);
  std::vector<int> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    char* end = nullptr;
    long x = std::strtol(item.c_str(), &end, 10);
    if (item.empty() || end == item.c_str() || *end != '\0') {
      throw SpecificationError(origin_ + ": key '" + key +
                               "' expects a comma-separated integer list, "
                               "got '" +
                               v + "'");
    }
    out.push_back(static_cast<int>(x));
  }
  if (out.empty()) {
    throw SpecificationError(origin_ + ": key '" + key + "' is empty");
  }
  return out;
}

void ConfigMap::finish() const {
  std::string unknown;
  for (const auto& kv : values_) {
    if (!consumed_.count(kv.first)) {
      if (!unknown.empty()) unknown += ", ";
      unknown += kv.first;
    }
  }
  if (!unknown.empty()) {
    throw SpecificationError(origin_ + ": unknown key(s): " + unknown);
  }
}

ConfigMap parse_config_text(const std::string& text,
                            const std::string& origin) {
  ConfigMap cfg;
  cfg.origin_ = origin;
  std::istringstream in(text);
  std::string line, section;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string s = trim(line);
    if (s.empty() || s[0] == '#') continue;
    std::string where = origin + ":" + std::to_string(lineno);
    if (s.front() == '[') {
      if (s.back() != ']') {
        throw SpecificationError(where + ": unterminated section header");
      }
      section = trim(s.substr(1, s.size() - 2));
      if (!valid_name(section)) {
        throw SpecificationError(where + ": invalid section name '" + section +
                                 "'");
      }
      continue;
    }
    size_t eq = s.find('=');
    if (eq == std::string::npos) {
      throw SpecificationError(where + ": expected 'key = value'");
    }
    std::string key = trim(s.substr(0, eq));
    std::string value = trim(s.substr(eq + 1));
    if (!valid_name(key)) {
      throw SpecificationError(where + ": invalid key name '" + key + "'");
    }
    std::string full = section.empty() ? key : section + "." + key;
    if (cfg.values_.count(full)) {
      throw SpecificationError(where + ": duplicate key '" + full + "'");
    }
    cfg.values_[full] = value;
  }
  return cfg;
}

ConfigMap parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw SpecificationError("cannot open config file '" + path + "'");
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config_text(buf.str(), path);
}

}  // namespace helmdg
