// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include "helmdg/common.hpp"

namespace helmdg {

// Line-oriented "key = value" configuration with [section] grouping. Keys are
// addressed as "section.key". Typed getters mark keys as consumed; finish()
// rejects configurations containing keys nothing asked for, so misspelled
// options fail loudly instead of silently reverting to defaults.
class ConfigMap {
 public:
  ConfigMap() = default;

  const std::string& origin() const { return origin_; }
  bool has(const std::string& key) const;

  std::string get_string(const std::string& key,
                         const std::string& fallback) const;
  std::string require_string(const std::string& key) const;
  double get_double(const std::string& key, double fallback) const;
  double require_double(const std::string& key) const;
  int get_int(const std::string& key, int fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;
  std::vector<int> get_int_list(const std::string& key,
                                const std::vector<int>& fallback) const;

  // Throws SpecificationError naming every key that was never consumed.
  void finish() const;

  friend ConfigMap parse_config_text(const std::string& text,
                                     const std::string& origin);

 private:
  std::string raw(const std::string& key) const;

  std::map<std::string, std::string> values_;
  mutable std::set<std::string> consumed_;
  std::string origin_ = "<none>";
};

ConfigMap parse_config_text(const std::string& text, const std::string& origin);
ConfigMap parse_config_file(const std::string& path);

}  // namespace helmdg
