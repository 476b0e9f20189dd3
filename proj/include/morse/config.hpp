#pragma once

#include <map>
#include <set>
#include <string>

namespace morse {

struct ConfigEntry {
  std::string value;
  int line = 0;
};

using ConfigMap = std::map<std::string, ConfigEntry>;

/// Line-oriented `key = value` file. Keys must come from `allowed`; empty
/// lines and `#` comments are skipped. Parse failures name the line number.
ConfigMap load_config(const std::string& path, const std::set<std::string>& allowed);

/// Typed getters; conversion failures report the key and its source line.
int config_int(const ConfigMap& map, const std::string& key, int fallback);
double config_double(const ConfigMap& map, const std::string& key, double fallback);
std::string config_string(const ConfigMap& map, const std::string& key,
                          const std::string& fallback);

}  // namespace morse
