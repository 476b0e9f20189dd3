#include "morse/config.hpp"

#include <cstdlib>
#include <fstream>

#include "morse/errors.hpp"

namespace morse {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

}  // namespace

ConfigMap load_config(const std::string& path, const std::set<std::string>& allowed) {
  std::ifstream in(path);
  if (!in) throw config_error("cannot open config file '" + path + "'");
  ConfigMap map;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos) {
      throw config_error(path + ": line " + std::to_string(lineno) +
                         ": expected 'key = value'");
    }
    const std::string key = trim(t.substr(0, eq));
    const std::string value = trim(t.substr(eq + 1));
    if (key.empty()) {
      throw config_error(path + ": line " + std::to_string(lineno) + ": empty key");
    }
    if (!allowed.count(key)) {
      throw config_error(path + ": line " + std::to_string(lineno) +
                         ": unknown key '" + key + "'");
    }
    map[key] = ConfigEntry{value, lineno};
  }
  return map;
}

int config_int(const ConfigMap& map, const std::string& key, int fallback) {
  const auto it = map.find(key);
  if (it == map.end()) return fallback;
  char* end = nullptr;
  const long v = std::strtol(it->second.value.c_str(), &end, 10);
  if (end == it->second.value.c_str() || *end != '\0') {
    throw config_error("line " + std::to_string(it->second.line) +
                       ": invalid integer for '" + key + "': " + it->second.value);
  }
  return static_cast<int>(v);
}

double config_double(const ConfigMap& map, const std::string& key, double fallback) {
  const auto it = map.find(key);
  if (it == map.end()) return fallback;
  char* end = nullptr;
  const double v = std::strtod(it->second.value.c_str(), &end);
  if (end == it->second.value.c_str() || *end != '\0') {
    throw config_error("line " + std::to_string(it->second.line) +
                       ": invalid number for '" + key + "': " + it->second.value);
  }
  return v;
}

std::string config_string(const ConfigMap& map, const std::string& key,
                          const std::string& fallback) {
  const auto it = map.find(key);
  return it == map.end() ? fallback : it->second.value;
}

}  // namespace morse
