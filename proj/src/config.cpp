#include "ktd/config.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

namespace ktd {

namespace {

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

}  // namespace

Config Config::parse(const std::string& text) {
  Config cfg;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos) {
      throw std::runtime_error("config: line " + std::to_string(lineno) +
                               " has no '='");
    }
    const std::string key = trim(t.substr(0, eq));
    if (key.empty()) {
      throw std::runtime_error("config: empty key on line " +
                               std::to_string(lineno));
    }
    cfg.kv_[key] = trim(t.substr(eq + 1));
  }
  return cfg;
}

Config Config::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("config: cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse(buf.str());
}

bool Config::has(const std::string& key) const { return kv_.count(key) > 0; }

std::string Config::get(const std::string& key,
                        const std::string& fallback) const {
  const auto it = kv_.find(key);
  return it == kv_.end() ? fallback : it->second;
}

std::string Config::require(const std::string& key) const {
  const auto it = kv_.find(key);
  if (it == kv_.end()) throw std::runtime_error("config: missing key " + key);
  return it->second;
}

double Config::get_num(const std::string& key, double fallback) const {
  const auto it = kv_.find(key);
  if (it == kv_.end()) return fallback;
  size_t used = 0;
  const double v = std::stod(it->second, &used);
  if (trim(it->second.substr(used)) != "") {
    throw std::runtime_error("config: key " + key + " is not a number");
  }
  return v;
}

int Config::get_int(const std::string& key, int fallback) const {
  const double v = get_num(key, fallback);
  const int i = static_cast<int>(v);
  if (static_cast<double>(i) != v) {
    throw std::runtime_error("config: key " + key + " is not an integer");
  }
  return i;
}

std::vector<double> Config::get_list(const std::string& key,
                                     std::vector<double> fallback) const {
  const auto it = kv_.find(key);
  if (it == kv_.end()) return fallback;
  std::vector<double> out;
  std::istringstream in(it->second);
  std::string item;
  while (std::getline(in, item, ',')) {
    const std::string t = trim(item);
    if (!t.empty()) out.push_back(std::stod(t));
  }
  return out;
}

}  // namespace ktd
