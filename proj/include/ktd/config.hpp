#pragma once

// Minimal key = value configuration files.  Lines are `key = value`; blank
// lines and lines starting with '#' are ignored.  Values keep everything
// after the first '=' (trimmed), so lists can be comma-separated strings.

#include <map>
#include <string>
#include <vector>

namespace ktd {

class Config {
 public:
  static Config parse(const std::string& text);
  static Config load(const std::string& path);

  bool has(const std::string& key) const;
  std::string get(const std::string& key, const std::string& fallback) const;
  std::string require(const std::string& key) const;  // throws if missing
  double get_num(const std::string& key, double fallback) const;
  int get_int(const std::string& key, int fallback) const;
  // Comma-separated numeric list; fallback returned when the key is absent.
  std::vector<double> get_list(const std::string& key,
                               std::vector<double> fallback) const;

  const std::map<std::string, std::string>& entries() const { return kv_; }

 private:
  std::map<std::string, std::string> kv_;
};

}  // namespace ktd
