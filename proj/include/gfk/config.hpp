#ifndef GFK_CONFIG_HPP
#define GFK_CONFIG_HPP

#include <map>
#include <string>

namespace gfk {

// Plain key=value configuration text. Lines starting with '#' and blank
// lines are ignored; whitespace around keys and values is trimmed.
class ConfigMap {
 public:
  ConfigMap() = default;
  explicit ConfigMap(std::map<std::string, std::string> entries)
      : entries_(std::move(entries)) {}

  bool has(const std::string& key) const { return entries_.count(key) != 0; }

  // Throw ConfigError when the key is missing or the value does not parse.
  std::string get_string(const std::string& key) const;
  double get_double(const std::string& key) const;
  long get_int(const std::string& key) const;
  bool get_bool(const std::string& key) const;  // true/false/1/0

  std::string get_string(const std::string& key, const std::string& fallback) const;
  double get_double(const std::string& key, double fallback) const;
  long get_int(const std::string& key, long fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;

  const std::map<std::string, std::string>& entries() const { return entries_; }

 private:
  std::map<std::string, std::string> entries_;
};

ConfigMap parse_config_text(const std::string& text);
ConfigMap load_config(const std::string& path);

}  // namespace gfk

#endif
