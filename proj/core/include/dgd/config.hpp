#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <string_view>

namespace dgd {

/// Flat key/value configuration with dotted section names:
///
///   # comment
///   teachers.count = 20
///   aggregation.noise_scale = 40
///
/// Unknown keys are reported by unused_keys() so typos do not pass silently.
class Config {
 public:
  static Config parse(std::string_view text);
  static Config load(const std::filesystem::path& path);

  void set(std::string key, std::string value) { values_[std::move(key)] = std::move(value); }
  bool contains(std::string_view key) const { return values_.find(std::string(key)) != values_.end(); }

  std::string get_string(std::string_view key, std::string_view fallback) const;
  double get_double(std::string_view key, double fallback) const;
  std::size_t get_size(std::string_view key, std::size_t fallback) const;
  std::uint64_t get_u64(std::string_view key, std::uint64_t fallback) const;
  bool get_bool(std::string_view key, bool fallback) const;

  std::set<std::string> unused_keys() const;
  const std::map<std::string, std::string>& values() const noexcept { return values_; }

 private:
  const std::string* lookup(std::string_view key) const;

  std::map<std::string, std::string> values_;
  mutable std::set<std::string> used_;
};

}  // namespace dgd
