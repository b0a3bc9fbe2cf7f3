#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace condreg::cli {

/// Flat `key = value` document. '#' starts a comment; blank lines are
/// ignored; a key may appear once. Lookups record the key as used so that
/// leftover (misspelt) keys can be reported.
class Config {
 public:
  static Config parse(const std::string& text, const std::string& origin = "config");
  static Config load(const std::string& path);

  bool has(const std::string& key) const;
  std::string text(const std::string& key, const std::optional<std::string>& fallback = std::nullopt) const;
  double real(const std::string& key, const std::optional<double>& fallback = std::nullopt) const;
  int integer(const std::string& key, const std::optional<int>& fallback = std::nullopt) const;
  std::uint64_t unsigned64(const std::string& key, const std::optional<std::uint64_t>& fallback = std::nullopt) const;
  std::vector<double> reals(const std::string& key, const std::optional<std::vector<double>>& fallback = std::nullopt) const;
  std::vector<int> integers(const std::string& key, const std::optional<std::vector<int>>& fallback = std::nullopt) const;
  /// One of `choices`.
  std::string choice(const std::string& key, const std::vector<std::string>& choices,
                     const std::optional<std::string>& fallback = std::nullopt) const;

  void set(const std::string& key, const std::string& value);
  /// Throws InvalidInput listing keys that were never read.
  void finish() const;
  /// key = value lines (sorted) of every key that was read or set, with the
  /// values actually used (fallbacks included).
  std::string echo() const;

 private:
  struct Entry {
    std::string value;
    int line = 0;
  };
  const Entry* find(const std::string& key) const;
  [[noreturn]] void fail(const std::string& key, const std::string& message) const;
  std::string origin_;
  std::map<std::string, Entry> entries_;
  mutable std::set<std::string> used_;
  mutable std::map<std::string, std::string> resolved_;
};

}  // namespace condreg::cli
