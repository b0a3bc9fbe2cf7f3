#include "config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "condreg/error.hpp"
#include "condreg/io.hpp"

namespace condreg::cli {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s) {
  std::istringstream in(s);
  std::vector<std::string> out;
  for (std::string w; in >> w;) out.push_back(w);
  return out;
}

std::optional<double> to_real(const std::string& w) {
  char* end = nullptr;
  const double v = std::strtod(w.c_str(), &end);
  if (w.empty() || end != w.c_str() + w.size() || !std::isfinite(v)) return std::nullopt;
  return v;
}

std::optional<long long> to_integer(const std::string& w) {
  char* end = nullptr;
  const long long v = std::strtoll(w.c_str(), &end, 10);
  if (w.empty() || end != w.c_str() + w.size()) return std::nullopt;
  return v;
}

template <class T>
std::string join(const std::vector<T>& xs) {
  std::string out;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (i) out += ' ';
    if constexpr (std::is_floating_point_v<T>) {
      out += io::format_real(xs[i]);
    } else {
      out += std::to_string(xs[i]);
    }
  }
  return out;
}

}  // namespace

Config Config::parse(const std::string& text, const std::string& origin) {
  Config c;
  c.origin_ = origin;
  std::istringstream in(text);
  std::string line;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw InvalidInput(origin + ":" + std::to_string(number) + ": expected 'key = value'");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) throw InvalidInput(origin + ":" + std::to_string(number) + ": empty key");
    if (c.entries_.count(key)) {
      throw InvalidInput(origin + ":" + std::to_string(number) + ": key '" + key + "' repeats line " +
                         std::to_string(c.entries_[key].line));
    }
    c.entries_[key] = {value, number};
  }
  return c;
}

Config Config::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidInput("cannot read config " + path);
  std::ostringstream text;
  text << in.rdbuf();
  return parse(text.str(), path);
}

const Config::Entry* Config::find(const std::string& key) const {
  used_.insert(key);
  const auto it = entries_.find(key);
  return it == entries_.end() ? nullptr : &it->second;
}

void Config::fail(const std::string& key, const std::string& message) const {
  const auto it = entries_.find(key);
  const std::string where = it == entries_.end() ? origin_ : origin_ + ":" + std::to_string(it->second.line);
  throw InvalidInput(where + ": " + key + ": " + message);
}

bool Config::has(const std::string& key) const { return entries_.count(key) > 0; }

std::string Config::text(const std::string& key, const std::optional<std::string>& fallback) const {
  const Entry* e = find(key);
  if (!e) {
    if (!fallback) fail(key, "missing required key");
    resolved_[key] = *fallback;
    return *fallback;
  }
  if (e->value.empty()) fail(key, "empty value");
  resolved_[key] = e->value;
  return e->value;
}

double Config::real(const std::string& key, const std::optional<double>& fallback) const {
  const Entry* e = find(key);
  if (!e) {
    if (!fallback) fail(key, "missing required key");
    resolved_[key] = io::format_real(*fallback);
    return *fallback;
  }
  const auto v = to_real(e->value);
  if (!v) fail(key, "expected a real number, got '" + e->value + "'");
  resolved_[key] = e->value;
  return *v;
}

int Config::integer(const std::string& key, const std::optional<int>& fallback) const {
  const Entry* e = find(key);
  if (!e) {
    if (!fallback) fail(key, "missing required key");
    resolved_[key] = std::to_string(*fallback);
    return *fallback;
  }
  const auto v = to_integer(e->value);
  if (!v || *v < -2147483647LL || *v > 2147483647LL) fail(key, "expected an integer, got '" + e->value + "'");
  resolved_[key] = e->value;
  return static_cast<int>(*v);
}

std::uint64_t Config::unsigned64(const std::string& key, const std::optional<std::uint64_t>& fallback) const {
  const Entry* e = find(key);
  if (!e) {
    if (!fallback) fail(key, "missing required key");
    resolved_[key] = std::to_string(*fallback);
    return *fallback;
  }
  const std::string& w = e->value;
  char* end = nullptr;
  const unsigned long long v = std::strtoull(w.c_str(), &end, 10);
  if (w.empty() || w[0] == '-' || end != w.c_str() + w.size()) fail(key, "expected an unsigned integer, got '" + w + "'");
  resolved_[key] = w;
  return v;
}

std::vector<double> Config::reals(const std::string& key, const std::optional<std::vector<double>>& fallback) const {
  const Entry* e = find(key);
  if (!e) {
    if (!fallback) fail(key, "missing required key");
    resolved_[key] = join(*fallback);
    return *fallback;
  }
  std::vector<double> out;
  for (const std::string& w : split(e->value)) {
    const auto v = to_real(w);
    if (!v) fail(key, "expected real numbers, got '" + w + "'");
    out.push_back(*v);
  }
  if (out.empty()) fail(key, "empty list");
  resolved_[key] = e->value;
  return out;
}

std::vector<int> Config::integers(const std::string& key, const std::optional<std::vector<int>>& fallback) const {
  const Entry* e = find(key);
  if (!e) {
    if (!fallback) fail(key, "missing required key");
    resolved_[key] = join(*fallback);
    return *fallback;
  }
  std::vector<int> out;
  for (const std::string& w : split(e->value)) {
    const auto v = to_integer(w);
    if (!v) fail(key, "expected integers, got '" + w + "'");
    out.push_back(static_cast<int>(*v));
  }
  if (out.empty()) fail(key, "empty list");
  resolved_[key] = e->value;
  return out;
}

std::string Config::choice(const std::string& key, const std::vector<std::string>& choices,
                           const std::optional<std::string>& fallback) const {
  const std::string v = text(key, fallback);
  if (std::find(choices.begin(), choices.end(), v) == choices.end()) {
    std::string list;
    for (const auto& c : choices) list += (list.empty() ? "" : ", ") + c;
    fail(key, "'" + v + "' is not one of " + list);
  }
  return v;
}

void Config::set(const std::string& key, const std::string& value) {
  auto& e = entries_[key];
  e.value = value;
}

void Config::finish() const {
  std::string unknown;
  for (const auto& [key, entry] : entries_) {
    if (!used_.count(key)) unknown += (unknown.empty() ? "" : ", ") + key + " (line " + std::to_string(entry.line) + ")";
  }
  if (!unknown.empty()) throw InvalidInput(origin_ + ": unknown keys for this command: " + unknown);
}

std::string Config::echo() const {
  std::string out;
  for (const auto& [key, value] : resolved_) out += key + " = " + value + "\n";
  return out;
}

}  // namespace condreg::cli
