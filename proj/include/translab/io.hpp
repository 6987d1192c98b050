#pragma once

// CSV, flat key = value configuration, and run manifests.

#include <cctype>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <limits>
#include <map>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "translab/errors.hpp"

namespace translab::io {

/// Column-oriented table written with 17 significant digits.
struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> data;  // one vector per column

  void add(std::string name, std::vector<double> values) {
    if (!data.empty() && values.size() != data.front().size())
      throw ParameterError("Table: column '" + name + "' has a different length");
    columns.push_back(std::move(name));
    data.push_back(std::move(values));
  }
  std::size_t rows() const { return data.empty() ? 0 : data.front().size(); }
};

inline void write_csv(std::ostream& out, const Table& t) {
  for (std::size_t c = 0; c < t.columns.size(); ++c) out << (c ? "," : "") << t.columns[c];
  out << '\n';
  out << std::setprecision(17);
  for (std::size_t r = 0; r < t.rows(); ++r) {
    for (std::size_t c = 0; c < t.columns.size(); ++c) out << (c ? "," : "") << t.data[c][r];
    out << '\n';
  }
}

inline void write_csv(const std::filesystem::path& path, const Table& t) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  write_csv(out, t);
}

inline std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream in(s);
  while (std::getline(in, cur, sep)) out.push_back(cur);
  if (!s.empty() && s.back() == sep) out.emplace_back();
  return out;
}

/// Reads a CSV written by write_csv (header row, numeric cells).
inline Table read_csv(std::istream& in) {
  Table t;
  std::string line;
  if (!std::getline(in, line)) throw ParameterError("read_csv: empty input");
  t.columns = split(line, ',');
  t.data.resize(t.columns.size());
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty()) continue;
    const auto cells = split(line, ',');
    if (cells.size() != t.columns.size())
      throw ParameterError("read_csv: row " + std::to_string(row) + " has " +
                           std::to_string(cells.size()) + " cells");
    for (std::size_t c = 0; c < cells.size(); ++c) {
      std::size_t used = 0;
      double v = 0.0;
      try {
        v = std::stod(cells[c], &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used == 0) throw ParameterError("read_csv: bad number '" + cells[c] + "'");
      t.data[c].push_back(v);
    }
  }
  return t;
}

inline std::string trim(const std::string& s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

/// `key = value` lines; '#' starts a comment. Later keys win.
inline std::map<std::string, std::string> parse_config(std::istream& in) {
  std::map<std::string, std::string> out;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ParameterError("config line " + std::to_string(lineno) + ": expected key = value");
    const auto key = trim(line.substr(0, eq));
    if (key.empty()) throw ParameterError("config line " + std::to_string(lineno) + ": empty key");
    out[key] = trim(line.substr(eq + 1));
  }
  return out;
}

inline std::map<std::string, std::string> read_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParameterError("cannot read config file " + path.string());
  return parse_config(in);
}

enum class Source { default_value, file, cli };

inline const char* source_name(Source s) {
  switch (s) {
    case Source::cli: return "cli";
    case Source::file: return "file";
    default: return "default";
  }
}

/// Parameters resolved with precedence command line > config file > default.
class ParamSet {
 public:
  struct Entry {
    std::string value;
    Source source = Source::default_value;
  };

  void define(const std::string& key, std::string default_value) {
    entries_[key] = {std::move(default_value), Source::default_value};
  }
  bool known(const std::string& key) const { return entries_.count(key) != 0; }

  void apply(const std::map<std::string, std::string>& values, Source src) {
    for (const auto& [k, v] : values) {
      if (!known(k)) throw ParameterError("unknown parameter '" + k + "'");
      auto& e = entries_[k];
      if (static_cast<int>(src) >= static_cast<int>(e.source)) e = {v, src};
    }
  }

  const std::string& str(const std::string& key) const {
    const auto it = entries_.find(key);
    if (it == entries_.end()) throw ParameterError("parameter '" + key + "' is not defined");
    return it->second.value;
  }
  double num(const std::string& key) const {
    const auto& s = str(key);
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(s, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != s.size() || s.empty())
      throw ParameterError("parameter '" + key + "' = '" + s + "' is not a number");
    return v;
  }
  int integer(const std::string& key) const {
    const double v = num(key);
    if (v != static_cast<double>(static_cast<long>(v)))
      throw ParameterError("parameter '" + key + "' = '" + str(key) + "' is not an integer");
    return static_cast<int>(v);
  }
  bool flag(const std::string& key) const {
    const auto& s = str(key);
    if (s == "true" || s == "1" || s == "yes") return true;
    if (s == "false" || s == "0" || s == "no") return false;
    throw ParameterError("parameter '" + key + "' = '" + s + "' is not a boolean");
  }
  const std::map<std::string, Entry>& entries() const { return entries_; }

 private:
  std::map<std::string, Entry> entries_;
};

/// FNV-1a over the parameter values; names per-run directories.
inline std::string params_digest(const ParamSet& p) {
  std::uint64_t h = 1469598103934665603ull;
  auto mix = [&](const std::string& s) {
    for (unsigned char c : s) {
      h ^= c;
      h *= 1099511628211ull;
    }
    h ^= 0xff;
    h *= 1099511628211ull;
  };
  for (const auto& [k, e] : p.entries()) {
    mix(k);
    mix(e.value);
  }
  std::ostringstream out;
  out << std::hex << std::setw(16) << std::setfill('0') << h;
  return out.str().substr(0, 12);
}

}  // namespace translab::io
