#pragma once

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "mtrob/errors.hpp"
#include "mtrob/types.hpp"

namespace mtrob {

/// Versioned result-CSV header. Columns never change order within a version.
inline constexpr const char* kResultCsvHeader =
    "experiment_id,d,T,k,sigma,trial,mse_closed,mse_mc,mc_std_error,slope,seed";

/// One sweep cell. Optional fields print as empty CSV cells.
struct ResultRow {
  std::string experiment_id;
  Index d = 0;
  Index t = 0;
  Index k = 0;
  double sigma = 0.0;
  int trial = 0;
  std::optional<double> mse_closed;
  std::optional<double> mse_mc;
  std::optional<double> mc_std_error;
  double slope = 0.0;
  std::uint64_t seed = 0;
};

/// Fixed decimal formatting: 17 significant digits, '.' separator,
/// locale-independent. Reruns with the same config are byte-identical.
inline std::string format_real(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

inline std::string format_row(const ResultRow& row) {
  std::string line = row.experiment_id;
  line += ',';
  line += std::to_string(row.d);
  line += ',';
  line += std::to_string(row.t);
  line += ',';
  line += std::to_string(row.k);
  line += ',';
  line += format_real(row.sigma);
  line += ',';
  line += std::to_string(row.trial);
  line += ',';
  if (row.mse_closed) line += format_real(*row.mse_closed);
  line += ',';
  if (row.mse_mc) line += format_real(*row.mse_mc);
  line += ',';
  if (row.mc_std_error) line += format_real(*row.mc_std_error);
  line += ',';
  line += format_real(row.slope);
  line += ',';
  line += std::to_string(row.seed);
  return line;
}

/// Writes content to `path` via a temp file and atomic rename, so failed
/// runs never leave partial output behind.
inline void write_file_atomic(const std::filesystem::path& path,
                              const std::string& content) {
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
  }
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write '" + tmp.string() + "'");
    out << content;
    if (!out) {
      std::error_code ec;
      std::filesystem::remove(tmp, ec);
      throw IoError("short write to '" + tmp.string() + "'");
    }
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw IoError("cannot rename temp file onto '" + path.string() + "'");
  }
}

inline void write_result_csv(const std::filesystem::path& path,
                             const std::vector<ResultRow>& rows) {
  std::string content = kResultCsvHeader;
  content += '\n';
  for (const ResultRow& row : rows) {
    content += format_row(row);
    content += '\n';
  }
  write_file_atomic(path, content);
}

// ---------------------------------------------------------------------------
// Flat key=value configuration files.

using ConfigMap = std::map<std::string, std::string>;

namespace detail {

inline std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r\n");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t\r\n");
  return s.substr(begin, end - begin + 1);
}

}  // namespace detail

/// Parses `key = value` lines; '#' starts a comment, blank lines ignored.
inline ConfigMap parse_config_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config '" + path.string() + "'");
  ConfigMap map;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const std::string stripped = detail::trim(line);
    if (stripped.empty()) continue;
    const auto eq = stripped.find('=');
    if (eq == std::string::npos)
      throw ParameterError(path.string() + ":" + std::to_string(lineno) +
                           ": expected key=value, got '" + stripped + "'");
    const std::string key = detail::trim(stripped.substr(0, eq));
    const std::string value = detail::trim(stripped.substr(eq + 1));
    if (key.empty())
      throw ParameterError(path.string() + ":" + std::to_string(lineno) +
                           ": empty key");
    map[key] = value;
  }
  return map;
}

namespace detail {

inline double parse_double(const std::string& value, const std::string& key) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(value, &pos);
    if (pos != value.size()) throw std::invalid_argument("trailing chars");
    return v;
  } catch (const std::exception&) {
    throw ParameterError("config key '" + key + "': cannot parse '" + value +
                         "' as a real number");
  }
}

inline std::int64_t parse_int(const std::string& value, const std::string& key) {
  try {
    std::size_t pos = 0;
    const long long v = std::stoll(value, &pos);
    if (pos != value.size()) throw std::invalid_argument("trailing chars");
    return v;
  } catch (const std::exception&) {
    throw ParameterError("config key '" + key + "': cannot parse '" + value +
                         "' as an integer");
  }
}

inline std::uint64_t parse_u64(const std::string& value, const std::string& key) {
  try {
    std::size_t pos = 0;
    const unsigned long long v = std::stoull(value, &pos);
    if (pos != value.size()) throw std::invalid_argument("trailing chars");
    return v;
  } catch (const std::exception&) {
    throw ParameterError("config key '" + key + "': cannot parse '" + value +
                         "' as an unsigned integer");
  }
}

}  // namespace detail

inline std::vector<double> parse_real_list(const std::string& value,
                                           const std::string& key) {
  std::vector<double> out;
  std::stringstream ss(value);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const std::string stripped = detail::trim(item);
    if (stripped.empty()) continue;
    out.push_back(detail::parse_double(stripped, key));
  }
  if (out.empty())
    throw ParameterError("config key '" + key + "': empty list");
  return out;
}

/// Pairs as "0:1,2:3,4:5".
inline std::vector<std::pair<int, int>> parse_pair_list(const std::string& value,
                                                        const std::string& key) {
  std::vector<std::pair<int, int>> out;
  std::stringstream ss(value);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const std::string stripped = detail::trim(item);
    if (stripped.empty()) continue;
    const auto colon = stripped.find(':');
    if (colon == std::string::npos)
      throw ParameterError("config key '" + key + "': expected a:b, got '" +
                           stripped + "'");
    out.emplace_back(
        static_cast<int>(detail::parse_int(
            detail::trim(stripped.substr(0, colon)), key)),
        static_cast<int>(detail::parse_int(
            detail::trim(stripped.substr(colon + 1)), key)));
  }
  if (out.empty())
    throw ParameterError("config key '" + key + "': empty pair list");
  return out;
}

/// Typed view over a ConfigMap that tracks consumed keys, so callers can
/// reject unknown ones by name.
class ConfigReader {
 public:
  explicit ConfigReader(ConfigMap map) : map_(std::move(map)) {}

  bool has(const std::string& key) const { return map_.count(key) > 0; }

  std::string get_string(const std::string& key, const std::string& fallback) {
    consumed_.insert(key);
    const auto it = map_.find(key);
    return it == map_.end() ? fallback : it->second;
  }
  double get_real(const std::string& key, double fallback) {
    consumed_.insert(key);
    const auto it = map_.find(key);
    return it == map_.end() ? fallback : detail::parse_double(it->second, key);
  }
  std::int64_t get_int(const std::string& key, std::int64_t fallback) {
    consumed_.insert(key);
    const auto it = map_.find(key);
    return it == map_.end() ? fallback : detail::parse_int(it->second, key);
  }
  std::uint64_t get_u64(const std::string& key, std::uint64_t fallback) {
    consumed_.insert(key);
    const auto it = map_.find(key);
    return it == map_.end() ? fallback : detail::parse_u64(it->second, key);
  }
  std::vector<double> get_real_list(const std::string& key,
                                    std::vector<double> fallback) {
    consumed_.insert(key);
    const auto it = map_.find(key);
    return it == map_.end() ? std::move(fallback)
                            : parse_real_list(it->second, key);
  }
  std::vector<std::pair<int, int>> get_pair_list(
      const std::string& key, std::vector<std::pair<int, int>> fallback) {
    consumed_.insert(key);
    const auto it = map_.find(key);
    return it == map_.end() ? std::move(fallback)
                            : parse_pair_list(it->second, key);
  }

  /// Throws if the map holds keys no getter asked for.
  void reject_unknown_keys() const {
    for (const auto& [key, value] : map_)
      if (consumed_.find(key) == consumed_.end())
        throw ParameterError("unknown config key '" + key + "'");
  }

 private:
  ConfigMap map_;
  std::set<std::string> consumed_;
};

// ---------------------------------------------------------------------------
// Headered feature CSV: one row per sample, numeric columns, the last
// column is an integer class label.

inline std::pair<Matrix, std::vector<int>> load_feature_csv(
    const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  std::string line;
  if (!std::getline(in, line))
    throw FormatError(path.string() + ": missing header line");
  std::vector<std::vector<double>> rows;
  std::vector<int> labels;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (detail::trim(line).empty()) continue;
    std::vector<double> fields;
    std::stringstream ss(line);
    std::string item;
    while (std::getline(ss, item, ','))
      fields.push_back(detail::parse_double(
          detail::trim(item), path.string() + ":" + std::to_string(lineno)));
    if (fields.size() < 2)
      throw FormatError(path.string() + ":" + std::to_string(lineno) +
                        ": need at least one feature column plus a label");
    if (!rows.empty() && fields.size() != rows.front().size() + 1)
      throw FormatError(path.string() + ":" + std::to_string(lineno) +
                        ": inconsistent column count");
    const double label = fields.back();
    fields.pop_back();
    if (label != static_cast<double>(static_cast<int>(label)))
      throw FormatError(path.string() + ":" + std::to_string(lineno) +
                        ": label column must be an integer");
    labels.push_back(static_cast<int>(label));
    rows.push_back(std::move(fields));
  }
  if (rows.empty())
    throw FormatError(path.string() + ": no data rows");
  Matrix features(static_cast<Index>(rows.size()),
                  static_cast<Index>(rows.front().size()));
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < rows[i].size(); ++j)
      features(static_cast<Index>(i), static_cast<Index>(j)) = rows[i][j];
  return {std::move(features), std::move(labels)};
}

}  // namespace mtrob
