#pragma once

// Tabular artifacts: header block, fixed columns, 17-significant-digit cells.

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <openssl/evp.h>

namespace zmgx::driver {

inline constexpr const char* kVersion = "0.1.0";

inline std::string sha256_hex(const std::string& data) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), md, &len, EVP_sha256(), nullptr) != 1)
    throw std::runtime_error("sha256 failed");
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(hex[md[i] >> 4]);
    out.push_back(hex[md[i] & 15]);
  }
  return out;
}

struct Cell {
  std::string text;
  bool is_string = false;
};

inline Cell cell(double v) {
  if (std::isnan(v)) return {"nan", false};
  if (std::isinf(v)) return {v > 0 ? "inf" : "-inf", false};
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return {buf, false};
}
inline Cell cell(std::uint64_t v) { return {std::to_string(v), false}; }
inline Cell cell(int v) { return {std::to_string(v), false}; }
inline Cell cell(bool v) { return {v ? "true" : "false", false}; }
inline Cell cell(const std::string& v) { return {v, true}; }
inline Cell cell(const char* v) { return {v, true}; }

struct Table {
  std::string name;  // file suffix: "" for the main table, "summary", "mc", ...
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;

  template <class... Ts>
  void add(const Ts&... values) {
    if (sizeof...(Ts) != columns.size()) throw std::logic_error("Table::add: column count mismatch in " + name);
    rows.push_back({cell(values)...});
  }
};

struct Header {
  std::string config_sha;
  std::uint64_t seed = 0;
  std::string rng;
  std::string experiment;
};

inline std::string json_quote(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"' || c == '\\') out.push_back('\\');
    out.push_back(c);
  }
  return out + "\"";
}

inline std::string render_csv(const Header& h, const Table& t) {
  std::string out;
  out += "# config_sha: " + h.config_sha + "\n";
  out += "# seed: " + std::to_string(h.seed) + "\n";
  out += "# rng: " + h.rng + "\n";
  out += "# version: " + std::string(kVersion) + "\n";
  out += "# experiment: " + h.experiment + "\n";
  for (std::size_t i = 0; i < t.columns.size(); ++i) out += (i ? "," : "") + t.columns[i];
  out += "\n";
  for (const auto& row : t.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) out += (i ? "," : "") + row[i].text;
    out += "\n";
  }
  return out;
}

// Non-finite numbers are written as strings so the file stays valid JSON.
inline std::string render_json(const Header& h, const Table& t) {
  auto value = [](const Cell& c) {
    if (c.is_string || c.text == "nan" || c.text == "inf" || c.text == "-inf") return json_quote(c.text);
    return c.text;
  };
  std::string out = "{\n";
  out += "  \"config_sha\": " + json_quote(h.config_sha) + ",\n";
  out += "  \"seed\": " + std::to_string(h.seed) + ",\n";
  out += "  \"rng\": " + json_quote(h.rng) + ",\n";
  out += "  \"version\": " + json_quote(kVersion) + ",\n";
  out += "  \"experiment\": " + json_quote(h.experiment) + ",\n";
  out += "  \"columns\": [";
  for (std::size_t i = 0; i < t.columns.size(); ++i) out += (i ? ", " : "") + json_quote(t.columns[i]);
  out += "],\n  \"rows\": [";
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    out += r ? ",\n    [" : "\n    [";
    for (std::size_t i = 0; i < t.rows[r].size(); ++i) out += (i ? ", " : "") + value(t.rows[r][i]);
    out += "]";
  }
  out += t.rows.empty() ? "]\n}\n" : "\n  ]\n}\n";
  return out;
}

inline std::filesystem::path write_table(const std::filesystem::path& dir, const std::string& prefix, bool json,
                                         const Header& h, const Table& t) {
  std::filesystem::create_directories(dir);
  std::string stem = prefix + "_" + h.experiment;
  if (!t.name.empty()) stem += "_" + t.name;
  const auto path = dir / (stem + (json ? ".json" : ".csv"));
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << (json ? render_json(h, t) : render_csv(h, t));
  return path;
}

}  // namespace zmgx::driver
