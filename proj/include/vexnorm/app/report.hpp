#pragma once

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "vexnorm/error.hpp"
#include "vexnorm/grid.hpp"

namespace vexnorm::app {

/// Round-trip formatting; identical inputs give identical bytes.
inline std::string format_number(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

inline nlohmann::ordered_json json_number(double x) {
  if (std::isfinite(x)) return x;
  return format_number(x);
}

/// CSV table whose every row ends with the grid it was computed on.
class CsvTable {
 public:
  explicit CsvTable(std::vector<std::string> columns) : columns_(std::move(columns)) {
    for (const char* g : {"n", "k_min", "k_max", "L"}) columns_.emplace_back(g);
  }

  class Row {
   public:
    Row& add(const std::string& s) {
      cells_.push_back(escape(s));
      return *this;
    }
    Row& add(const char* s) { return add(std::string(s)); }
    Row& add(double x) {
      cells_.push_back(format_number(x));
      return *this;
    }
    Row& add(int x) {
      cells_.push_back(std::to_string(x));
      return *this;
    }
    Row& add(std::size_t x) {
      cells_.push_back(std::to_string(x));
      return *this;
    }
    Row& add(bool b) {
      cells_.emplace_back(b ? "true" : "false");
      return *this;
    }

   private:
    friend class CsvTable;
    static std::string escape(const std::string& s) {
      if (s.find_first_of(",\"\n") == std::string::npos) return s;
      std::string out = "\"";
      for (char c : s) {
        if (c == '"') out += '"';
        out += c;
      }
      return out + '"';
    }
    std::vector<std::string> cells_;
  };

  Row& row(const GridSpec& g) {
    rows_.emplace_back();
    grids_.push_back(g);
    return rows_.back();
  }

  std::size_t size() const { return rows_.size(); }

  std::string str() const {
    std::string out;
    auto line = [&out](const std::vector<std::string>& cells) {
      for (std::size_t i = 0; i < cells.size(); ++i) {
        if (i) out += ',';
        out += cells[i];
      }
      out += '\n';
    };
    line(columns_);
    for (std::size_t r = 0; r < rows_.size(); ++r) {
      auto cells = rows_[r].cells_;
      const auto& g = grids_[r];
      for (int v : {g.dimension, g.k_min, g.k_max, g.level}) cells.push_back(std::to_string(v));
      if (cells.size() != columns_.size())
        throw DataError("CSV row " + std::to_string(r) + " has " + std::to_string(cells.size()) +
                        " cells, header has " + std::to_string(columns_.size()));
      line(cells);
    }
    return out;
  }

  void write(const std::filesystem::path& path) const { write_text(path, str()); }

  static void write_text(const std::filesystem::path& path, const std::string& text) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ResourceError("cannot write '" + path.string() + "'");
    out << text;
    if (!out) throw ResourceError("write failed for '" + path.string() + "'");
  }

 private:
  std::vector<std::string> columns_;
  std::vector<Row> rows_;
  std::vector<GridSpec> grids_;
};

inline nlohmann::ordered_json grid_json(const GridSpec& g) {
  return {{"n", g.dimension}, {"k_min", g.k_min}, {"k_max", g.k_max}, {"L", g.level}};
}

}  // namespace vexnorm::app
