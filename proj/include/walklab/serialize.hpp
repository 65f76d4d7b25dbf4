#pragma once
// Result tables with byte-stable rendering.  Doubles are printed with %.17g so
// identical runs produce identical files; writes go through a temp file and a
// rename so readers never observe partial output.

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

namespace walklab {

using Cell = std::variant<std::string, std::int64_t, std::uint64_t, double>;

std::string format_cell(const Cell& c);
std::string format_double(double v);

struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;

  Table() = default;
  explicit Table(std::vector<std::string> cols) : columns(std::move(cols)) {}
  void add(std::vector<Cell> row);
};

std::string render_csv(const Table& t);
nlohmann::ordered_json render_json(const Table& t);  // array of row objects

void write_text_atomic(const std::string& path, const std::string& content);

// "results.csv" + "sup" -> "results.sup.csv"
std::string with_suffix(const std::string& path, const std::string& suffix);

}  // namespace walklab
