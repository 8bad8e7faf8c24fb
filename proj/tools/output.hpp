// Copyright 2026 The fkspin Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

namespace fkspin::cli {

using Cell = std::variant<double, std::int64_t, std::string>;

struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;

  void add(std::vector<Cell> row) { rows.push_back(std::move(row)); }
};

inline Cell flag(bool b) { return std::string(b ? "true" : "false"); }
inline Cell integer(std::uint64_t v) { return static_cast<std::int64_t>(v); }

inline void write_csv(std::ostream& os, const Table& t) {
  os << std::setprecision(17);
  for (std::size_t i = 0; i < t.columns.size(); ++i) os << (i ? "," : "") << t.columns[i];
  os << '\n';
  for (const auto& row : t.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) os << ',';
      std::visit([&os](const auto& v) { os << v; }, row[i]);
    }
    os << '\n';
  }
}

inline nlohmann::ordered_json to_json(const Table& t) {
  auto out = nlohmann::ordered_json::array();
  for (const auto& row : t.rows) {
    nlohmann::ordered_json obj;
    for (std::size_t i = 0; i < row.size(); ++i) {
      std::visit([&](const auto& v) { obj[t.columns[i]] = v; }, row[i]);
    }
    out.push_back(std::move(obj));
  }
  return out;
}

}  // namespace fkspin::cli
