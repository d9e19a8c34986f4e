#pragma once

// Trajectory CSV: header `t,x0,...,x{n-1}[,gain names...]`, values in %.17g so
// a written file reads back bit for bit.

#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "ftd/error.hpp"
#include "ftd/history.hpp"

namespace ftd {

inline std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline void write_row(std::ostream& out, const std::vector<double>& row) {
  for (std::size_t i = 0; i < row.size(); ++i) {
    if (i) out << ',';
    out << format_double(row[i]);
  }
  out << '\n';
}

inline void write_header(std::ostream& out, const std::vector<std::string>& names) {
  for (std::size_t i = 0; i < names.size(); ++i) out << (i ? "," : "") << names[i];
  out << '\n';
}

/// Every `stride`-th grid point plus the last one.
inline void write_trajectory(std::ostream& out, const History& traj,
                             const std::vector<std::string>& gain_names = {},
                             std::size_t stride = 1) {
  if (stride == 0) throw std::invalid_argument("stride must be >= 1");
  std::vector<std::string> header{"t"};
  for (std::size_t i = 0; i < traj.dimension(); ++i) header.push_back("x" + std::to_string(i));
  for (std::size_t j = 0; j < traj.gain_dimension(); ++j) {
    header.push_back(j < gain_names.size() ? gain_names[j] : "g" + std::to_string(j));
  }
  write_header(out, header);
  std::vector<double> row;
  auto emit = [&](std::size_t k) {
    row.assign(1, traj.time(k));
    const auto x = traj.state(k);
    row.insert(row.end(), x.begin(), x.end());
    const auto g = traj.gains(k);
    row.insert(row.end(), g.begin(), g.end());
    write_row(out, row);
  };
  for (std::size_t k = 0; k < traj.size(); k += stride) emit(k);
  if (traj.size() > 0 && (traj.size() - 1) % stride != 0) emit(traj.size() - 1);
}

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
};

inline CsvTable read_csv(std::istream& in) {
  CsvTable table;
  std::string line;
  if (!std::getline(in, line)) throw Error("empty CSV input");
  {
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) table.header.push_back(cell);
  }
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      try {
        std::size_t used = 0;
        row.push_back(std::stod(cell, &used));
        if (used != cell.size()) throw std::invalid_argument(cell);
      } catch (const std::exception&) {
        throw Error("CSV line " + std::to_string(lineno) + ": bad number '" + cell + "'");
      }
    }
    if (row.size() != table.header.size()) {
      throw Error("CSV line " + std::to_string(lineno) + ": expected " +
                  std::to_string(table.header.size()) + " columns");
    }
    table.rows.push_back(std::move(row));
  }
  return table;
}

/// Rebuild a History from a trajectory CSV. Columns named x<k> are states,
/// the rest after `t` are gains. The grid step is taken from the first two
/// rows, so files written with a stride come back on the coarser grid (the
/// closing off-grid row is dropped).
inline History read_trajectory(std::istream& in, std::vector<std::string>* gain_names = nullptr) {
  const CsvTable table = read_csv(in);
  if (table.header.empty() || table.header[0] != "t") throw Error("trajectory CSV must start with t");
  if (table.rows.size() < 2) throw Error("trajectory CSV needs at least two rows");
  std::size_t dim = 0;
  while (dim + 1 < table.header.size() && table.header[dim + 1] == "x" + std::to_string(dim)) ++dim;
  if (dim == 0) throw Error("trajectory CSV has no state columns");
  const std::size_t gdim = table.header.size() - 1 - dim;
  if (gain_names) gain_names->assign(table.header.begin() + 1 + dim, table.header.end());

  const double t0 = table.rows[0][0];
  const double h = table.rows[1][0] - t0;
  History traj(t0, h, dim, gdim);
  traj.reserve(table.rows.size());
  for (std::size_t k = 0; k < table.rows.size(); ++k) {
    const auto& r = table.rows[k];
    if (std::abs(r[0] - traj.time(k)) > 1e-6 * h) {
      // The closing row of a strided file sits off the coarse grid.
      if (k + 1 == table.rows.size()) break;
      throw Error("trajectory CSV row " + std::to_string(k + 2) + " is off the uniform grid");
    }
    traj.push(std::span<const double>(r).subspan(1, dim), std::span<const double>(r).subspan(1 + dim));
  }
  return traj;
}

}  // namespace ftd
