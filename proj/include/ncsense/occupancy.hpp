#pragma once

// Spectrum occupancy: which subcarrier is usable in which symbol.
// Rows are subcarriers, columns are symbols; column m is the per-symbol
// occupancy sequence and the whole grid is the stacked occupancy matrix.

#include <cstdint>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "ncsense/config.hpp"
#include "ncsense/errors.hpp"

namespace ncsense {

// Ordered positions picked out of a parent vector. Stands in for a 0/1
// selection matrix: applying it is a gather, its transpose a scatter.
struct SelectionIndex {
  std::vector<int> indices;
  int parent_len = 0;

  std::size_t size() const { return indices.size(); }
  bool empty() const { return indices.empty(); }
  bool operator==(const SelectionIndex&) const = default;
};

inline bool is_valid_selection(const SelectionIndex& sel) {
  if (sel.parent_len <= 0) return false;
  for (std::size_t i = 0; i < sel.indices.size(); ++i) {
    if (sel.indices[i] < 0 || sel.indices[i] >= sel.parent_len) return false;
    if (i > 0 && sel.indices[i] <= sel.indices[i - 1]) return false;
  }
  return true;
}

class OccupancyMask {
 public:
  OccupancyMask() = default;
  OccupancyMask(int n_subcarriers, int n_symbols, std::uint8_t fill = 0)
      : rows_(n_subcarriers), cols_(n_symbols),
        bits_(static_cast<std::size_t>(n_subcarriers) * n_symbols, fill ? 1 : 0) {
    if (n_subcarriers <= 0 || n_symbols <= 0) {
      throw DimensionError("occupancy mask needs positive dimensions");
    }
  }

  int subcarriers() const { return rows_; }
  int symbols() const { return cols_; }

  bool at(int subcarrier, int symbol) const { return bits_[offset(subcarrier, symbol)] != 0; }
  void set(int subcarrier, int symbol, bool on) { bits_[offset(subcarrier, symbol)] = on ? 1 : 0; }

  int column_count(int symbol) const {
    int n = 0;
    for (int i = 0; i < rows_; ++i) n += at(i, symbol);
    return n;
  }

  int row_count(int subcarrier) const {
    int n = 0;
    for (int m = 0; m < cols_; ++m) n += at(subcarrier, m);
    return n;
  }

  int total() const {
    int n = 0;
    for (auto b : bits_) n += b;
    return n;
  }

  bool operator==(const OccupancyMask&) const = default;

 private:
  std::size_t offset(int i, int m) const {
    if (i < 0 || i >= rows_ || m < 0 || m >= cols_) {
      throw std::out_of_range("occupancy index (" + std::to_string(i) + ", " +
                              std::to_string(m) + ") outside " + std::to_string(rows_) +
                              "x" + std::to_string(cols_));
    }
    return static_cast<std::size_t>(m) * rows_ + i;
  }

  int rows_ = 0;
  int cols_ = 0;
  std::vector<std::uint8_t> bits_;  // column-major
};

namespace detail {

// Edge-band pattern: first N_m/2 and last N_m/2 subcarriers on.
inline bool edge_band(int i, int n_sub, int n_occ) {
  const int half = n_occ / 2;
  return i < half || i >= n_sub - half;
}

}  // namespace detail

// Static occupancy: the same edge-band pattern in every symbol.
inline OccupancyMask scenario1_mask(const SimulationConfig& cfg) {
  if (cfg.n_occupied % 2 != 0) {
    throw ParityError("scenario 1 needs an even n_occupied, got " +
                      std::to_string(cfg.n_occupied));
  }
  if (cfg.n_occupied > cfg.n_subcarriers) {
    throw DimensionError("n_occupied exceeds n_subcarriers");
  }
  OccupancyMask mask(cfg.n_subcarriers, cfg.n_symbols);
  for (int m = 0; m < cfg.n_symbols; ++m) {
    for (int i = 0; i < cfg.n_subcarriers; ++i) {
      mask.set(i, m, detail::edge_band(i, cfg.n_subcarriers, cfg.n_occupied));
    }
  }
  return mask;
}

// Occupancy switched half-way through the frame: the edge-band pattern for
// the first M_sym/2 symbols, its complement (the centre band) afterwards.
inline OccupancyMask scenario2_mask(const SimulationConfig& cfg) {
  if (cfg.n_occupied % 2 != 0 || cfg.n_symbols % 2 != 0) {
    throw ParityError("scenario 2 needs even n_occupied and n_symbols, got " +
                      std::to_string(cfg.n_occupied) + " and " +
                      std::to_string(cfg.n_symbols));
  }
  if (cfg.n_occupied > cfg.n_subcarriers) {
    throw DimensionError("n_occupied exceeds n_subcarriers");
  }
  OccupancyMask mask(cfg.n_subcarriers, cfg.n_symbols);
  const int split = cfg.n_symbols / 2;
  for (int m = 0; m < cfg.n_symbols; ++m) {
    for (int i = 0; i < cfg.n_subcarriers; ++i) {
      const bool edge = detail::edge_band(i, cfg.n_subcarriers, cfg.n_occupied);
      mask.set(i, m, m < split ? edge : !edge);
    }
  }
  return mask;
}

inline SelectionIndex column_selection(const OccupancyMask& mask, int symbol) {
  if (symbol < 0 || symbol >= mask.symbols()) {
    throw std::out_of_range("symbol index " + std::to_string(symbol) + " out of range");
  }
  SelectionIndex sel{{}, mask.subcarriers()};
  for (int i = 0; i < mask.subcarriers(); ++i) {
    if (mask.at(i, symbol)) sel.indices.push_back(i);
  }
  return sel;
}

inline SelectionIndex row_selection(const OccupancyMask& mask, int subcarrier) {
  if (subcarrier < 0 || subcarrier >= mask.subcarriers()) {
    throw std::out_of_range("subcarrier index " + std::to_string(subcarrier) +
                            " out of range");
  }
  SelectionIndex sel{{}, mask.symbols()};
  for (int m = 0; m < mask.symbols(); ++m) {
    if (mask.at(subcarrier, m)) sel.indices.push_back(m);
  }
  return sel;
}

// Mask CSV: one line per subcarrier, one 0/1 field per symbol, no header.
inline OccupancyMask read_mask_csv(std::istream& in) {
  std::vector<std::vector<std::uint8_t>> rows;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::uint8_t> row;
    std::stringstream fields(line);
    std::string field;
    while (std::getline(fields, field, ',')) {
      const auto v = detail::trim(field);
      if (v == "0") {
        row.push_back(0);
      } else if (v == "1") {
        row.push_back(1);
      } else {
        throw ConfigError("mask csv line " + std::to_string(line_no) + ": expected 0 or 1, got '" +
                          std::string(v) + "'");
      }
    }
    if (!rows.empty() && row.size() != rows.front().size()) {
      throw ConfigError("mask csv line " + std::to_string(line_no) + ": ragged row");
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty() || rows.front().empty()) throw ConfigError("mask csv is empty");
  OccupancyMask mask(static_cast<int>(rows.size()), static_cast<int>(rows.front().size()));
  for (int i = 0; i < mask.subcarriers(); ++i) {
    for (int m = 0; m < mask.symbols(); ++m) mask.set(i, m, rows[i][m] != 0);
  }
  return mask;
}

inline OccupancyMask load_mask_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open mask file '" + path + "'");
  return read_mask_csv(in);
}

inline void write_mask_csv(std::ostream& out, const OccupancyMask& mask) {
  for (int i = 0; i < mask.subcarriers(); ++i) {
    for (int m = 0; m < mask.symbols(); ++m) {
      if (m) out << ',';
      out << (mask.at(i, m) ? '1' : '0');
    }
    out << '\n';
  }
}

}  // namespace ncsense
