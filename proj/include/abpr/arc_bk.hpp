#pragma once

#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "abpr/engine.hpp"
#include "abpr/term.hpp"

namespace abpr::bk {

using Coord = std::pair<long long, long long>;  // (row, col), 1-indexed

/// Validated ARC grid: rectangular, values in 0..9, (1,1) top-left.
struct Grid {
  size_t rows = 0;
  size_t cols = 0;
  std::vector<int> cells;  // row-major

  int at(size_t r, size_t c) const { return cells[(r - 1) * cols + (c - 1)]; }
  int& at(size_t r, size_t c) { return cells[(r - 1) * cols + (c - 1)]; }
  bool operator==(const Grid& o) const = default;

  static Grid from_rows(const std::vector<std::vector<int>>& rows);
  std::vector<std::vector<int>> to_rows() const;
  /// Throws Error(GridInvariant) on ragged rows or values outside 0..9.
  void validate() const;
};

logic::TermPtr grid_to_term(const Grid& g);
/// Strict conversion: rectangular proper list of proper int-lists required.
std::optional<Grid> grid_from_term(const logic::TermPtr& t);

/// Space-separated digit rows, one row per line.
std::string render_grid(const Grid& g);

/// Engine-side integer matrix with the background-knowledge access rules:
/// width is the first row's length, cells missing from short rows read as 0
/// and are absent for point collection, out-of-bounds reads return 0.
struct CellGrid {
  long long rows = 0;
  long long cols = 0;
  std::vector<long long> vals;      // row-major, padded with 0
  std::vector<long long> row_lens;  // actual source row lengths

  long long value_at(long long r, long long c) const {
    if (r < 1 || r > rows || c < 1 || c > cols) return 0;
    return vals[(r - 1) * cols + (c - 1)];
  }
  bool present(long long r, long long c) const {
    return r >= 1 && r <= rows && c >= 1 && c <= cols && c <= row_lens[r - 1];
  }

  static CellGrid from_grid(const Grid& g);
};

using CellPred = std::function<bool(long long)>;

struct Component {
  long long value = 0;
  std::vector<Coord> cells;   // sorted row-major
  long long holes = -1;       // -1 when not annotated
};

struct BBox {
  long long min_row = 0, max_row = 0, min_col = 0, max_col = 0;
};

/// Maximal 4-connected sets of matching cells. Components are ordered by the
/// row-major position of their seed; a component's value is its seed's value.
std::vector<Component> connected_components(const CellGrid& g, const CellPred& match);

BBox bbox_of(const std::vector<Coord>& cells);

/// Number of 4-connected background regions inside the bbox padded by one
/// that are unreachable from the padded border. Cells outside the grid count
/// as value 0.
long long hole_count(const CellGrid& g, const std::vector<Coord>& cells, const CellPred& bg);

/// Cell-level difference between two grids.
struct DiffSummary {
  bool dims_match = false;
  size_t expected_rows = 0, expected_cols = 0;
  size_t actual_rows = 0, actual_cols = 0;
  struct Entry {
    size_t row, col;
    int expected, actual;
  };
  std::vector<Entry> entries;  // differing in-bounds cells, row-major
  bool empty() const { return dims_match && entries.empty(); }
};

DiffSummary grid_diff(const Grid& expected, const Grid& actual);

/// INPUT/EXPECTED/ACTUAL side by side plus the per-cell difference list.
std::string render_diff(const Grid& input, const Grid& expected, const Grid& actual,
                        size_t max_entries = 50);

/// Registers the bk-qualified builtin table.
void install_arc_bk(logic::BuiltinRegistry& reg);

}  // namespace abpr::bk
