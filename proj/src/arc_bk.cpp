#include "abpr/arc_bk.hpp"

#include <algorithm>
#include <deque>
#include <map>
#include <set>
#include <sstream>

#include "abpr/errors.hpp"

namespace abpr::bk {

using logic::Cont;
using logic::mk_atom;
using logic::mk_compound;
using logic::mk_int;
using logic::mk_list;
using logic::nil;
using logic::Out;
using logic::proper_list;
using logic::render_term;
using logic::Solver;
using logic::Store;
using logic::Term;
using logic::TermPtr;

// ---------------------------------------------------------------------------
// Grid types
// ---------------------------------------------------------------------------

Grid Grid::from_rows(const std::vector<std::vector<int>>& rows) {
  Grid g;
  g.rows = rows.size();
  g.cols = rows.empty() ? 0 : rows[0].size();
  for (const auto& r : rows) {
    for (size_t c = 0; c < g.cols; ++c) g.cells.push_back(c < r.size() ? r[c] : 0);
    if (r.size() != g.cols)
      throw Error(ErrorKind::GridInvariant, "ragged grid row (expected " +
                                                std::to_string(g.cols) + " columns, got " +
                                                std::to_string(r.size()) + ")");
  }
  return g;
}

std::vector<std::vector<int>> Grid::to_rows() const {
  std::vector<std::vector<int>> out(rows);
  for (size_t r = 0; r < rows; ++r)
    out[r].assign(cells.begin() + r * cols, cells.begin() + (r + 1) * cols);
  return out;
}

void Grid::validate() const {
  for (int v : cells)
    if (v < 0 || v > 9)
      throw Error(ErrorKind::GridInvariant, "cell value " + std::to_string(v) +
                                                " outside 0..9");
}

logic::TermPtr grid_to_term(const Grid& g) {
  std::vector<TermPtr> rows;
  rows.reserve(g.rows);
  for (size_t r = 1; r <= g.rows; ++r) {
    std::vector<TermPtr> row;
    row.reserve(g.cols);
    for (size_t c = 1; c <= g.cols; ++c) row.push_back(mk_int(g.at(r, c)));
    rows.push_back(mk_list(row));
  }
  return mk_list(rows);
}

std::optional<Grid> grid_from_term(const logic::TermPtr& t) {
  auto rows = logic::list_elements(t);
  if (!rows) return std::nullopt;
  std::vector<std::vector<int>> out;
  size_t cols = SIZE_MAX;
  for (const auto& row : *rows) {
    auto cells = logic::list_elements(row);
    if (!cells) return std::nullopt;
    if (cols == SIZE_MAX)
      cols = cells->size();
    else if (cells->size() != cols)
      return std::nullopt;
    std::vector<int> vals;
    for (const auto& c : *cells) {
      if (!c->is_int()) return std::nullopt;
      vals.push_back(static_cast<int>(c->ival));
    }
    out.push_back(std::move(vals));
  }
  Grid g;
  g.rows = out.size();
  g.cols = out.empty() ? 0 : out[0].size();
  for (const auto& r : out) g.cells.insert(g.cells.end(), r.begin(), r.end());
  return g;
}

std::string render_grid(const Grid& g) {
  std::string out;
  for (size_t r = 1; r <= g.rows; ++r) {
    for (size_t c = 1; c <= g.cols; ++c) {
      if (c > 1) out.push_back(' ');
      out += std::to_string(g.at(r, c));
    }
    out.push_back('\n');
  }
  return out;
}

CellGrid CellGrid::from_grid(const Grid& g) {
  CellGrid cg;
  cg.rows = static_cast<long long>(g.rows);
  cg.cols = static_cast<long long>(g.cols);
  cg.vals.assign(g.cells.begin(), g.cells.end());
  cg.row_lens.assign(g.rows, static_cast<long long>(g.cols));
  return cg;
}

// ---------------------------------------------------------------------------
// Components and holes
// ---------------------------------------------------------------------------

std::vector<Component> connected_components(const CellGrid& g, const CellPred& match) {
  std::vector<char> seen(static_cast<size_t>(g.rows * g.cols), 0);
  auto idx = [&](long long r, long long c) { return static_cast<size_t>((r - 1) * g.cols + (c - 1)); };
  std::vector<Component> out;
  for (long long r = 1; r <= g.rows; ++r) {
    for (long long c = 1; c <= g.cols; ++c) {
      if (!g.present(r, c) || seen[idx(r, c)] || !match(g.value_at(r, c))) continue;
      Component comp;
      comp.value = g.value_at(r, c);
      std::deque<Coord> queue{{r, c}};
      seen[idx(r, c)] = 1;
      while (!queue.empty()) {
        auto [cr, cc] = queue.front();
        queue.pop_front();
        comp.cells.push_back({cr, cc});
        const Coord neigh[4] = {{cr + 1, cc}, {cr - 1, cc}, {cr, cc + 1}, {cr, cc - 1}};
        for (const auto& [nr, nc] : neigh) {
          if (nr < 1 || nr > g.rows || nc < 1 || nc > g.cols) continue;
          if (seen[idx(nr, nc)]) continue;
          if (!match(g.value_at(nr, nc))) continue;
          seen[idx(nr, nc)] = 1;
          queue.push_back({nr, nc});
        }
      }
      std::sort(comp.cells.begin(), comp.cells.end());
      out.push_back(std::move(comp));
    }
  }
  return out;
}

BBox bbox_of(const std::vector<Coord>& cells) {
  BBox b{cells[0].first, cells[0].first, cells[0].second, cells[0].second};
  for (const auto& [r, c] : cells) {
    b.min_row = std::min(b.min_row, r);
    b.max_row = std::max(b.max_row, r);
    b.min_col = std::min(b.min_col, c);
    b.max_col = std::max(b.max_col, c);
  }
  return b;
}

long long hole_count(const CellGrid& g, const std::vector<Coord>& cells, const CellPred& bg) {
  if (cells.empty()) return 0;
  BBox b = bbox_of(cells);
  long long minr = b.min_row - 1, maxr = b.max_row + 1;
  long long minc = b.min_col - 1, maxc = b.max_col + 1;
  long long h = maxr - minr + 1, w = maxc - minc + 1;
  std::set<Coord> comp_set(cells.begin(), cells.end());
  auto idx = [&](long long r, long long c) {
    return static_cast<size_t>((r - minr) * w + (c - minc));
  };
  auto background = [&](long long r, long long c) {
    return !comp_set.count({r, c}) && bg(g.value_at(r, c));
  };

  std::vector<char> reach(static_cast<size_t>(h * w), 0);
  std::deque<Coord> queue;
  for (long long c = minc; c <= maxc; ++c) {
    for (long long r : {minr, maxr})
      if (background(r, c) && !reach[idx(r, c)]) {
        reach[idx(r, c)] = 1;
        queue.push_back({r, c});
      }
  }
  for (long long r = minr; r <= maxr; ++r) {
    for (long long c : {minc, maxc})
      if (background(r, c) && !reach[idx(r, c)]) {
        reach[idx(r, c)] = 1;
        queue.push_back({r, c});
      }
  }
  while (!queue.empty()) {
    auto [r, c] = queue.front();
    queue.pop_front();
    const Coord neigh[4] = {{r + 1, c}, {r - 1, c}, {r, c + 1}, {r, c - 1}};
    for (const auto& [nr, nc] : neigh) {
      if (nr < minr || nr > maxr || nc < minc || nc > maxc) continue;
      if (reach[idx(nr, nc)] || !background(nr, nc)) continue;
      reach[idx(nr, nc)] = 1;
      queue.push_back({nr, nc});
    }
  }

  std::vector<char> in_hole(static_cast<size_t>(h * w), 0);
  long long count = 0;
  for (long long r = minr; r <= maxr; ++r) {
    for (long long c = minc; c <= maxc; ++c) {
      if (!background(r, c) || reach[idx(r, c)] || in_hole[idx(r, c)]) continue;
      ++count;
      std::deque<Coord> q2{{r, c}};
      in_hole[idx(r, c)] = 1;
      while (!q2.empty()) {
        auto [cr, cc] = q2.front();
        q2.pop_front();
        const Coord neigh[4] = {{cr + 1, cc}, {cr - 1, cc}, {cr, cc + 1}, {cr, cc - 1}};
        for (const auto& [nr, nc] : neigh) {
          if (nr < minr || nr > maxr || nc < minc || nc > maxc) continue;
          if (in_hole[idx(nr, nc)] || reach[idx(nr, nc)] || !background(nr, nc)) continue;
          in_hole[idx(nr, nc)] = 1;
          q2.push_back({nr, nc});
        }
      }
    }
  }
  return count;
}

// ---------------------------------------------------------------------------
// Diffs
// ---------------------------------------------------------------------------

DiffSummary grid_diff(const Grid& expected, const Grid& actual) {
  DiffSummary d;
  d.expected_rows = expected.rows;
  d.expected_cols = expected.cols;
  d.actual_rows = actual.rows;
  d.actual_cols = actual.cols;
  d.dims_match = expected.rows == actual.rows && expected.cols == actual.cols;
  size_t rows = std::min(expected.rows, actual.rows);
  size_t cols = std::min(expected.cols, actual.cols);
  for (size_t r = 1; r <= rows; ++r)
    for (size_t c = 1; c <= cols; ++c)
      if (expected.at(r, c) != actual.at(r, c))
        d.entries.push_back({r, c, expected.at(r, c), actual.at(r, c)});
  return d;
}

std::string render_diff(const Grid& input, const Grid& expected, const Grid& actual,
                        size_t max_entries) {
  std::ostringstream os;
  auto rows_of = [](const Grid& g) {
    std::vector<std::string> lines;
    for (size_t r = 1; r <= g.rows; ++r) {
      std::string line;
      for (size_t c = 1; c <= g.cols; ++c) {
        if (c > 1) line.push_back(' ');
        line += std::to_string(g.at(r, c));
      }
      lines.push_back(line);
    }
    return lines;
  };
  auto in = rows_of(input), exp = rows_of(expected), act = rows_of(actual);
  size_t wi = 5, we = 8, height = std::max({in.size(), exp.size(), act.size()});
  for (const auto& l : in) wi = std::max(wi, l.size());
  for (const auto& l : exp) we = std::max(we, l.size());
  auto pad = [](const std::string& s, size_t w) {
    return s + std::string(s.size() < w ? w - s.size() : 0, ' ');
  };
  os << pad("INPUT", wi) << "   " << pad("EXPECTED", we) << "   " << "ACTUAL" << '\n';
  for (size_t i = 0; i < height; ++i) {
    os << pad(i < in.size() ? in[i] : "", wi) << "   "
       << pad(i < exp.size() ? exp[i] : "", we) << "   "
       << (i < act.size() ? act[i] : "") << '\n';
  }
  DiffSummary d = grid_diff(expected, actual);
  os << "DIFFERENCE SUMMARY - specific cells:\n";
  if (!d.dims_match)
    os << "dimension mismatch: expected " << d.expected_rows << "x" << d.expected_cols
       << ", actual " << d.actual_rows << "x" << d.actual_cols << '\n';
  if (d.entries.empty() && d.dims_match) {
    os << "(no differing cells)\n";
    return os.str();
  }
  size_t shown = 0;
  for (const auto& e : d.entries) {
    if (shown == max_entries) {
      os << "... (+" << d.entries.size() - shown << " more)\n";
      break;
    }
    os << "(" << e.row << "," << e.col << "): expected " << e.expected << ", actual " << e.actual
       << '\n';
    ++shown;
  }
  return os.str();
}

// ---------------------------------------------------------------------------
// Term marshalling
// ---------------------------------------------------------------------------

namespace {

constexpr auto kFail = Out{Out::Sig::Fail};

Out unify_then(Solver& s, const TermPtr& a, const TermPtr& b, const Cont& k) {
  Store& st = s.store();
  size_t m = st.mark();
  if (!st.unify(a, b)) {
    st.undo_to(m);
    return kFail;
  }
  Out r = k();
  if (r.sig == Out::Sig::Fail) st.undo_to(m);
  return r;
}

TermPtr coord_term(const Coord& c) {
  return mk_compound(",", {mk_int(c.first), mk_int(c.second)});
}

std::optional<Coord> coord_from(Store& st, const TermPtr& t) {
  TermPtr w = st.walk(t);
  if (!w->is_functor(",", 2)) return std::nullopt;
  TermPtr r = st.walk(w->args[0]), c = st.walk(w->args[1]);
  if (!r->is_int() || !c->is_int()) return std::nullopt;
  return Coord{r->ival, c->ival};
}

/// Rows as terms; width from the first row, per the dimension rule.
std::optional<CellGrid> cellgrid_from(Solver& s, const TermPtr& t) {
  Store& st = s.store();
  auto rows = proper_list(st, t);
  if (!rows) return std::nullopt;
  CellGrid g;
  g.rows = static_cast<long long>(rows->size());
  bool first = true;
  std::vector<std::vector<long long>> data;
  for (const auto& row : *rows) {
    auto cells = proper_list(st, row);
    if (!cells) return std::nullopt;
    if (first) {
      g.cols = static_cast<long long>(cells->size());
      first = false;
    }
    std::vector<long long> vals;
    for (long long c = 0; c < g.cols && c < static_cast<long long>(cells->size()); ++c) {
      TermPtr v = st.walk((*cells)[static_cast<size_t>(c)]);
      if (!v->is_int()) s.throw_type_error(v, "grid cell is not an integer");
      vals.push_back(v->ival);
    }
    g.row_lens.push_back(static_cast<long long>(cells->size()));
    vals.resize(static_cast<size_t>(g.cols), 0);
    data.push_back(std::move(vals));
  }
  for (auto& row : data) g.vals.insert(g.vals.end(), row.begin(), row.end());
  return g;
}

std::optional<std::vector<Coord>> cells_from(Store& st, const TermPtr& t) {
  auto items = proper_list(st, t);
  if (!items) return std::nullopt;
  std::vector<Coord> out;
  for (const auto& i : *items) {
    auto c = coord_from(st, i);
    if (!c) return std::nullopt;
    out.push_back(*c);
  }
  return out;
}

TermPtr component_term(const Component& c, bool with_holes) {
  std::vector<TermPtr> cells;
  cells.reserve(c.cells.size());
  for (const auto& cc : c.cells) cells.push_back(coord_term(cc));
  std::vector<TermPtr> args{mk_int(c.value), mk_list(cells)};
  if (with_holes) args.push_back(mk_compound("holes", {mk_int(c.holes)}));
  return mk_compound("component", std::move(args));
}

[[noreturn]] void invalid_matcher(const TermPtr& m) {
  throw Error(ErrorKind::InvalidMatcher, "invalid matcher term: " + render_term(m));
}

/// Matcher semantics: any | nonzero | color(N) | plain integer | integer list
/// | callable goal applied to the cell value. Comparison partial applications
/// such as =:=(N) are rejected.
CellPred make_matcher(Solver& s, const TermPtr& matcher, long long depth) {
  TermPtr m = s.store().walk(matcher);
  if (m->is_var()) invalid_matcher(m);
  if (m->is_atom("any")) return [](long long) { return true; };
  if (m->is_atom("nonzero")) return [](long long v) { return v != 0; };
  if (m->is_int()) {
    long long want = m->ival;
    return [want](long long v) { return v == want; };
  }
  if (m->is_functor("color", 1)) {
    TermPtr n = s.store().walk(m->args[0]);
    if (!n->is_int()) invalid_matcher(m);
    long long want = n->ival;
    return [want](long long v) { return v == want; };
  }
  if (auto items = proper_list(s.store(), m)) {
    std::set<long long> vals;
    for (const auto& i : *items) {
      TermPtr w = s.store().walk(i);
      if (!w->is_int()) invalid_matcher(m);
      vals.insert(w->ival);
    }
    return [vals](long long v) { return vals.count(v) > 0; };
  }
  if (m->is_compound()) {
    static const std::set<std::string> banned = {"=:=", "=\\=", "=",  "\\=", "==",
                                                 "\\==", "<",   ">",  "=<",  ">="};
    if (banned.count(m->name)) invalid_matcher(m);
  }
  if (!m->is_callable()) invalid_matcher(m);
  // Goal matcher, memoized per value within this invocation.
  auto memo = std::make_shared<std::map<long long, bool>>();
  Solver* sp = &s;
  TermPtr goal = m;
  return [sp, goal, depth, memo](long long v) {
    auto it = memo->find(v);
    if (it != memo->end()) return it->second;
    TermPtr g = logic::extend_goal(*sp, goal, {mk_int(v)});
    Store& st = sp->store();
    size_t mark = st.mark();
    bool ok = sp->solve_once_keep(g, depth + 1);
    st.undo_to(mark);
    memo->emplace(v, ok);
    return ok;
  };
}

void require_callable(Solver& s, const TermPtr& t, const char* role) {
  TermPtr w = s.store().walk(t);
  while (w->is_functor(":", 2)) w = s.store().walk(w->args[1]);
  if (!w->is_callable())
    throw Error(ErrorKind::CallableExpected,
                std::string(role) + " must be callable, got " + render_term(w));
}

// ---------------------------------------------------------------------------
// Builtins
// ---------------------------------------------------------------------------

Out bk_grid_dimensions(Solver& s, const std::vector<TermPtr>& a, long long, const Cont& k) {
  Store& st = s.store();
  auto rows = proper_list(st, a[0]);
  if (!rows) return kFail;
  long long cols = 0;
  if (!rows->empty()) {
    auto first = proper_list(st, (*rows)[0]);
    if (!first) return kFail;
    cols = static_cast<long long>(first->size());
  }
  return unify_then(s, mk_compound(",", {a[1], a[2]}),
                    mk_compound(",", {mk_int(static_cast<long long>(rows->size())), mk_int(cols)}),
                    k);
}

Out bk_grid_cell(Solver& s, const std::vector<TermPtr>& a, long long, const Cont& k) {
  Store& st = s.store();
  auto rows = proper_list(st, a[0]);
  if (!rows) return kFail;
  TermPtr rt = st.walk(a[1]);

  auto try_row = [&](long long r1, const TermPtr& row) -> Out {
    auto cells = proper_list(st, row);
    if (!cells) return kFail;
    TermPtr ct = st.walk(a[2]);
    if (ct->is_int()) {
      if (ct->ival < 1 || ct->ival > static_cast<long long>(cells->size())) return kFail;
      return unify_then(s, mk_compound(",", {a[1], a[3]}),
                        mk_compound(",", {mk_int(r1), (*cells)[static_cast<size_t>(ct->ival - 1)]}),
                        k);
    }
    for (size_t c = 0; c < cells->size(); ++c) {
      Out r = unify_then(
          s, mk_compound(",", {a[1], mk_compound(",", {a[2], a[3]})}),
          mk_compound(",", {mk_int(r1), mk_compound(",", {mk_int(static_cast<long long>(c + 1)),
                                                          (*cells)[c]})}),
          k);
      if (r.sig != Out::Sig::Fail) return r;
    }
    return kFail;
  };

  if (rt->is_int()) {
    if (rt->ival < 1 || rt->ival > static_cast<long long>(rows->size())) return kFail;
    return try_row(rt->ival, (*rows)[static_cast<size_t>(rt->ival - 1)]);
  }
  for (size_t r = 0; r < rows->size(); ++r) {
    Out res = try_row(static_cast<long long>(r + 1), (*rows)[r]);
    if (res.sig != Out::Sig::Fail) return res;
  }
  return kFail;
}

Out bk_grid_in_bounds(Solver& s, const std::vector<TermPtr>& a, long long, const Cont& k) {
  Store& st = s.store();
  auto rows = proper_list(st, a[0]);
  if (!rows) return kFail;
  long long cols = 0;
  if (!rows->empty()) {
    auto first = proper_list(st, (*rows)[0]);
    if (!first) return kFail;
    cols = static_cast<long long>(first->size());
  }
  TermPtr r = st.walk(a[1]), c = st.walk(a[2]);
  if (!r->is_int() || !c->is_int()) return kFail;
  return r->ival >= 1 && r->ival <= static_cast<long long>(rows->size()) && c->ival >= 1 &&
                 c->ival <= cols
             ? k()
             : kFail;
}

Out bk_grid_neighbors4(Solver& s, const std::vector<TermPtr>& a, long long, const Cont& k) {
  Store& st = s.store();
  auto rows = proper_list(st, a[0]);
  if (!rows) return kFail;
  long long nrows = static_cast<long long>(rows->size());
  long long cols = 0;
  if (!rows->empty()) {
    auto first = proper_list(st, (*rows)[0]);
    if (!first) return kFail;
    cols = static_cast<long long>(first->size());
  }
  TermPtr r = st.walk(a[1]), c = st.walk(a[2]);
  if (!r->is_int() || !c->is_int()) return kFail;
  std::vector<TermPtr> out;
  // Same emission order as the reference flood code: down, up, right, left.
  if (r->ival + 1 <= nrows) out.push_back(coord_term({r->ival + 1, c->ival}));
  if (r->ival - 1 >= 1) out.push_back(coord_term({r->ival - 1, c->ival}));
  if (c->ival + 1 <= cols) out.push_back(coord_term({r->ival, c->ival + 1}));
  if (c->ival - 1 >= 1) out.push_back(coord_term({r->ival, c->ival - 1}));
  return unify_then(s, a[3], mk_list(out), k);
}

Out collect_points_impl(Solver& s, const std::vector<TermPtr>& a, bool with_values,
                        long long depth, const Cont& k) {
  auto g = cellgrid_from(s, a[0]);
  if (!g) return kFail;
  CellPred match = make_matcher(s, a[1], depth);
  std::vector<TermPtr> points, values;
  for (long long r = 1; r <= g->rows; ++r)
    for (long long c = 1; c <= g->cols; ++c) {
      if (!g->present(r, c)) continue;
      long long v = g->value_at(r, c);
      if (!match(v)) continue;
      points.push_back(coord_term({r, c}));
      if (with_values) values.push_back(mk_int(v));
    }
  if (!with_values) return unify_then(s, a[2], mk_list(points), k);
  return unify_then(s, mk_compound(",", {a[2], a[3]}),
                    mk_compound(",", {mk_list(points), mk_list(values)}), k);
}

Out bk_collect_points3(Solver& s, const std::vector<TermPtr>& a, long long depth, const Cont& k) {
  return collect_points_impl(s, a, false, depth, k);
}
Out bk_collect_points4(Solver& s, const std::vector<TermPtr>& a, long long depth, const Cont& k) {
  return collect_points_impl(s, a, true, depth, k);
}

Out bk_connected_components(Solver& s, const std::vector<TermPtr>& a, long long depth,
                            const Cont& k) {
  auto g = cellgrid_from(s, a[0]);
  if (!g) return kFail;
  CellPred match = make_matcher(s, a[1], depth);
  auto comps = connected_components(*g, match);
  std::vector<TermPtr> items;
  items.reserve(comps.size());
  for (const auto& c : comps) items.push_back(component_term(c, false));
  return unify_then(s, a[2], mk_list(items), k);
}

Out bk_components_with_holes(Solver& s, const std::vector<TermPtr>& a, long long depth,
                             const Cont& k) {
  auto g = cellgrid_from(s, a[0]);
  if (!g) return kFail;
  CellPred match = make_matcher(s, a[1], depth);
  CellPred bg = make_matcher(s, a[2], depth);
  auto comps = connected_components(*g, match);
  std::vector<TermPtr> items;
  for (auto& c : comps) {
    c.holes = hole_count(*g, c.cells, bg);
    items.push_back(component_term(c, true));
  }
  return unify_then(s, a[3], mk_list(items), k);
}

Out bk_component_bbox(Solver& s, const std::vector<TermPtr>& a, long long, const Cont& k) {
  auto cells = cells_from(s.store(), a[0]);
  if (!cells || cells->empty()) return kFail;
  BBox b = bbox_of(*cells);
  return unify_then(s, a[1],
                    mk_compound("bbox", {mk_int(b.min_row), mk_int(b.max_row), mk_int(b.min_col),
                                         mk_int(b.max_col)}),
                    k);
}

Out hole_count_impl(Solver& s, const TermPtr& grid, const TermPtr& cells, const TermPtr& bg,
                    const TermPtr& out, long long depth, const Cont& k) {
  auto g = cellgrid_from(s, grid);
  if (!g) return kFail;
  auto cs = cells_from(s.store(), cells);
  if (!cs || cs->empty()) return kFail;
  CellPred bgp = make_matcher(s, bg, depth);
  return unify_then(s, out, mk_int(hole_count(*g, *cs, bgp)), k);
}

Out bk_component_hole_count3(Solver& s, const std::vector<TermPtr>& a, long long depth,
                             const Cont& k) {
  return hole_count_impl(s, a[0], a[1], mk_int(0), a[2], depth, k);
}
Out bk_component_hole_count4(Solver& s, const std::vector<TermPtr>& a, long long depth,
                             const Cont& k) {
  return hole_count_impl(s, a[0], a[1], a[2], a[3], depth, k);
}

Out bk_apply_component_labels(Solver& s, const std::vector<TermPtr>& a, long long depth,
                              const Cont& k) {
  Store& st = s.store();
  auto comps = proper_list(st, a[1]);
  if (!comps) return kFail;
  require_callable(s, a[2], "labeler");
  // First label wins for overlapping cells, components in list order.
  std::map<Coord, TermPtr> labels;
  for (const auto& comp : *comps) {
    TermPtr w = st.walk(comp);
    if (!w->is_compound() || w->name != "component" ||
        (w->args.size() != 2 && w->args.size() != 3))
      return kFail;
    auto cells = cells_from(st, w->args[1]);
    if (!cells) return kFail;
    TermPtr label_var = s.fresh_var();
    TermPtr goal = logic::extend_goal(s, a[2], {w, label_var});
    size_t m = st.mark();
    bool got = s.solve_once_keep(goal, depth + 1);
    TermPtr label;
    if (got) label = st.resolve(label_var);
    st.undo_to(m);
    if (!got) continue;
    for (const auto& c : *cells) labels.emplace(c, label);
  }
  auto rows = proper_list(st, a[0]);
  if (!rows) return kFail;
  std::vector<TermPtr> new_rows;
  for (size_t r = 0; r < rows->size(); ++r) {
    auto cells = proper_list(st, (*rows)[r]);
    if (!cells) return kFail;
    std::vector<TermPtr> new_row;
    for (size_t c = 0; c < cells->size(); ++c) {
      auto it = labels.find({static_cast<long long>(r + 1), static_cast<long long>(c + 1)});
      new_row.push_back(it != labels.end() ? it->second : (*cells)[c]);
    }
    new_rows.push_back(mk_list(new_row));
  }
  return unify_then(s, a[3], mk_list(new_rows), k);
}

Out bk_map_grid_cells(Solver& s, const std::vector<TermPtr>& a, long long depth, const Cont& k) {
  Store& st = s.store();
  auto rows = proper_list(st, a[0]);
  if (!rows) return kFail;
  require_callable(s, a[1], "mapper");
  size_t entry = st.mark();
  std::vector<TermPtr> new_rows;
  for (size_t r = 0; r < rows->size(); ++r) {
    auto cells = proper_list(st, (*rows)[r]);
    if (!cells) {
      st.undo_to(entry);
      return kFail;
    }
    std::vector<TermPtr> new_row;
    for (size_t c = 0; c < cells->size(); ++c) {
      TermPtr out_var = s.fresh_var();
      TermPtr goal = logic::extend_goal(
          s, a[1],
          {mk_int(static_cast<long long>(r + 1)), mk_int(static_cast<long long>(c + 1)),
           (*cells)[c], out_var});
      if (!s.solve_once_keep(goal, depth + 1)) {
        st.undo_to(entry);
        return kFail;
      }
      new_row.push_back(st.resolve(out_var));
    }
    new_rows.push_back(mk_list(new_row));
  }
  Out r = unify_then(s, a[2], mk_list(new_rows), k);
  if (r.sig == Out::Sig::Fail) st.undo_to(entry);
  return r;
}

}  // namespace

void install_arc_bk(logic::BuiltinRegistry& reg) {
  reg.add_bk("grid_dimensions", 3, bk_grid_dimensions);
  reg.add_bk("grid_cell", 4, bk_grid_cell);
  reg.add_bk("grid_in_bounds", 3, bk_grid_in_bounds);
  reg.add_bk("grid_neighbors4", 4, bk_grid_neighbors4);
  reg.add_bk("collect_points", 3, bk_collect_points3);
  reg.add_bk("collect_points", 4, bk_collect_points4);
  reg.add_bk("connected_components", 3, bk_connected_components);
  reg.add_bk("components_with_holes", 4, bk_components_with_holes);
  reg.add_bk("component_bbox", 2, bk_component_bbox);
  reg.add_bk("component_hole_count", 3, bk_component_hole_count3);
  reg.add_bk("component_hole_count", 4, bk_component_hole_count4);
  reg.add_bk("apply_component_labels", 4, bk_apply_component_labels);
  reg.add_bk("map_grid_cells", 3, bk_map_grid_cells);
}

}  // namespace abpr::bk
