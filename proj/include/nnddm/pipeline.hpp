#pragma once

// Training data from DDM runs, edge feature/target vectors, the surrogate
// solve and field comparison metrics.

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <charconv>
#include <concepts>
#include <functional>
#include <optional>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <future>
#include <istream>
#include <map>
#include <numbers>
#include <ostream>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <tuple>
#include <thread>
#include <vector>

#include "nnddm/ddm.hpp"
#include "nnddm/errors.hpp"
#include "nnddm/neural.hpp"
#include "nnddm/system.hpp"

namespace nnddm {

enum class Split { Train, Test };

inline const char* to_string(Split s) { return s == Split::Train ? "train" : "test"; }

struct CatalogEntry {
  Split split;
  BoundaryField field;
};

namespace detail {

inline constexpr double kPi2 = std::numbers::pi * std::numbers::pi;

inline BoundaryField make_field(std::string id, std::function<Vec2c(Point2)> f) { return {std::move(id), std::move(f)}; }

inline double bump(double x, double center, double width) { return std::exp(-(x - center) * (x - center) / width); }

}  // namespace detail

/// The ten training and two test incident fields.
inline std::vector<CatalogEntry> boundary_catalog() {
  using detail::bump;
  using detail::kPi2;
  using detail::make_field;
  using std::cos;
  using std::sin;
  const cplx I(0.0, 1.0);
  std::vector<CatalogEntry> c;
  auto train = [&](std::string id, std::function<Vec2c(Point2)> f) {
    c.push_back({Split::Train, make_field(std::move(id), std::move(f))});
  };
  auto test = [&](std::string id, std::function<Vec2c(Point2)> f) {
    c.push_back({Split::Test, make_field(std::move(id), std::move(f))});
  };
  train("train-01", [](Point2 p) { return Vec2c{bump(p.x, 0.7, 0.008), 0.0}; });
  train("train-02", [](Point2 p) { return Vec2c{bump(p.x, 0.2, 0.002), 1.0}; });
  train("train-03", [](Point2 p) { return Vec2c{bump(p.x, 0.7, 0.003), 1.0}; });
  train("train-04", [](Point2 p) { return Vec2c{bump(p.x, 0.8, 0.003), sin(kPi2 * p.x)}; });
  train("train-05", [](Point2 p) { return Vec2c{bump(p.x, 0.5, 0.003), cos(kPi2 * p.x)}; });
  train("train-06", [I](Point2 p) {
    return Vec2c{cos(kPi2 * p.y) + I * sin(kPi2 * p.x), sin(kPi2 * p.y) + 0.5 * I * cos(kPi2 * p.x)};
  });
  train("train-07", [I](Point2 p) {
    return Vec2c{sin(kPi2 * p.x) + I * sin(kPi2 * p.x), sin(kPi2 * p.y) + 0.5 * I * cos(kPi2 * p.x)};
  });
  train("train-08", [I](Point2 p) {
    return Vec2c{sin(kPi2 * p.x) + I * sin(kPi2 * p.x), sin(kPi2 * p.x) + 0.5 * I * cos(kPi2 * p.x)};
  });
  train("train-09", [I](Point2 p) {
    return Vec2c{cos(kPi2 * p.y) + I * sin(kPi2 * p.x), cos(kPi2 * p.x) + 0.5 * I * cos(kPi2 * p.x)};
  });
  train("train-10", [I](Point2 p) {
    return Vec2c{cos(kPi2 * p.x) + I * sin(kPi2 * p.x), cos(kPi2 * p.y) + 0.5 * I * cos(kPi2 * p.x)};
  });
  test("test-01", [](Point2 p) { return Vec2c{bump(p.x, 0.5, 0.003), 0.0}; });
  test("test-02", [I](Point2 p) {
    return Vec2c{cos(kPi2 * p.y) + I * sin(kPi2 * p.x), cos(kPi2 * p.y) + 0.5 * I * cos(kPi2 * p.x)};
  });
  return c;
}

/// Field used for the surrogate experiments (not part of the training data).
inline BoundaryField evaluation_field() {
  const cplx I(0.0, 1.0);
  return {"eval", [I](Point2 p) {
            using detail::kPi2;
            return Vec2c{std::cos(kPi2 * (p.y - 0.5)) + I * std::sin(kPi2 * p.x),
                         std::cos(kPi2 * p.y) + 0.5 * I * std::sin(kPi2 * p.x)};
          }};
}

/// Catalog ids plus "eval", "zero" and "plane-wave" (angle pi/2).
inline BoundaryField lookup_field(const std::string& id, const MaterialParams& params) {
  if (id == "eval") return evaluation_field();
  if (id == "zero") return zero_field();
  if (id == "plane-wave") return plane_wave(params, std::numbers::pi / 2);
  for (auto& e : boundary_catalog())
    if (e.field.id == id) return e.field;
  throw std::invalid_argument("unknown boundary field '" + id + "'");
}

// ---------------------------------------------------------------------------
// Feature vectors

/// (re, im) pairs of g followed by those of E.
inline std::vector<double> feature_vector(std::span<const cplx> g, std::span<const cplx> E, int functions_per_edge = 4) {
  if (static_cast<int>(g.size()) != functions_per_edge || static_cast<int>(E.size()) != functions_per_edge)
    throw std::invalid_argument("feature_vector: expected " + std::to_string(functions_per_edge) +
                                " complex values for g and for E");
  std::vector<double> out;
  out.reserve(4 * functions_per_edge);
  for (auto v : g) out.insert(out.end(), {v.real(), v.imag()});
  for (auto v : E) out.insert(out.end(), {v.real(), v.imag()});
  return out;
}

inline std::vector<double> target_vector(std::span<const cplx> g, int functions_per_edge = 4) {
  if (static_cast<int>(g.size()) != functions_per_edge)
    throw std::invalid_argument("target_vector: expected " + std::to_string(functions_per_edge) + " complex values");
  std::vector<double> out;
  out.reserve(2 * functions_per_edge);
  for (auto v : g) out.insert(out.end(), {v.real(), v.imag()});
  return out;
}

/// Inverse of target_vector (and of either half of feature_vector).
inline std::vector<cplx> complex_values(std::span<const double> v) {
  if (v.size() % 2) throw std::invalid_argument("complex_values: odd length");
  std::vector<cplx> out;
  for (std::size_t i = 0; i < v.size(); i += 2) out.emplace_back(v[i], v[i + 1]);
  return out;
}

inline std::pair<std::vector<cplx>, std::vector<cplx>> split_features(std::span<const double> f) {
  if (f.size() % 4) throw std::invalid_argument("split_features: length must be a multiple of 4");
  const auto half = f.size() / 2;
  return {complex_values(f.first(half)), complex_values(f.subspan(half))};
}

// ---------------------------------------------------------------------------
// Datasets

/// Network i maps data on subdomain i's side of the interface to the trace it
/// sends: U01 takes (g10^1, E0^2) and predicts g01^3; U10 takes (g01^1, E1^2)
/// and predicts g10^3.
enum class Direction { U01 = 0, U10 = 1 };

inline const char* to_string(Direction d) { return d == Direction::U01 ? "u01" : "u10"; }

inline Direction parse_direction(std::string_view s) {
  if (s == "u01") return Direction::U01;
  if (s == "u10") return Direction::U10;
  throw std::invalid_argument("unknown network direction '" + std::string(s) + "' (expected u01 or u10)");
}

struct DatasetRow {
  std::string bc_id;
  int edge = 0;  // position along the interface, left to right
  std::vector<double> input;
  std::vector<double> target;

  bool operator==(const DatasetRow&) const = default;
};

struct Dataset {
  Direction direction = Direction::U01;
  Split split = Split::Train;
  std::vector<DatasetRow> rows;

  std::size_t input_width() const { return rows.empty() ? 0 : rows.front().input.size(); }
  std::size_t target_width() const { return rows.empty() ? 0 : rows.front().target.size(); }

  /// Inputs as columns (input_width x rows).
  Eigen::MatrixXd inputs() const { return stack(&DatasetRow::input); }
  Eigen::MatrixXd targets() const { return stack(&DatasetRow::target); }

 private:
  Eigen::MatrixXd stack(std::vector<double> DatasetRow::*field) const {
    const auto w = rows.empty() ? 0 : (rows.front().*field).size();
    Eigen::MatrixXd m(static_cast<Eigen::Index>(w), static_cast<Eigen::Index>(rows.size()));
    for (std::size_t r = 0; r < rows.size(); ++r) {
      if ((rows[r].*field).size() != w) throw std::invalid_argument("dataset rows have inconsistent widths");
      for (std::size_t i = 0; i < w; ++i) m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(r)) = (rows[r].*field)[i];
    }
    return m;
  }
};

/// train[d] / test[d] indexed by Direction.
struct DatasetBundle {
  std::array<Dataset, 2> train;
  std::array<Dataset, 2> test;

  const Dataset& get(Direction d, Split s) const {
    return s == Split::Train ? train[static_cast<int>(d)] : test[static_cast<int>(d)];
  }
};

namespace detail {

/// Runs f(i) for i in [0, n) on up to hardware_concurrency threads; results in order.
template <class F>
auto parallel_map(std::size_t n, F&& f) -> std::vector<decltype(f(std::size_t{}))> {
  using R = decltype(f(std::size_t{}));
  const std::size_t workers = std::max<std::size_t>(1, std::min<std::size_t>(n, std::thread::hardware_concurrency()));
  std::vector<std::optional<R>> slots(n);
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) slots[i].emplace(f(i));
  } else {
    std::vector<std::future<void>> jobs;
    for (std::size_t w = 0; w < workers; ++w)
      jobs.push_back(std::async(std::launch::async, [&, w] {
        for (std::size_t i = w; i < n; i += workers) slots[i].emplace(f(i));
      }));
    for (auto& j : jobs) j.get();
  }
  std::vector<R> out;
  out.reserve(n);
  for (auto& s : slots) out.push_back(std::move(*s));
  return out;
}

/// Edge blocks of `g` reordered to `sub`'s interface edges.
inline std::vector<std::vector<cplx>> edge_blocks(const InterfaceTrace& g, const Subdomain& sub) {
  const auto edges = interface_edges(sub);
  const auto slot = align_trace(g, sub, edges);
  std::vector<std::vector<cplx>> out(edges.size());
  for (std::size_t k = 0; k < edges.size(); ++k)
    for (int i = 0; i < g.functions_per_edge; ++i) out[k].push_back(g.at(slot[k], i));
  return out;
}

inline const InterfaceTrace& consumed_by(const DDMStep& s, int i) { return i == 0 ? s.g10 : s.g01; }
inline const InterfaceTrace& produced_by(const DDMStep& s, int i) { return i == 0 ? s.g01 : s.g10; }
inline const FEFunction& field_of(const DDMStep& s, int i) { return i == 0 ? s.E0 : s.E1; }

/// Per-edge features for network i from a history holding at least steps 0..2.
inline std::vector<std::vector<double>> edge_features(const DDMSolver& ddm, const DDMHistory& h, int i) {
  const Subdomain& sub = ddm.subdomain(i);
  const auto g1 = edge_blocks(consumed_by(h.steps.at(1), i), sub);
  const auto e2 = edge_blocks(extract_tangential_trace(field_of(h.steps.at(2), i), sub), sub);
  std::vector<std::vector<double>> out;
  const int nf = ddm.order().edge_functions();
  for (std::size_t k = 0; k < g1.size(); ++k) out.push_back(feature_vector(g1[k], e2[k], nf));
  return out;
}

}  // namespace detail

/// Rows for both directions from a 4-step DDM run per catalog entry, ordered
/// by catalog position then edge.
inline DatasetBundle generate_dataset(const std::vector<CatalogEntry>& catalog, const DDMSolver& ddm) {
  struct PerField {
    std::array<std::vector<DatasetRow>, 2> rows;
  };
  const int nf = ddm.order().edge_functions();
  auto rows = detail::parallel_map(catalog.size(), [&](std::size_t c) {
    const auto& entry = catalog[c];
    DDMHistory h;
    try {
      h = ddm.run(entry.field, 4);
    } catch (const FactorizationError& e) {
      throw FactorizationError(entry.field.id + ": " + e.what(), e.pivot());
    } catch (const std::exception& e) {
      throw std::runtime_error(entry.field.id + ": " + e.what());
    }
    PerField out;
    for (int i = 0; i < 2; ++i) {
      const auto features = detail::edge_features(ddm, h, i);
      const auto g3 = detail::edge_blocks(detail::produced_by(h.steps.at(3), i), ddm.subdomain(i));
      for (std::size_t k = 0; k < features.size(); ++k)
        out.rows[i].push_back({entry.field.id, static_cast<int>(k), features[k], target_vector(g3[k], nf)});
    }
    return out;
  });
  DatasetBundle b;
  for (int i = 0; i < 2; ++i) {
    b.train[i] = {static_cast<Direction>(i), Split::Train, {}};
    b.test[i] = {static_cast<Direction>(i), Split::Test, {}};
  }
  for (std::size_t c = 0; c < catalog.size(); ++c)
    for (int i = 0; i < 2; ++i) {
      auto& dst = catalog[c].split == Split::Train ? b.train[i].rows : b.test[i].rows;
      dst.insert(dst.end(), rows[c].rows[i].begin(), rows[c].rows[i].end());
    }
  return b;
}

inline std::string dataset_role(Direction d) {
  return d == Direction::U01 ? "u01: inputs g10^1 and E0^2 per interface edge, target g01^3"
                             : "u10: inputs g01^1 and E1^2 per interface edge, target g10^3";
}

/// `bc_id,edge,in_0..,tgt_0..` with 17 significant digits; the first line is
/// a comment naming the direction.
inline void write_dataset_csv(std::ostream& os, const Dataset& d) {
  os << "# " << dataset_role(d.direction) << "; split " << to_string(d.split) << '\n';
  os << "bc_id,edge";
  const std::size_t nin = d.rows.empty() ? 16 : d.input_width();
  const std::size_t nt = d.rows.empty() ? 8 : d.target_width();
  for (std::size_t i = 0; i < nin; ++i) os << ",in_" << i;
  for (std::size_t i = 0; i < nt; ++i) os << ",tgt_" << i;
  os << '\n';
  char buf[32];
  for (const auto& r : d.rows) {
    os << r.bc_id << ',' << r.edge;
    for (double v : r.input) os << ',' << (std::snprintf(buf, sizeof buf, "%.17g", v), buf);
    for (double v : r.target) os << ',' << (std::snprintf(buf, sizeof buf, "%.17g", v), buf);
    os << '\n';
  }
}

inline Dataset read_dataset_csv(std::istream& is, Direction direction, Split split) {
  Dataset d{direction, split, {}};
  std::string line;
  long line_no = 0;
  std::size_t nin = 0, nt = 0;
  bool header = false;
  auto cells_of = [](const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    for (std::string c; std::getline(ss, c, ',');) out.push_back(c);
    if (!s.empty() && s.back() == ',') out.emplace_back();
    return out;
  };
  while (std::getline(is, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    const auto cells = cells_of(line);
    if (!header) {
      if (cells.size() < 2 || cells[0] != "bc_id" || cells[1] != "edge") throw ParseError("missing dataset header", line_no);
      for (std::size_t i = 2; i < cells.size(); ++i) {
        if (cells[i] == "in_" + std::to_string(nin)) {
          if (nt) throw ParseError("input column after target columns", line_no);
          ++nin;
        } else if (cells[i] == "tgt_" + std::to_string(nt)) {
          ++nt;
        } else {
          throw ParseError("unexpected column '" + cells[i] + "'", line_no);
        }
      }
      header = true;
      continue;
    }
    if (cells.size() != 2 + nin + nt)
      throw ParseError("expected " + std::to_string(2 + nin + nt) + " columns, got " + std::to_string(cells.size()), line_no);
    DatasetRow r;
    r.bc_id = cells[0];
    auto num = [&](const std::string& s) {
      double v = 0.0;
      const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
      if (res.ec != std::errc() || res.ptr != s.data() + s.size()) throw ParseError("bad number '" + s + "'", line_no);
      return v;
    };
    const auto& e = cells[1];
    if (std::from_chars(e.data(), e.data() + e.size(), r.edge).ec != std::errc())
      throw ParseError("bad edge index '" + e + "'", line_no);
    for (std::size_t i = 0; i < nin; ++i) r.input.push_back(num(cells[2 + i]));
    for (std::size_t i = 0; i < nt; ++i) r.target.push_back(num(cells[2 + nin + i]));
    d.rows.push_back(std::move(r));
  }
  if (!header) throw ParseError("missing dataset header", line_no + 1);
  return d;
}

// ---------------------------------------------------------------------------
// Surrogate solve

template <class P>
concept TracePredictor = requires(const P& p, std::span<const double> x) {
  { p.predict(x) } -> std::convertible_to<std::vector<double>>;
};

/// Exact-match table from a dataset: returns the recorded target for an
/// input seen before, throws otherwise.
class LookupPredictor {
 public:
  LookupPredictor() = default;
  explicit LookupPredictor(const std::vector<const Dataset*>& sets) {
    for (const auto* d : sets)
      for (const auto& r : d->rows) table_[r.input] = r.target;
  }

  std::vector<double> predict(std::span<const double> x) const {
    const auto it = table_.find(std::vector<double>(x.begin(), x.end()));
    if (it == table_.end()) throw std::invalid_argument("LookupPredictor: input not in table");
    return it->second;
  }

  std::size_t size() const { return table_.size(); }

 private:
  std::map<std::vector<double>, std::vector<double>> table_;
};

struct NNSolveResult {
  FEFunction E0, E1;
  InterfaceTrace g01, g10;  // surrogate traces used by the final solves
  DDMHistory prefix;        // DDM steps 0..2 that produced the features
};

namespace detail {

template <class P>
void check_widths(const P& p, int nf) {
  if constexpr (requires { p.shape.d_in; }) {
    if (p.shape.d_in != 4 * nf || p.shape.d_out != 2 * nf)
      throw std::invalid_argument("nn_solve: network shape " + std::to_string(p.shape.d_in) + "->" +
                                  std::to_string(p.shape.d_out) + " does not match " + std::to_string(4 * nf) + "->" +
                                  std::to_string(2 * nf) + " for this basis");
  }
}

template <class P>
InterfaceTrace predict_trace(const DDMSolver& ddm, const DDMHistory& h, int i, const P& net) {
  const Subdomain& sub = ddm.subdomain(i);
  const int nf = ddm.order().edge_functions();
  InterfaceTrace out = zero_trace(sub, ddm.order(), i, 1 - i);
  const auto features = edge_features(ddm, h, i);
  for (std::size_t k = 0; k < features.size(); ++k) {
    const std::vector<double> y = net.predict(features[k]);
    if (static_cast<int>(y.size()) != 2 * nf)
      throw std::invalid_argument("nn_solve: predictor returned " + std::to_string(y.size()) + " values, expected " +
                                  std::to_string(2 * nf));
    for (int m = 0; m < nf; ++m) out.at(k, m) = {y[2 * m], y[2 * m + 1]};
  }
  return out;
}

}  // namespace detail

/// Two DDM steps for g^1 and E^2, surrogate traces from the predictors, then
/// one more solve per subdomain.
template <TracePredictor P01, TracePredictor P10>
NNSolveResult nn_solve(const DDMSolver& ddm, const BoundaryField& bc, const P01& net01, const P10& net10) {
  const int nf = ddm.order().edge_functions();
  detail::check_widths(net01, nf);
  detail::check_widths(net10, nf);
  NNSolveResult r;
  r.prefix = ddm.run(bc, 2);
  r.g01 = detail::predict_trace(ddm, r.prefix, 0, net01);
  r.g10 = detail::predict_trace(ddm, r.prefix, 1, net10);
  auto f1 = std::async(std::launch::async, [&] { return ddm.solver(1).solve(bc, &r.g01); });
  r.E0 = ddm.solver(0).solve(bc, &r.g10);
  r.E1 = f1.get();
  return r;
}

// ---------------------------------------------------------------------------
// Comparison

struct FieldPair {
  FEFunction E0, E1;
};

struct ComparisonReport {
  int sample_grid = 129;
  // indexed by subdomain; relative values are normalized by solution A
  std::array<double, 2> rel_re{}, rel_im{};
  std::array<double, 2> abs_re{}, abs_im{};  // RMS over the samples
  double rel_total = 0.0;
  double jump_a = 0.0, jump_b = 0.0;
  // per interface edge, ||coefficients_A - coefficients_B|| of the tangential trace
  std::array<std::vector<double>, 2> edge_delta;

  bool finite() const {
    auto ok = [](double v) { return std::isfinite(v) && v >= 0.0; };
    for (int s = 0; s < 2; ++s) {
      if (!ok(rel_re[s]) || !ok(rel_im[s]) || !ok(abs_re[s]) || !ok(abs_im[s])) return false;
      for (double v : edge_delta[s])
        if (!ok(v)) return false;
    }
    return ok(rel_total) && ok(jump_a) && ok(jump_b);
  }
};

/// Samples both solutions on a sample_grid x sample_grid lattice of the unit
/// square; points on the interface count for both subdomains.
inline ComparisonReport compare(const FieldPair& a, const FieldPair& b, int sample_grid = 129) {
  if (sample_grid < 2) throw std::invalid_argument("compare: sample_grid must be >= 2");
  ComparisonReport rep;
  rep.sample_grid = sample_grid;
  std::array<double, 2> dre{}, dim{}, nre{}, nim{};
  std::array<long, 2> count{};
  double d_all = 0.0, n_all = 0.0;
  const std::array<const FEFunction*, 2> fa{&a.E0, &a.E1}, fb{&b.E0, &b.E1};
  for (int s = 0; s < 2; ++s) {
    const Subdomain& sub = *fa[s]->dofs->sub;
    if (fb[s]->dofs->sub->cells != sub.cells) throw std::invalid_argument("compare: solutions use different subdomains");
    for (int j = 0; j < sample_grid; ++j)
      for (int i = 0; i < sample_grid; ++i) {
        const Point2 p{static_cast<double>(i) / (sample_grid - 1), static_cast<double>(j) / (sample_grid - 1)};
        if (p.y < sub.lower.y - detail::kGeomTol || p.y > sub.upper.y + detail::kGeomTol) continue;
        const Vec2c u = fa[s]->value(p), v = fb[s]->value(p);
        const cplx dx = u.x - v.x, dy = u.y - v.y;
        dre[s] += dx.real() * dx.real() + dy.real() * dy.real();
        dim[s] += dx.imag() * dx.imag() + dy.imag() * dy.imag();
        nre[s] += u.x.real() * u.x.real() + u.y.real() * u.y.real();
        nim[s] += u.x.imag() * u.x.imag() + u.y.imag() * u.y.imag();
        ++count[s];
      }
    auto ratio = [](double num, double den) { return den > 0.0 ? std::sqrt(num / den) : (num > 0.0 ? INFINITY : 0.0); };
    rep.rel_re[s] = ratio(dre[s], nre[s]);
    rep.rel_im[s] = ratio(dim[s], nim[s]);
    rep.abs_re[s] = count[s] ? std::sqrt(dre[s] / count[s]) : 0.0;
    rep.abs_im[s] = count[s] ? std::sqrt(dim[s] / count[s]) : 0.0;
    d_all += dre[s] + dim[s];
    n_all += nre[s] + nim[s];
    const auto ta = extract_tangential_trace(*fa[s], sub), tb = extract_tangential_trace(*fb[s], sub);
    for (std::size_t k = 0; k < ta.edge_count(); ++k) {
      double acc = 0.0;
      for (int m = 0; m < ta.functions_per_edge; ++m) acc += std::norm(ta.at(k, m) - tb.at(k, m));
      rep.edge_delta[s].push_back(std::sqrt(acc));
    }
  }
  rep.rel_total = n_all > 0.0 ? std::sqrt(d_all / n_all) : (d_all > 0.0 ? INFINITY : 0.0);
  rep.jump_a = interface_jump(a.E0, a.E1);
  rep.jump_b = interface_jump(b.E0, b.E1);
  return rep;
}

inline void write_report(std::ostream& os, const ComparisonReport& r) {
  char buf[160];
  auto line = [&](const char* key, double v) {
    std::snprintf(buf, sizeof buf, "%s=%.17g\n", key, v);
    os << buf;
  };
  os << "sample_grid=" << r.sample_grid << '\n';
  for (int s = 0; s < 2; ++s) {
    const std::string p = "sub" + std::to_string(s) + ".";
    line((p + "rel_re").c_str(), r.rel_re[s]);
    line((p + "rel_im").c_str(), r.rel_im[s]);
    line((p + "abs_re").c_str(), r.abs_re[s]);
    line((p + "abs_im").c_str(), r.abs_im[s]);
    double mx = 0.0;
    for (double v : r.edge_delta[s]) mx = std::max(mx, v);
    line((p + "max_edge_delta").c_str(), mx);
  }
  line("rel_total", r.rel_total);
  line("jump_a", r.jump_a);
  line("jump_b", r.jump_b);
}

// ---------------------------------------------------------------------------
// Activation study

struct ActivationRun {
  Activation activation = Activation::Sigmoid;
  std::array<Network, 2> nets;        // indexed by Direction
  std::array<TrainReport, 2> reports;
  ComparisonReport vs_ddm;            // a = DDM (ddm_steps), b = nn_solve
};

/// Trains both directions per activation from the same seed and compares
/// each surrogate with the DDM solution for `bc`.
inline std::vector<ActivationRun> activation_study(const DDMSolver& ddm, const DatasetBundle& data, const BoundaryField& bc,
                                                   const std::vector<Activation>& activations, int hidden,
                                                   const TrainConfig& cfg, int ddm_steps = 4, int sample_grid = 129) {
  const int nf = ddm.order().edge_functions();
  const auto h = ddm.run(bc, ddm_steps);
  std::vector<ActivationRun> out;
  for (auto act : activations) {
    ActivationRun run;
    run.activation = act;
    auto fit = [&](int d) {
      const Dataset& tr = data.train[d];
      const Dataset& te = data.test[d];
      Network net = init_weights({4 * nf, hidden, 2 * nf, act}, cfg.seed);
      AdamState adam = AdamState::for_network(net, cfg.schedule.front().lr);
      TrainReport rep = train(net, adam, tr.inputs(), tr.targets(), te.inputs(), te.targets(), cfg);
      return std::pair{std::move(net), std::move(rep)};
    };
    auto f1 = std::async(std::launch::async, fit, 1);
    std::tie(run.nets[0], run.reports[0]) = fit(0);
    std::tie(run.nets[1], run.reports[1]) = f1.get();
    const auto r = nn_solve(ddm, bc, run.nets[0], run.nets[1]);
    run.vs_ddm = compare({h.last().E0, h.last().E1}, {r.E0, r.E1}, sample_grid);
    out.push_back(std::move(run));
  }
  return out;
}

/// Writes <activation>_<direction>_loss.csv per run and study_report.txt.
/// `overfit_rise` is the final test loss minus the lowest test loss seen.
inline std::vector<std::filesystem::path> write_activation_study(const std::vector<ActivationRun>& runs,
                                                                 const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  std::vector<std::filesystem::path> written;
  auto open = [&](const std::filesystem::path& p) {
    std::ofstream f(p);
    if (!f) throw std::runtime_error("cannot write '" + p.string() + "'");
    written.push_back(p);
    return f;
  };
  auto report = open(dir / "study_report.txt");
  char buf[200];
  for (const auto& run : runs) {
    const std::string act = to_string(run.activation);
    for (int d = 0; d < 2; ++d) {
      const std::string stem = act + "_" + to_string(static_cast<Direction>(d));
      {
        auto f = open(dir / (stem + "_loss.csv"));
        write_loss_curve(f, run.reports[d]);
      }
      const auto& r = run.reports[d];
      const auto best = std::min_element(r.test_loss.begin(), r.test_loss.end());
      const double min_test = best == r.test_loss.end() ? 0.0 : *best;
      const long min_at = best == r.test_loss.end() ? 0 : static_cast<long>(best - r.test_loss.begin());
      std::snprintf(buf, sizeof buf,
                    "%s.iterations=%ld\n%s.train_loss=%.10g\n%s.test_loss=%.10g\n%s.min_test_loss=%.10g\n"
                    "%s.min_test_at=%ld\n%s.overfit_rise=%.10g\n",
                    stem.c_str(), r.iterations, stem.c_str(), r.train_loss.empty() ? 0.0 : r.train_loss.back(),
                    stem.c_str(), r.final_test_loss(), stem.c_str(), min_test, stem.c_str(), min_at, stem.c_str(),
                    r.final_test_loss() - min_test);
      report << buf;
    }
    std::ostringstream cmp;
    write_report(cmp, run.vs_ddm);
    std::istringstream lines(cmp.str());
    for (std::string l; std::getline(lines, l);) report << act << ".vs_ddm." << l << '\n';
  }
  if (!report) throw std::runtime_error("write failed for study report");
  return written;
}

}  // namespace nnddm
