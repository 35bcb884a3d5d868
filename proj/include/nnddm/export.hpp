#pragma once

// Field export: legacy VTK (ASCII, structured points) per subdomain and a CSV
// of the same samples.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "nnddm/system.hpp"

namespace nnddm {

struct FieldSample {
  Point2 p;
  Vec2c value;
};

/// Samples of one subdomain on the part of a grid x grid lattice of the unit
/// square lying in its box, row by row from the bottom.
struct FieldGrid {
  int nx = 0, ny = 0;
  Point2 origin;
  double spacing = 0.0;
  std::vector<FieldSample> samples;
};

inline FieldGrid sample_field(const FEFunction& E, int grid) {
  if (grid < 2) throw std::invalid_argument("sample_field: grid must be >= 2");
  const Subdomain& sub = *E.dofs->sub;
  const double h = 1.0 / (grid - 1);
  FieldGrid g;
  g.spacing = h;
  g.nx = grid;
  const int j0 = static_cast<int>(std::ceil(sub.lower.y / h - 1e-9));
  const int j1 = static_cast<int>(std::floor(sub.upper.y / h + 1e-9));
  g.ny = j1 - j0 + 1;
  g.origin = {0.0, j0 * h};
  for (int j = j0; j <= j1; ++j)
    for (int i = 0; i < grid; ++i) {
      const Point2 p{i * h, j * h};
      g.samples.push_back({p, E.value(p)});
    }
  return g;
}

namespace detail {

inline void write_scalar(std::ostream& os, const char* name, const FieldGrid& g, double (*pick)(const Vec2c&)) {
  os << "SCALARS " << name << " double 1\nLOOKUP_TABLE default\n";
  char buf[32];
  for (const auto& s : g.samples) {
    std::snprintf(buf, sizeof buf, "%.10e\n", pick(s.value) + 0.0);  // + 0.0 folds -0
    os << buf;
  }
}

}  // namespace detail

inline void write_vtk(std::ostream& os, const FieldGrid& g, const std::string& title) {
  char buf[128];
  os << "# vtk DataFile Version 3.0\n" << title << "\nASCII\nDATASET STRUCTURED_POINTS\n";
  os << "DIMENSIONS " << g.nx << ' ' << g.ny << " 1\n";
  std::snprintf(buf, sizeof buf, "ORIGIN %.17g %.17g 0\nSPACING %.17g %.17g 1\n", g.origin.x, g.origin.y, g.spacing,
                g.spacing);
  os << buf << "POINT_DATA " << g.samples.size() << '\n';
  detail::write_scalar(os, "Ex_re", g, [](const Vec2c& v) { return v.x.real(); });
  detail::write_scalar(os, "Ex_im", g, [](const Vec2c& v) { return v.x.imag(); });
  detail::write_scalar(os, "Ex_abs", g, [](const Vec2c& v) { return std::abs(v.x); });
  detail::write_scalar(os, "Ey_re", g, [](const Vec2c& v) { return v.y.real(); });
  detail::write_scalar(os, "Ey_im", g, [](const Vec2c& v) { return v.y.imag(); });
  detail::write_scalar(os, "Ey_abs", g, [](const Vec2c& v) { return std::abs(v.y); });
}

/// Writes <stem>_part0.vtk, <stem>_part1.vtk and <stem>.csv into `dir`.
/// Returns the written paths.
inline std::vector<std::filesystem::path> export_field(const FEFunction& E0, const FEFunction& E1, int grid,
                                                       const std::filesystem::path& dir, const std::string& stem) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw std::runtime_error("cannot create directory '" + dir.string() + "': " + ec.message());
  std::vector<std::filesystem::path> written;
  auto open = [&](const std::filesystem::path& p) {
    std::ofstream f(p, std::ios::binary);
    if (!f) throw std::runtime_error("cannot write '" + p.string() + "'");
    written.push_back(p);
    return f;
  };
  const FieldGrid g0 = sample_field(E0, grid), g1 = sample_field(E1, grid);
  {
    auto f = open(dir / (stem + "_part0.vtk"));
    write_vtk(f, g0, stem + " subdomain 0");
  }
  {
    auto f = open(dir / (stem + "_part1.vtk"));
    write_vtk(f, g1, stem + " subdomain 1");
  }
  auto f = open(dir / (stem + ".csv"));
  f << "part,x,y,Ex_re,Ex_im,Ey_re,Ey_im\n";
  char buf[200];
  for (int part = 0; part < 2; ++part)
    for (const auto& s : (part ? g1 : g0).samples) {
      std::snprintf(buf, sizeof buf, "%d,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n", part, s.p.x, s.p.y,
                    s.value.x.real() + 0.0, s.value.x.imag() + 0.0, s.value.y.real() + 0.0, s.value.y.imag() + 0.0);
      f << buf;
    }
  if (!f) throw std::runtime_error("write failed for '" + (dir / (stem + ".csv")).string() + "'");
  return written;
}

}  // namespace nnddm
