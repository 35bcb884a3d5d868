#pragma once

// Command-line front end. Every subcommand reads a RunConfig (defaults, then
// --config, then flags) and writes below the output directory, which the
// NNDDM_OUT_DIR environment variable or --out overrides.
//
// Failures print one line to the error stream:  error: <category>: <message>
// with exit codes usage 2, parse 3, io 4, numeric 5, other 1.

#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <ostream>
#include <string>

#include "nnddm/config.hpp"
#include "nnddm/ddm.hpp"
#include "nnddm/export.hpp"
#include "nnddm/geometry.hpp"
#include "nnddm/neural.hpp"
#include "nnddm/pipeline.hpp"
#include "nnddm/system.hpp"

#ifndef NNDDM_CONFIG_DIR
#define NNDDM_CONFIG_DIR "configs"
#endif

namespace nnddm {

inline constexpr const char* kOutDirEnv = "NNDDM_OUT_DIR";

namespace fs = std::filesystem;

/// A bare name resolves to <name>.ini in ./configs or the source config dir.
inline fs::path resolve_config(const std::string& name) {
  const fs::path p(name);
  if (p.has_parent_path() || p.has_extension()) return p;
  for (const fs::path dir : {fs::path("configs"), fs::path(NNDDM_CONFIG_DIR)}) {
    const fs::path c = dir / (name + ".ini");
    if (fs::exists(c)) return c;
  }
  throw std::runtime_error("config '" + name + "' not found in ./configs or " NNDDM_CONFIG_DIR);
}

namespace detail {

struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline std::ofstream open_out(const fs::path& p) {
  std::error_code ec;
  fs::create_directories(p.parent_path(), ec);
  std::ofstream f(p, std::ios::binary);
  if (!f) throw IoError("cannot write '" + p.string() + "'");
  return f;
}

inline std::ifstream open_in(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  if (!f) throw IoError("cannot read '" + p.string() + "'");
  return f;
}

inline std::string one_line(std::string s) {
  for (auto& ch : s)
    if (ch == '\n' || ch == '\r') ch = ' ';
  return s;
}

inline fs::path model_path(const fs::path& dir, Direction d) { return dir / (std::string(to_string(d)) + ".model"); }

inline fs::path data_path(const fs::path& out, Direction d, Split s) {
  return out / "data" / (std::string(to_string(d)) + "_" + to_string(s) + ".csv");
}

inline Network read_model(const fs::path& p) {
  auto f = open_in(p);
  try {
    return load_model(f);
  } catch (const ParseError& e) {
    throw ParseError(p.string() + ": " + e.message(), e.line());
  }
}

}  // namespace detail

struct CliOptions {
  std::string config;
  std::string out;
  std::optional<int> n;
  std::optional<double> wavelength;
  std::optional<std::string> boundary;
  std::optional<std::uint64_t> seed;
  std::optional<int> steps;
  std::string net = "u01";
  std::optional<double> lr;
  std::optional<long> max_iter;
  std::optional<std::string> activation;
  std::string models;
  std::string source = "ddm";
  int grid = 129;
};

inline RunConfig effective_config(const CliOptions& o) {
  RunConfig c = o.config.empty() ? RunConfig{} : load_config(resolve_config(o.config).string());
  if (const char* env = std::getenv(kOutDirEnv); env && *env) c.output_dir = env;
  if (!o.out.empty()) c.output_dir = o.out;
  if (o.n) c.n = *o.n;
  if (o.wavelength) c.wavelength = *o.wavelength;
  if (o.boundary) c.boundary = *o.boundary;
  if (o.seed) c.seed = *o.seed;
  if (o.steps) c.ddm_steps = *o.steps;
  if (o.activation) c.activation = parse_activation(*o.activation);
  if (o.max_iter) c.max_iter = *o.max_iter;
  if (o.lr) c.schedule = {{*o.lr, c.max_iter}};
  if (!o.models.empty()) c.models_dir = o.models;
  if (c.models_dir.empty()) c.models_dir = (fs::path(c.output_dir) / "models").string();
  c.validate();
  return c;
}

namespace detail {

inline void cmd_mesh_info(const RunConfig& c, std::ostream& out) {
  const auto mesh = build_mesh(c.n);
  out << "mesh n=" << c.n << " h=" << mesh->h() << '\n';
  out << "vertices " << mesh->vertices.size() << "\ncells " << mesh->cells.size() << "\nedges " << mesh->edges.size()
      << '\n';
  const auto [s0, s1] = partition_two(mesh);
  for (const auto& s : {s0, s1}) {
    out << "subdomain " << s->id << ": cells " << s->cells.size();
    for (auto k : {BoundaryKind::Incident, BoundaryKind::Absorbing, BoundaryKind::Interface})
      out << ' ' << to_string(k) << ' ' << s->edges_with(k).size();
    out << " dofs " << distribute_dofs(s, c.order)->total_dofs << '\n';
  }
}

inline void write_fields(const FEFunction& E0, const FEFunction& E1, int grid, const fs::path& dir,
                         const std::string& stem, std::ostream& out) {
  for (const auto& p : export_field(E0, E1, grid, dir, stem)) out << "wrote " << p.string() << '\n';
}

inline void cmd_solve(const RunConfig& c, const CliOptions& o, std::ostream& out) {
  const auto mesh = build_mesh(c.n);
  const auto params = c.params();
  const auto bc = lookup_field(c.boundary, params);
  const auto E = solve_monolithic(mesh, c.order, params, bc);
  const auto [s0, s1] = partition_two(mesh);
  auto restrict_to = [&](const SubdomainPtr& s) {
    FEFunction f = FEFunction::zero(distribute_dofs(s, c.order));
    for (int cell : s->cells) {
      const auto dst = f.dofs->cell_dofs(cell), src = E.dofs->cell_dofs(cell);
      for (std::size_t k = 0; k < dst.size(); ++k) f.coefficients[dst[k]] = E.coefficients[src[k]];
    }
    return f;
  };
  const FEFunction E0 = restrict_to(s0), E1 = restrict_to(s1);
  out << "monolithic dofs " << E.dofs->total_dofs << " l2_norm " << l2_norm(E) << '\n';
  write_fields(E0, E1, o.grid, fs::path(c.output_dir) / "solve", "monolithic", out);
}

inline void cmd_ddm(const RunConfig& c, const CliOptions& o, std::ostream& out) {
  const auto params = c.params();
  DDMSolver ddm(build_mesh(c.n), c.order, params);
  const auto h = ddm.run(lookup_field(c.boundary, params), c.ddm_steps);
  const fs::path dir = fs::path(c.output_dir) / "ddm";
  {
    auto f = open_out(dir / "history.csv");
    write_history_csv(f, h);
  }
  out << "wrote " << (dir / "history.csv").string() << '\n';
  for (const auto& s : h.steps)
    if (s.k > 0) out << "step " << s.k << " residual " << s.residual << '\n';
  out << "interface_jump " << interface_jump(h.last().E0, h.last().E1) << '\n';
  write_fields(h.last().E0, h.last().E1, o.grid, dir, "ddm", out);
}

inline void cmd_gen_data(const RunConfig& c, std::ostream& out) {
  DDMSolver ddm(build_mesh(c.n), c.order, c.params());
  const auto b = generate_dataset(boundary_catalog(), ddm);
  for (auto d : {Direction::U01, Direction::U10})
    for (auto s : {Split::Train, Split::Test}) {
      const auto p = data_path(c.output_dir, d, s);
      auto f = open_out(p);
      write_dataset_csv(f, b.get(d, s));
      out << "wrote " << p.string() << " rows " << b.get(d, s).rows.size() << '\n';
    }
}

inline Dataset read_data(const RunConfig& c, Direction d, Split s) {
  const auto p = data_path(c.output_dir, d, s);
  auto f = open_in(p);
  try {
    return read_dataset_csv(f, d, s);
  } catch (const ParseError& e) {
    throw ParseError(p.string() + ": " + e.message(), e.line());
  }
}

inline void cmd_train(const RunConfig& c, const CliOptions& o, std::ostream& out) {
  const Direction d = parse_direction(o.net);
  const Dataset tr = read_data(c, d, Split::Train), te = read_data(c, d, Split::Test);
  Network net = init_weights(c.network_shape(), c.seed);
  AdamState adam = AdamState::for_network(net, c.schedule.front().lr);
  const auto rep = train(net, adam, tr.inputs(), tr.targets(), te.inputs(), te.targets(), c.train_config());
  const fs::path dir = c.models_dir;
  {
    auto f = open_out(model_path(dir, d));
    save_model(f, net);
  }
  const fs::path curve = dir / (std::string(to_string(d)) + "_loss.csv");
  {
    auto f = open_out(curve);
    write_loss_curve(f, rep);
  }
  out << "net " << to_string(d) << " iterations " << rep.iterations << " train_loss "
      << (rep.train_loss.empty() ? 0.0 : rep.train_loss.back()) << " test_loss " << rep.final_test_loss()
      << " reached_tol " << (rep.reached_tol ? 1 : 0) << " seconds " << rep.wall_seconds << '\n';
  out << "wrote " << model_path(dir, d).string() << "\nwrote " << curve.string() << '\n';
}

inline std::pair<Network, Network> read_models(const RunConfig& c) {
  const fs::path dir = c.models_dir;
  return {read_model(model_path(dir, Direction::U01)), read_model(model_path(dir, Direction::U10))};
}

inline void cmd_nn_solve(const RunConfig& c, const CliOptions& o, std::ostream& out) {
  const auto [u01, u10] = read_models(c);
  const auto params = c.params();
  DDMSolver ddm(build_mesh(c.n), c.order, params);
  const auto r = nn_solve(ddm, lookup_field(c.boundary, params), u01, u10);
  out << "interface_jump " << interface_jump(r.E0, r.E1) << '\n';
  write_fields(r.E0, r.E1, o.grid, fs::path(c.output_dir) / "nn_solve", "nn", out);
}

inline void cmd_compare(const RunConfig& c, const CliOptions& o, std::ostream& out) {
  const auto [u01, u10] = read_models(c);
  const auto params = c.params();
  DDMSolver ddm(build_mesh(c.n), c.order, params);
  const auto bc = lookup_field(c.boundary, params);
  const auto h = ddm.run(bc, c.ddm_steps);
  const auto r = nn_solve(ddm, bc, u01, u10);
  const auto rep = compare({h.last().E0, h.last().E1}, {r.E0, r.E1}, o.grid);
  const fs::path p = fs::path(c.output_dir) / "compare" / "report.txt";
  {
    auto f = open_out(p);
    f << "# a = ddm " << c.ddm_steps << " steps, b = nn_solve; boundary " << c.boundary << ", wavelength "
      << detail::fmt_double(c.wavelength) << '\n';
    write_report(f, rep);
  }
  write_report(out, rep);
  out << "wrote " << p.string() << '\n';
}

inline void cmd_export(const RunConfig& c, const CliOptions& o, std::ostream& out) {
  const auto params = c.params();
  const auto bc = lookup_field(c.boundary, params);
  DDMSolver ddm(build_mesh(c.n), c.order, params);
  const fs::path dir = fs::path(c.output_dir) / "export";
  if (o.source == "ddm") {
    const auto h = ddm.run(bc, c.ddm_steps);
    write_fields(h.last().E0, h.last().E1, o.grid, dir, "ddm", out);
  } else if (o.source == "nn") {
    const auto [u01, u10] = read_models(c);
    const auto r = nn_solve(ddm, bc, u01, u10);
    write_fields(r.E0, r.E1, o.grid, dir, "nn", out);
  } else {
    throw std::invalid_argument("unknown export source '" + o.source + "' (expected ddm or nn)");
  }
}

}  // namespace detail

/// Runs one subcommand; returns the process exit code.
inline int dispatch(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  CLI::App app{"Maxwell DDM with a learned interface update", "nnddm"};
  app.require_subcommand(1);
  CliOptions o;
  auto common = [&](CLI::App* s) {
    s->add_option("--config", o.config, "config name (configs/<name>.ini) or path");
    s->add_option("--out", o.out, "output directory");
    s->add_option("--n", o.n, "cells per side");
    s->add_option("--wavelength", o.wavelength, "wavelength (omega = 2 pi / wavelength)");
    s->add_option("--boundary", o.boundary, "boundary field id");
    s->add_option("--seed", o.seed, "rng seed");
    s->add_option("--grid", o.grid, "export samples per side")->check(CLI::Range(2, 100000));
  };
  auto* mesh_info = app.add_subcommand("mesh-info", "mesh and partition summary");
  auto* solve = app.add_subcommand("solve", "monolithic reference solve");
  auto* ddm = app.add_subcommand("ddm", "iterative DDM");
  auto* gen = app.add_subcommand("gen-data", "training and test datasets");
  auto* trn = app.add_subcommand("train", "train one interface network");
  auto* nns = app.add_subcommand("nn-solve", "surrogate solve with trained networks");
  auto* cmp = app.add_subcommand("compare", "DDM vs surrogate report");
  auto* exp = app.add_subcommand("export", "export a solution as VTK and CSV");
  for (auto* s : {mesh_info, solve, ddm, gen, trn, nns, cmp, exp}) common(s);
  for (auto* s : {ddm, cmp, exp}) s->add_option("--steps", o.steps, "DDM steps");
  trn->add_option("--net", o.net, "u01 or u10")->check(CLI::IsMember({"u01", "u10"}));
  trn->add_option("--lr", o.lr, "single learning rate for max_iter iterations");
  trn->add_option("--max-iter", o.max_iter, "iteration cap");
  trn->add_option("--activation", o.activation, "hidden activation");
  for (auto* s : {trn, nns, cmp, exp}) s->add_option("--models", o.models, "model directory");
  exp->add_option("--source", o.source, "ddm or nn")->check(CLI::IsMember({"ddm", "nn"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: usage: " << detail::one_line(e.what()) << '\n';
    return 2;
  }

  try {
    const RunConfig c = effective_config(o);
    if (*mesh_info) detail::cmd_mesh_info(c, out);
    else if (*solve) detail::cmd_solve(c, o, out);
    else if (*ddm) detail::cmd_ddm(c, o, out);
    else if (*gen) detail::cmd_gen_data(c, out);
    else if (*trn) detail::cmd_train(c, o, out);
    else if (*nns) detail::cmd_nn_solve(c, o, out);
    else if (*cmp) detail::cmd_compare(c, o, out);
    else if (*exp) detail::cmd_export(c, o, out);
    return 0;
  } catch (const ParseError& e) {
    err << "error: parse: " << detail::one_line(e.what()) << '\n';
    return 3;
  } catch (const detail::IoError& e) {
    err << "error: io: " << detail::one_line(e.what()) << '\n';
    return 4;
  } catch (const FactorizationError& e) {
    err << "error: numeric: " << detail::one_line(e.what()) << '\n';
    return 5;
  } catch (const TrainingDivergedError& e) {
    err << "error: numeric: " << detail::one_line(e.what()) << '\n';
    return 5;
  } catch (const std::exception& e) {
    err << "error: runtime: " << detail::one_line(e.what()) << '\n';
    return 1;
  }
}

}  // namespace nnddm
