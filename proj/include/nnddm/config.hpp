#pragma once

// Run configuration: sectioned key = value text.
//
//   [mesh]      n
//   [basis]     p_edge, p_cell
//   [material]  mu, eps_re, eps_im, wavelength      (kappa = sqrt(eps), omega = 2 pi / wavelength)
//   [ddm]       steps, boundary
//   [train]     activation, hidden, tol, max_iter, schedule, loss, seed
//   [output]    dir, models       (models defaults to <dir>/models)
//
// `schedule` is a comma list of lr:iterations stages. Unknown sections or
// keys are errors.

#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <istream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "nnddm/errors.hpp"
#include "nnddm/nedelec.hpp"
#include "nnddm/neural.hpp"
#include "nnddm/system.hpp"

namespace nnddm {

struct RunConfig {
  int n = 32;
  BasisOrder order;
  double mu = 1.0;
  double eps_re = 1.49 * 1.49;
  double eps_im = 0.0;
  double wavelength = 3.0;
  int ddm_steps = 4;
  std::string boundary = "eval";
  Activation activation = Activation::Sigmoid;
  int hidden = 500;
  double tol = 3e-3;
  long max_iter = 60000;
  std::vector<LrStage> schedule{{1e-5, 40000}, {1e-6, 20000}};
  LossReduction loss = LossReduction::Mean;
  std::uint64_t seed = 1;
  std::string output_dir = "out";
  std::string models_dir;

  bool operator==(const RunConfig& o) const {
    auto same_schedule = [&] {
      if (schedule.size() != o.schedule.size()) return false;
      for (std::size_t i = 0; i < schedule.size(); ++i)
        if (schedule[i].lr != o.schedule[i].lr || schedule[i].budget != o.schedule[i].budget) return false;
      return true;
    };
    return n == o.n && order.p_edge == o.order.p_edge && order.p_cell == o.order.p_cell && mu == o.mu &&
           eps_re == o.eps_re && eps_im == o.eps_im && wavelength == o.wavelength && ddm_steps == o.ddm_steps &&
           boundary == o.boundary && activation == o.activation && hidden == o.hidden && tol == o.tol &&
           max_iter == o.max_iter && same_schedule() && loss == o.loss && seed == o.seed && output_dir == o.output_dir &&
           models_dir == o.models_dir;
  }

  MaterialParams params() const {
    MaterialParams p = MaterialParams::from_wavelength(wavelength, {eps_re, eps_im}, mu);
    p.validate();
    return p;
  }

  NetworkShape network_shape() const {
    const int nf = order.edge_functions();
    return {4 * nf, hidden, 2 * nf, activation};
  }

  TrainConfig train_config() const {
    TrainConfig t;
    t.tol = tol;
    t.max_iter = max_iter;
    t.schedule = schedule;
    t.seed = seed;
    t.reduction = loss;
    return t;
  }

  void validate() const {
    if (n < 2 || n % 2) throw std::invalid_argument("config: mesh n must be even and >= 2");
    order.validate();
    params();
    if (ddm_steps < 1) throw std::invalid_argument("config: ddm steps must be >= 1");
    if (hidden < 1) throw std::invalid_argument("config: hidden must be >= 1");
    if (schedule.empty()) throw std::invalid_argument("config: empty schedule");
  }
};

namespace detail {

// Shortest text that reads back to the same double.
inline std::string fmt_double(double v) {
  char buf[32];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  return s.substr(b, s.find_last_not_of(" \t\r") - b + 1);
}

inline const char* to_string(LossReduction r) { return r == LossReduction::Mean ? "mean" : "half-sum"; }

inline std::string schedule_string(const std::vector<LrStage>& s) {
  std::string out;
  for (std::size_t i = 0; i < s.size(); ++i) out += (i ? "," : "") + fmt_double(s[i].lr) + ":" + std::to_string(s[i].budget);
  return out;
}

}  // namespace detail

inline std::string serialize(const RunConfig& c) {
  using detail::fmt_double;
  std::ostringstream os;
  os << "[mesh]\nn = " << c.n << "\n\n";
  os << "[basis]\np_edge = " << c.order.p_edge << "\np_cell = " << c.order.p_cell << "\n\n";
  os << "[material]\nmu = " << fmt_double(c.mu) << "\neps_re = " << fmt_double(c.eps_re)
     << "\neps_im = " << fmt_double(c.eps_im) << "\nwavelength = " << fmt_double(c.wavelength) << "\n\n";
  os << "[ddm]\nsteps = " << c.ddm_steps << "\nboundary = " << c.boundary << "\n\n";
  os << "[train]\nactivation = " << to_string(c.activation) << "\nhidden = " << c.hidden << "\ntol = " << fmt_double(c.tol)
     << "\nmax_iter = " << c.max_iter << "\nschedule = " << detail::schedule_string(c.schedule)
     << "\nloss = " << detail::to_string(c.loss) << "\nseed = " << c.seed << "\n\n";
  os << "[output]\ndir = " << c.output_dir << "\n";
  if (!c.models_dir.empty()) os << "models = " << c.models_dir << "\n";
  return os.str();
}

/// Starts from the defaults; every key present overrides one field.
inline RunConfig parse_config(std::istream& is) {
  RunConfig c;
  std::string line, section;
  long line_no = 0;
  auto fail = [&](const std::string& m) -> void { throw ParseError(m, line_no); };
  auto to_long = [&](const std::string& v) {
    std::size_t pos = 0;
    long out = 0;
    try {
      out = std::stol(v, &pos);
    } catch (const std::exception&) {
      pos = 0;
    }
    if (pos != v.size() || v.empty()) fail("expected an integer, got '" + v + "'");
    return out;
  };
  auto to_double = [&](const std::string& v) {
    std::size_t pos = 0;
    double out = 0.0;
    try {
      out = std::stod(v, &pos);
    } catch (const std::exception&) {
      pos = 0;
    }
    if (pos != v.size() || v.empty() || !std::isfinite(out)) fail("expected a number, got '" + v + "'");
    return out;
  };
  while (std::getline(is, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = detail::trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') fail("unterminated section header");
      section = detail::trim(line.substr(1, line.size() - 2));
      if (section != "mesh" && section != "basis" && section != "material" && section != "ddm" && section != "train" &&
          section != "output")
        fail("unknown section [" + section + "]");
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) fail("expected 'key = value'");
    const std::string key = detail::trim(line.substr(0, eq)), val = detail::trim(line.substr(eq + 1));
    if (section.empty()) fail("key '" + key + "' outside a section");
    const std::string k = section + "." + key;
    if (k == "mesh.n") c.n = static_cast<int>(to_long(val));
    else if (k == "basis.p_edge") c.order.p_edge = static_cast<int>(to_long(val));
    else if (k == "basis.p_cell") c.order.p_cell = static_cast<int>(to_long(val));
    else if (k == "material.mu") c.mu = to_double(val);
    else if (k == "material.eps_re") c.eps_re = to_double(val);
    else if (k == "material.eps_im") c.eps_im = to_double(val);
    else if (k == "material.wavelength") c.wavelength = to_double(val);
    else if (k == "ddm.steps") c.ddm_steps = static_cast<int>(to_long(val));
    else if (k == "ddm.boundary") c.boundary = val;
    else if (k == "train.activation") {
      try {
        c.activation = parse_activation(val);
      } catch (const std::invalid_argument& e) {
        fail(e.what());
      }
    } else if (k == "train.hidden") c.hidden = static_cast<int>(to_long(val));
    else if (k == "train.tol") c.tol = to_double(val);
    else if (k == "train.max_iter") c.max_iter = to_long(val);
    else if (k == "train.schedule") {
      c.schedule.clear();
      std::stringstream ss(val);
      for (std::string stage; std::getline(ss, stage, ',');) {
        stage = detail::trim(stage);
        const auto colon = stage.find(':');
        if (colon == std::string::npos) fail("schedule stage '" + stage + "' is not lr:iterations");
        c.schedule.push_back({to_double(detail::trim(stage.substr(0, colon))), to_long(detail::trim(stage.substr(colon + 1)))});
      }
      if (c.schedule.empty()) fail("empty schedule");
    } else if (k == "train.loss") {
      if (val == "mean") c.loss = LossReduction::Mean;
      else if (val == "half-sum") c.loss = LossReduction::HalfSum;
      else fail("loss must be 'mean' or 'half-sum'");
    } else if (k == "train.seed") {
      const long s = to_long(val);
      if (s < 0) fail("seed must be non-negative");
      c.seed = static_cast<std::uint64_t>(s);
    } else if (k == "output.dir") c.output_dir = val;
    else if (k == "output.models") c.models_dir = val;
    else fail("unknown key '" + key + "' in [" + section + "]");
  }
  return c;
}

inline RunConfig parse_config(const std::string& text) {
  std::istringstream is(text);
  return parse_config(is);
}

inline RunConfig load_config(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot open config '" + path + "'");
  try {
    return parse_config(f);
  } catch (const ParseError& e) {
    throw ParseError(path + ": " + e.message(), e.line());
  }
}

}  // namespace nnddm
