#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "dirac/bloch.hpp"
#include "dirac/expansion.hpp"
#include "dirac/parallel.hpp"
#include "dirac/plot.hpp"
#include "dirac/potential.hpp"
#include "dirac/spectrality.hpp"

namespace fs = std::filesystem;
using namespace dirac;

namespace {

std::vector<double> split_numbers(const std::string& s, std::size_t expected, const char* what) {
  std::vector<double> v;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ':')) {
    try {
      std::size_t used = 0;
      v.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw ParseError(std::string("malformed ") + what + ": " + s);
    }
  }
  if (v.size() != expected) throw ParseError(std::string("malformed ") + what + ": " + s);
  return v;
}

struct Config {
  std::string potential;
  int t_nodes = 33;
  std::string n_range = "-8:8";
  std::string rect;
  std::vector<int> K{4, 8, 16, 32};
  double tol = 1e-12;
  std::string out = ".";
  std::string target;
  std::string window;
  std::string input_csv;
  long terms = 1000000;
};

std::pair<int, int> parse_range(const std::string& s) {
  const auto v = split_numbers(s, 2, "--n-range");
  if (v[0] != std::floor(v[0]) || v[1] != std::floor(v[1]) || v[0] > v[1])
    throw ParseError("--n-range needs integers lo <= hi");
  return {static_cast<int>(v[0]), static_cast<int>(v[1])};
}

Rect parse_rect(const std::string& s) {
  const auto v = split_numbers(s, 4, "--rect");
  Rect r{v[0], v[1], v[2], v[3]};
  if (!(r.re1 > r.re0 && r.im1 > r.im0)) throw ParseError("--rect needs re0 < re1 and im0 < im1");
  return r;
}

void validate(const Config& c) {
  if (!(c.tol > 0.0)) throw ParseError("--tol must be positive");
  if (c.t_nodes < 1) throw ParseError("--t-nodes must be positive");
}

fs::path out_dir(const Config& c) {
  fs::path p(c.out);
  fs::create_directories(p);
  return p;
}

std::ofstream open_out(const fs::path& p) {
  std::ofstream f(p, std::ios::binary);
  if (!f) throw Error("cannot write " + p.string());
  return f;
}

void write_json(const fs::path& p, const nlohmann::json& j) {
  auto f = open_out(p);
  f << j.dump(2) << '\n';
}

int cmd_check(const Config& c) {
  validate(c);
  const auto q = load_potential(c.potential);
  nlohmann::json j;
  const auto c2 = check_condition_2(q);
  j["condition2"] = to_json(c2);
  j["re_b"] = mean_b(q).real();
  j["im_b"] = mean_b(q).imag();
  j["lemma1"] = {to_json(lemma1_margin(q, Branch::plus)), to_json(lemma1_margin(q, Branch::minus))};
  j["lemma2"] = {to_json(lemma2_margin(q, Branch::plus)), to_json(lemma2_margin(q, Branch::minus))};
  const auto sh = shifted_margins(q);
  j["remark2"] = {{"a_minmax", {sh.a_minmax.real(), sh.a_minmax.imag()}},
                  {"minmax_value", sh.minmax_value},
                  {"threshold", sh.threshold},
                  {"passes", sh.passes}};
  j["regime"] = c2.satisfied ? to_string(regime_for(q)) : "none";
  std::cout << j.dump(2) << '\n';
  if (c.out != ".") write_json(out_dir(c) / "check.json", j);
  return c2.satisfied ? 0 : 2;
}

void sort_tnj(std::vector<BlochEigenvalue>& evs) {
  std::stable_sort(evs.begin(), evs.end(), [](const BlochEigenvalue& a, const BlochEigenvalue& b) {
    if (a.t != b.t) return a.t < b.t;
    if (a.n != b.n) return a.n < b.n;
    return a.j < b.j;
  });
}

int cmd_spectrum(const Config& c) {
  validate(c);
  const auto dir = out_dir(c);
  std::vector<BlochEigenvalue> all;
  double re_b = 0.0;
  Rect view{};
  if (!c.input_csv.empty()) {
    std::ifstream in(c.input_csv, std::ios::binary);
    if (!in) throw ParseError("cannot open " + c.input_csv);
    all = read_eigenvalue_csv(in);
    if (!c.potential.empty()) re_b = mean_b(load_potential(c.potential)).real();
    if (!c.rect.empty()) {
      view = parse_rect(c.rect);
    } else {
      view = {-1, 1, -1, 1};
      for (const auto& e : all) {
        view.re0 = std::min(view.re0, e.lambda.real() - 0.5);
        view.re1 = std::max(view.re1, e.lambda.real() + 0.5);
        view.im0 = std::min(view.im0, e.lambda.imag() - 0.5);
        view.im1 = std::max(view.im1, e.lambda.imag() + 0.5);
      }
    }
  } else {
    if (c.rect.empty()) throw ParseError("spectrum needs --rect");
    view = parse_rect(c.rect);
    const auto q = load_potential(c.potential);
    re_b = mean_b(q).real();
    if (!check_condition_2(q).satisfied)
      std::cerr << "warning: Re b = 0; eigenvalues may be multiple\n";
    SolverOptions opt;
    opt.tol = c.tol;
    const auto grid = default_t_grid(c.t_nodes);
    std::vector<std::vector<BlochEigenvalue>> per_t(grid.size());
    std::vector<std::string> failures(grid.size());
    parallel_for(grid.size(), [&](std::size_t i) {
      try {
        per_t[i] = eigenvalues_in_rect(q, grid[i], view, opt);
      } catch (const Error& e) {
        failures[i] = e.what();
      }
    });
    nlohmann::json fails = nlohmann::json::array();
    for (std::size_t i = 0; i < grid.size(); ++i) {
      if (!failures[i].empty()) {
        std::cerr << "t = " << grid[i] << ": " << failures[i] << '\n';
        fails.push_back({{"t", grid[i]}, {"error", failures[i]}});
      }
      all.insert(all.end(), per_t[i].begin(), per_t[i].end());
    }
    write_json(dir / "spectrum.json", {{"t_nodes", grid.size()}, {"eigenvalues", all.size()}, {"failures", fails}});
  }
  sort_tnj(all);
  {
    auto f = open_out(dir / "spectrum.csv");
    write_eigenvalue_csv(f, all);
  }
  {
    auto f = open_out(dir / "spectrum.svg");
    write_spectrum_svg(f, all, view, re_b);
  }
  std::cout << "wrote " << all.size() << " eigenvalues to " << (dir / "spectrum.csv").string() << '\n';
  return 0;
}

int cmd_classify(const Config& c) {
  validate(c);
  const auto q = load_potential(c.potential);
  const auto [lo, hi] = parse_range(c.n_range);
  ClassifyOptions opt;
  opt.k_min = lo;
  opt.k_max = hi;
  opt.solver.tol = c.tol;
  const auto grid = default_t_grid(c.t_nodes);
  const auto rep = classify(q, grid, opt);
  const auto j = to_json(rep);
  const auto dir = out_dir(c);
  write_json(dir / "classify.json", j);
  {
    auto f = open_out(dir / "certificates.csv");
    write_certificate_csv(f, rep.certificates);
  }
  std::cout << "verdict: " << to_string(rep.verdict) << '\n';
  return exit_code(rep.verdict);
}

TargetFunction load_target(const Config& c, const PotentialQ& q) {
  if (c.target.empty()) return gaussian_target(0.0, 1.0, {1.0, 0.0}, -4 * kPi, 4 * kPi);
  if (c.target.front() == '{') {
    try {
      return target_from_json(nlohmann::json::parse(c.target), q);
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(std::string("--target: ") + e.what());
    }
  }
  std::ifstream in(c.target, std::ios::binary);
  if (!in) throw ParseError("cannot open target " + c.target);
  if (fs::path(c.target).extension() == ".csv") return read_target_csv(in);
  try {
    return target_from_json(nlohmann::json::parse(in), q);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("--target: ") + e.what());
  }
}

int cmd_expand(const Config& c) {
  validate(c);
  const auto q = load_potential(c.potential);
  if (!check_condition_2(q).satisfied) {
    std::cerr << "error: Re b = 0; expansion not defined\n";
    return 2;
  }
  if (c.K.empty()) throw ParseError("--K needs at least one value");
  const auto f = load_target(c, q);
  double a = f.lo, b = f.hi;
  if (!c.window.empty()) {
    const auto w = split_numbers(c.window, 2, "--window");
    a = w[0];
    b = w[1];
  }
  ExpansionOptions opt;
  opt.tol = c.tol;
  const auto res = reconstruct_sweep(q, f, c.K, c.t_nodes, a, b, opt);
  const auto dir = out_dir(c);
  write_json(dir / "expansion.json", sweep_summary_json(res, a, b));
  const auto& last = *std::max_element(res.begin(), res.end(), [](const auto& x, const auto& y) { return x.K < y.K; });
  {
    auto out = open_out(dir / "reconstruction.csv");
    write_function_csv(out, last.window.nodes, last.reconstruction);
  }
  {
    auto out = open_out(dir / "coefficients.csv");
    out << "t,k,j,re,im\n";
    char buf[200];
    for (int k = -last.K; k <= last.K; ++k)
      for (int j = 1; j <= 2; ++j)
        for (std::size_t ti = 0; ti < last.t_nodes.size(); ++ti) {
          const Complex v = last.coefficients[static_cast<std::size_t>((k + last.K) * 2 + (j - 1))][ti];
          std::snprintf(buf, sizeof buf, "%.17g,%d,%d,%.17g,%.17g\n", last.t_nodes[ti], k, j, v.real(), v.imag());
          out << buf;
        }
  }
  for (const auto& r : res) std::cout << "K = " << r.K << "  l2_error = " << r.l2_error << (r.complete ? "" : "  (holes)") << '\n';
  return 0;
}

int cmd_oracle(const Config& c) {
  if (c.terms < 1) throw ParseError("--terms must be positive");
  const double pi2_4 = kPi * kPi / 4.0;
  nlohmann::json j;
  double max1 = -1.0, arg1 = 0.0;
  bool interior_strict = true;
  for (int i = 0; i <= 200; ++i) {
    const double x = -1.0 + i / 100.0;
    const double v = series_bound_lemma1(x, c.terms);
    if (v > max1) {
      max1 = v;
      arg1 = x;
    }
    if (i != 0 && i != 200 && v >= pi2_4 - 1e-6) interior_strict = false;
  }
  const double at_p1 = series_bound_lemma1(1.0, c.terms), at_m1 = series_bound_lemma1(-1.0, c.terms);
  const double doubling1 = std::abs(series_bound_lemma1(1.0, 2 * c.terms) - at_p1);
  const bool ok1 = max1 <= pi2_4 + 1e-6 && std::abs(at_p1 - pi2_4) <= 1e-6 && std::abs(at_m1 - pi2_4) <= 1e-6 &&
                   interior_strict;
  j["lemma1"] = {{"threshold", pi2_4}, {"max", max1}, {"argmax", arg1}, {"at_plus_1", at_p1}, {"at_minus_1", at_m1},
                 {"interior_strictly_below", interior_strict}, {"doubling_change", doubling1}, {"pass", ok1}};
  bool ok2 = true;
  double worst_doubling = doubling1;
  auto& l2 = j["lemma2"] = nlohmann::json::array();
  for (double rb : {0.1, 0.3, 0.5, 0.7, 0.9}) {
    const double thr = 1.0 / (rb * rb) + kPi * kPi / 6.0;
    double mx = -1.0;
    for (int i = 0; i <= 200; ++i) mx = std::max(mx, series_bound_lemma2(-rb + rb * i / 100.0, rb, c.terms));
    const double dbl = std::abs(series_bound_lemma2(rb, rb, 2 * c.terms) - series_bound_lemma2(rb, rb, c.terms));
    worst_doubling = std::max(worst_doubling, dbl);
    const bool pass = mx < thr;
    ok2 = ok2 && pass;
    l2.push_back({{"rb", rb}, {"threshold", thr}, {"max", mx}, {"doubling_change", dbl}, {"pass", pass}});
  }
  j["doubling_below_1e-8"] = worst_doubling < 1e-8;
  j["pass"] = ok1 && ok2 && worst_doubling < 1e-8;
  std::cout << j.dump(2) << '\n';
  if (c.out != ".") write_json(out_dir(c) / "oracle.json", j);
  return j["pass"].get<bool>() ? 0 : 4;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Spectral analysis of periodic non-self-adjoint Dirac operators"};
  app.require_subcommand(1);
  Config cfg;

  auto add_common = [&](CLI::App* s, bool need_potential) {
    auto* p = s->add_option("--potential", cfg.potential, "Potential JSON file");
    if (need_potential) p->required();
    s->add_option("--tol", cfg.tol, "Integration tolerance")->capture_default_str();
    s->add_option("--out", cfg.out, "Output directory")->capture_default_str();
  };

  auto* check = app.add_subcommand("check", "Mean condition Re b != 0 and simplicity margins");
  add_common(check, true);

  auto* spectrum = app.add_subcommand("spectrum", "Eigenvalues in a rectangle over the t grid");
  add_common(spectrum, false);
  spectrum->add_option("--t-nodes", cfg.t_nodes, "Number of t values")->capture_default_str();
  spectrum->add_option("--rect", cfg.rect, "re0:re1:im0:im1");
  spectrum->add_option("--input-csv", cfg.input_csv, "Re-plot an existing eigenvalue CSV");

  auto* cls = app.add_subcommand("classify", "Spectrality verdict");
  add_common(cls, true);
  cls->add_option("--t-nodes", cfg.t_nodes, "Number of t values")->capture_default_str();
  cls->add_option("--n-range", cfg.n_range, "lo:hi lattice index range")->capture_default_str();

  auto* expand = app.add_subcommand("expand", "Spectral expansion of a target function");
  add_common(expand, true);
  expand->add_option("--K", cfg.K, "Truncation orders (comma separated)")->delimiter(',');
  expand->add_option("--t-nodes", cfg.t_nodes, "Gauss-Legendre nodes in t");
  expand->add_option("--target", cfg.target, "Target: inline JSON, JSON file or CSV file");
  expand->add_option("--window", cfg.window, "a:b error window");

  auto* oracle = app.add_subcommand("oracle", "Series-bound checks");
  oracle->add_option("--terms", cfg.terms, "Series terms")->capture_default_str();
  oracle->add_option("--out", cfg.out, "Output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }
  if (expand->parsed() && expand->count("--t-nodes") == 0) cfg.t_nodes = 32;

  try {
    if (check->parsed()) return cmd_check(cfg);
    if (spectrum->parsed()) return cmd_spectrum(cfg);
    if (cls->parsed()) return cmd_classify(cfg);
    if (expand->parsed()) return cmd_expand(cfg);
    if (oracle->parsed()) return cmd_oracle(cfg);
  } catch (const ParseError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const DomainError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}
