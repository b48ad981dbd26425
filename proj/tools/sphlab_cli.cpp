// sphlab command-line front end.

#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "sphlab.hpp"

namespace {

using namespace sphlab;

constexpr int kExitOk = 0;
constexpr int kExitFailure = 1;
constexpr int kExitConfig = 2;
constexpr int kExitBudget = 3;
constexpr int kExitNotQuasiNormal = 4;
constexpr int kExitSchedule = 5;

const char* kExitCodeHelp =
    "Exit codes:\n"
    "  0  success\n"
    "  1  numerical failure (e.g. Newton divergence, no concentrated mass)\n"
    "  2  configuration error (bad flags, malformed JSON or domain)\n"
    "  3  quadrature cell budget exceeded (partial result printed)\n"
    "  4  family is not quasi-normal (payload printed)\n"
    "  5  index schedule too short\n"
    "Environment: SPHLAB_THREADS sets the worker count when --threads is 0.";

struct FunctionArgs {
  std::string family;
  int n = 1;
  int m = 1;
  std::string rational;
  std::string indices = "1:128:geom";
  double value_re = 0.0;
};

void add_function_flags(CLI::App* cmd, FunctionArgs& f, bool with_member) {
  cmd->add_option("--family", f.family, "builtin family: nz, exp_inz, nP, constant");
  if (with_member) cmd->add_option("--n", f.n, "family member index")->capture_default_str();
  cmd->add_option("--m", f.m, "degree m of P(z) = 2z^m - 1 for nP")->capture_default_str();
  cmd->add_option("--value", f.value_re, "value of the constant family")->capture_default_str();
  cmd->add_option("--rational", f.rational, R"(rational function as {"num":[[re,im],...],"den":[[re,im],...]})");
}

FamilySpec make_family(const FunctionArgs& f) {
  FamilyParams p;
  p.indices = parse_indices(f.indices);
  p.m = f.m;
  p.value = f.value_re;
  return builtin_family(f.family, p);
}

MeroFunc make_function(const FunctionArgs& f) {
  if (!f.rational.empty() && !f.family.empty()) throw InvalidArgumentError("give either --rational or --family");
  if (!f.rational.empty()) return MeroFunc(parse_rational(f.rational));
  if (f.family.empty()) throw InvalidArgumentError("a function is required (--rational or --family)");
  FamilyParams p;
  p.m = f.m;
  p.value = f.value_re;
  p.indices = {f.n};
  return builtin_family(f.family, p).at(f.n);
}

RationalFunc require_rational(const MeroFunc& f, const char* cmd) {
  if (auto r = f.as_rational()) return *r;
  throw InvalidArgumentError(std::string(cmd) + " needs a rational function");
}

void emit(const std::string& text, const std::string& path) {
  if (path.empty()) {
    std::cout << text << '\n';
    return;
  }
  std::ofstream out(path);
  if (!out) throw InvalidArgumentError("cannot write " + path);
  out << text << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"sphlab: spherical derivatives, areas, bubbles, bounds and Liouville's equation"};
  app.footer(kExitCodeHelp);
  app.require_subcommand(1);
  app.set_config("--config", "", "read options from a key=value file");

  int threads = 0;
  bool emit_config = false;
  std::string output;
  app.add_option("--threads", threads, "worker threads (0: SPHLAB_THREADS or 1)")->capture_default_str();
  app.add_flag("--emit-config", emit_config, "print the fully resolved configuration before running");
  app.add_option("-o,--output", output, "write the JSON report to this file instead of stdout");

  // area
  FunctionArgs area_fn;
  std::string area_domain = "disk:0,0,1";
  double area_tol = 1e-8, area_s = 2.0;
  long max_cells = QuadOptions{}.max_cells;
  auto* area = app.add_subcommand("area", "spherical area (or L^s integral) of a function over a domain");
  add_function_flags(area, area_fn, true);
  area->add_option("--domain", area_domain, "disk:cx,cy,r | rect:x0,x1,y0,y1 | annulus:cx,cy,ri,ro | "
                                            "diskminus:cx,cy,r;px,py,hr;...")
      ->capture_default_str();
  area->add_option("--tol", area_tol, "absolute tolerance in units of pi")->capture_default_str();
  area->add_option("--s", area_s, "exponent s of the integral of (f#)^s")->capture_default_str();
  area->add_option("--max-cells", max_cells, "quadrature cell budget")->capture_default_str();

  // bubbles
  FunctionArgs bub_fn;
  std::string bub_domain = "disk:0,0,1", marty_csv;
  int bub_res = 64;
  std::vector<double> bub_eps{0.2, 0.1, 0.05};
  std::optional<double> order_bound;
  double quant_tol = 0.05;
  auto* bubbles = app.add_subcommand("bubbles", "irregular points, concentration masses and quantization");
  add_function_flags(bubbles, bub_fn, false);
  bubbles->add_option("--indices", bub_fn.indices, "schedule: a:b:geom, a:b or n1,n2,...")->capture_default_str();
  bubbles->add_option("--domain", bub_domain, "domain string (see area)")->capture_default_str();
  bubbles->add_option("--resolution", bub_res, "coarse detection grid cells per side")->capture_default_str();
  bubbles->add_option("--eps", bub_eps, "decreasing radii for mass estimation")->capture_default_str();
  bubbles->add_option("--order-bound", order_bound, "bound on the number of irregular points");
  bubbles->add_option("--quantization-tol", quant_tol, "tolerance for integer masses")->capture_default_str();
  bubbles->add_option("--marty-csv", marty_csv, "write the f# field of the last member as CSV");

  // bounds
  FunctionArgs bnd_fn;
  std::string check = "fkr";
  double bnd_param = 0.45;
  int bnd_res = 64;
  auto* bounds = app.add_subcommand("bounds", "check f# against a Schwarz-type bound on the unit disk");
  add_function_flags(bounds, bnd_fn, true);
  bounds->add_option("--check", check, "dufresnoy | steinmetz | fkr")
      ->check(CLI::IsMember({"dufresnoy", "steinmetz", "fkr"}))
      ->capture_default_str();
  bounds->add_option("--c,--C", bnd_param, "lower bound c on f# (steinmetz, fkr) or area bound C (dufresnoy)")
      ->capture_default_str();
  bounds->add_option("--resolution", bnd_res, "radii in the sweep (angles: twice this)")->capture_default_str();

  // liouville
  std::string oracle = "z", rect = "-0.5,0.5,-0.5,0.5", csv;
  double V = 4.0, h = 1.0 / 64;
  FunctionArgs lv_fn;
  auto* liouville = app.add_subcommand("liouville", "-Lap u = V e^{2u}: residuals, Newton solves, blow-up tables");
  liouville->set_help_flag("--help", "print this help message and exit");  // frees "--h" for the spacing
  bool m_solve = false, m_residual = false, m_superharmonic = false, m_blowup = false;
  liouville->add_flag("--solve", m_solve, "solve with boundary data from the oracle (default)");
  liouville->add_flag("--residual", m_residual, "finite-difference residual of log f#");
  liouville->add_flag("--superharmonic", m_superharmonic, "mean-value test for log f#");
  liouville->add_flag("--blowup", m_blowup, "u_n = log f_n# table over a family");
  liouville->add_option("--V", V, "constant potential V >= 0")->capture_default_str();
  liouville->add_option("--oracle", oracle, "z: u = -log(1+|z|^2), exp: u = x - log(1+e^{2x})")
      ->check(CLI::IsMember({"z", "exp"}))
      ->capture_default_str();
  liouville->add_option("--h", h, "grid spacing")->capture_default_str();
  liouville->add_option("--rect", rect, "x0,x1,y0,y1")->capture_default_str();
  liouville->add_option("--csv", csv, "write the solution (or residual) grid as CSV");
  add_function_flags(liouville, lv_fn, true);
  liouville->add_option("--indices", lv_fn.indices, "schedule for --blowup")->capture_default_str();

  // covering
  FunctionArgs cov_fn;
  std::string cov_domain = "disk:0,0,1";
  int cov_res = 64;
  std::optional<double> cov_C;
  auto* covering = app.add_subcommand("covering", "covering counts: area oracle and low-multiplicity set");
  add_function_flags(covering, cov_fn, true);
  covering->add_flag("--oracle", "area from covering counts (default mode)");
  covering->add_option("--domain", cov_domain, "domain string (see area)")->capture_default_str();
  covering->add_option("--resolution", cov_res, "latitude bands of the sphere grid")->capture_default_str();
  covering->add_option("--C", cov_C, "area bound: report the set of values taken at most floor(C) times");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }

  if (emit_config) {
    // Globals plus the selected subcommand's options, replayable with
    // `sphlab --config FILE <command>`. Written to stderr so stdout stays JSON.
    const std::string command = app.get_subcommands().front()->get_name();
    std::istringstream all(app.config_to_str(true, false));
    std::cerr << "# command: " << command << '\n';
    for (std::string line; std::getline(all, line);) {
      const auto dot = line.find('.'), eq = line.find('=');
      const bool global = dot == std::string::npos || dot > eq;
      if (line.rfind("emit-config", 0) == 0) continue;
      if (global || line.rfind(command + ".", 0) == 0) std::cerr << line << '\n';
    }
  }

  try {
    if (*area) {
      const MeroFunc f = make_function(area_fn);
      QuadOptions opt;
      opt.max_cells = max_cells;
      opt.threads = threads;
      const QuadResult r = ls_integral(f, parse_domain(area_domain), area_s, area_tol, opt);
      emit(to_json(r), output);
      return kExitOk;
    }
    if (*bubbles) {
      const FamilySpec fam = make_family(bub_fn);
      const Domain2D dom = parse_domain(bub_domain);
      ProfileOptions opt;
      opt.resolution = bub_res;
      opt.eps_schedule = bub_eps;
      opt.quantization_tol = quant_tol;
      opt.order_bound = order_bound;
      opt.threads = threads;
      const MassProfile prof = build_mass_profile(fam, dom, opt);
      if (!marty_csv.empty()) {
        std::ofstream out(marty_csv);
        if (!out) throw InvalidArgumentError("cannot write " + marty_csv);
        out << marty_field_csv(marty_field(fam.at(fam.last_index()), dom, bub_res, threads));
      }
      emit(to_json(prof), output);
      return prof.status == DetectionStatus::NotQuasiNormal ? kExitNotQuasiNormal : kExitOk;
    }
    if (*bounds) {
      const MeroFunc f = make_function(bnd_fn);
      const BoundSpec spec = check == "dufresnoy"   ? BoundSpec::dufresnoy(bnd_param)
                             : check == "steinmetz" ? BoundSpec::steinmetz(bnd_param)
                                                    : BoundSpec::fkr(bnd_param);
      emit(to_json(verify_bound(f, spec, bnd_res)), output);
      return kExitOk;
    }
    if (*liouville) {
      if (m_solve + m_residual + m_superharmonic + m_blowup > 1) {
        throw InvalidArgumentError("choose one of --solve, --residual, --superharmonic, --blowup");
      }
      const std::string mode = m_residual ? "residual" : m_superharmonic ? "superharmonic" : m_blowup ? "blowup" : "solve";
      const auto r = detail::parse_numbers(rect, 4, 4, "--rect");
      const Grid2D G = Grid2D::with_spacing(r[0], r[1], r[2], r[3], h);
      const bool exp_oracle = oracle == "exp";
      auto u_exact = [&](cplx z) {
        if (!exp_oracle) return -std::log1p(std::norm(z));
        const double x = z.real();
        return x - (x > 0 ? 2.0 * x + std::log1p(std::exp(-2.0 * x)) : std::log1p(std::exp(2.0 * x)));
      };
      auto oracle_fn = [&] {
        return exp_oracle
                   ? MeroFunc(FormulaFunc::from_pair([](cplx z) { return std::exp(z); },
                                                     [](cplx z) { return std::exp(z); }, {}, "exp(z)"))
                   : MeroFunc(RationalFunc::polynomial(Polynomial{0.0, 1.0}));
      };
      JsonWriter w;
      w.begin_object().field("mode", mode).field("rect", rect).field("h", G.h()).field("nx", G.nx()).field("ny", G.ny());
      if (mode == "solve") {
        const NodeGrid Vg(G, V);
        const NodeGrid B = sample(G, u_exact);
        const PDESolution s = solve_liouville(Vg, B, G);
        double err = 0.0;
        for (std::size_t k = 0; k < B.values.size(); ++k) err = std::max(err, std::abs(s.u.values[k] - B.values[k]));
        w.field("V", V).field("oracle", oracle);
        w.key("solution");
        write_json(w, s);
        w.field("oracle_error", err).field("oracle_error_over_h2", err / (G.h() * G.h()));
        if (!csv.empty()) emit(to_csv(s.u), csv);
      } else if (mode == "residual" || mode == "superharmonic") {
        const MeroFunc f = (lv_fn.family.empty() && lv_fn.rational.empty()) ? oracle_fn() : make_function(lv_fn);
        if (mode == "residual") {
          const NodeGrid res = liouville_residual(f, G);
          w.field("max_abs_residual", res.max_abs());
          if (!csv.empty()) emit(to_csv(res), csv);
        } else {
          const SuperharmonicReport rep = superharmonic_check(f, G);
          w.field("violations", rep.violations).field("worst", rep.worst).field("excluded", rep.excluded.size());
        }
      } else {
        if (lv_fn.family.empty()) throw InvalidArgumentError("--blowup needs --family");
        BlowupOptions bo;
        bo.probes = {cplx(0.4, 0.0)};
        const auto rows = blowup_demo(make_family(lv_fn), G, bo);
        w.key("rows").begin_array();
        for (const auto& row : rows) {
          w.begin_object().field("n", row.n).field("max_u", row.max_u).field("min_u", row.min_u).field("mass", row.mass);
          w.field("u_at_0.4", row.probe_u.front()).end_object();
        }
        w.end_array();
      }
      w.end_object();
      emit(w.str(), output);
      return kExitOk;
    }
    if (*covering) {
      const RationalFunc f = require_rational(make_function(cov_fn), "covering");
      const Domain2D dom = parse_domain(cov_domain);
      if (cov_C) {
        emit(to_json(low_multiplicity_report(f, dom, *cov_C, cov_res, threads)), output);
      } else {
        JsonWriter w;
        w.begin_object()
            .field("domain", dom.describe())
            .field("resolution", cov_res)
            .field("area_oracle", covering_area_oracle(f, dom, cov_res, threads))
            .field("grid_error", 1.0 / cov_res)
            .end_object();
        emit(w.str(), output);
      }
      return kExitOk;
    }
  } catch (const BudgetExceededError& e) {
    std::cerr << "budget exceeded: " << e.what() << '\n';
    emit(to_json(e.partial()), output);
    return kExitBudget;
  } catch (const ScheduleTooShortError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitSchedule;
  } catch (const InvalidArgumentError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const UnknownFamilyError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const ParameterRangeError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitFailure;
  }
  return kExitFailure;
}
