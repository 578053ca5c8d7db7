#include <CLI11.hpp>

#include <cmath>
#include <filesystem>
#include <iomanip>
#include <iostream>
#include <numbers>
#include <optional>
#include <sstream>

#include "carrier/cone.hpp"
#include "carrier/dbar.hpp"
#include "carrier/envelope.hpp"
#include "carrier/error.hpp"
#include "carrier/mollifier.hpp"
#include "carrier/norms.hpp"
#include "carrier/pws.hpp"
#include "carrier/suite.hpp"
#include "carrier/weights.hpp"

using namespace carrier;

namespace {

constexpr int kExitFail = 1;
constexpr int kExitConfig = 2;

std::vector<std::string> tokens(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  for (std::string t; std::getline(ss, t, sep);)
    if (!t.empty()) out.push_back(t);
  return out;
}

double number(const std::string& s) {
  std::size_t used = 0;
  double x = 0;
  try {
    x = std::stod(s, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0) throw Error(ErrorKind::ParseError, "not a number: '" + s + "'");
  const auto unit = s.substr(used);
  if (unit == "deg") return x * std::numbers::pi / 180.0;
  if (unit == "rad" || unit.empty()) return x;
  throw Error(ErrorKind::ParseError, "unknown unit in '" + s + "'");
}

Vec vec(const std::string& s) {
  auto t = tokens(s, ',');
  if (t.empty()) throw Error(ErrorKind::ParseError, "empty vector");
  Vec v(static_cast<Eigen::Index>(t.size()));
  for (std::size_t i = 0; i < t.size(); ++i) v(static_cast<Eigen::Index>(i)) = number(t[i]);
  return v;
}

// key=value pairs separated by spaces
std::map<std::string, std::string> pairs(const std::string& s) {
  std::map<std::string, std::string> m;
  for (const auto& t : tokens(s, ' ')) {
    auto eq = t.find('=');
    if (eq == std::string::npos) throw Error(ErrorKind::ParseError, "expected key=value in '" + t + "'");
    m[t.substr(0, eq)] = t.substr(eq + 1);
  }
  return m;
}

// circular axis=1,0 angle=30deg [closed] | polyhedral 1,0;0,1 | ray 1,1 | orthant 2 | full 2 | origin 2
Cone cone(const std::string& lit) {
  auto sp = lit.find(' ');
  const std::string kind = lit.substr(0, sp), rest = sp == std::string::npos ? "" : lit.substr(sp + 1);
  const bool closed = rest.find("closed") != std::string::npos;
  const bool open = rest.find("open") != std::string::npos;
  auto strip = [](std::string s) {
    for (const char* w : {"closed", "open"})
      if (auto p = s.find(w); p != std::string::npos) s.erase(p, std::string(w).size());
    const auto b = s.find_first_not_of(' '), e = s.find_last_not_of(' ');
    return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
  };
  if (kind == "circular") {
    auto kv = pairs(strip(rest));
    if (!kv.count("axis") || !kv.count("angle")) throw Error(ErrorKind::ParseError, "circular needs axis= and angle=");
    return Cone::circular(vec(kv["axis"]), number(kv["angle"]), closed ? Openness::Closed : Openness::Open);
  }
  if (kind == "polyhedral") {
    std::vector<Vec> g;
    for (const auto& t : tokens(strip(rest), ';')) g.push_back(vec(t));
    return Cone::polyhedral(g, open ? Openness::Open : Openness::Closed);
  }
  if (kind == "ray") return Cone::ray(vec(strip(rest)));
  const int d = static_cast<int>(number(strip(rest)));
  if (kind == "orthant") return Cone::orthant(d, open ? Openness::Open : Openness::Closed);
  if (kind == "full") return Cone::full(d);
  if (kind == "origin") return Cone::origin(d, open ? Openness::Open : Openness::Closed);
  throw Error(ErrorKind::ParseError, "unknown cone kind '" + kind + "'");
}

struct Globals {
  std::string config;
  std::string outDir;
  std::optional<double> tolScale;
  std::optional<int> threads;
  std::optional<std::uint64_t> seed;

  SuiteConfig resolve() const {
    SuiteConfig c = config.empty() ? SuiteConfig() : SuiteConfig::load(config);
    if (!outDir.empty()) c.set("out_dir", outDir);
    if (tolScale) c.set("tolerance_scale", std::to_string(*tolScale));
    if (threads) c.set("threads", std::to_string(*threads));
    if (seed) c.set("seed", std::to_string(*seed));
    return c;
  }
  std::filesystem::path out() const {
    auto p = resolve().out_dir();
    std::filesystem::create_directories(p);
    return p;
  }
};

void print(const EstimateReport& r) { write_report(std::cout, r); }

// ---- cones
struct ConesArgs {
  std::string cone, dist, subconeOf;
  bool dual = false, hull = false, records = false;
};

int run_cones(const Globals& g, const ConesArgs& a) {
  Cone C = cone(a.cone);
  std::cout << "cone " << C.describe() << "\n";
  int status = 0;
  if (a.dual) std::cout << "dual " << dual_cone(C).describe() << "\n";
  if (a.hull) {
    auto h = convex_hull(C);
    std::cout << "hull " << h.hull.describe() << " properly_convex " << h.properlyConvex << " dual_verified "
              << h.dualVerified << "\n";
  }
  if (!a.dist.empty()) {
    Vec x = vec(a.dist);
    std::cout << "distance " << std::setprecision(17) << distance_to_cone(x, C) << " boundary_distance "
              << distance_to_boundary(x, C) << "\n";
  }
  if (!a.subconeOf.empty()) {
    Cone U = cone(a.subconeOf);
    bool sub = is_compact_subcone(C, U);
    std::cout << "compact_subcone " << sub << "\n";
    if (sub) {
      auto s = separation_constant(C, U);
      std::cout << "gamma " << std::setprecision(17) << s.gamma << " resolution " << s.resolution << "\n";
    }
  }
  if (a.records) {
    RecordFile rec(g.out() / "cones.boundary.dat", {"x1", "x2", "x3"});
    for (const auto& v : boundary_directions(C, default_resolution(C.dim())))
      rec.row({v(0), v.size() > 1 ? v(1) : 0.0, v.size() > 2 ? v(2) : 0.0});
    std::cout << "records " << rec.path().string() << "\n";
  }
  return status;
}

// ---- weights
struct WeightsArgs {
  double alpha = 2.0;
  std::vector<std::string> indicator;
  bool nqa = false, regularize = false, records = false;
};

int run_weights(const Globals& g, const WeightsArgs& a) {
  auto seq = WeightSequence::gevrey(a.alpha);
  int status = 0;
  std::cout << "sequence " << seq.label() << "\n" << std::setprecision(12);
  for (const auto& s : a.indicator) {
    auto kv = pairs(s);
    if (!kv.count("r")) throw Error(ErrorKind::ParseError, "--indicator expects r=<value>");
    double r = number(kv["r"]);
    auto v = log_indicator(seq, r);
    std::cout << "r " << r << " log_a " << v.logValue << " maximizer " << v.maximizer << " tail " << v.fromTail
              << "\n";
  }
  if (a.nqa) {
    auto q = check_nonquasianalytic(seq);
    std::cout << "nonquasianalytic " << q.verdict << " partial_sum " << q.partialSum << " tail_bound " << q.tailBound
              << " exact_terms " << q.exactTerms << "\n";
    if (!q.verdict) status = kExitFail;
  }
  if (a.regularize) {
    auto reg = regularize(seq);
    std::cout << "# nu log_a log_a_regularized\n";
    for (int nu : {0, 1, 2, 5, 10, 20, 50, 100, 200})
      std::cout << nu << " " << seq.log_term(nu) << " " << reg.log_term(nu) << "\n";
  }
  if (a.records) {
    RecordFile rec(g.out() / "weights.indicator.dat", {"r", "log_a"});
    for (double r : r_grid(1e-3, 1e8, 32)) rec.row({r, log_indicator(seq, r).logValue});
    std::cout << "records " << rec.path().string() << "\n";
  }
  return status;
}

// ---- norms
struct NormsArgs {
  std::string function = "bump", file, cone = "orthant 1", family = "polynomial";
  double B = 1.0, A = 1.0, alpha = 2.0;
  int N = 0;
  bool records = false;
};

int run_norms(const Globals& g, const NormsArgs& a) {
  std::optional<GridFunction> f;
  if (!a.file.empty()) {
    f.emplace(load_grid(a.file));
  } else {
    auto axes = default_axes_1d();
    if (a.function == "bump") f.emplace(bump_transform().on_grid(axes));
    else if (a.function == "exp")
      f.emplace(GridFunction::sample(axes, [](auto x, auto y) { return std::exp(cplx(0, 1) * cplx(x[0], y[0])); },
                                     Provenance::ClosedForm));
    else if (a.function == "one")
      f.emplace(GridFunction::sample(axes, [](auto, auto) { return cplx(1.0); }, Provenance::ClosedForm));
    else
      throw Error(ErrorKind::ParseError, "unknown function '" + a.function + "' (bump, exp, one)");
  }
  Cone U = cone(a.cone);
  SupNorm s;
  if (a.family == "polynomial") s = sup_norm_S0(*f, NormParams::polynomial(U, a.B, a.N));
  else if (a.family == "gevrey") s = sup_norm_S0a(*f, NormParams::gevrey(U, a.B, a.A, a.alpha));
  else throw Error(ErrorKind::ParseError, "unknown family '" + a.family + "' (polynomial, gevrey)");
  std::cout << std::setprecision(12) << "value " << s.value << " saturated " << s.saturated << " argmax";
  for (double v : s.argmax) std::cout << " " << v;
  std::cout << (s.gridTooCoarse ? " grid_too_coarse" : "") << "\n";
  if (a.records) {
    std::vector<std::string> cols{"value", "saturated"};
    for (std::size_t i = 0; i < s.argmax.size(); ++i) cols.push_back("argmax_" + std::to_string(i));
    RecordFile rec(g.out() / "norms.value.dat", cols);
    std::vector<double> row{s.value, double(s.saturated)};
    row.insert(row.end(), s.argmax.begin(), s.argmax.end());
    rec.row(row);
  }
  return 0;
}

// ---- envelope
struct EnvelopeArgs {
  std::string U = "circular axis=1,0 angle=30deg", Uprime = "circular axis=1,0 angle=20deg",
              V = "circular axis=1,0 angle=15deg";
  std::vector<double> B{2}, N{0};
  double alpha = 2.0, extent = 6.0, yExtent = 1.0;
  int nx = 32, ny = 3;
  bool records = false;
};

int run_envelope(const Globals& g, const EnvelopeArgs& a) {
  if (a.B.size() != a.N.size()) throw Error(ErrorKind::ParseError, "--B and --N need the same length");
  Cone U = cone(a.U), Up = cone(a.Uprime), V = cone(a.V);
  const int d = U.dim();
  auto seq = WeightSequence::gevrey(a.alpha);
  Window W(build_mollifier(kDefaultWindowDelta, seq));
  std::vector<Axis> axes;
  for (int j = 0; j < d; ++j) axes.push_back({"x" + std::to_string(j + 1), -a.extent, a.extent, a.nx});
  for (int j = 0; j < d; ++j) axes.push_back({"y" + std::to_string(j + 1), -a.yExtent, a.yExtent, a.ny});
  auto sp = split(bump_transform().on_grid(axes), build_cutoff(U, 0.4), V);
  auto env = build_envelope(U, Up, W, EtaProfile(sp.data.eta));
  auto s = sample_envelope(env, axes);
  int status = 0;
  for (std::size_t k = 0; k < a.B.size(); ++k) {
    auto r = verify_envelope(s, sp.data.eta, U, Up, a.B[k], static_cast<int>(a.N[k]), seq, 0.4);
    print(r);
    if (!r.pass) status = kExitFail;
  }
  if (a.records) {
    std::vector<std::string> cols;
    for (const auto& ax : axes) cols.push_back(ax.name);
    cols.push_back("rho");
    RecordFile rec(g.out() / "envelope.rho.dat", cols);
    auto grid = GridFunction::zeros(axes);
    std::vector<double> x(static_cast<std::size_t>(d)), y(static_cast<std::size_t>(d));
    for (std::size_t i = 0; i < grid.size(); ++i) {
      grid.point(i, x, y);
      std::vector<double> row(x);
      row.insert(row.end(), y.begin(), y.end());
      row.push_back(s.rho[i]);
      rec.row(row);
    }
    std::cout << "records " << rec.path().string() << "\n";
  }
  return status;
}

// ---- dbar
struct DbarArgs {
  std::string K = "orthant 1", V = "orthant 1 open", Uprime = "orthant 1 open", U = "orthant 1 open";
  std::string function = "bump", file;
  int perUnit = 32;
  double extent = 2.0;
  bool savePieces = false;
};

int run_dbar(const Globals& g, const DbarArgs& a) {
  std::optional<GridFunction> f;
  if (!a.file.empty()) {
    f.emplace(load_grid(a.file));
  } else {
    const int n = static_cast<int>(2 * a.extent * a.perUnit) + 1;
    auto axes = grid_axes_1d(-a.extent, a.extent, n, -a.extent, a.extent, n);
    if (a.function == "bump") f.emplace(bump_transform().scaled(0.5).shifted_frequency(0.25).on_grid(axes));
    else if (a.function == "exp")
      f.emplace(GridFunction::sample(axes, [](auto x, auto y) { return std::exp(cplx(0, 0.5) * cplx(x[0], y[0])); },
                                     Provenance::ClosedForm));
    else
      throw Error(ErrorKind::ParseError, "unknown function '" + a.function + "' (bump, exp)");
  }
  auto r = decompose(*f, cone(a.K), cone(a.V), cone(a.Uprime), cone(a.U), WeightSequence::gevrey(2.0));
  std::cout << std::setprecision(6) << "residual1 " << r.residual1 << " residual2 " << r.residual2 << " scale "
            << r.scale << "\n";
  print(r.report);
  if (a.savePieces) {
    auto out = g.out();
    save_grid((out / "dbar.f1p.grid").string(), r.f1p);
    save_grid((out / "dbar.f2p.grid").string(), r.f2p);
    save_grid((out / "dbar.psi.grid").string(), r.psi);
    std::cout << "pieces written to " << out.string() << "\n";
  }
  return r.report.pass ? 0 : kExitFail;
}

// ---- pws
struct PwsArgs {
  std::vector<std::string> atoms;  // x[:c]
  std::vector<std::string> combs;  // start,step[,power]
  double R = 1.0, etaFloor = 0x1p-10;
  bool checkDecay = false;
  std::string checkBlowup, algebraNorm;
  bool records = false;
};

int run_pws(const Globals& g, const PwsArgs& a) {
  const Cone carrier = Cone::orthant(1);
  std::optional<CarriedFunctional> v;
  auto add = [&](const CarriedFunctional& t) { v = v ? *v + t : t; };
  for (const auto& s : a.atoms) {
    auto parts = tokens(s, ':');
    add(CarriedFunctional::delta(Vec::Constant(1, number(parts.at(0))), carrier,
                                 parts.size() > 1 ? number(parts[1]) : 1.0));
  }
  for (const auto& s : a.combs) {
    auto t = tokens(s, ',');
    if (t.size() < 2) throw Error(ErrorKind::ParseError, "--comb expects start,step[,power]");
    add(CarriedFunctional::comb(Vec::Constant(1, number(t[0])), Vec::Constant(1, number(t[1])), carrier,
                                t.size() > 2 ? static_cast<int>(number(t[2])) : 0));
  }
  if (!v) throw Error(ErrorKind::ParseError, "give at least one --atoms or --comb literal");
  TubeDomain tube(Cone::orthant(1, Openness::Open), a.R, carrier);
  int status = 0;
  auto fit_out = [&](const DecayFit& fit, const AnalyticSample& s, const std::string& name) {
    std::cout << std::setprecision(8) << name << " N_fit " << fit.N << " C " << fit.C << " eps_fit " << fit.epsFit
              << " eps_rms " << fit.epsRms << "\n";
    print(fit.report);
    if (a.records) {
      RecordFile rec(g.out() / ("pws." + name + ".dat"), {"eta", "abs_u", "fit_residual"});
      for (std::size_t i = 0; i < s.size(); ++i) {
        const double eta = s.point(i)[0].imag(), au = std::abs(s.values[i]);
        rec.row({eta, au, std::log(au) - std::log(fit.C * std::pow(eta, -fit.N))});
      }
    }
  };
  auto s = sample_tube(*v, tube, a.etaFloor);
  if (a.checkDecay) {
    auto fit = verify_decay(s, tube);
    fit_out(fit, s, "decay");
    if (!fit.report.pass) status = kExitFail;
  }
  if (!a.checkBlowup.empty()) {
    auto kv = pairs(a.checkBlowup);
    auto fit = verify_decay(s, tube, kv.count("alpha") ? number(kv["alpha"]) : 3.0);
    fit_out(fit, s, "blowup");
  }
  if (!a.algebraNorm.empty()) {
    auto kv = pairs(a.algebraNorm);
    const int N = kv.count("N") ? static_cast<int>(number(kv["N"])) : 0;
    auto u = [&](std::span<const cplx> z) { return laplace_transform(*v, z); };
    std::cout << std::setprecision(12) << "algebra_norm N=" << N << " "
              << algebra_norm(u, Cone::orthant(1, Openness::Open), a.R, N, a.etaFloor) << "\n";
  }
  return status;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"carrier: numerical checks for cones, weights, envelopes and analytic pieces"};
  app.require_subcommand(1);
  app.fallthrough();  // global flags may follow the subcommand
  Globals g;
  app.add_option("--config", g.config, "suite configuration file (key = value)");
  app.add_option("--out-dir", g.outDir, "directory for reports and records");
  app.add_option("--tolerance-scale", g.tolScale, "multiplies every acceptance tolerance");
  app.add_option("--threads", g.threads, "worker count (checks run sequentially)");
  app.add_option("--seed", g.seed, "random seed");

  ConesArgs ca;
  auto* cones = app.add_subcommand("cones", "cone operations");
  cones->add_option("--cone", ca.cone, "cone literal, e.g. 'circular axis=1,0 angle=30deg'")->required();
  cones->add_flag("--dual", ca.dual, "print the dual cone");
  cones->add_flag("--hull", ca.hull, "print the convex hull");
  cones->add_option("--dist", ca.dist, "distance from x (comma separated) to the cone");
  cones->add_option("--subcone-of", ca.subconeOf, "test compact inclusion in another cone literal");
  cones->add_flag("--records", ca.records, "write boundary direction records");

  WeightsArgs wa;
  auto* weights = app.add_subcommand("weights", "weight sequences and indicator functions");
  weights->add_option("--gevrey", wa.alpha, "Gevrey exponent alpha");
  weights->add_option("--indicator", wa.indicator, "evaluate log a(r), e.g. r=1e8")->take_all();
  weights->add_flag("--nqa-check", wa.nqa, "nonquasianalyticity series with tail bound");
  weights->add_flag("--regularize", wa.regularize, "print the regularized sequence");
  weights->add_flag("--records", wa.records, "write (r, log a(r)) records");

  NormsArgs na;
  auto* norms = app.add_subcommand("norms", "weighted sup norms of sampled functions");
  norms->add_option("--function", na.function, "bump, exp or one");
  norms->add_option("--file", na.file, "sample file instead of a named function");
  norms->add_option("--cone", na.cone, "cone literal");
  norms->add_option("--family", na.family, "polynomial or gevrey");
  norms->add_option("--B", na.B);
  norms->add_option("--N", na.N);
  norms->add_option("--A", na.A);
  norms->add_option("--alpha", na.alpha);
  norms->add_flag("--records", na.records);

  EnvelopeArgs ea;
  auto* envelope = app.add_subcommand("envelope", "plurisubharmonic envelope checks");
  envelope->add_option("--U", ea.U, "outer cone literal");
  envelope->add_option("--Uprime", ea.Uprime, "inner cone literal");
  envelope->add_option("--V", ea.V, "cone for the split bound");
  envelope->add_option("--B", ea.B)->delimiter(',');
  envelope->add_option("--N", ea.N)->delimiter(',');
  envelope->add_option("--alpha", ea.alpha);
  envelope->add_option("--nx", ea.nx, "nodes per real axis");
  envelope->add_option("--ny", ea.ny, "nodes per imaginary axis");
  envelope->add_option("--extent", ea.extent);
  envelope->add_option("--y-extent", ea.yExtent);
  envelope->add_flag("--records", ea.records, "write (x, y, rho) records");

  DbarArgs da;
  auto* dbar = app.add_subcommand("dbar", "split and dbar-correct a sampled function (one variable)");
  dbar->add_option("--K", da.K);
  dbar->add_option("--V", da.V);
  dbar->add_option("--Uprime", da.Uprime);
  dbar->add_option("--U", da.U);
  dbar->add_option("--function", da.function, "bump or exp");
  dbar->add_option("--file", da.file, "sample file instead of a named function");
  dbar->add_option("--per-unit", da.perUnit, "nodes per unit length");
  dbar->add_option("--extent", da.extent, "half width of the square grid");
  dbar->add_flag("--save-pieces", da.savePieces, "write f1', f2', psi sample files");

  PwsArgs pa;
  auto* pws = app.add_subcommand("pws", "Laplace transforms of carried functionals");
  pws->add_option("--atoms", pa.atoms, "point masses x[:c]")->take_all();
  pws->add_option("--comb", pa.combs, "combs start,step[,power]")->take_all();
  pws->add_option("--R", pa.R, "tube radius");
  pws->add_option("--eta-floor", pa.etaFloor);
  pws->add_flag("--check-decay", pa.checkDecay, "power-law bound toward the real boundary");
  pws->add_option("--check-blowup", pa.checkBlowup, "exponential blowup comparison, e.g. alpha=3");
  pws->add_option("--algebra-norm", pa.algebraNorm, "weighted sup norm, e.g. N=1");
  pws->add_flag("--records", pa.records, "write (eta, |u|, residual) records");

  std::string preset;
  auto* suite = app.add_subcommand("suite", "run a verification suite");
  suite->add_option("--preset", preset, "named scenario");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : kExitConfig;
  }

  try {
    if (*suite) {
      SuiteConfig c = g.resolve();
      if (!preset.empty()) {
        auto p = SuiteConfig::preset(preset);
        c.set("scenario", p.scenario());
        c.set("modules", p.raw("modules"));
      }
      auto r = run_suite(c);
      for (const auto& ch : r.checks)
        std::cout << "[" << ch.module << "] " << ch.report.name << " " << (ch.report.pass ? "PASS" : "FAIL") << "\n";
      std::cout << "report " << (c.out_dir() / (c.scenario() + ".report")).string() << "\n"
                << "overall " << (r.pass ? "PASS" : "FAIL") << "\n";
      return exit_code(r);
    }
    g.resolve();  // surfaces config errors before any work
    if (*cones) return run_cones(g, ca);
    if (*weights) return run_weights(g, wa);
    if (*norms) return run_norms(g, na);
    if (*envelope) return run_envelope(g, ea);
    if (*dbar) return run_dbar(g, da);
    if (*pws) return run_pws(g, pa);
  } catch (const Error& e) {
    std::cerr << e.what() << "\n";
    const auto k = e.kind();
    return k == ErrorKind::ConfigError || k == ErrorKind::ParseError ? kExitConfig : kExitFail;
  } catch (const std::exception& e) {
    std::cerr << e.what() << "\n";
    return kExitFail;
  }
  return 0;
}
