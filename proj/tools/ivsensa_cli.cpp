// Command-line front end: reads y,x,z[,w] microdata, runs the requested
// bound computation, and emits CSV/JSON artifacts for plotting.
#include <cmath>
#include <cstdio>
#include <stdexcept>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "ivsensa/data.hpp"
#include "ivsensa/discrete_bounds.hpp"
#include "ivsensa/distribution.hpp"
#include "ivsensa/emit.hpp"
#include "ivsensa/sensitivity.hpp"
#include "ivsensa/sieve.hpp"
#include "ivsensa/types.hpp"

namespace {

using namespace ivsensa;

struct Options {
  std::string input;
  std::string output;
  std::string format = "csv";
  std::string model;
  std::string target = "ate";
  std::string pipeline = "auto";
  std::string theta_grid;
  double theta = 0.0;
  double tau = 0.5;
  double at = 0.5;
  double value = 0.0;
  double quantile = -1.0;  // negative = no pre-discretization
  double tolerance = 1e-6;
  int arm = 1;
  int y_index = 0;
  int degree = 30;
  int grid_size = 128;
  int quadrature = 512;
  int points = 65;
  int min_stratum = 30;
};

void add_io(CLI::App* cmd, Options& o) {
  cmd->add_option("--input", o.input, "input csv with columns y,x,z and optional w")
      ->required();
  cmd->add_option("--output", o.output, "write the artifact here instead of stdout");
  cmd->add_option("--format", o.format, "artifact format")
      ->check(CLI::IsMember({"csv", "json"}));
}

void add_model(CLI::App* cmd, Options& o) {
  cmd->add_option("--model", o.model, "sensitivity model")
      ->required()
      ->check(CLI::IsMember({"msm", "cdep", "ks"}));
}

void add_target(CLI::App* cmd, Options& o) {
  cmd->add_option("--target", o.target, "bounded quantity")
      ->check(CLI::IsMember({"ate", "att", "prob", "pmf", "cdf", "qte"}));
  cmd->add_option("--arm", o.arm, "treatment arm for prob/pmf/cdf targets");
  cmd->add_option("--y-index", o.y_index, "outcome index for the pmf target");
  cmd->add_option("--at", o.at, "outcome cut for the cdf target, raw units");
}

void add_pipeline(CLI::App* cmd, Options& o) {
  cmd->add_option("--pipeline", o.pipeline,
                  "force the discrete or continuous pipeline (default by target)")
      ->check(CLI::IsMember({"auto", "discrete", "continuous"}));
  cmd->add_option("--quantile", o.quantile,
                  "binarize y at this empirical quantile before discrete estimation")
      ->check(CLI::Range(0.0, 1.0));
  cmd->add_option("--min-stratum", o.min_stratum,
                  "fewest observations tolerated per (x,z) cell when estimating densities");
}

void add_sieve(CLI::App* cmd, Options& o) {
  cmd->add_option("--degree", o.degree, "Bernstein degree M");
  cmd->add_option("--grid-size", o.grid_size, "relaxation constraint grid size N");
  cmd->add_option("--quadrature", o.quadrature, "objective quadrature size L");
}

ModelTag parse_tag(const std::string& s) {
  if (s == "msm") return ModelTag::msm;
  if (s == "cdep") return ModelTag::cdep;
  return ModelTag::ks;
}

EmitFormat parse_format(const std::string& s) {
  return s == "json" ? EmitFormat::json : EmitFormat::csv;
}

// "start:stop:step", endpoints inclusive; when the step does not divide the
// range the last point clamps to stop.
Vec parse_theta_grid(const std::string& sp) {
  double start = 0.0, stop = 0.0, step = 0.0;
  const std::size_t c1 = sp.find(':');
  const std::size_t c2 = sp.find(':', c1 == std::string::npos ? c1 : c1 + 1);
  const auto bad = [&]() {
    throw std::invalid_argument("malformed theta grid '" + sp +
                                "', expected start:stop:step");
  };
  if (c1 == std::string::npos || c2 == std::string::npos) bad();
  try {
    std::size_t used = 0;
    std::string f = sp.substr(0, c1);
    start = std::stod(f, &used);
    if (used != f.size()) bad();
    f = sp.substr(c1 + 1, c2 - c1 - 1);
    stop = std::stod(f, &used);
    if (used != f.size()) bad();
    f = sp.substr(c2 + 1);
    step = std::stod(f, &used);
    if (used != f.size()) bad();
  } catch (const std::invalid_argument&) {
    bad();
  } catch (const std::out_of_range&) {
    bad();
  }
  if (!(start >= 0.0 && stop <= 1.0 && start <= stop))
    throw std::invalid_argument("theta grid must sit inside [0, 1]");
  if (!(step > 0.0)) throw std::invalid_argument("theta grid step must be positive");
  Vec out;
  const int last = static_cast<int>(std::floor((stop - start) / step + 1e-12));
  for (int i = 0; i <= last; ++i) out.push_back(start + i * step);
  if (stop - out.back() > 1e-12)
    out.push_back(stop);
  else
    out.back() = stop;
  return out;
}

Dataset load_data(const Options& o) {
  Dataset d = read_csv(o.input);
  if (o.quantile >= 0.0) d = discretize_outcome(d, o.quantile).data;
  return d;
}

JointDiscreteDist load_discrete(const Options& o) { return estimate_discrete(load_data(o)); }

CondDensityTable load_table(const Options& o) {
  if (o.quantile >= 0.0)
    throw std::invalid_argument("--quantile only applies to the discrete pipeline");
  const RescaleResult r = rescale_outcome(read_csv(o.input));
  CondDensityTable t = estimate_cond_density(r.data, o.degree, {o.min_stratum});
  t.affine = r.map;
  return t;
}

SieveConfig sieve_config(const Options& o) { return {o.degree, o.grid_size, o.quadrature}; }

bool use_continuous(const Options& o) {
  const bool needs_cont = o.target == "cdf" || o.target == "qte";
  const bool needs_disc = o.target == "att" || o.target == "prob" || o.target == "pmf";
  if (o.pipeline == "discrete") {
    if (needs_cont)
      throw std::invalid_argument("target '" + o.target + "' needs the continuous pipeline");
    return false;
  }
  if (o.pipeline == "continuous") {
    if (needs_disc)
      throw std::invalid_argument("target '" + o.target + "' needs the discrete pipeline");
    return true;
  }
  return needs_cont;
}

BoundTarget discrete_target(const Options& o) {
  BoundTarget t;
  if (o.target == "ate") t.kind = BoundTarget::Kind::ate;
  else if (o.target == "att") t.kind = BoundTarget::Kind::att;
  else if (o.target == "prob") t.kind = BoundTarget::Kind::prob;
  else if (o.target == "pmf") t.kind = BoundTarget::Kind::pmf;
  else throw std::invalid_argument("target '" + o.target + "' has no discrete form");
  t.arm = o.arm;
  t.y_index = o.y_index;
  return t;
}

// Weight functions for the continuous targets, plus the factor that maps
// the unit-interval optimum back to raw outcome units.
FunctionalSpec continuous_spec(const Options& o, const CondDensityTable& t, double& scale) {
  if (o.target == "ate") {
    scale = t.affine.scale;
    return ate_functional();
  }
  if (o.target != "cdf")
    throw std::invalid_argument("target '" + o.target + "' has no continuous bound form");
  if (o.arm != 0 && o.arm != 1) throw std::invalid_argument("--arm must be 0 or 1");
  const double a = (o.at - t.affine.shift) / t.affine.scale;
  if (!(a >= 0.0 && a <= 1.0))
    throw std::invalid_argument("--at lies outside the observed outcome range");
  scale = 1.0;  // probabilities do not rescale
  return cdf_functional(o.arm, a);
}

IdentifiedInterval scale_interval(const IdentifiedInterval& iv, double scale) {
  if (!iv.feasible || scale == 1.0) return iv;
  return IdentifiedInterval::of(scale * iv.lower, scale * iv.upper);
}

int emit_text(const Options& o, const std::string& text, int code) {
  if (o.output.empty())
    std::fputs(text.c_str(), stdout);
  else
    write_text_atomic(o.output, text);
  return code;
}

std::string interval_line(const IdentifiedInterval& iv) {
  if (!iv.feasible) return "infeasible\n";
  return "[" + render_number(iv.lower) + ", " + render_number(iv.upper) + "]\n";
}

int run_bounds(const Options& o) {
  if (o.target == "qte")
    throw std::invalid_argument("quantile bounds are served by the qte command");
  IdentifiedInterval iv;
  if (use_continuous(o)) {
    const CondDensityTable table = load_table(o);
    double scale = 1.0;
    const FunctionalSpec spec = continuous_spec(o, table, scale);
    iv = scale_interval(
        functional_bounds(table, {parse_tag(o.model), o.theta}, sieve_config(o), spec), scale);
  } else {
    iv = bounds_for_target(load_discrete(o), {parse_tag(o.model), o.theta}, discrete_target(o));
  }
  return emit_text(o, interval_line(iv), iv.feasible ? 0 : 2);
}

int run_curve(const Options& o) {
  if (o.target == "qte")
    throw std::invalid_argument("quantile bounds are served by the qte command");
  const Vec thetas = parse_theta_grid(o.theta_grid);
  SensitivityCurve curve;
  if (use_continuous(o)) {
    const CondDensityTable table = load_table(o);
    double scale = 1.0;
    const FunctionalSpec spec = continuous_spec(o, table, scale);
    curve = sensitivity_curve_continuous(table, parse_tag(o.model), thetas, sieve_config(o), spec);
    for (CurveRow& row : curve.rows) row.interval = scale_interval(row.interval, scale);
  } else {
    curve = sensitivity_curve(load_discrete(o), parse_tag(o.model), thetas, discrete_target(o));
  }
  return emit_text(o, render_curve(curve, parse_format(o.format)), 0);
}

int run_falsification(const Options& o) {
  FalsificationResult fp;
  if (o.pipeline == "continuous")
    fp = falsification_point_continuous(load_table(o), parse_tag(o.model), sieve_config(o),
                                        o.tolerance);
  else
    fp = falsification_point(load_discrete(o), parse_tag(o.model), o.tolerance);
  std::string text = "theta=" + render_number(fp.theta) + "\n";
  for (std::size_t j = 0; j < fp.per_arm.size(); ++j)
    text += "arm" + std::to_string(j) + "=" + render_number(fp.per_arm[j]) + "\n";
  return emit_text(o, text, 0);
}

int run_breakdown(const Options& o) {
  if (o.target == "qte")
    throw std::invalid_argument("breakdown supports the ate/att/prob/pmf/cdf targets");
  BreakdownResult br;
  if (use_continuous(o)) {
    const CondDensityTable table = load_table(o);
    double scale = 1.0;
    const FunctionalSpec spec = continuous_spec(o, table, scale);
    br = breakdown_point_continuous(table, parse_tag(o.model), sieve_config(o), spec,
                                    o.value / scale, o.tolerance);
  } else {
    br = breakdown_point(load_discrete(o), parse_tag(o.model), discrete_target(o), o.value,
                         o.tolerance);
  }
  const std::string text =
      br.never ? std::string("never=true\n") : "theta=" + render_number(br.theta) + "\n";
  return emit_text(o, text, 0);
}

int run_cdf_band(const Options& o) {
  if (o.pipeline == "discrete")
    throw std::invalid_argument("cdf-band runs on the continuous pipeline");
  if (o.arm != 0 && o.arm != 1) throw std::invalid_argument("--arm must be 0 or 1");
  if (o.points < 2) throw std::invalid_argument("--points must be at least 2");
  const CondDensityTable table = load_table(o);
  const CdfBand band = cdf_bounds(table, {parse_tag(o.model), o.theta}, sieve_config(o), o.arm,
                                  unit_grid(o.points));
  if (!band.feasible) {
    std::fprintf(stderr, "model refuted at theta=%s\n", render_number(o.theta).c_str());
    return 2;
  }
  std::string text;
  if (parse_format(o.format) == EmitFormat::csv) {
    text = "a,lower,upper\n";
    for (std::size_t i = 0; i < band.grid.size(); ++i) {
      const double raw = table.affine.shift + table.affine.scale * band.grid[i];
      text += render_number(raw) + "," + render_number(band.band[i].lower) + "," +
              render_number(band.band[i].upper) + "\n";
    }
  } else {
    text = "[\n";
    for (std::size_t i = 0; i < band.grid.size(); ++i) {
      const double raw = table.affine.shift + table.affine.scale * band.grid[i];
      text += "  {\"a\":" + render_number(raw) + ",\"lower\":" +
              render_number(band.band[i].lower) + ",\"upper\":" +
              render_number(band.band[i].upper) + "}";
      if (i + 1 < band.grid.size()) text += ',';
      text += '\n';
    }
    text += "]\n";
  }
  return emit_text(o, text, 0);
}

int run_qte(const Options& o) {
  if (o.pipeline == "discrete")
    throw std::invalid_argument("qte runs on the continuous pipeline");
  if (o.points < 2) throw std::invalid_argument("--points must be at least 2");
  const CondDensityTable table = load_table(o);
  const QteResult r = qte_bounds(table, {parse_tag(o.model), o.theta}, sieve_config(o), o.tau,
                                 unit_grid(o.points));
  std::string text = interval_line(r.interval);
  if (r.interval.feasible) {
    if (r.lower_open) text += "lower_open=true\n";
    if (r.upper_open) text += "upper_open=true\n";
  }
  return emit_text(o, text, r.interval.feasible ? 0 : 2);
}

int run_refute(const Options& o) {
  const CondDensityTable table = load_table(o);
  const RefutationResult r = refutation_check(table, o.quadrature);
  std::string text = r.refuted ? "refuted=true\n" : "refuted=false\n";
  for (std::size_t j = 0; j < r.integrals.size(); ++j)
    text += "integral_arm" + std::to_string(j) + "=" + render_number(r.integrals[j]) + "\n";
  return emit_text(o, text, r.refuted ? 2 : 0);
}

std::string dataset_csv(const Dataset& d) {
  std::string text = d.has_weights ? "y,x,z,w\n" : "y,x,z\n";
  for (const Observation& row : d.rows) {
    text += render_number(row.y) + "," + row.x + "," + row.z;
    if (d.has_weights) text += "," + render_number(row.w);
    text += '\n';
  }
  return text;
}

int run_discretize(const Options& o) {
  const DiscretizeResult r = discretize_outcome(read_csv(o.input), o.quantile);
  std::fprintf(stderr, "cut=%s\n", render_number(r.cut).c_str());
  return emit_text(o, dataset_csv(r.data), 0);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"sharp treatment-effect bounds under relaxed instrument exclusion"};
  app.require_subcommand(1);
  Options o;

  CLI::App* bounds = app.add_subcommand("bounds", "identified interval at one theta");
  add_io(bounds, o);
  add_model(bounds, o);
  add_target(bounds, o);
  add_pipeline(bounds, o);
  add_sieve(bounds, o);
  bounds->add_option("--theta", o.theta, "sensitivity parameter")
      ->required()
      ->check(CLI::Range(0.0, 1.0));

  CLI::App* curve = app.add_subcommand("curve", "identified intervals over a theta grid");
  add_io(curve, o);
  add_model(curve, o);
  add_target(curve, o);
  add_pipeline(curve, o);
  add_sieve(curve, o);
  curve->add_option("--theta-grid", o.theta_grid, "grid spec start:stop:step")->required();

  CLI::App* falsification =
      app.add_subcommand("falsification-point", "smallest theta the data cannot reject");
  add_io(falsification, o);
  add_model(falsification, o);
  add_pipeline(falsification, o);
  add_sieve(falsification, o);
  falsification->add_option("--tolerance", o.tolerance, "bisection tolerance");

  CLI::App* breakdown =
      app.add_subcommand("breakdown", "smallest theta that admits a reference value");
  add_io(breakdown, o);
  add_model(breakdown, o);
  add_target(breakdown, o);
  add_pipeline(breakdown, o);
  add_sieve(breakdown, o);
  breakdown->add_option("--value", o.value, "reference value to admit")->required();
  breakdown->add_option("--tolerance", o.tolerance, "bisection tolerance");

  CLI::App* cdf_band = app.add_subcommand("cdf-band", "cdf bounds over an outcome grid");
  add_io(cdf_band, o);
  add_model(cdf_band, o);
  add_pipeline(cdf_band, o);
  add_sieve(cdf_band, o);
  cdf_band->add_option("--theta", o.theta, "sensitivity parameter")
      ->required()
      ->check(CLI::Range(0.0, 1.0));
  cdf_band->add_option("--arm", o.arm, "treatment arm");
  cdf_band->add_option("--points", o.points, "outcome grid resolution");

  CLI::App* qte = app.add_subcommand("qte", "quantile treatment effect bounds");
  add_io(qte, o);
  add_model(qte, o);
  add_pipeline(qte, o);
  add_sieve(qte, o);
  qte->add_option("--theta", o.theta, "sensitivity parameter")
      ->required()
      ->check(CLI::Range(0.0, 1.0));
  qte->add_option("--tau", o.tau, "quantile level")->required()->check(CLI::Range(0.0, 1.0));
  qte->add_option("--points", o.points, "outcome grid resolution");

  CLI::App* refute = app.add_subcommand("refute", "data-only overidentification check");
  add_io(refute, o);
  add_pipeline(refute, o);
  add_sieve(refute, o);

  CLI::App* discretize = app.add_subcommand("discretize", "binarize y at an empirical quantile");
  add_io(discretize, o);
  discretize->add_option("--quantile", o.quantile, "empirical quantile for the cut")
      ->required()
      ->check(CLI::Range(0.0, 1.0));

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  try {
    if (app.got_subcommand(bounds)) return run_bounds(o);
    if (app.got_subcommand(curve)) return run_curve(o);
    if (app.got_subcommand(falsification)) return run_falsification(o);
    if (app.got_subcommand(breakdown)) return run_breakdown(o);
    if (app.got_subcommand(cdf_band)) return run_cdf_band(o);
    if (app.got_subcommand(qte)) return run_qte(o);
    if (app.got_subcommand(refute)) return run_refute(o);
    if (app.got_subcommand(discretize)) return run_discretize(o);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 1;
}
