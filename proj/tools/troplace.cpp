#include <CLI11.hpp>
#include <json.hpp>

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "troplace/asymptotics.hpp"
#include "troplace/errors.hpp"
#include "troplace/io.hpp"
#include "troplace/logmap.hpp"
#include "troplace/metric_graph.hpp"
#include "troplace/potential.hpp"

namespace {

using namespace troplace;
using ojson = nlohmann::ordered_json;

enum Exit { Ok = 0, Schema = 2, Infeasible = 3, Numerical = 4 };

struct Common {
  std::string graph_path;
  std::string preset_name;
  std::string lengths;
  std::string arith = "float";
  std::string out;
  unsigned long long seed = 1;
};

// shortest text that reads back as v
std::string num(double v) {
  char buf[32];
  const bool whole = v == std::trunc(v) && std::abs(v) < 9007199254740992.0;
  const auto end = whole ? std::to_chars(buf, buf + sizeof buf, v, std::chars_format::fixed).ptr
                         : std::to_chars(buf, buf + sizeof buf, v).ptr;
  return std::string(buf, end);
}

// exact values print as p/q
std::string cell(double v) { return num(v); }
std::string cell(const Rational& v) { return v.get_str(); }

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream in(s);
  while (std::getline(in, cur, sep))
    if (!cur.empty()) out.push_back(cur);
  return out;
}

std::vector<double> parse_list(const std::string& s, const std::string& what) {
  std::vector<double> out;
  for (const auto& tok : split(s, ',')) {
    try {
      size_t used = 0;
      const double v = std::stod(tok, &used);
      if (used != tok.size() || !std::isfinite(v)) throw std::invalid_argument(tok);
      out.push_back(v);
    } catch (const std::exception&) {
      throw SchemaError("cannot parse " + what + " entry '" + tok + "'");
    }
  }
  if (out.empty()) throw SchemaError("empty " + what);
  return out;
}

std::string read_text(const std::string& path_or_json) {
  if (!path_or_json.empty() && path_or_json.front() == '{') return path_or_json;
  std::ifstream in(path_or_json);
  if (!in) throw SchemaError("cannot read '" + path_or_json + "'");
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

GraphSpec load(const Common& c) {
  if (c.graph_path.empty() == c.preset_name.empty()) throw SchemaError("give exactly one of --graph and --preset");
  GraphSpec spec = c.preset_name.empty() ? parse_graph_spec(read_text(c.graph_path)) : preset(c.preset_name);
  if (!c.lengths.empty()) {
    const auto len = parse_list(c.lengths, "lengths");
    if (static_cast<int>(len.size()) != spec.graph.n_edges()) throw SchemaError("--lengths needs one value per edge");
    for (double l : len)
      if (l <= 0) throw SchemaError("edge lengths must be positive");
    spec.length = len;
    spec.has_lengths = true;
  }
  return spec;
}

bool exact_mode(const Common& c) {
  if (c.arith == "rational") return true;
  if (c.arith == "float") return false;
  throw SchemaError("--arith must be float or rational");
}

// "u:1;e1@0.5:-1"
Divisor parse_divisor(const Graph& g, const std::string& text) {
  Divisor d;
  for (const auto& term : split(text, ';')) {
    const auto colon = term.rfind(':');
    if (colon == std::string::npos) throw SchemaError("divisor term '" + term + "' needs point:coefficient");
    const auto c = parse_list(term.substr(colon + 1), "divisor coefficient");
    d.emplace_back(parse_point(g, term.substr(0, colon)), c[0]);
  }
  if (d.empty()) throw SchemaError("empty divisor");
  return d;
}

template <class T>
PointT<T> lift(const Point& p) {
  return convert_point<T>(p);
}

template <class T>
MeasureT<T> lift(const GraphMeasure& m) {
  MeasureT<T> out(static_cast<int>(m.density.size()));
  for (size_t e = 0; e < m.density.size(); ++e) out.density[e] = scalar_cast<T>(m.density[e]);
  for (const auto& [p, a] : m.atoms) out.add_atom(lift<T>(p), scalar_cast<T>(a));
  return out;
}

template <class T>
DivisorT<T> lift(const Divisor& d) {
  DivisorT<T> out;
  for (const auto& [p, c] : d) out.emplace_back(lift<T>(p), scalar_cast<T>(c));
  return out;
}

template <class T>
MetricGraphT<T> metric(const GraphSpec& spec) {
  MetricGraphT<T> mg{spec.graph, {}};
  for (double l : spec.length) mg.length.push_back(scalar_cast<T>(l));
  return mg;
}

template <class T>
MeasureT<T> measure_or_canonical(const MetricGraphT<T>& mg, const std::string& text) {
  if (text.empty() || text == "canonical") return canonical_measure(mg);
  if (text == "zhang") return zhang_measure(mg);
  return lift<T>(parse_measure(mg.graph, read_text(text)));
}

// Explicit points, or vertices plus `samples` interior points per edge.
std::vector<Point> targets(const GraphSpec& spec, const std::vector<std::string>& ys, int samples) {
  std::vector<Point> out;
  for (const auto& y : ys) out.push_back(parse_point(spec.graph, y));
  if (out.empty()) out = sample_points(spec.graph, spec.length, samples);
  return out;
}

// vertex, edge, offset; -1 marks the unused slot
std::string point_cells(const Point& p) {
  if (p.is_vertex()) return std::to_string(p.vertex) + ",-1,0";
  return "-1," + std::to_string(p.edge) + "," + num(p.offset);
}

std::string point_header(const std::string& name) {
  return name + "_vertex," + name + "_edge," + name + "_offset";
}

class Output {
 public:
  explicit Output(const std::string& path) {
    if (!path.empty()) {
      file_.open(path);
      if (!file_) throw SchemaError("cannot write '" + path + "'");
    }
  }
  std::ostream& os() { return file_.is_open() ? file_ : std::cout; }

 private:
  std::ofstream file_;
};

template <class T>
void cmd_measure(const GraphSpec& spec, std::ostream& os) {
  const auto mg = metric<T>(spec);
  const auto mu = foster(mg);
  os << "edge,length,foster\n";
  for (int e = 0; e < spec.graph.n_edges(); ++e)
    os << e << "," << num(spec.length[e]) << "," << cell(mu[e]) << "\n";
}

template <class T>
void cmd_green(const GraphSpec& spec, const std::string& measure, const Point& x, const std::vector<Point>& ys,
               std::ostream& os) {
  const auto mg = metric<T>(spec);
  const auto mu = measure_or_canonical(mg, measure);
  const auto g = green_function(mg, mu, lift<T>(x));
  os << point_header("x") << "," << point_header("y") << ",value\n";
  for (const auto& y : ys)
    os << point_cells(x) << "," << point_cells(y) << "," << cell(evaluate(mg.graph, g, lift<T>(y)))
       << "\n";
}

template <class T>
void cmd_jfun(const GraphSpec& spec, const Point& p, const Point& q, const Point& x, const std::vector<Point>& ys,
              std::ostream& os) {
  const auto mg = metric<T>(spec);
  os << point_header("p") << "," << point_header("q") << "," << point_header("x") << "," << point_header("y")
     << ",value\n";
  for (const auto& y : ys)
    os << point_cells(p) << "," << point_cells(q) << "," << point_cells(x) << "," << point_cells(y) << ","
       << cell(j_function(mg, lift<T>(p), lift<T>(q), lift<T>(x), lift<T>(y))) << "\n";
}

template <class T>
void cmd_height(const GraphSpec& spec, const Divisor& d1, const Divisor& d2, std::ostream& os) {
  const auto mg = metric<T>(spec);
  os << "pairing\n" << cell(height_pairing(mg, lift<T>(d1), lift<T>(d2))) << "\n";
}

template <class T>
void cmd_solve(const GraphSpec& spec, const std::string& measure, const std::string& pin, bool integral,
               const std::vector<Point>& ys, std::ostream& os) {
  const auto mg = metric<T>(spec);
  const auto mu = lift<T>(parse_measure(spec.graph, read_text(measure)));
  const auto norm = integral ? NormalizationT<T>::integral(canonical_measure(mg))
                             : NormalizationT<T>::pinned(lift<T>(parse_point(spec.graph, pin)));
  const auto f = solve_poisson(mg, mu, norm);
  os << point_header("y") << ",value\n";
  for (const auto& y : ys) os << point_cells(y) << "," << cell(evaluate(mg.graph, f, lift<T>(y))) << "\n";
}

void cmd_sweep(const GraphSpec& spec, const std::string& partition, const SweepConfig& cfg, std::ostream& os) {
  OrderedPartition pi;
  if (!partition.empty())
    pi = parse_partition(spec.graph, partition);
  else if (spec.partition)
    pi = *spec.partition;
  else
    throw SchemaError("sweep needs --partition or a graph spec with a partition");
  const auto res = run_sweep(spec.graph, pi, spec.length, cfg);
  const bool single = res.metrics.size() == 1;
  std::vector<size_t> fitted;
  for (size_t m = 0; m < res.metrics.size(); ++m) {
    if (std::isfinite(res.fits[m].slope))
      fitted.push_back(m);
    else
      std::cerr << "warning: no decay to fit for " << res.metrics[m] << " (errors vanish); slope column omitted\n";
  }
  os << "s";
  for (int j = 1; j <= pi.rank(); ++j) os << ",L" << j;
  for (const auto& m : res.metrics) os << "," << m;
  for (size_t m : fitted) os << "," << (single ? std::string("fitted_slope") : "fitted_slope_" + res.metrics[m]);
  os << "\n";
  for (size_t i = 0; i < res.s.size(); ++i) {
    os << num(res.s[i]);
    for (double l : res.L[i]) os << "," << num(l);
    for (double v : res.values[i]) os << "," << num(v);
    for (size_t m : fitted) os << "," << num(res.fits[m].slope);
    os << "\n";
  }
  for (size_t m = 0; m < res.metrics.size(); ++m)
    std::cerr << res.metrics[m] << ": fitted slope " << res.fits[m].slope << ", predicted " << res.predicted[m]
              << "\n";
}

ojson stratum_json(const StratumPoint& p) {
  ojson j;
  j["partition"] = {{"layers", p.partition.layers}, {"finite", p.partition.finite}};
  j["layers"] = p.layers;
  j["finite"] = p.finite;
  j["ambiguous"] = p.ambiguous;
  return j;
}

ojson logmap_json(const std::vector<double>& x, const LogMapConfig& cfg) {
  ojson j;
  j["point"] = x;
  j["t_star"] = exhaustion_parameter(x, cfg);
  j["stratum"] = stratum_json(log_trop(x, cfg));
  return j;
}

int run(int argc, char** argv) {
  CLI::App app{"Potential theory on metric graphs and tropical curves"};
  app.require_subcommand(1);
  Common c;
  auto graph_opts = [&](CLI::App* sub) {
    sub->add_option("--graph", c.graph_path, "JSON graph spec");
    sub->add_option("--preset", c.preset_name, "built-in graph: theta, kite, fig9, barbell");
    sub->add_option("--lengths", c.lengths, "comma-separated edge lengths overriding the spec");
    sub->add_option("--arith", c.arith, "float or rational")->check(CLI::IsMember({"float", "rational"}));
  };
  app.add_option("--out", c.out, "output file, stdout by default");
  app.add_option("--seed", c.seed, "seed for every sampled quantity");

  auto* measure = app.add_subcommand("measure", "Foster coefficients per edge");
  graph_opts(measure);

  std::string mu_text, x_text, p_text, q_text, pin_text, d1_text, d2_text;
  std::vector<std::string> y_text;
  int samples = 4;
  bool integral = false;

  auto* green = app.add_subcommand("green", "Green function g_mu(x, y)");
  graph_opts(green);
  green->add_option("--measure", mu_text, "measure JSON (file or inline), 'canonical' or 'zhang'");
  green->add_option("--x", x_text, "pole")->required();
  green->add_option("--y", y_text, "evaluation points; default samples every edge");
  green->add_option("--samples", samples, "interior samples per edge");

  auto* jfun = app.add_subcommand("jfun", "j-function j_{p-q,x}(y)");
  graph_opts(jfun);
  jfun->add_option("--p", p_text, "positive pole")->required();
  jfun->add_option("--q", q_text, "negative pole")->required();
  jfun->add_option("--x", x_text, "base point where j vanishes")->required();
  jfun->add_option("--y", y_text, "evaluation points; default samples every edge");
  jfun->add_option("--samples", samples, "interior samples per edge");

  auto* height = app.add_subcommand("height", "height pairing <D1, D2>");
  graph_opts(height);
  height->add_option("--d1", d1_text, "divisor 'point:coef;...'")->required();
  height->add_option("--d2", d2_text, "divisor, defaults to d1");

  auto* solve = app.add_subcommand("solve", "Poisson equation Lap f = mu");
  graph_opts(solve);
  solve->add_option("--measure", mu_text, "mass-zero measure JSON")->required();
  solve->add_option("--pin", pin_text, "f vanishes here");
  solve->add_flag("--integral", integral, "normalize by the canonical measure instead of a pin");
  solve->add_option("--y", y_text, "evaluation points; default samples every edge");
  solve->add_option("--samples", samples, "interior samples per edge");

  SweepConfig sweep_cfg;
  std::string partition, schedule, s_grid, experiment = "poisson";
  auto* sweep = app.add_subcommand("sweep", "degeneration sweep with rate fits");
  graph_opts(sweep);
  sweep->add_option("--partition", partition, "layers split by '|', finitary edges after ';'");
  sweep->add_option("--schedule", schedule, "exponents beta_1,...,beta_r");
  sweep->add_option("--s-grid", s_grid, "degeneration parameters");
  sweep->add_option("--experiment", experiment, "poisson|green|period|height|foster|lebesgue|canonical");
  sweep->add_option("--d1", d1_text, "divisor for the height and green runs");
  sweep->add_option("--d2", d2_text, "second divisor, defaults to d1");
  sweep->add_option("--pin", sweep_cfg.pin, "vertex index pinning the Poisson solutions");
  sweep->add_option("--per-edge", sweep_cfg.per_edge, "sample points per edge");

  LogMapConfig lm;
  std::string point;
  int random_points = 0;
  auto* logmap = app.add_subcommand("logmap", "tropical log map on the simplicial cone");
  logmap->add_option("--point", point, "x1,x2,...");
  logmap->add_option("--phi-base", lm.family.base, "Phi_j(t) = t^(base^(j-1))");
  logmap->add_option("--random", random_points, "map this many seeded random points instead");

  std::string preset_name;
  auto* pre = app.add_subcommand("preset", "emit a built-in graph spec");
  pre->add_option("name", preset_name, "theta, kite, fig9 or barbell")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? Ok : Schema;
  }

  Output out(c.out);
  auto& os = out.os();
  std::mt19937_64 rng(c.seed);

  if (*pre) {
    os << emit_graph_spec(preset(preset_name));
    return Ok;
  }
  if (*logmap) {
    lm.tight_tol = default_tolerance();
    lm.family.validate();
    if (random_points > 0) {
      std::uniform_real_distribution<double> u(0, 1);
      ojson arr = ojson::array();
      for (int i = 0; i < random_points; ++i) {
        std::vector<double> x(2 + rng() % 3);
        for (auto& v : x) v = std::exp(6 * u(rng));
        arr.push_back(logmap_json(x, lm));
      }
      os << arr.dump(2) << "\n";
    } else {
      if (point.empty()) throw SchemaError("logmap needs --point or --random");
      os << logmap_json(parse_list(point, "point"), lm).dump(2) << "\n";
    }
    return Ok;
  }

  const GraphSpec spec = load(c);
  const bool exact = exact_mode(c);
  auto dispatch = [&](auto f) { exact ? f(Rational()) : f(0.0); };

  if (*measure) {
    dispatch([&](auto tag) { cmd_measure<decltype(tag)>(spec, os); });
  } else if (*green) {
    const auto x = parse_point(spec.graph, x_text);
    const auto ys = targets(spec, y_text, samples);
    dispatch([&](auto tag) { cmd_green<decltype(tag)>(spec, mu_text, x, ys, os); });
  } else if (*jfun) {
    const auto p = parse_point(spec.graph, p_text), q = parse_point(spec.graph, q_text);
    const auto x = parse_point(spec.graph, x_text);
    const auto ys = targets(spec, y_text, samples);
    dispatch([&](auto tag) { cmd_jfun<decltype(tag)>(spec, p, q, x, ys, os); });
  } else if (*height) {
    const auto d1 = parse_divisor(spec.graph, d1_text);
    const auto d2 = d2_text.empty() ? d1 : parse_divisor(spec.graph, d2_text);
    dispatch([&](auto tag) { cmd_height<decltype(tag)>(spec, d1, d2, os); });
  } else if (*solve) {
    if (integral == !pin_text.empty()) throw SchemaError("give exactly one of --pin and --integral");
    const auto ys = targets(spec, y_text, samples);
    dispatch([&](auto tag) { cmd_solve<decltype(tag)>(spec, mu_text, pin_text, integral, ys, os); });
  } else if (*sweep) {
    sweep_cfg.experiment = parse_experiment(experiment);
    // exact by default: float cannot resolve the corrections at large s
    sweep_cfg.exact = sweep->count("--arith") ? exact : true;
    if (!schedule.empty()) sweep_cfg.schedule.beta = parse_list(schedule, "schedule");
    if (!s_grid.empty()) sweep_cfg.s_grid = parse_list(s_grid, "s grid");
    if (!d1_text.empty()) sweep_cfg.d1 = parse_divisor(spec.graph, d1_text);
    if (!d2_text.empty()) sweep_cfg.d2 = parse_divisor(spec.graph, d2_text);
    cmd_sweep(spec, partition, sweep_cfg, os);
  }
  return Ok;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const SchemaError& e) {
    std::cerr << "schema error: " << e.what() << "\n";
    return Schema;
  } catch (const InfeasibleError& e) {
    std::cerr << "infeasible: " << e.what() << "\n";
    return Infeasible;
  } catch (const NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return Numerical;
  } catch (const std::exception& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return Numerical;
  }
}
