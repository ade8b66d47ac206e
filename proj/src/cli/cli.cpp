#include "coupled_rwm/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <ostream>
#include <set>
#include <sstream>

#include "coupled_rwm/gauss.hpp"

namespace crwm {

namespace {

using nlohmann::json;

const std::set<std::string> kConfigKeys = {
    "dims",    "proposals", "acceptances", "hybrid_cutoffs", "replications",
    "seed",    "t_max",     "ell",         "horizon",        "r_grid",
    "threads", "out",       "svg",         "log_scale"};

std::string_view protocol_name(Protocol p) {
  switch (p) {
  case Protocol::Meet:
    return "meet";
  case Protocol::Trace:
    return "trace";
  case Protocol::Drift:
    return "drift";
  }
  return "meet";
}

template <typename T> T get_key(const json &j, const char *key) {
  try {
    return j.at(key).get<T>();
  } catch (const json::exception &ex) {
    throw ConfigError(std::string("config key '") + key + "': " + ex.what());
  }
}

void write_file(const std::string &path, const std::string &content) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f)
    throw ConfigError("cannot open '" + path + "' for writing");
  f << content;
  f.close();
  if (!f)
    throw ConfigError("write to '" + path + "' failed");
}

std::string strip_csv(std::string prefix) {
  if (prefix.size() > 4 && prefix.ends_with(".csv"))
    prefix.resize(prefix.size() - 4);
  return prefix;
}

std::string opt_field(const std::optional<double> &v) {
  return v ? format_double(*v) : std::string();
}

std::string series_label(const Cell &cell) {
  return cell.proposal.label() + "/" +
         std::string(to_string(cell.acceptance));
}

unsigned threads_from_env() {
  const char *env = std::getenv("COUPLED_RWM_THREADS");
  if (!env || !*env)
    return 0;
  unsigned v = 0;
  const auto end = env + std::char_traits<char>::length(env);
  const auto res = std::from_chars(env, end, v);
  if (res.ec != std::errc() || res.ptr != end)
    throw ConfigError(std::string("COUPLED_RWM_THREADS is not a count: ") +
                      env);
  return v;
}

} // namespace

Config default_config(Protocol protocol) {
  Config c;
  c.protocol = protocol;
  switch (protocol) {
  case Protocol::Meet:
    c.dims = {10};
    c.proposals = {"max-reflection"};
    break;
  case Protocol::Trace:
    c.dims = {100};
    c.proposals = {"max-independent", "max-semi-independent", "max-ot",
                   "max-reflection"};
    break;
  case Protocol::Drift:
    c.dims = {100};
    c.proposals = {"max-independent", "max-semi-independent", "max-ot",
                   "max-reflection"};
    c.replications = 10'000;
    c.r_grid = default_drift_grid();
    break;
  }
  c.out = std::string(protocol_name(protocol));
  return c;
}

std::vector<double> default_drift_grid() {
  return {0.05, 0.1, 0.2, 0.3, 0.5, 0.75, 1.0,  1.5,  2.0,
          3.0,  5.0, 8.0, 12., 18., 24.,  30.,  42.,  60.};
}

void apply_json(Config &c, const json &j) {
  if (!j.is_object())
    throw ConfigError("config must be a JSON object");
  for (const auto &[key, value] : j.items())
    if (!kConfigKeys.contains(key))
      throw ConfigError("unknown config key '" + key + "'");
  if (j.contains("dims"))
    c.dims = get_key<std::vector<Integer>>(j, "dims");
  if (j.contains("proposals"))
    c.proposals = get_key<std::vector<std::string>>(j, "proposals");
  if (j.contains("acceptances"))
    c.acceptances = get_key<std::vector<std::string>>(j, "acceptances");
  if (j.contains("hybrid_cutoffs"))
    c.hybrid_cutoffs = get_key<std::vector<double>>(j, "hybrid_cutoffs");
  if (j.contains("replications"))
    c.replications = get_key<Integer>(j, "replications");
  if (j.contains("seed"))
    c.seed = get_key<std::uint64_t>(j, "seed");
  if (j.contains("t_max"))
    c.t_max = get_key<Integer>(j, "t_max");
  if (j.contains("ell"))
    c.ell = get_key<double>(j, "ell");
  if (j.contains("horizon"))
    c.horizon = get_key<Integer>(j, "horizon");
  if (j.contains("r_grid"))
    c.r_grid = get_key<std::vector<double>>(j, "r_grid");
  if (j.contains("threads"))
    c.threads = get_key<unsigned>(j, "threads");
  if (j.contains("out"))
    c.out = get_key<std::string>(j, "out");
  if (j.contains("svg"))
    c.svg = get_key<std::string>(j, "svg");
  if (j.contains("log_scale"))
    c.log_scale = get_key<bool>(j, "log_scale");
}

void apply_config_file(Config &config, const std::string &path) {
  std::ifstream f(path);
  if (!f)
    throw ConfigError("cannot read config file '" + path + "'");
  json j;
  try {
    j = json::parse(f);
  } catch (const json::exception &ex) {
    throw ConfigError("config file '" + path + "': " + ex.what());
  }
  apply_json(config, j);
}

ExperimentSpec to_spec(const Config &c) {
  ExperimentSpec s;
  s.protocol = c.protocol;
  s.dims = c.dims;
  s.proposals.clear();
  s.acceptances.clear();
  try {
    for (const auto &name : c.proposals) {
      const auto kind = parse_proposal_kind(name);
      if (kind == ProposalKind::Hybrid) {
        if (c.hybrid_cutoffs.empty())
          throw ConfigError("hybrid proposal needs at least one cutoff");
        for (double cut : c.hybrid_cutoffs)
          s.proposals.push_back({kind, cut});
      } else {
        s.proposals.push_back({kind});
      }
    }
    for (const auto &name : c.acceptances)
      s.acceptances.push_back(parse_acceptance_kind(name));
  } catch (const DomainError &ex) {
    throw ConfigError(ex.what());
  }
  s.replications = c.replications;
  s.base_seed = c.seed;
  s.t_max = c.t_max;
  s.ell = c.ell;
  s.horizon = c.horizon;
  s.r_grid = c.r_grid;
  s.threads = c.threads ? *c.threads : threads_from_env();
  try {
    validate(s);
  } catch (const DomainError &ex) {
    throw ConfigError(ex.what());
  }
  return s;
}

std::string format_double(double v) {
  if (std::isnan(v))
    return "nan";
  if (std::isinf(v))
    return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

std::string meet_csv(const ExperimentResult &result) {
  std::string s = "dim,proposal,acceptance,replication,seed,tau,censored\n";
  for (const auto &r : result.meet) {
    s += std::to_string(r.cell.dim) + ',' + r.cell.proposal.label() + ',' +
         std::string(to_string(r.cell.acceptance)) + ',' +
         std::to_string(r.replication) + ',' + std::to_string(r.seed) + ',' +
         std::to_string(r.tau) + ',' + (r.censored ? "1" : "0") + '\n';
  }
  return s;
}

std::string summary_csv(const std::vector<CellSummary> &summary) {
  std::string s =
      "dim,proposal,acceptance,mean_tau,se_tau,median_tau,censored_count\n";
  for (const auto &c : summary) {
    s += std::to_string(c.cell.dim) + ',' + c.cell.proposal.label() + ',' +
         std::string(to_string(c.cell.acceptance)) + ',' +
         opt_field(c.mean_tau) + ',' + opt_field(c.se_tau) + ',' +
         opt_field(c.median_tau) + ',' + std::to_string(c.censored_count) +
         '\n';
  }
  return s;
}

std::string trace_csv(const TraceSeries &series) {
  std::string s = "t,mean_r,n_alive\n";
  for (const auto &p : series.points)
    s += std::to_string(p.t) + ',' + format_double(p.mean_r) + ',' +
         std::to_string(p.n_alive) + '\n';
  return s;
}

std::string drift_csv(const DriftSeries &series) {
  std::string s = "r,mean_drift,se,n\n";
  for (const auto &p : series.points)
    s += format_double(p.r) + ',' + format_double(p.mean_drift) + ',' +
         format_double(p.se) + ',' + std::to_string(p.n) + '\n';
  return s;
}

std::string cell_tag(const Cell &cell) {
  std::string label = cell.proposal.label();
  std::replace(label.begin(), label.end(), ':', '-');
  return std::to_string(cell.dim) + '_' + label + '_' +
         std::string(to_string(cell.acceptance));
}

double best_chernoff_s(double r, double sd) {
  const double a = r * r / (4.0 * sd * sd);
  // Minimizer of -log(1 - 2s)/2 - s a over (0, 1/2).
  if (a <= 1.0)
    return 1e-9;
  return 0.5 * (1.0 - 1.0 / a);
}

std::vector<ProbRow> prob_table(const std::vector<double> &radii, double sd,
                                std::optional<double> chernoff_s) {
  std::vector<ProbRow> rows;
  for (double r : radii) {
    double chernoff = 1.0;
    if (chernoff_s)
      chernoff = meeting_prob_upper_chernoff(r, sd, *chernoff_s);
    else if (r > 2.0 * sd)
      chernoff = meeting_prob_upper_chernoff(r, sd, best_chernoff_s(r, sd));
    rows.push_back({r, meeting_probability(r, sd),
                    std::max(0.0, meeting_prob_lower_bound(r, sd)),
                    std::min(1.0, meeting_prob_upper_markov(r, sd)),
                    std::min(1.0, chernoff)});
  }
  return rows;
}

std::string prob_csv(const std::vector<ProbRow> &rows) {
  std::string s = "r,exact,lower,markov,chernoff\n";
  for (const auto &r : rows)
    s += format_double(r.r) + ',' + format_double(r.exact) + ',' +
         format_double(r.lower) + ',' + format_double(r.markov) + ',' +
         format_double(r.chernoff) + '\n';
  return s;
}

LinePlot meet_plot(const std::vector<CellSummary> &summary, bool log_y) {
  LinePlot plot{"Average meeting time", "dimension", "mean tau", false, log_y,
                true, {}};
  for (const auto &c : summary) {
    const auto label = series_label(c.cell);
    auto it = std::find_if(plot.series.begin(), plot.series.end(),
                           [&](const PlotSeries &s) { return s.label == label; });
    if (it == plot.series.end()) {
      plot.series.push_back({label, {}, {}});
      it = plot.series.end() - 1;
    }
    if (c.mean_tau) {
      it->x.push_back(static_cast<double>(c.cell.dim));
      it->y.push_back(*c.mean_tau);
    }
  }
  return plot;
}

LinePlot trace_plot(const ExperimentResult &result, bool log_y) {
  LinePlot plot{"Average distance between chains", "iteration",
                "mean |Y_t - X_t|", false, log_y, false, {}};
  for (const auto &s : result.trace) {
    PlotSeries ps{series_label(s.cell), {}, {}};
    for (const auto &p : s.points) {
      ps.x.push_back(static_cast<double>(p.t));
      ps.y.push_back(p.mean_r);
    }
    plot.series.push_back(std::move(ps));
  }
  return plot;
}

LinePlot drift_plot(const ExperimentResult &result, bool log_y) {
  LinePlot plot{"One-step drift of |Y - X|", "r", "E[R_1 - r]", false, log_y,
                true, {}};
  for (const auto &s : result.drift) {
    PlotSeries ps{series_label(s.cell), {}, {}};
    for (const auto &p : s.points) {
      ps.x.push_back(p.r);
      ps.y.push_back(p.mean_drift);
    }
    plot.series.push_back(std::move(ps));
  }
  return plot;
}

LinePlot prob_plot(const std::vector<ProbRow> &rows, double sd, bool log_y) {
  LinePlot plot{"Meeting probability, sd = " + format_double(sd), "r",
                "probability", false, log_y, false, {}};
  PlotSeries exact{"exact", {}, {}}, lower{"lower", {}, {}},
      markov{"markov", {}, {}}, chernoff{"chernoff", {}, {}};
  for (const auto &r : rows) {
    for (auto *s : {&exact, &lower, &markov, &chernoff})
      s->x.push_back(r.r);
    exact.y.push_back(r.exact);
    // Bounds above 1 or below 0 carry no information on a probability axis.
    lower.y.push_back(r.lower >= 0.0 ? r.lower : std::nan(""));
    markov.y.push_back(r.markov <= 1.0 ? r.markov : std::nan(""));
    chernoff.y.push_back(r.chernoff <= 1.0 ? r.chernoff : std::nan(""));
  }
  plot.series = {exact, lower, markov, chernoff};
  return plot;
}

int cmd_experiment(const Config &config, std::ostream &out,
                   std::ostream &err) {
  const auto spec = to_spec(config);
  const auto result = run_experiment(spec);
  const std::string prefix = strip_csv(config.out);
  const bool log_y = config.log_scale.value_or(config.protocol ==
                                               Protocol::Meet);

  switch (config.protocol) {
  case Protocol::Meet: {
    const auto summary = summarize(result);
    write_file(prefix + ".csv", meet_csv(result));
    write_file(prefix + "_summary.csv", summary_csv(summary));
    for (const auto &c : summary) {
      out << series_label(c.cell) << " d=" << c.cell.dim << ": mean tau "
          << (c.mean_tau ? format_double(*c.mean_tau) : "n/a") << " (se "
          << (c.se_tau ? format_double(*c.se_tau) : "n/a") << "), "
          << c.n - c.censored_count << "/" << c.n << " met\n";
      if (c.censored_count > 0)
        err << "warning: " << c.censored_count << " runs of "
            << series_label(c.cell) << " d=" << c.cell.dim
            << " censored at t_max=" << spec.t_max
            << " and excluded from the mean\n";
    }
    out << "wrote " << prefix << ".csv and " << prefix << "_summary.csv\n";
    if (!config.svg.empty())
      write_file(config.svg, render_svg(meet_plot(summary, log_y)));
    break;
  }
  case Protocol::Trace:
    for (const auto &s : result.trace) {
      const auto path = result.trace.size() == 1
                            ? prefix + ".csv"
                            : prefix + "_" + cell_tag(s.cell) + ".csv";
      write_file(path, trace_csv(s));
      const auto &last = s.points.back();
      out << series_label(s.cell) << " d=" << s.cell.dim << ": mean R_0 "
          << format_double(s.points.front().mean_r) << ", mean R_"
          << last.t << " " << format_double(last.mean_r) << ", "
          << last.n_alive << " unmet; wrote " << path << "\n";
    }
    if (!config.svg.empty())
      write_file(config.svg, render_svg(trace_plot(result, log_y)));
    break;
  case Protocol::Drift:
    for (const auto &s : result.drift) {
      const auto path = result.drift.size() == 1
                            ? prefix + ".csv"
                            : prefix + "_" + cell_tag(s.cell) + ".csv";
      write_file(path, drift_csv(s));
      out << series_label(s.cell) << " d=" << s.cell.dim << ": wrote " << path
          << "\n";
    }
    if (!config.svg.empty())
      write_file(config.svg, render_svg(drift_plot(result, log_y)));
    break;
  }
  return 0;
}

int cmd_validate(const SuiteOptions &options,
                 const std::optional<std::string> &only, std::ostream &out,
                 std::ostream &err) {
  const auto suite = default_suite(options);
  if (only) {
    const auto groups = suite_groups(suite);
    const bool known =
        std::find(groups.begin(), groups.end(), *only) != groups.end() ||
        std::any_of(suite.begin(), suite.end(),
                    [&](const NamedCheck &c) { return c.name == *only; });
    if (!known) {
      err << "error: unknown check or group '" << *only << "'; groups:";
      for (const auto &g : groups)
        err << ' ' << g;
      err << '\n';
      return 2;
    }
  }
  const auto results = run_suite(suite, only);
  print_results(out, results);
  const auto failed = std::count_if(results.begin(), results.end(),
                                    [](const CheckResult &r) { return !r.passed; });
  out << results.size() - failed << "/" << results.size() << " checks passed\n";
  if (failed == 0)
    return 0;
  err << "failed:";
  for (const auto &r : results)
    if (!r.passed)
      err << ' ' << r.name;
  err << '\n';
  return 1;
}

int run_cli(int argc, const char *const *argv, std::ostream &out,
            std::ostream &err) {
  CLI::App app{"Coupled random-walk Metropolis chains: meeting times, "
               "distance traces, drift curves and sampler validation"};
  app.require_subcommand(1);

  struct ExperimentFlags {
    std::string config;
    Integer dim = 0;
    std::vector<Integer> dims;
    std::vector<std::string> proposals, acceptances;
    std::vector<double> cutoffs, r_grid;
    Integer reps = 0, t_max = 0, horizon = 0;
    std::uint64_t seed = 0;
    double ell = 0.0;
    std::string out_prefix, svg, scale;
    unsigned threads = 0;
  };
  ExperimentFlags flags[3];
  const auto kCount = CLI::Range(Integer{1}, std::numeric_limits<Integer>::max());
  CLI::App *experiment_cmds[3];
  const char *descriptions[3] = {
      "Meeting times from independent draws of the target",
      "Average distance between coupled chains over time",
      "Expected one-step change in the distance between chains"};

  for (int p = 0; p < 3; ++p) {
    auto &f = flags[p];
    auto *sub = app.add_subcommand(
        std::string(protocol_name(static_cast<Protocol>(p))), descriptions[p]);
    experiment_cmds[p] = sub;
    sub->add_option("--config", f.config, "JSON config file")
        ->check(CLI::ExistingFile);
    auto *dim = sub->add_option("--dim", f.dim, "Dimension")
                    ->check(kCount);
    sub->add_option("--dims", f.dims, "Dimensions to sweep")
        ->delimiter(',')
        ->check(kCount)
        ->excludes(dim);
    sub->add_option("--proposal", f.proposals,
                    "Proposal coupling(s): independent, synchronous, "
                    "reflection, full-reflection, max-independent, "
                    "max-semi-independent, max-ot, max-reflection, hybrid")
        ->delimiter(',');
    sub->add_option("--acceptance", f.acceptances,
                    "Acceptance coupling(s): common, independent, "
                    "antithetic, ot")
        ->delimiter(',');
    sub->add_option("--reps", f.reps, "Replications per cell")
        ->check(kCount);
    sub->add_option("--seed", f.seed, "Base seed");
    sub->add_option("--t-max", f.t_max, "Censoring time for meet")
        ->check(kCount);
    sub->add_option("--ell", f.ell, "Proposal scale: sd = ell / sqrt(d)")
        ->check(CLI::PositiveNumber);
    sub->add_option("--hybrid-cutoff", f.cutoffs, "Hybrid cutoff(s) r-bar")
        ->delimiter(',')
        ->check(CLI::PositiveNumber);
    sub->add_option("--horizon", f.horizon, "Trace length")
        ->check(kCount);
    sub->add_option("--r-grid", f.r_grid, "Drift separations")
        ->delimiter(',')
        ->check(CLI::PositiveNumber);
    sub->add_option("--out", f.out_prefix, "Output prefix for CSV files");
    sub->add_option("--svg", f.svg, "Write a plot to this SVG file");
    sub->add_option("--scale", f.scale, "Plot y axis: log or linear")
        ->check(CLI::IsMember({"log", "linear"}));
    sub->add_option("--threads", f.threads,
                    "Worker threads, 0 = all (env COUPLED_RWM_THREADS)");
  }

  double prob_r = 0.0, prob_sd = 1.0, prob_r_max = 0.0, prob_s = 0.0;
  Integer prob_points = 61;
  std::string prob_out, prob_svg, prob_scale = "linear";
  auto *prob = app.add_subcommand(
      "prob", "Exact meeting probability of maximal proposal couplings and "
              "its bounds");
  auto *prob_r_opt = prob->add_option("--r", prob_r, "Single separation")
                         ->check(CLI::NonNegativeNumber);
  prob->add_option("--sd", prob_sd, "Proposal standard deviation")
      ->check(CLI::PositiveNumber);
  prob->add_option("--r-max", prob_r_max, "Grid end (default 6 sd)")
      ->check(CLI::PositiveNumber)
      ->excludes(prob_r_opt);
  prob->add_option("--points", prob_points, "Grid size")
      ->check(CLI::Range(Integer{2}, Integer{1'000'000}))
      ->excludes(prob_r_opt);
  auto *prob_s_opt =
      prob->add_option("--chernoff-s", prob_s, "Fixed Chernoff exponent");
  prob->add_option("--out", prob_out, "Write the table as CSV");
  prob->add_option("--svg", prob_svg, "Write a plot to this SVG file");
  prob->add_option("--scale", prob_scale, "Plot y axis: log or linear")
      ->check(CLI::IsMember({"log", "linear"}));

  std::string only;
  std::uint64_t validate_seed = SuiteOptions{}.seed;
  Integer draws = SuiteOptions{}.draws;
  double alpha = SuiteOptions{}.alpha;
  auto *val = app.add_subcommand("validate", "Run the sampler test battery");
  auto *only_opt =
      val->add_option("--only", only, "Run one group or check by name");
  val->add_option("--seed", validate_seed, "Battery seed");
  val->add_option("--draws", draws, "Draws per statistical test")
      ->check(CLI::Range(Integer{100}, Integer{100'000'000}));
  val->add_option("--alpha", alpha, "Family-wise level per battery")
      ->check(CLI::Range(1e-12, 0.5));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError &e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 2;
  }

  try {
    for (int p = 0; p < 3; ++p) {
      auto *sub = experiment_cmds[p];
      if (!sub->parsed())
        continue;
      const auto &f = flags[p];
      Config c = default_config(static_cast<Protocol>(p));
      if (!f.config.empty())
        apply_config_file(c, f.config);
      auto given = [&](const char *name) { return sub->count(name) > 0; };
      if (given("--dim"))
        c.dims = {f.dim};
      if (given("--dims"))
        c.dims = f.dims;
      if (given("--proposal"))
        c.proposals = f.proposals;
      if (given("--acceptance"))
        c.acceptances = f.acceptances;
      if (given("--hybrid-cutoff"))
        c.hybrid_cutoffs = f.cutoffs;
      if (given("--reps"))
        c.replications = f.reps;
      if (given("--seed"))
        c.seed = f.seed;
      if (given("--t-max"))
        c.t_max = f.t_max;
      if (given("--ell"))
        c.ell = f.ell;
      if (given("--horizon"))
        c.horizon = f.horizon;
      if (given("--r-grid"))
        c.r_grid = f.r_grid;
      if (given("--out"))
        c.out = f.out_prefix;
      if (given("--svg"))
        c.svg = f.svg;
      if (given("--scale"))
        c.log_scale = f.scale == "log";
      if (given("--threads"))
        c.threads = f.threads;
      return cmd_experiment(c, out, err);
    }

    if (prob->parsed()) {
      std::vector<double> radii;
      if (prob_r_opt->count() > 0) {
        radii = {prob_r};
      } else {
        const double r_max = prob_r_max > 0.0 ? prob_r_max : 6.0 * prob_sd;
        for (Integer i = 0; i < prob_points; ++i)
          radii.push_back(r_max * static_cast<double>(i) /
                          static_cast<double>(prob_points - 1));
      }
      const auto rows =
          prob_table(radii, prob_sd,
                     prob_s_opt->count() ? std::optional(prob_s) : std::nullopt);
      out << "sd = " << format_double(prob_sd) << "\n";
      out << "r\texact\tlower\tmarkov\tchernoff\n";
      for (const auto &r : rows)
        out << format_double(r.r) << '\t' << format_double(r.exact) << '\t'
            << format_double(r.lower) << '\t' << format_double(r.markov)
            << '\t' << format_double(r.chernoff) << '\n';
      if (!prob_out.empty())
        write_file(prob_out, prob_csv(rows));
      if (!prob_svg.empty())
        write_file(prob_svg,
                   render_svg(prob_plot(rows, prob_sd, prob_scale == "log")));
      return 0;
    }

    if (val->parsed()) {
      SuiteOptions opt;
      opt.seed = validate_seed;
      opt.draws = draws;
      opt.alpha = alpha;
      return cmd_validate(
          opt, only_opt->count() ? std::optional(only) : std::nullopt, out,
          err);
    }
  } catch (const ConfigError &ex) {
    err << "error: " << ex.what() << '\n';
    return 2;
  } catch (const std::exception &ex) {
    err << "error: " << ex.what() << '\n';
    return 1;
  }
  return 2;
}

} // namespace crwm
