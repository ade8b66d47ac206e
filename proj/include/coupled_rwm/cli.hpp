#ifndef COUPLED_RWM_CLI_HPP
#define COUPLED_RWM_CLI_HPP

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "coupled_rwm/experiments.hpp"
#include "coupled_rwm/suite.hpp"
#include "coupled_rwm/svg.hpp"

namespace crwm {

/// Bad configuration file or flag combination.
class ConfigError : public Error {
public:
  using Error::Error;
};

/// Everything a meet/trace/drift run needs. JSON keys:
///   dims, proposals, acceptances, hybrid_cutoffs, replications, seed, t_max,
///   ell, horizon, r_grid, threads, out, svg, log_scale
/// A "hybrid" entry in proposals expands to one cell per hybrid cutoff.
struct Config {
  Protocol protocol = Protocol::Meet;
  std::vector<Integer> dims;
  std::vector<std::string> proposals;
  std::vector<std::string> acceptances{"common"};
  std::vector<double> hybrid_cutoffs{0.5, 1.0, 2.0};
  Integer replications = 1000;
  std::uint64_t seed = 0;
  Integer t_max = kDefaultTMax;
  double ell = kDefaultEll;
  Integer horizon = 2500;
  std::vector<double> r_grid;
  /// 0 means all hardware threads.
  std::optional<unsigned> threads;
  /// Output prefix; files are <out>.csv, <out>_summary.csv, ...
  std::string out;
  std::string svg;
  std::optional<bool> log_scale;
};

/// Protocol defaults: meet d = 10 max-reflection; trace d = 100 and drift
/// d = 100 over the four maximal couplings.
Config default_config(Protocol protocol);

/// Overlays the keys of `j` on `config`. Unknown keys and wrong types throw
/// ConfigError.
void apply_json(Config &config, const nlohmann::json &j);
void apply_config_file(Config &config, const std::string &path);

ExperimentSpec to_spec(const Config &config);

/// The default drift grid: separations from 0.05 to 60.
std::vector<double> default_drift_grid();

/// Shortest round-trip decimal, locale independent.
std::string format_double(double v);

std::string meet_csv(const ExperimentResult &result);
std::string summary_csv(const std::vector<CellSummary> &summary);
std::string trace_csv(const TraceSeries &series);
std::string drift_csv(const DriftSeries &series);

/// "<dim>_<proposal>_<acceptance>", safe for file names.
std::string cell_tag(const Cell &cell);

struct ProbRow {
  double r = 0.0;
  double exact = 0.0;
  double lower = 0.0;
  double markov = 0.0;
  double chernoff = 0.0;
};

/// Chernoff exponent minimizing the bound; tends to 0 (bound 1) when
/// r <= 2 sd.
double best_chernoff_s(double r, double sd);

/// chernoff_s empty means the optimized bound per row, which is 1 for
/// r <= 2 sd. Upper bounds are capped at 1 and the lower bound floored at 0.
std::vector<ProbRow> prob_table(const std::vector<double> &radii, double sd,
                                std::optional<double> chernoff_s = {});
std::string prob_csv(const std::vector<ProbRow> &rows);

LinePlot meet_plot(const std::vector<CellSummary> &summary, bool log_y);
LinePlot trace_plot(const ExperimentResult &result, bool log_y);
LinePlot drift_plot(const ExperimentResult &result, bool log_y);
LinePlot prob_plot(const std::vector<ProbRow> &rows, double sd, bool log_y);

/// Runs the experiment in `config` and writes its CSV (and SVG) files.
/// Returns the exit status.
int cmd_experiment(const Config &config, std::ostream &out, std::ostream &err);

/// Prints the check table. Returns 0 iff every selected check passed.
int cmd_validate(const SuiteOptions &options,
                 const std::optional<std::string> &only, std::ostream &out,
                 std::ostream &err);

/// Whole command line, argv[0] included. Returns the exit status: 0 on
/// success, 1 on a failed run or check, 2 on a usage error.
int run_cli(int argc, const char *const *argv, std::ostream &out,
            std::ostream &err);

} // namespace crwm

#endif
