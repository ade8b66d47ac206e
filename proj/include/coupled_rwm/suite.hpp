#ifndef COUPLED_RWM_SUITE_HPP
#define COUPLED_RWM_SUITE_HPP

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "coupled_rwm/propcpl.hpp"

namespace crwm {

// The statistical verification battery behind `validate`: every check is a
// named, seeded, deterministic function returning pass/fail with a detail
// string. Checks are grouped so subsets can be run on their own.

struct CheckResult {
  std::string name;
  std::string group;
  bool passed = false;
  std::string detail;
};

using ProposalSampler =
    std::function<ProposalPair(const Point &, const Point &, double, Rng &)>;

struct SuiteOptions {
  /// Family-wise significance for each KS / binomial battery (Bonferroni).
  double alpha = 0.001;
  /// Draws per statistical test.
  Integer draws = 100'000;
  std::uint64_t seed = 0x5eed2021;
  /// Sampler under test for the reflection identity; replaceable so that a
  /// broken sampler can be shown to fail.
  ProposalSampler max_reflection = sample_max_reflection;
};

struct NamedCheck {
  std::string name;
  std::string group;
  std::function<CheckResult()> run;
};

std::vector<NamedCheck> default_suite(const SuiteOptions &options = {});

/// Group names in suite order.
std::vector<std::string> suite_groups(const std::vector<NamedCheck> &suite);

/// Runs every check whose group (or name) matches `only`, or all of them.
std::vector<CheckResult> run_suite(const std::vector<NamedCheck> &suite,
                                   const std::optional<std::string> &only = {});

void print_results(std::ostream &os, const std::vector<CheckResult> &results);

bool all_passed(const std::vector<CheckResult> &results);

// Individual checks, exposed for the test binaries.

CheckResult check_bound_sandwich();
CheckResult check_maximality(ProposalKind kind, const SuiteOptions &options);
CheckResult check_proposal_marginals(ProposalKind kind,
                                     const SuiteOptions &options);
CheckResult check_acceptance_marginals(const SuiteOptions &options);
CheckResult check_residuals(ProposalKind kind, const SuiteOptions &options);
CheckResult check_ot_pushforward(const SuiteOptions &options);
CheckResult check_reflection_identity(const ProposalSampler &sampler,
                                      const SuiteOptions &options);
CheckResult check_orthogonal_sharing(const SuiteOptions &options);
CheckResult check_ot_monotone(const SuiteOptions &options);
CheckResult check_simple_structure(const SuiteOptions &options);
CheckResult check_sticky_faithfulness(const SuiteOptions &options);
CheckResult check_acceptance_cells(const SuiteOptions &options);
CheckResult check_extremality(const SuiteOptions &options);
CheckResult check_ot_rho_bounds(const SuiteOptions &options);
CheckResult check_kernel_marginal_equivalence(const SuiteOptions &options);
CheckResult check_pushforward(const SuiteOptions &options);

} // namespace crwm

#endif
