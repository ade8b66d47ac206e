#ifndef COUPLED_RWM_PROPCPL_HPP
#define COUPLED_RWM_PROPCPL_HPP

#include <limits>
#include <string_view>

#include "coupled_rwm/geom.hpp"
#include "coupled_rwm/rng.hpp"
#include "coupled_rwm/types.hpp"

namespace crwm {

// Couplings of the RWM proposals N(x, sd^2 I) and N(y, sd^2 I).
//
// The four maximal couplings share one structure: the e-components are drawn
// from a one-dimensional maximal coupling of N(x1, sd^2) and N(y1, sd^2), and
// the orthogonal components are drawn separately. They differ only in the
// residuals, i.e. the joint law of (x', y') given x' != y'.

enum class ProposalKind {
  Independent,
  Synchronous,
  Reflection,
  FullReflection,
  MaxIndependent,
  MaxSemiIndependent,
  MaxOptimalTransport,
  MaxReflection,
  Hybrid,
};

inline constexpr Integer kDefaultRejectionCap = 1'000'000;

struct ProposalCouplingSpec {
  ProposalKind kind = ProposalKind::MaxReflection;
  double sd = 1.0;
  /// r-bar; the maximal reflection coupling is used when r < r-bar / sqrt(d).
  double hybrid_cutoff = std::numeric_limits<double>::infinity();
  ProposalKind hybrid_far_kind = ProposalKind::Reflection;
  Integer rejection_cap = kDefaultRejectionCap;
};

/// Throws DomainError on a nonpositive sd or an invalid hybrid configuration.
void validate(const ProposalCouplingSpec &spec);

bool is_maximal(ProposalKind kind);
bool is_simple(ProposalKind kind);

std::string_view to_string(ProposalKind kind);
/// Accepts the CLI spellings ("max-reflection", ...). Throws DomainError.
ProposalKind parse_proposal_kind(std::string_view name);

struct ProposalPair {
  Point x_prop;
  Point y_prop;
  /// True iff x_prop and y_prop are bitwise equal.
  bool proposed_meet = false;
};

/// Draw from a coupling of N(x1, sd^2) and N(y1, sd^2).
struct Pair1d {
  double x = 0.0;
  double y = 0.0;
  bool met = false;
};

/// A d-dimensional maximal proposal before assembly: e-components plus the
/// orthogonal parts. For the semi-independent, transport and reflection
/// couplings x_perp and y_perp are the same vector.
struct SplitProposal {
  Pair1d along;
  Point x_perp;
  Point y_perp;
};

/// x' = x1' e + x_perp, y' = y1' e + y_perp, with y' := x' copied on a meet.
ProposalPair assemble(const PairGeometry<double> &geom,
                      const SplitProposal &split);

// Simple couplings.

ProposalPair sample_independent(const Point &x, const Point &y, double sd,
                                Rng &rng);
ProposalPair sample_synchronous(const Point &x, const Point &y, double sd,
                                Rng &rng);
/// eta = (I - 2 e e') xi. Throws DegeneratePair if x == y.
ProposalPair sample_reflection(const Point &x, const Point &y, double sd,
                               Rng &rng);
/// eta = -xi.
ProposalPair sample_full_reflection(const Point &x, const Point &y, double sd,
                                    Rng &rng);

// One-dimensional maximal couplings.

/// Rejection sampler for the maximal coupling with independent residuals.
/// The acceptance tests compare log-densities, so large |y1 - x1|/sd is safe.
Pair1d sample_max_independent_1d(double x1, double y1, double sd, Rng &rng,
                                 Integer rejection_cap = kDefaultRejectionCap);

/// CDF of the x-residual N(x1, sd^2) - N(y1, sd^2) (positive part,
/// normalized). The y-residual CDF is ot_residual_cdf(v, y1, x1, sd).
/// Throws DomainError if x1 == y1.
double ot_residual_cdf(double v, double x1, double y1, double sd);

/// Monotone map pushing the x-residual onto the y-residual. Throws
/// DomainError if v is outside the x-residual support and NonConvergence if
/// the inversion fails.
double ot_transport_map(double v, double x1, double y1, double sd);

Pair1d sample_max_ot_1d(double x1, double y1, double sd, Rng &rng);
Pair1d sample_max_reflection_1d(double x1, double y1, double sd, Rng &rng);

// d-dimensional maximal couplings, split form.

SplitProposal split_max_independent(const PairGeometry<double> &geom,
                                    double sd, Rng &rng,
                                    Integer rejection_cap = kDefaultRejectionCap);
SplitProposal
split_max_semi_independent(const PairGeometry<double> &geom, double sd,
                           Rng &rng,
                           Integer rejection_cap = kDefaultRejectionCap);
SplitProposal split_max_ot(const PairGeometry<double> &geom, double sd,
                           Rng &rng);
SplitProposal split_max_reflection(const PairGeometry<double> &geom, double sd,
                                   Rng &rng);

// d-dimensional maximal couplings. All throw DegeneratePair if x == y.

ProposalPair
sample_max_independent(const Point &x, const Point &y, double sd, Rng &rng,
                       Integer rejection_cap = kDefaultRejectionCap);
ProposalPair
sample_max_semi_independent(const Point &x, const Point &y, double sd,
                            Rng &rng,
                            Integer rejection_cap = kDefaultRejectionCap);
ProposalPair sample_max_ot(const Point &x, const Point &y, double sd,
                           Rng &rng);
ProposalPair sample_max_reflection(const Point &x, const Point &y, double sd,
                                   Rng &rng);

/// Maximal reflection when |y - x| < r-bar / sqrt(d), else the far coupling.
ProposalPair sample_hybrid(const Point &x, const Point &y,
                           const ProposalCouplingSpec &spec, Rng &rng);

/// Maximal independent coupling of N(x, diag(scale)^2) and N(y, diag(scale)^2)
/// obtained by pushing a unit-variance coupling through z -> x + scale * z.
ProposalPair sample_max_independent_diag(const Point &x, const Point &y,
                                         const Point &scale, Rng &rng,
                                         Integer rejection_cap =
                                             kDefaultRejectionCap);

/// Dispatch on spec.kind.
ProposalPair sample_proposal(const Point &x, const Point &y,
                             const ProposalCouplingSpec &spec, Rng &rng);

} // namespace crwm

#endif
