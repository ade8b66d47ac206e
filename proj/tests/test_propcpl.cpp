#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <limits>

#include "coupled_rwm/gauss.hpp"
#include "coupled_rwm/propcpl.hpp"
#include "coupled_rwm/validate.hpp"

namespace crwm {
namespace {

constexpr Integer kDraws = 100'000;

Point pt(std::initializer_list<double> v) {
  Point p(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double c : v)
    p(i++) = c;
  return p;
}

double ks_p(const std::vector<double> &s, double mean, double sd) {
  return ks_statistic(s, [&](double z) { return normal_cdf(z, {mean, sd}); })
      .p_value;
}

double max_abs(const Point &v) { return v.cwiseAbs().maxCoeff(); }

TEST(Names, RoundTrip) {
  for (auto k : {ProposalKind::Independent, ProposalKind::Synchronous,
                 ProposalKind::Reflection, ProposalKind::FullReflection,
                 ProposalKind::MaxIndependent, ProposalKind::MaxSemiIndependent,
                 ProposalKind::MaxOptimalTransport, ProposalKind::MaxReflection,
                 ProposalKind::Hybrid})
    EXPECT_EQ(parse_proposal_kind(to_string(k)), k);
  EXPECT_EQ(to_string(ProposalKind::MaxOptimalTransport), "max-ot");
  EXPECT_THROW(parse_proposal_kind("maximal"), DomainError);
  EXPECT_TRUE(is_maximal(ProposalKind::MaxReflection));
  EXPECT_FALSE(is_maximal(ProposalKind::Hybrid));
  EXPECT_TRUE(is_simple(ProposalKind::FullReflection));
}

TEST(Spec, Validation) {
  ProposalCouplingSpec s;
  s.sd = 0.0;
  EXPECT_THROW(validate(s), DomainError);
  s.sd = 1.0;
  s.kind = ProposalKind::Hybrid;
  s.hybrid_cutoff = 1.0;
  s.hybrid_far_kind = ProposalKind::MaxIndependent;
  EXPECT_THROW(validate(s), DomainError);
  s.hybrid_far_kind = ProposalKind::Reflection;
  EXPECT_NO_THROW(validate(s));
}

TEST(Independent, EqualStartsNeverMeetAndAreUncorrelated) {
  Rng rng(1);
  const Point zero = Point::Zero(3);
  const double sd = 0.7;
  double sum_xy = 0.0;
  std::vector<double> xi0, xi1, xi2;
  for (Integer i = 0; i < kDraws; ++i) {
    const auto p = sample_independent(zero, zero, sd, rng);
    ASSERT_FALSE(p.proposed_meet);
    sum_xy += p.x_prop(0) * p.y_prop(0) / (sd * sd);
    xi0.push_back(p.x_prop(0));
    xi1.push_back(p.x_prop(1));
    xi2.push_back(p.x_prop(2));
  }
  EXPECT_LT(std::abs(sum_xy / kDraws), 3.0 / std::sqrt(double(kDraws)));
  for (const auto *s : {&xi0, &xi1, &xi2})
    EXPECT_GT(ks_p(*s, 0.0, sd), 0.01);
}

TEST(Synchronous, PreservesDifference) {
  Rng rng(2);
  Point x = pt({0.0});
  Point y = pt({1.0});
  for (int t = 0; t < 100; ++t) {
    const auto p = sample_synchronous(x, y, 0.5, rng);
    x = p.x_prop;
    y = p.y_prop;
  }
  EXPECT_NEAR((y - x).norm(), 1.0, 1e-12);

  const Point a = pt({0.3, -2.0, 5.0});
  const Point b = pt({1.3, 4.0, -1.0});
  std::vector<double> margin;
  for (Integer i = 0; i < kDraws; ++i) {
    const auto p = sample_synchronous(a, b, 1.2, rng);
    ASSERT_LE(max_abs((p.y_prop - p.x_prop) - (b - a)), 1e-12);
    margin.push_back(p.y_prop(1));
  }
  EXPECT_GT(ks_p(margin, 4.0, 1.2), 0.01);
}

TEST(Reflection, OneDimensionalVariantsCoincide) {
  const Point x = pt({0.4});
  const Point y = pt({-1.1});
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    Rng r1(seed), r2(seed);
    const auto a = sample_reflection(x, y, 0.8, r1);
    const auto b = sample_full_reflection(x, y, 0.8, r2);
    EXPECT_EQ(a.x_prop(0), b.x_prop(0));
    EXPECT_NEAR(a.y_prop(0), b.y_prop(0), 1e-15);
  }
}

TEST(Reflection, IsometryAndMargins) {
  Rng rng(3);
  const Point x = pt({0.0, 1.0, 2.0});
  const Point y = pt({1.0, -1.0, 0.5});
  const Point e = (y - x).normalized();
  std::vector<double> ye, xe;
  for (Integer i = 0; i < kDraws; ++i) {
    const auto p = sample_reflection(x, y, 0.9, rng);
    const Point xi = p.x_prop - x;
    const Point eta = p.y_prop - y;
    ASSERT_NEAR(eta.norm(), xi.norm(), 1e-12);
    ASSERT_NEAR(e.dot(eta), -e.dot(xi), 1e-12);
    ASSERT_LE(max_abs((eta - e * e.dot(eta)) - (xi - e * e.dot(xi))), 1e-12);
    xe.push_back(e.dot(p.x_prop));
    ye.push_back(e.dot(p.y_prop));
  }
  EXPECT_GT(ks_p(xe, e.dot(x), 0.9), 0.01);
  EXPECT_GT(ks_p(ye, e.dot(y), 0.9), 0.01);
  EXPECT_THROW(sample_reflection(x, x, 0.9, rng), DegeneratePair);
  EXPECT_THROW(sample_full_reflection(x, x, 0.9, rng), DegeneratePair);
}

TEST(FullReflection, NegatedIncrement) {
  Rng rng(4);
  const Point x = pt({0.0, 1.0});
  const Point y = pt({2.0, -1.0});
  for (int i = 0; i < 1000; ++i) {
    const auto p = sample_full_reflection(x, y, 1.0, rng);
    EXPECT_LE(max_abs((p.y_prop - y) + (p.x_prop - x)), 1e-15);
  }
}

TEST(MaxIndependent1d, EqualMeansAlwaysMeet) {
  Rng rng(5);
  for (int i = 0; i < 10'000; ++i) {
    const auto p = sample_max_independent_1d(0.3, 0.3, 1.0, rng);
    ASSERT_TRUE(p.met);
    ASSERT_EQ(p.x, p.y);
  }
}

TEST(MaxIndependent1d, MeetRateAndMeetLaw) {
  Rng rng(6);
  Integer meets = 0;
  std::vector<double> met_values;
  for (Integer i = 0; i < kDraws; ++i) {
    const auto p = sample_max_independent_1d(0.0, 2.0, 1.0, rng);
    if (p.met) {
      ++meets;
      met_values.push_back(p.x);
    }
  }
  EXPECT_TRUE(binomial_within(meets, kDraws, 0.3173105078629141, 3.0))
      << double(meets) / kDraws;
  const ResidualCdf meet_cdf(0.0, 2.0, 1.0, ResidualSide::Meet);
  EXPECT_GT(ks_statistic(met_values, [&](double z) { return meet_cdf(z); })
                .p_value,
            0.001);
}

TEST(MaxIndependent1d, RejectionCap) {
  Rng rng(7);
  // Far apart: the first stage essentially never meets, and a cap of one
  // rejection step fails eventually.
  EXPECT_THROW(
      {
        for (int i = 0; i < 1000; ++i)
          sample_max_independent_1d(0.0, 0.05, 1.0, rng, 1);
      },
      RejectionCapExceeded);
  EXPECT_THROW(sample_max_independent_1d(0.0, 1.0, 1.0, rng, 0), DomainError);
}

TEST(MaxIndependent1d, LargeSeparationIsStable) {
  Rng rng(8);
  for (int i = 0; i < 1000; ++i) {
    const auto p = sample_max_independent_1d(0.0, 1e4, 1.0, rng);
    EXPECT_FALSE(p.met);
    EXPECT_TRUE(std::isfinite(p.y));
  }
}

TEST(MaxIndependent, MeetRatePerpIndependenceAndMargins) {
  Rng rng(9);
  const double sd = 0.6;
  const Point x = pt({0.5, -0.2, 1.0});
  const Point dir = pt({1.0, 2.0, -2.0}) / 3.0;
  const Point y = x + 2.0 * sd * dir;
  const Point f = pt({2.0, 1.0, 2.0}) / 3.0; // orthogonal to dir
  ASSERT_NEAR(f.dot(dir), 0.0, 1e-15);
  Integer meets = 0;
  std::vector<double> xe, ye, xf, yf;
  double sxy = 0.0, sxx = 0.0, syy = 0.0, sx = 0.0, sy = 0.0;
  Integer n_res = 0;
  for (Integer i = 0; i < kDraws; ++i) {
    const auto p = sample_max_independent(x, y, sd, rng);
    meets += p.proposed_meet;
    xe.push_back(dir.dot(p.x_prop));
    ye.push_back(dir.dot(p.y_prop));
    xf.push_back(f.dot(p.x_prop));
    yf.push_back(f.dot(p.y_prop));
    if (!p.proposed_meet) {
      const double a = f.dot(p.x_prop), b = f.dot(p.y_prop);
      sx += a;
      sy += b;
      sxx += a * a;
      syy += b * b;
      sxy += a * b;
      ++n_res;
    }
  }
  EXPECT_TRUE(binomial_within(meets, kDraws, 0.3173105078629141, 3.0));
  const double n = double(n_res);
  const double cov = sxy / n - (sx / n) * (sy / n);
  const double corr = cov / std::sqrt((sxx / n - sx * sx / n / n) *
                                      (syy / n - sy * sy / n / n));
  EXPECT_LT(std::abs(corr), 3.0 / std::sqrt(n));
  EXPECT_GT(ks_p(xe, dir.dot(x), sd), 0.001);
  EXPECT_GT(ks_p(ye, dir.dot(y), sd), 0.001);
  EXPECT_GT(ks_p(xf, f.dot(x), sd), 0.001);
  EXPECT_GT(ks_p(yf, f.dot(y), sd), 0.001);
  EXPECT_THROW(sample_max_independent(x, x, sd, rng), DegeneratePair);
}

TEST(MaxSemiIndependent, SharedOrthogonalPart) {
  Rng rng(10);
  const Point x = pt({0.0, 0.0, 0.0, 1.0});
  const Point y = pt({0.3, 0.8, -0.4, 1.0});
  const Point e = (y - x).normalized();
  Integer meets = 0;
  for (Integer i = 0; i < kDraws; ++i) {
    const auto p = sample_max_semi_independent(x, y, 0.5, rng);
    meets += p.proposed_meet;
    const Point diff = p.y_prop - p.x_prop;
    ASSERT_LE(max_abs(diff - e * e.dot(diff)), 1e-12);
  }
  EXPECT_TRUE(binomial_within(meets, kDraws,
                              meeting_probability((y - x).norm(), 0.5), 3.0));
}

TEST(MaxSemiIndependent, OneDimensionMatchesScalarCoupling) {
  Rng r1(11), r2(12);
  std::vector<double> a_x, a_y, b_x, b_y;
  Integer a_meet = 0, b_meet = 0;
  for (Integer i = 0; i < kDraws; ++i) {
    const auto a = sample_max_semi_independent(pt({0.0}), pt({1.5}), 1.0, r1);
    const auto b = sample_max_independent_1d(0.0, 1.5, 1.0, r2);
    a_x.push_back(a.x_prop(0));
    a_y.push_back(a.y_prop(0));
    b_x.push_back(b.x);
    b_y.push_back(b.y);
    a_meet += a.proposed_meet;
    b_meet += b.met;
  }
  EXPECT_GT(ks_two_sample(a_x, b_x).p_value, 0.001);
  EXPECT_GT(ks_two_sample(a_y, b_y).p_value, 0.001);
  const double p = 0.5 * double(a_meet + b_meet) / kDraws;
  EXPECT_LT(std::abs(double(a_meet - b_meet)) / kDraws,
            3.0 * std::sqrt(2.0 * p * (1 - p) / kDraws));
}

TEST(OtResidualCdf, SupportEndpointsAndMonotone) {
  const double x1 = -0.5, y1 = 1.0, sd = 0.8;
  const double m = 0.25;
  EXPECT_EQ(ot_residual_cdf(m, x1, y1, sd), 1.0);
  // The y-residual CDF is the mirrored call.
  EXPECT_EQ(ot_residual_cdf(m, y1, x1, sd), 0.0);
  double prev = 0.0;
  for (double v = -6.0; v < m; v += 0.01) {
    const double c = ot_residual_cdf(v, x1, y1, sd);
    EXPECT_GE(c, prev);
    prev = c;
  }
  EXPECT_THROW(ot_residual_cdf(0.0, 1.0, 1.0, sd), DomainError);
}

TEST(OtResidualCdf, MatchesQuadrature) {
  const double x1 = -0.5, y1 = 1.0, sd = 0.8;
  const ResidualCdf xq(x1, y1, sd, ResidualSide::XResidual);
  const ResidualCdf yq(x1, y1, sd, ResidualSide::YResidual);
  for (double v = -3.0; v < 4.0; v += 0.37) {
    EXPECT_NEAR(ot_residual_cdf(v, x1, y1, sd), xq(v), 1e-9) << v;
    EXPECT_NEAR(ot_residual_cdf(v, y1, x1, sd), yq(v), 1e-9) << v;
  }
}

TEST(OtTransportMap, ReferenceValues) {
  // Independent root finding with scipy brentq, x1 = 0, y1 = 1.5, sd = 1.
  struct Ref {
    double v, cdf, t;
  };
  const Ref refs[] = {{-2.0, 0.04118463032956032, 1.0690230555197386},
                      {0.0, 0.7923118909254159, 2.689451762876423},
                      {0.5, 0.9745071644422114, 3.695953965917228},
                      {0.74, 0.999958692193879, 5.579184999447164}};
  for (const auto &r : refs) {
    EXPECT_NEAR(ot_residual_cdf(r.v, 0.0, 1.5, 1.0), r.cdf, 1e-13);
    EXPECT_NEAR(ot_transport_map(r.v, 0.0, 1.5, 1.0), r.t, 1e-10);
  }
  EXPECT_THROW(ot_transport_map(0.75, 0.0, 1.5, 1.0), DomainError);
  EXPECT_THROW(ot_transport_map(2.0, 0.0, 1.5, 1.0), DomainError);
}

TEST(OtTransportMap, MirrorIdentity) {
  for (double v : {-3.0, -1.0, 0.2, 0.7})
    EXPECT_NEAR(ot_transport_map(-v, 0.0, -1.5, 1.0),
                -ot_transport_map(v, 0.0, 1.5, 1.0), 1e-12);
  // And it is increasing.
  double prev = -std::numeric_limits<double>::infinity();
  for (double v = -5.0; v < 0.75; v += 0.05) {
    const double t = ot_transport_map(v, 0.0, 1.5, 1.0);
    EXPECT_GT(t, 0.75);
    EXPECT_GE(t, prev);
    prev = t;
  }
}

TEST(MaxOt, MeetRatesAndMonotonePairing) {
  const double sd = 0.7;
  for (double ratio : {0.5, 2.0, 4.0}) {
    Rng rng(static_cast<std::uint64_t>(100 * ratio));
    const Point x = pt({0.0, 1.0});
    const Point y = pt({ratio * sd, 1.0});
    Integer meets = 0;
    std::vector<std::pair<double, double>> pairs;
    std::vector<double> xs, ys;
    for (Integer i = 0; i < kDraws; ++i) {
      const auto p = sample_max_ot(x, y, sd, rng);
      meets += p.proposed_meet;
      if (!p.proposed_meet) {
        pairs.emplace_back(p.x_prop(0), p.y_prop(0));
        ASSERT_EQ(p.x_prop(1), p.y_prop(1));
      }
      xs.push_back(p.x_prop(0));
      ys.push_back(p.y_prop(0));
    }
    EXPECT_TRUE(
        binomial_within(meets, kDraws, meeting_probability(ratio * sd, sd), 3.0))
        << ratio;
    std::sort(pairs.begin(), pairs.end());
    for (std::size_t i = 1; i < pairs.size(); ++i)
      ASSERT_LE(pairs[i - 1].second, pairs[i].second);
    EXPECT_GT(ks_p(xs, 0.0, sd), 0.001);
    EXPECT_GT(ks_p(ys, ratio * sd, sd), 0.001);
  }
}

TEST(MaxReflection, IdentityAndOneDimension) {
  Rng rng(13);
  const Point x = pt({0.2, -0.3, 0.9});
  const Point y = pt({0.8, 0.1, 0.4});
  const Point e = (y - x).normalized();
  Integer meets = 0;
  for (Integer i = 0; i < kDraws; ++i) {
    const auto p = sample_max_reflection(x, y, 0.5, rng);
    if (p.proposed_meet) {
      ++meets;
      ASSERT_TRUE(bitwise_equal(p.x_prop, p.y_prop));
      continue;
    }
    const Point xi = p.x_prop - x, eta = p.y_prop - y;
    ASSERT_NEAR(eta.norm(), xi.norm(), 1e-12);
    ASSERT_LE(max_abs(eta - reflect(xi, e)), 1e-12);
  }
  EXPECT_TRUE(binomial_within(meets, kDraws,
                              meeting_probability((y - x).norm(), 0.5), 3.0));
  for (int i = 0; i < 10'000; ++i) {
    const auto p = sample_max_reflection_1d(0.5, 1.7, 0.4, rng);
    if (!p.met)
      ASSERT_EQ(p.y, 1.7 - (p.x - 0.5));
  }
}

TEST(Hybrid, Dispatch) {
  const Point x = pt({0.0, 0.0, 0.0, 0.0});
  const Point y = pt({2.0, 0.0, 0.0, 0.0});
  ProposalCouplingSpec spec;
  spec.kind = ProposalKind::Hybrid;
  spec.sd = 1.0;
  auto same = [](const ProposalPair &a, const ProposalPair &b) {
    return bitwise_equal(a.x_prop, b.x_prop) &&
           bitwise_equal(a.y_prop, b.y_prop);
  };
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    spec.hybrid_cutoff = std::numeric_limits<double>::infinity();
    Rng a(seed), b(seed);
    EXPECT_TRUE(same(sample_hybrid(x, y, spec, a),
                     sample_max_reflection(x, y, 1.0, b)));
    spec.hybrid_cutoff = 1e-300;
    Rng c(seed), d(seed);
    EXPECT_TRUE(
        same(sample_hybrid(x, y, spec, c), sample_reflection(x, y, 1.0, d)));
    // r = 2 = 4 / sqrt(4): the far branch.
    spec.hybrid_cutoff = 4.0;
    Rng e(seed), f(seed);
    EXPECT_TRUE(
        same(sample_hybrid(x, y, spec, e), sample_reflection(x, y, 1.0, f)));
    spec.hybrid_cutoff = std::nextafter(4.0, 5.0);
    Rng g(seed), h(seed);
    EXPECT_TRUE(same(sample_hybrid(x, y, spec, g),
                     sample_max_reflection(x, y, 1.0, h)));
  }
}

TEST(Assemble, MeetCopiesPoint) {
  const auto geom = pair_geometry(pt({0.0, 0.0}), pt({1.0, 1.0}));
  SplitProposal s{{0.3, 0.3, true}, pt({0.1, -0.1}), pt({0.1, -0.1})};
  const auto p = assemble(geom, s);
  EXPECT_TRUE(p.proposed_meet);
  EXPECT_TRUE(bitwise_equal(p.x_prop, p.y_prop));
  EXPECT_NEAR(geom.e.dot(p.x_prop), 0.3, 1e-15);
}

} // namespace
} // namespace crwm
