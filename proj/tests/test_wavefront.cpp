#include <gtest/gtest.h>

#include <cmath>

#include "ref1.hpp"

using namespace nlwave;

namespace {
// Pinned speed 1.05 * threshold for the reference set (truncated Gaussian, R = 8).
constexpr double kSpeed = 3.72699851816082;

struct Ref1Wave : ::testing::Test {
  static void SetUpTestSuite() {
    p = new ModelParams(ref1::params());
    k = new DiscreteKernel(ref1::kernel(), 0.05);
    w = new WaveProfile(ref1::profile(*p, *k, ref1::wave_grid()));
  }
  static void TearDownTestSuite() {
    delete w;
    delete k;
    delete p;
  }
  static ModelParams* p;
  static DiscreteKernel* k;
  static WaveProfile* w;
};
ModelParams* Ref1Wave::p = nullptr;
DiscreteKernel* Ref1Wave::k = nullptr;
WaveProfile* Ref1Wave::w = nullptr;
}  // namespace

TEST(TransportSymbol, SchemesAgreeAsSpacingVanishes) {
  // Upwind: first order; exponential: second order in h.
  EXPECT_NEAR(transport_symbol(ProfileScheme::upwind, 2.0, 0.3, 1e-6, 1.0), 0.6, 1e-6);
  EXPECT_LT(transport_symbol(ProfileScheme::upwind, 2.0, 0.3, 0.1, 1.0), 0.6);
  const double e1 = transport_symbol(ProfileScheme::exponential, 2.0, 0.3, 0.1, 1.5) - 0.6;
  const double e2 = transport_symbol(ProfileScheme::exponential, 2.0, 0.3, 0.05, 1.5) - 0.6;
  EXPECT_LT(std::abs(e1), 1e-3);
  EXPECT_NEAR(e1 / e2, 4.0, 0.05);
}

TEST(TransportSymbol, ExponentialSweepKeepsExponentialsExactly) {
  // Sweep of F = (rate + T) e^{lambda x} returns e^{lambda x} node for node.
  const double c = 2.0, l = 0.3, h = 0.1, rate = 1.5;
  const double T = transport_symbol(ProfileScheme::exponential, c, l, h, rate);
  const Grid g(0.0, 5.0, 51);
  Field F(g.size());
  for (std::size_t j = 0; j < g.size(); ++j) F[j] = (rate + T) * std::exp(l * g.node(j));
  const Field y = detail::sweep(ProfileScheme::exponential, F, rate, h, c, std::exp(-l * h), (rate + T) * std::exp(-l * h));
  for (std::size_t j = 0; j < g.size(); ++j) EXPECT_NEAR(y[j] / std::exp(l * g.node(j)), 1.0, 1e-13);
}

TEST(DelaySymbol, ExactOnNodesInterpolatedBetween) {
  EXPECT_NEAR(delay_symbol(0.5, 1.0, 0.25), std::exp(-0.5), 1e-15);
  const double mid = delay_symbol(0.5, 1.1, 0.2);
  EXPECT_NEAR(mid, 0.5 * (std::exp(-0.5) + std::exp(-0.6)), 1e-15);
}

TEST(LeadingEdge, RootOfCharacteristicFunction) {
  const auto p = ref1::params();
  const DiscreteKernel k(ref1::kernel(), 0.05);
  for (auto s : {ProfileScheme::exponential, ProfileScheme::upwind}) {
    const double l = leading_edge_rate(p, k, kSpeed, s);
    EXPECT_NEAR(leading_edge_chi(p, k, kSpeed, s, l), 0.0, 1e-12);
    EXPECT_LT(leading_edge_chi(p, k, kSpeed, s, 0.5 * l), 0.0);
  }
  // Exponential scheme rate, frozen from a run of this configuration.
  EXPECT_NEAR(leading_edge_rate(p, k, kSpeed, ProfileScheme::exponential), 0.21386799376652083, 1e-9);
}

TEST(LeadingEdge, SlowSpeedHasNoRealRate) {
  const auto p = ref1::params();
  const DiscreteKernel k(ref1::kernel(), 0.05);
  try {
    (void)leading_edge_rate(p, k, 0.05, ProfileScheme::exponential);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NoRoot);
  }
}

TEST(SeedProfiles, OrderedAndSaturated) {
  const auto p = ref1::params();
  const Grid g(-30, 30, 601);
  const auto s = seed_profiles(p, 3.0, g, 0.2, 0.01);
  EXPECT_DOUBLE_EQ(s.upper1.back(), p.K);
  EXPECT_DOUBLE_EQ(s.upper2.back(), p.K2());
  for (std::size_t j = 0; j < g.size(); ++j) {
    EXPECT_GE(s.upper1[j], s.lower1[j]);
    EXPECT_GE(s.upper2[j], s.lower2[j]);
    EXPECT_EQ(s.lower1[j], 0.0);
  }
}

TEST(SeedProfiles, FlatSeedRejected) {
  const auto p = ref1::params();
  EXPECT_THROW((void)seed_profiles(p, 3.0, Grid(0, 1, 11), 0.0, 0.1), Error);
}

TEST(SolveProfile, ZeroSpeedRejected) {
  const auto p = ref1::params();
  const DiscreteKernel k(ref1::kernel(), 0.1);
  EXPECT_THROW((void)solve_profile(p, k, 0.0, Grid(-10, 10, 201)), Error);
}

TEST(SolveProfile, EquilibriumIsFixedPoint) {
  const auto p = ref1::params();
  const Grid g(-10, 10, 201);
  const DiscreteKernel k(ref1::kernel(), g.spacing());
  const Closure bc1 = Closure::clamps(p.K, p.K), bc2 = Closure::clamps(p.K2(), p.K2());
  const Field u1(g.size(), p.K), u2(g.size(), p.K2());
  const WaveProfile w = iterate_profile(p, k, 2.0, g, bc1, bc2, u1, u2, ProfileScheme::exponential, 1e-13, 50);
  for (std::size_t j = 0; j < g.size(); ++j) {
    EXPECT_NEAR(w.phi1[j], p.K, 1e-13);
    EXPECT_NEAR(w.phi2[j], p.K2(), 1e-13);
  }
  const auto r = profile_residual(p, k, w);
  EXPECT_LE(r.first, 1e-12);
  EXPECT_LE(r.second, 1e-12);
}

TEST_F(Ref1Wave, SpeedIsPinned) { EXPECT_NEAR(w->c, kSpeed, 1e-10); }

TEST_F(Ref1Wave, ResidualBelowTolerance) {
  EXPECT_LE(w->residual.first, 1e-4);
  EXPECT_LE(w->residual.second, 1e-4);
}

TEST_F(Ref1Wave, MonotoneAndBounded) {
  EXPECT_GE(w->min_increment(), -1e-9);
  for (std::size_t j = 0; j < w->phi1.size(); ++j) {
    EXPECT_GE(w->phi1[j], 0.0);
    EXPECT_LE(w->phi1[j], w->K + 1e-12);
    EXPECT_LE(w->phi2[j], w->K2 + 1e-12);
  }
}

TEST_F(Ref1Wave, ReachesEquilibriaAtBothEnds) {
  EXPECT_TRUE(w->boundary_ok(1e-3));
  const auto [l, r] = w->boundary_gap();
  EXPECT_LT(l, 1e-6);
  EXPECT_LT(r, 1e-6);
}

TEST_F(Ref1Wave, NormalizedAtHalfCapacity) { EXPECT_NEAR(w->value1(0.0), 0.5 * w->K, 1e-12); }

TEST_F(Ref1Wave, BumpRaisesResidualLinearly) {
  // Residual of phi + eps*bump grows like eps * |L bump|; doubling eps doubles the excess.
  auto bumped = [&](double eps) {
    WaveProfile v = *w;
    for (std::size_t j = 0; j < v.phi1.size(); ++j) {
      const double z = v.grid.node(j);
      if (std::abs(z) < 3) v.phi1[j] += eps * std::pow(std::cos(M_PI * z / 6), 2);
    }
    return profile_residual(*p, *k, v).first;
  };
  const double base = w->residual.first;
  const double r1 = bumped(0.01) - base, r2 = bumped(0.02) - base;
  EXPECT_GT(r1, 1e-3);
  EXPECT_NEAR(r2 / r1, 2.0, 0.05);
}

TEST_F(Ref1Wave, Xi0HasSuffixProperty) {
  const Xi0 x = find_xi0(*p, *w);
  EXPECT_FALSE(x.gap);
  EXPECT_GT(x.xi0, 0.0);
  EXPECT_LT(x.xi0, 40.0);
}

TEST(FindXi0, EquilibriumProfileAcceptsWholeGrid) {
  const auto p = ref1::params();
  WaveProfile w;
  w.grid = Grid(-10, 10, 201);
  w.c = 3.0;
  w.K = p.K;
  w.K2 = p.K2();
  w.phi1.assign(201, p.K);
  w.phi2.assign(201, p.K2());
  w.closure1 = Closure::clamps(p.K, p.K);
  w.closure2 = Closure::clamps(p.K2(), p.K2());
  const Xi0 x = find_xi0(p, w);
  EXPECT_EQ(x.index, 0u);
  EXPECT_DOUBLE_EQ(x.xi0, -10.0);
}

TEST(FindXi0, ZeroProfileNotAttained) {
  const auto p = ModelParams::make(1.0, 0.02, 0.1, 0.5, nicholson(2, 1, 1));
  WaveProfile w;
  w.grid = Grid(-10, 10, 201);
  w.c = 3.0;
  w.K = p.K;
  w.K2 = p.K2();
  w.phi1.assign(201, 0.0);
  w.phi2.assign(201, 0.0);
  try {
    (void)find_xi0(p, w);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NotAttained);
  }
}

TEST(Sample, InterpolatesAndUsesClosures) {
  const Grid g(0, 2, 3);
  const Field u{1, 2, 4};
  const Closure bc{FarField::constant(-1), 9};
  EXPECT_DOUBLE_EQ(sample(u, g, bc, 0.5), 1.5);
  EXPECT_DOUBLE_EQ(sample(u, g, bc, 1.5), 3.0);
  EXPECT_DOUBLE_EQ(sample(u, g, bc, 5.0), 9.0);
  EXPECT_DOUBLE_EQ(sample(u, g, bc, -3.0), -1.0);
}
