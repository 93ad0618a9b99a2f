#include <gtest/gtest.h>

#include <cmath>
#include <fstream>

#include "json.hpp"
#include "ref1.hpp"

using namespace nlwave;

namespace {
// Closed forms for the reference set with the untruncated Gaussian (mpmath, 30 digits).
// Truncation at R = 8 moves beta_sup by ~6e-10, hence the 1e-8 tolerances.
constexpr double kBetaSup = 2.02681496099488623;
constexpr double kTerm3 = 3.54952239920213829;
constexpr double kC11 = 0.179855627577233923;
constexpr double kC12 = 0.622113990577650332;
constexpr double kMu1 = 0.0378504066074115923;

struct Ref1Cert : ::testing::Test {
  static void SetUpTestSuite() {
    p = new ModelParams(ref1::params());
    k = new DiscreteKernel(ref1::kernel(), 0.05);
    w = new WaveProfile(ref1::profile(*p, *k, ref1::wave_grid()));
    s = new StabilityCertificate(certify(*p, *k, *w));
  }
  static void TearDownTestSuite() {
    delete s;
    delete w;
    delete k;
    delete p;
  }
  static ModelParams* p;
  static DiscreteKernel* k;
  static WaveProfile* w;
  static StabilityCertificate* s;
};
ModelParams* Ref1Cert::p = nullptr;
DiscreteKernel* Ref1Cert::k = nullptr;
WaveProfile* Ref1Cert::w = nullptr;
StabilityCertificate* Ref1Cert::s = nullptr;
}  // namespace

TEST(WeightFunction, ContinuousAndAboveOne) {
  const WeightFunction w{0.8, 2.0};
  EXPECT_DOUBLE_EQ(w(2.0), 1.0);
  EXPECT_DOUBLE_EQ(w(5.0), 1.0);
  EXPECT_NEAR(w(0.0), std::exp(1.6), 1e-14);
  for (double x = -10; x < 10; x += 0.37) {
    EXPECT_GE(w(x), 1.0);
    EXPECT_LE(w.ratio(x + 1.3, x), 1.0);
  }
}

TEST(FindBeta, StartValueIsMinusGapMargin) {
  // g(0) = D/2 - (D/2 + gamma1 + ln 2 - 3 gamma2) = -(0.2 - 0.75 + ln 2).
  const auto p = ModelParams::make(1.0, 0.2, 0.25, 0.0, nicholson(2, 1, 1));
  const DiscreteKernel k(KernelSpec::gaussian(1.0), 0.05);
  EXPECT_NEAR(beta_function(p, k, 0.0), -0.143147180559945265, 1e-14);
  EXPECT_NEAR(find_beta(p, k).g0, -check_quiescence_gap(p).gap_margin, 1e-15);
}

TEST(FindBeta, GapViolatedWhenQuiescentExitTooFast) {
  // gamma2 = 0.3: margin 0.2 - 0.9 + ln 2 < 0.
  const auto p = ModelParams::make(1.0, 0.2, 0.3, 0.0, nicholson(2, 1, 1));
  const DiscreteKernel k(KernelSpec::gaussian(1.0), 0.05);
  try {
    (void)find_beta(p, k);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::GapViolated);
  }
}

TEST(FindBeta, IgnoresDelay) {
  const DiscreteKernel k(ref1::kernel(), 0.05);
  const auto a = find_beta(ModelParams::make(0.1, 0.02, 0.1, 0.0, nicholson(2.7, 1, 1)), k);
  const auto b = find_beta(ModelParams::make(0.1, 0.02, 0.1, 5.0, nicholson(2.7, 1, 1)), k);
  EXPECT_EQ(a.beta_sup, b.beta_sup);
}

TEST(FindBeta, ReferenceRootAndHalving) {
  const auto p = ref1::params();
  const DiscreteKernel k(ref1::kernel(), 0.05);
  const auto b = find_beta(p, k);
  EXPECT_NEAR(b.beta_sup, kBetaSup, 1e-8);
  EXPECT_DOUBLE_EQ(b.beta, 0.5 * b.beta_sup);
  EXPECT_LE(std::abs(beta_function(p, k, b.beta_sup)), 1e-10);
  EXPECT_LT(beta_function(p, k, b.beta_sup * (1 - 1e-6)), 0.0);
  EXPECT_GT(beta_function(p, k, b.beta_sup * (1 + 1e-6)), 0.0);
}

TEST(SpeedThreshold, ReferenceTermsAndIndependentFormula) {
  const auto p = ref1::params();
  const DiscreteKernel k(ref1::kernel(), 0.05);
  const double beta = find_beta(p, k).beta;
  const auto t = speed_threshold(p, k, beta);
  EXPECT_LT(t.term2, 0.0);
  EXPECT_NEAR(t.term3, kTerm3, 1e-8);
  // 2 f1(0,0) + 2 f2(0,0) = 2(p - d) for Nicholson.
  const double direct = (2 * (2.7 - 1.0) + 0.1 - 0.02 - 0.05 + 0.1 * std::exp(beta * beta / 2)) / beta;
  EXPECT_NEAR(t.term3, direct, 1e-12);
  EXPECT_EQ(t.c_threshold, t.term3);
}

TEST(SpeedThreshold, DecreasesTowardBetaSup) {
  const auto p = ref1::params();
  const DiscreteKernel k(ref1::kernel(), 0.05);
  const double bs = find_beta(p, k).beta_sup;
  double prev = INFINITY;
  for (int i = 1; i <= 20; ++i) {
    const double t = speed_threshold(p, k, 0.25 * bs + 0.75 * bs * i / 20).term3;
    EXPECT_LT(t, prev);
    prev = t;
  }
}

TEST(Constants, QuiescentConstantAndGapIdentity) {
  const auto p = ref1::params();
  const DiscreteKernel k(ref1::kernel(), 0.05);
  const double beta = find_beta(p, k).beta;
  const auto C = compute_constants(p, k, beta, 3.7);
  EXPECT_DOUBLE_EQ(C.C2, 0.1 - 0.02);
  EXPECT_GT(C.C21, C.C22);
  EXPECT_NEAR(C.C12, -beta_function(p, k, beta), 1e-15);
  EXPECT_NEAR(C.C12, kC12, 1e-8);
}

TEST(Constants, ThresholdIsRootOfC11) {
  const auto p = ref1::params();
  const DiscreteKernel k(ref1::kernel(), 0.05);
  const double beta = find_beta(p, k).beta;
  const double t3 = speed_threshold(p, k, beta).term3;
  EXPECT_NEAR(compute_constants(p, k, beta, t3).C11, 0.0, 1e-13);
  EXPECT_GT(compute_constants(p, k, beta, t3 + 0.01).C11, 0.0);
  EXPECT_LT(compute_constants(p, k, beta, t3 - 0.01).C11, 0.0);
  try {
    (void)constants(p, k, beta, t3 - 0.01);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NonPositiveConstant);
  }
}

TEST(SolveMu1, DegenerateCases) {
  EXPECT_EQ(solve_mu1(0.37, 0.0, 2.0), 0.185);
  EXPECT_EQ(solve_mu1(0.37, 1.0, 0.0), 0.185);
}

TEST(SolveMu1, BisectionRoot) {
  const double m = solve_mu1(0.4, 1.0, 2.0);
  EXPECT_NEAR(m, 0.0638310266790862276, 1e-12);
  EXPECT_LE(std::abs(mu1_equation(0.4, 1.0, 2.0, m)), 1e-12);
  // Sign change bracket on a 64-interval scan of (0, C1/2).
  int changes = 0;
  for (int i = 0; i < 64; ++i) {
    const double a = 0.2 * i / 64, b = 0.2 * (i + 1) / 64;
    if ((mu1_equation(0.4, 1.0, 2.0, a) > 0) != (mu1_equation(0.4, 1.0, 2.0, b) > 0)) {
      ++changes;
      EXPECT_GE(m, a);
      EXPECT_LE(m, b);
    }
  }
  EXPECT_EQ(changes, 1);
}

TEST(Mu2, HalfOfC2) {
  EXPECT_DOUBLE_EQ(mu2(0.05), 0.025);
  EXPECT_THROW((void)mu2(0.0), Error);
}

TEST_F(Ref1Cert, Valid) {
  EXPECT_TRUE(s->valid);
  EXPECT_TRUE(s->failures.empty());
  EXPECT_FALSE(s->xi0_gap);
}

TEST_F(Ref1Cert, ConstantsMatchClosedForms) {
  EXPECT_NEAR(s->C.C11, kC11, 1e-8);
  EXPECT_NEAR(s->C.C1, s->C.C11, 0.0);
  EXPECT_NEAR(s->mu1, kMu1, 1e-8);
  EXPECT_DOUBLE_EQ(s->mu2, 0.04);
  EXPECT_DOUBLE_EQ(s->mu, 0.9 * s->mu1);
}

TEST_F(Ref1Cert, PointwiseMinimaAboveConstants) {
  EXPECT_GE(s->min_B1.value, s->C.C1 - 1e-9);
  EXPECT_GE(s->min_B2.value, s->C.C2 - 1e-9);
  ASSERT_EQ(s->mu_scan.size(), 10u);
  for (const auto& e : s->mu_scan) {
    EXPECT_GT(e.mu, 0.0);
    EXPECT_LT(e.mu, s->mu_max);
    EXPECT_GE(e.min_A1, e.C3 - 1e-9);
    EXPECT_NEAR(e.min_A2, e.C4, 1e-9);
  }
}

TEST_F(Ref1Cert, FarFieldAsymptotes) {
  const WeightFunction wt{s->beta, s->xi0};
  const double c = w->c, b = s->beta, tau = p->tau;
  const auto r0 = p->reaction.all(0, 0), rK = p->reaction.all(p->K, p->K);
  const auto left = eval_B(*p, *w, wt, *k, 0);
  const double B1l = c * b + p->D + p->gamma1 - 2 * r0.f1 - (1 + std::exp(-b * c * tau)) * r0.f2 - p->gamma2 -
                     p->D * exp_moment(*k, b);
  EXPECT_NEAR(left.first, B1l, 1e-6);
  EXPECT_NEAR(left.second, c * b + p->gamma2 - p->gamma1, 1e-12);
  const auto right = eval_B(*p, *w, wt, *k, w->grid.size() - 1);
  EXPECT_NEAR(right.first, p->gamma1 - 2 * rK.f1 - 2 * rK.f2 - p->gamma2, 1e-6);
  EXPECT_NEAR(right.second, p->gamma2 - p->gamma1, 1e-15);
}

TEST_F(Ref1Cert, EvalAAtZeroMuIsB) {
  const WeightFunction wt{s->beta, s->xi0};
  for (std::size_t j : {0ul, 1500ul, 2000ul, 6000ul}) {
    const auto B = eval_B(*p, *w, wt, *k, j);
    const auto A = eval_A(*p, *w, wt, *k, 0.0, j);
    EXPECT_EQ(A.first, B.first);
    EXPECT_EQ(A.second, B.second);
  }
}

TEST_F(Ref1Cert, MatchesGolden) {
  std::ifstream in(std::string(NLWAVE_SOURCE_DIR) + "/tests/golden/ref1_certificate.json");
  ASSERT_TRUE(in.good());
  const auto g = nlohmann::json::parse(in);
  auto near = [&](const char* key, double v) { EXPECT_NEAR(v, g.at(key).get<double>(), 1e-9) << key; };
  near("c", s->c);
  near("beta", s->beta);
  near("beta_sup", s->beta_sup);
  near("xi0", s->xi0);
  near("c_threshold", s->threshold.c_threshold);
  near("C11", s->C.C11);
  near("C12", s->C.C12);
  near("C3", s->C3);
  near("C4", s->C4);
  near("mu1", s->mu1);
  near("mu", s->mu);
  near("min_B1", s->min_B1.value);
  near("min_A1", s->min_A1.value);
  EXPECT_EQ(g.at("valid").get<bool>(), s->valid);
}

TEST(Certify, BelowThresholdInvalid) {
  const auto p = ref1::params();
  const DiscreteKernel k(ref1::kernel(), 0.1);
  const double beta = find_beta(p, k).beta;
  const double c = 0.9 * speed_threshold(p, k, beta).c_threshold;
  const WaveProfile w = solve_profile(p, k, c, Grid::with_spacing(-60, 400, 0.1));
  const auto s = certify(p, k, w);
  EXPECT_FALSE(s.valid);
  ASSERT_FALSE(s.failures.empty());
  EXPECT_EQ(s.failures.front(), "speed not above threshold");
  EXPECT_EQ(s.failures.back(), "NonPositiveConstant(C11)");
}

TEST(Certify, UndelayedHasHalfC1Rate) {
  const auto p = ModelParams::make(0.1, 0.02, 0.1, 0.0, nicholson(2.7, 1, 1));
  const DiscreteKernel k(ref1::kernel(), 0.1);
  const WaveProfile w = solve_profile(p, k, ref1::speed(p, k), Grid::with_spacing(-60, 400, 0.1));
  const auto s = certify(p, k, w);
  EXPECT_EQ(s.mu1, s.C.C1 / 2);
}

TEST(Certify, UndelayedLeftLimitHasTwoDelayTerms) {
  // With tau = 0 the translated weight is 1 and the left limit of B1 carries 2 d2f(0,0).
  const auto p = ModelParams::make(0.1, 0.02, 0.1, 0.0, nicholson(2.7, 1, 1));
  const DiscreteKernel k(ref1::kernel(), 0.1);
  const WaveProfile w = solve_profile(p, k, ref1::speed(p, k), Grid::with_spacing(-60, 400, 0.1));
  const auto s = certify(p, k, w);
  const auto f0 = p.reaction.all(0, 0);
  const double b = s.beta;
  const double limit = w.c * b + p.D + p.gamma1 - 2 * f0.f1 - 2 * f0.f2 - p.gamma2 - p.D * exp_moment(k, b);
  EXPECT_NEAR(eval_B(p, w, WeightFunction{b, s.xi0}, k, 0).first, limit, 1e-6);
  EXPECT_GT(limit, s.C.C1);
}
