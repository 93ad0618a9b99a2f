#include <gtest/gtest.h>

#include <filesystem>
#include <string>

#include "nlwave/config.hpp"

using namespace nlwave;

namespace {
std::string config_error(const std::string& text) {
  try {
    (void)read_config(ConfigText::parse(text, "t.cfg"));
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::Config);
    return e.what();
  }
  ADD_FAILURE() << "no error for:\n" << text;
  return {};
}

bool contains(const std::string& s, const std::string& part) { return s.find(part) != std::string::npos; }
}  // namespace

TEST(ConfigText, SectionsCommentsAndWhitespace) {
  const auto t = ConfigText::parse("# top\n[model]\n  D = 0.2   # dispersal\n\n[wave]\nscheme=upwind\n");
  EXPECT_TRUE(t.has("model", "D"));
  EXPECT_EQ(t.number("model", "D").value(), 0.2);
  EXPECT_EQ(t.text("wave", "scheme").value(), "upwind");
  EXPECT_EQ(t.line_of("wave", "scheme"), 6);
  EXPECT_FALSE(t.number("model", "tau").has_value());
}

TEST(ConfigText, SyntaxErrorsCarryLineNumbers) {
  EXPECT_TRUE(contains(config_error("[model]\nD 0.1\n"), "t.cfg:2: expected 'key = value'"));
  EXPECT_TRUE(contains(config_error("D = 0.1\n"), "t.cfg:1: key outside any section"));
  EXPECT_TRUE(contains(config_error("[model\n"), "t.cfg:1: unterminated section header"));
  EXPECT_TRUE(contains(config_error("[model]\nD =\n"), "t.cfg:2: empty value"));
  EXPECT_TRUE(contains(config_error("[model]\nD = 1\n\nD = 2\n"), "t.cfg:4: duplicate key 'D' (first on line 2)"));
}

TEST(Config, EmptyTextGivesDefaults) {
  const auto c = read_config(ConfigText::parse(""));
  EXPECT_EQ(c.model.D, 0.1);
  EXPECT_EQ(c.model.tau, 0.5);
  EXPECT_EQ(c.kernel.family, "gaussian");
  EXPECT_EQ(c.grid.h, 0.05);
  EXPECT_EQ(c.evolution.grid.xi_min, -15);
  EXPECT_FALSE(c.wave.c.has_value());
  EXPECT_FALSE(c.evolution.T.has_value());
}

TEST(Config, UnknownKeyRejected) {
  EXPECT_TRUE(contains(config_error("[model]\nD = 0.1\nDD = 3\n"), "t.cfg:3: unknown key 'DD' in [model]"));
  EXPECT_TRUE(contains(config_error("[modle]\nD = 0.1\n"), "unknown key 'D' in [modle]"));
}

TEST(Config, RangesValidated) {
  EXPECT_TRUE(contains(config_error("[model]\nD = -1\n"), "t.cfg:2: model.D = -1 violates D > 0"));
  EXPECT_TRUE(contains(config_error("[model]\ntau = -0.1\n"), "tau >= 0"));
  EXPECT_TRUE(contains(config_error("[model]\nD = abc\n"), "is not a number"));
  EXPECT_TRUE(contains(config_error("[model]\nD = 0.1x\n"), "is not a number"));
  EXPECT_TRUE(contains(config_error("[certificate]\nmu_fraction = 1\n"), "0 < mu_fraction < 1"));
  EXPECT_TRUE(contains(config_error("[wave]\nscheme = central\n"), "is not one of exponential|upwind"));
  EXPECT_TRUE(contains(config_error("[grid]\nxi_min = 5\nxi_max = 1\n"), "xi_max must exceed xi_min"));
  EXPECT_TRUE(contains(config_error("[grid]\nn = 11\nh = 0.1\n"), "give either n or h"));
  EXPECT_TRUE(contains(config_error("[kernel]\nfamily = tabulated\n"), "needs 'table'"));
  EXPECT_TRUE(contains(config_error("[evolution]\nseed = 1.5\n"), "integer >= 0"));
}

TEST(Config, GridFromNodeCount) {
  const auto c = read_config(ConfigText::parse("[grid]\nxi_min = 0\nxi_max = 10\nn = 101\n"));
  EXPECT_DOUBLE_EQ(c.grid.h, 0.1);
  EXPECT_EQ(c.grid.grid().size(), 101u);
}

TEST(Config, AutoValuesStayUnset) {
  const auto c = read_config(ConfigText::parse("[evolution]\nT = auto\ndt = 0.01\n"));
  EXPECT_FALSE(c.evolution.T.has_value());
  EXPECT_EQ(c.evolution.dt.value(), 0.01);
}

TEST(Config, ReactionSelectsParameters) {
  const auto c = read_config(ConfigText::parse("[model]\nreaction = delayed_logistic\nr = 2\nk = 3\n"));
  EXPECT_EQ(c.model.reaction_params.at("r"), 2.0);
  EXPECT_EQ(resolved(c).at("model.k"), "3");
  // Nicholson keys are unknown under the logistic law.
  EXPECT_TRUE(contains(config_error("[model]\nreaction = delayed_logistic\np = 2\n"), "unknown key 'p'"));
}

TEST(Config, ResolvedListsDefaults) {
  const auto r = resolved(read_config(ConfigText::parse("")));
  EXPECT_EQ(r.at("model.p"), "2.7000000000000002");
  EXPECT_EQ(r.at("wave.c"), "auto");
  EXPECT_EQ(r.at("evolution.frame"), "moving");
  EXPECT_EQ(r.count("kernel.b"), 0u);
}

TEST(ConfigHash, StableAndIgnoresOutputDir) {
  const auto a = read_config(ConfigText::parse("[model]\nD = 0.1\n[output]\ndir = x\n"));
  const auto b = read_config(ConfigText::parse("# same\n[output]\ndir = y\n[model]\nD=0.10\n"));
  const auto c = read_config(ConfigText::parse("[model]\nD = 0.11\n"));
  EXPECT_EQ(config_hash(a), config_hash(b));
  EXPECT_NE(config_hash(a), config_hash(c));
  EXPECT_EQ(config_hash(a).size(), 16u);
}

TEST(ConfigHash, Fnv1aReferenceValues) {
  EXPECT_EQ(hex64(fnv1a("")), "cbf29ce484222325");
  EXPECT_EQ(hex64(fnv1a("a")), "af63dc4c8601ec8c");
}

TEST(Config, ReferenceFileLoads) {
  const auto c = load_config(std::string(NLWAVE_SOURCE_DIR) + "/configs/ref1.cfg");
  const auto p = build_params(c);
  EXPECT_NEAR(p.K, std::log(2.7), 1e-15);
  EXPECT_EQ(c.evolution.perturbation, "bump_pair");
  EXPECT_EQ(c.output.dir, "out/ref1");
  EXPECT_TRUE(std::holds_alternative<Gaussian>(build_kernel_spec(c).family));
}

TEST(Config, MissingFileIsConfigError) {
  try {
    (void)load_config("/nonexistent/x.cfg");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::Config);
  }
}

TEST(Config, EveryCommittedConfigLoads) {
  int n = 0;
  for (const auto& e : std::filesystem::directory_iterator(std::string(NLWAVE_SOURCE_DIR) + "/configs")) {
    if (e.path().extension() != ".cfg") continue;
    EXPECT_NO_THROW((void)load_config(e.path().string())) << e.path();
    ++n;
  }
  EXPECT_GE(n, 4);
}
