#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

#include "mbl/config.hpp"

using namespace mbl;

namespace {

std::string error_field(const std::function<void()>& f) {
  try {
    f();
  } catch (const ConfigError& e) {
    return e.field();
  }
  return "";
}

}  // namespace

TEST(Config, DefaultsAreValidAndTable4) {
  const RunConfig c;
  EXPECT_NO_THROW(c.validate());
  EXPECT_EQ(c.known.ucb.lambda, 100.0);
  EXPECT_EQ(c.known.ucb.alpha, 2.0);
  EXPECT_EQ(c.known.ucb.bonus_cap, 2.5);
  EXPECT_EQ(c.known.c_tau, 1.0);
  EXPECT_EQ(c.baseline.lambda, 1e-2);
  EXPECT_EQ(c.bank_size, 256);
  EXPECT_FALSE(c.bank_include_theta_star);
  EXPECT_EQ(c.checkpoints, 50);
}

TEST(Config, ParsesCommentsAndWhitespace) {
  const RunConfig c = parse_config("# comment\n\n env.n_states = 12  # trailing\nrun.algos=known, unknown\n");
  EXPECT_EQ(c.env.n_states, 12);
  EXPECT_EQ(c.algos, (std::vector<std::string>{"known", "unknown"}));
}

TEST(Config, RoundTripIsLossless) {
  RunConfig c;
  c.env.beta = 0.1 + 0.2;  // not exactly representable in short decimal
  c.env.theta_star = {0.6, -0.8};
  c.env.dim = 2;
  c.known.ucb.bonus_cap = std::numeric_limits<double>::infinity();
  c.known.ucb.mode = RadiusMode::kSelfNormalized;
  c.base_seed = 18446744073709551615ULL;
  const std::string text = serialize_config(c);
  const RunConfig back = parse_config(text);
  EXPECT_EQ(serialize_config(back), text);
  EXPECT_EQ(back.env.beta, c.env.beta);
  EXPECT_EQ(back.env.theta_star, c.env.theta_star);
  EXPECT_EQ(back.base_seed, c.base_seed);
  EXPECT_TRUE(std::isinf(back.known.ucb.bonus_cap));
}

TEST(Config, EveryKeyRoundTrips) {
  const RunConfig c;
  for (const auto& k : config_keys()) {
    RunConfig d;
    set_config_value(d, k, get_config_value(c, k));
    EXPECT_EQ(get_config_value(d, k), get_config_value(c, k)) << k;
  }
}

TEST(Config, ErrorsNameTheField) {
  EXPECT_EQ(error_field([] { parse_config("env.nope=3\n"); }), "env.nope");
  EXPECT_EQ(error_field([] { parse_config("env.n_states=forty\n"); }), "env.n_states");
  EXPECT_EQ(error_field([] { parse_config("env.beta=0.5\nenv.beta=0.6\n"); }), "env.beta");
  EXPECT_EQ(error_field([] {
              RunConfig c;
              apply_overrides(c, {"env.beta=1.5"});
              c.validate();
            }),
            "env.beta");
  EXPECT_EQ(error_field([] {
              RunConfig c;
              c.algos = {"known", "thompson"};
              c.validate();
            }),
            "run.algos");
  EXPECT_EQ(error_field([] {
              RunConfig c;
              c.known.theory_mode = true;
              c.validate();
            }),
            "known.c_tau");
  EXPECT_EQ(error_field([] {
              RunConfig c;
              c.horizon = 10;
              c.validate();
            }),
            "run.horizon");
  EXPECT_EQ(error_field([] { parse_config("just text\n"); }), "line 1");
  EXPECT_EQ(error_field([] { load_config("/nonexistent/x.cfg"); }), "config");
}

TEST(Config, OverridesEnterTheDigest) {
  RunConfig a;
  RunConfig b;
  EXPECT_EQ(config_digest(a), config_digest(b));
  apply_overrides(b, {"env.sigma=0.25"});
  EXPECT_EQ(b.env.sigma, 0.25);
  EXPECT_NE(config_digest(a), config_digest(b));
  RunConfig c;
  c.out_dir = "elsewhere";
  EXPECT_EQ(config_digest(a), config_digest(c));
}

TEST(Config, ShippedPresetsParseAndValidate) {
  for (const char* name : {"table3.cfg", "desk.cfg", "small.cfg"}) {
    const auto path = std::filesystem::path(MBL_SOURCE_DIR) / "configs" / name;
    RunConfig c;
    ASSERT_NO_THROW(c = load_config(path.string())) << name;
    EXPECT_NO_THROW(c.validate()) << name;
  }
  const RunConfig table3 = load_config(std::string(MBL_SOURCE_DIR) + "/configs/table3.cfg");
  EXPECT_EQ(table3.horizon, 200000);
  EXPECT_EQ(table3.env.n_states, 40);
  EXPECT_EQ(table3.env.n_actions, 20);
  EXPECT_EQ(table3.env.dim, 20);
  EXPECT_EQ(table3.bank_size, 256);
  EXPECT_EQ(table3.env.sigma, 0.5);
  EXPECT_EQ(table3.env.beta, 0.75);
  EXPECT_EQ(table3.env.p_loop, 0.2);
  EXPECT_EQ(table3.env.n_neighbors, 2);
  EXPECT_EQ(table3.n_runs, 20);
  EXPECT_EQ(load_config(std::string(MBL_SOURCE_DIR) + "/configs/desk.cfg").horizon, 50000);
}
