#include <gtest/gtest.h>

#include <sstream>

#include "visco/config.hpp"
#include "visco/error.hpp"

using namespace visco;

namespace {

ConfigMap parse(const std::string& text) {
  std::istringstream in(text);
  return parse_config(in);
}

Errc code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  return Errc::InvalidArgument;
}

}  // namespace

TEST(Config, ParsesDottedKeysAndComments) {
  const ConfigMap kv = parse(
      "# Taylor-Green\n"
      "grid.n = 32\n"
      "params.eta=0.05   # trailing comment\n"
      "\n"
      "init.variant=taylor_green\n"
      "analysis.k_list=1,2,4\n");
  const RunConfig c = run_config_from(kv);
  EXPECT_EQ(c.n, 32);
  EXPECT_EQ(c.params.eta, 0.05);
  EXPECT_EQ(c.init.variant, InitVariant::TaylorGreen);
  EXPECT_EQ(c.analysis.k_list, (std::vector<double>{1.0, 2.0, 4.0}));
  EXPECT_EQ(c.params.mu, 1.0);
}

TEST(Config, UnknownKeyIsHardError) {
  EXPECT_EQ(code_of([] { run_config_from(parse("params.etta=0.1\n")); }), Errc::ConfigError);
  EXPECT_EQ(code_of([] { run_config_from(parse("sweep.eta_list=0.1\n")); }), Errc::ConfigError);
  EXPECT_EQ(code_of([] { run_family_from(parse("sweep.nu_list=0.1\n")); }), Errc::ConfigError);
}

TEST(Config, MalformedInput) {
  EXPECT_EQ(code_of([] { parse("grid.n 32\n"); }), Errc::ConfigError);
  EXPECT_EQ(code_of([] { parse("grid.n=32\ngrid.n=64\n"); }), Errc::ConfigError);
  EXPECT_EQ(code_of([] { run_config_from(parse("grid.n=3x\n")); }), Errc::ConfigError);
  EXPECT_EQ(code_of([] { run_config_from(parse("grid.n=48\n")); }), Errc::ConfigError);
  EXPECT_EQ(code_of([] { run_config_from(parse("time.dt=-1\n")); }), Errc::ConfigError);
  EXPECT_EQ(code_of([] { run_config_from(parse("init.variant=vortex\n")); }), Errc::ConfigError);
  EXPECT_EQ(code_of([] { run_config_from(parse("params.eta=nan\n")); }), Errc::ConfigError);
}

TEST(Config, TextRoundTrip) {
  RunConfig c = run_config_from(parse("params.eta=0.1\ntime.dt=0.0005\ninit.seed=7\noutput.dir=/tmp/x y\nanalysis.t1=0.3\n"));
  const RunConfig back = run_config_from(parse(to_config_text(c)));
  EXPECT_EQ(to_config_text(back), to_config_text(c));
  EXPECT_EQ(back.output_dir, "/tmp/x y");
  EXPECT_EQ(back.dt, 0.0005);
  EXPECT_EQ(back.init.seed, 7u);
}

TEST(Config, StepCount) {
  RunConfig c;
  c.t_end = 1.0;
  c.dt = 1e-3;
  EXPECT_EQ(c.step_count(), 1000);
  c.dt = 0.3;
  EXPECT_EQ(c.step_count(), 4);
}

TEST(Family, SweepExpandsRuns) {
  const RunFamily f = run_family_from(parse("output.dir=fam\nsweep.eta_list=0.1,0.05,0.025\nfamily.workers=2\n"));
  EXPECT_EQ(f.kind, SweepKind::Eta);
  EXPECT_EQ(f.workers, 2);
  const auto runs = f.runs();
  ASSERT_EQ(runs.size(), 3u);
  EXPECT_EQ(runs[2].params.eta, 0.025);
  EXPECT_EQ(runs[1].output_dir, std::filesystem::path("fam") / "run_1");
  EXPECT_EQ(f.reference_index(), 2u);
}

TEST(Family, ReferenceIsFinestGrid) {
  const RunFamily f = run_family_from(parse("sweep.grid_list=64,128\n"));
  EXPECT_EQ(f.reference_index(), 1u);
  EXPECT_EQ(f.runs()[1].n, 128);
}

TEST(Family, DtSweepKeepsSnapshotTimes) {
  const RunFamily f = run_family_from(parse("time.dt=0.002\noutput.snapshot_every=10\nsweep.dt_list=0.002,0.001,0.0005\n"));
  const auto runs = f.runs();
  EXPECT_EQ(runs[2].snapshot_every, 40);
  EXPECT_EQ(f.reference_index(), 2u);
}

TEST(Family, InvalidLists) {
  EXPECT_EQ(code_of([] { run_family_from(parse("sweep.eta_list=\n")); }), Errc::InvalidFamily);
  EXPECT_EQ(code_of([] { run_family_from(parse("sweep.eta_list=0.1,0.2,0.15\n")); }), Errc::InvalidFamily);
  EXPECT_EQ(code_of([] { run_family_from(parse("sweep.grid_list=64,100\n")); }), Errc::InvalidFamily);
  EXPECT_EQ(code_of([] { run_family_from(parse("params.eta=0.1\n")); }), Errc::ConfigError);
  EXPECT_EQ(code_of([] { run_family_from(parse("sweep.eta_list=0.1\nsweep.dt_list=0.1\n")); }), Errc::ConfigError);
}
