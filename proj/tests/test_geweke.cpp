#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "hdpmpm/geweke.hpp"

using namespace hdpmpm;

TEST_CASE("zero replicates yields an empty report") {
  JointTestConfig cfg;
  cfg.replicates = 0;
  const JointTestReport report = validate_sampler(cfg);
  CHECK(report.empty());
  CHECK(report.stats.empty());
  CHECK(report.pass());
}

TEST_CASE("correct sampler agrees between simulators") {
  JointTestConfig cfg;
  cfg.replicates = 20000;
  cfg.seed = 5150;
  const JointTestReport report = validate_sampler(cfg);
  REQUIRE(report.stat_count >= 50);
  INFO("max |z| = ", report.max_abs_z);
  for (const auto& stat : report.stats) {
    CAPTURE(stat.name);
    CAPTURE(stat.z);
    CHECK(std::abs(stat.z) < 5.0);  // hard cap on any single statistic
  }
  CHECK(report.fraction_within_three() >= 0.95);
}

TEST_CASE("swapped step-4 parameters are caught") {
  JointTestConfig cfg;
  cfg.replicates = 20000;
  cfg.seed = 5150;
  cfg.corrupt_step4 = true;
  const JointTestReport report = validate_sampler(cfg);
  CHECK(report.max_abs_z > 5.0);
  CHECK_FALSE(report.pass());
}
