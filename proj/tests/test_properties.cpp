#include <gtest/gtest.h>

#include <string>

#include "invariants.hpp"

namespace props = qhall::props;

class Invariant : public ::testing::TestWithParam<std::size_t> {};

TEST_P(Invariant, HoldsOnRandomCases) {
  const auto& p = props::all_properties()[GetParam()];
  props::Rng rng(props::property_seed(GetParam()));
  const auto r = p.run(rng, 100);
  EXPECT_GE(r.cases, 100);
  EXPECT_EQ(r.failures, 0) << r.name << ": " << r.first_failure;
}

INSTANTIATE_TEST_SUITE_P(All, Invariant, ::testing::Range<std::size_t>(0, props::all_properties().size()),
                         [](const ::testing::TestParamInfo<std::size_t>& info) {
                           const auto& p = props::all_properties()[info.param];
                           return std::string(p.module) + "_" + p.name;
                         });
