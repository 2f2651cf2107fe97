#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "bpft/planner/ucb.hpp"

using namespace bpft;

TEST(Ucb, ExplorationTerm) {
  EXPECT_NEAR(ucb(0.0, 0.0, 1.0, 3, 1, 1.0), std::sqrt(std::log(3.0)), 1e-15);
  EXPECT_NEAR(ucb(1.0, -2.0, 0.5, 10, 4, 2.0), 1.0 - 1.0 + 2.0 * std::sqrt(std::log(10.0) / 4.0), 1e-15);
}

TEST(Ucb, ZeroExplorationReturnsQ) {
  EXPECT_EQ(ucb(3.25, -1.5, 2.0, 17, 5, 0.0), 3.25 - 3.0);
  EXPECT_EQ(ucb(3.25, -1.5, 0.0, 17, 5, 0.0), 3.25);
}

TEST(Ucb, UnvisitedIsInfinite) {
  EXPECT_EQ(ucb(0.0, 0.0, 1.0, 5, 0, 1.0), std::numeric_limits<double>::infinity());
}

struct FakeActionNode {
  std::size_t visits = 1;
  double q_state = 0.0;
  BoundsPair q_info{};
};

TEST(UcbBounds, Substitution) {
  FakeActionNode n{1, 0.0, {-2.0, -1.0}};
  const auto b = ucb_bounds(n, 9, 0.0, 1.0);
  EXPECT_EQ(b.lower, -2.0);
  EXPECT_EQ(b.upper, -1.0);
  const auto z = ucb_bounds(n, 9, 0.0, 0.0);
  EXPECT_EQ(z.lower, z.upper);
  n.q_info = {0.7, 0.7};
  const auto c = ucb_bounds(n, 9, 1.3, 4.0);
  EXPECT_EQ(c.lower, c.upper);
  EXPECT_EQ(c.lower, ucb(n, 9, 1.3, 4.0));
}

TEST(Dpw, Inequality) {
  EXPECT_TRUE(dpw_allows_new_child(0, 0, 1.0, 0.0));
  EXPECT_TRUE(dpw_allows_new_child(1, 1, 1.0, 0.0));
  EXPECT_FALSE(dpw_allows_new_child(1, 2, 1.0, 0.0));
  EXPECT_TRUE(dpw_allows_new_child(4, 4, 2.0, 0.5));
  EXPECT_FALSE(dpw_allows_new_child(4, 5, 2.0, 0.5));
}

TEST(RefineCondition, Arithmetic) {
  EXPECT_TRUE(refine_condition(1.5, 0.0, 2, 1, 2.0, 1.0));
  EXPECT_FALSE(refine_condition(0.9, 0.0, 2, 1, 2.0, 1.0));
  EXPECT_TRUE(refine_condition(8.0, 0.0, 3, 1, 3.0, 0.5));
  EXPECT_FALSE(refine_condition(2.0, 1.0, 3, 1, 1e6, 0.9));
  for (double g : {0.0, 0.5, 10.0}) EXPECT_FALSE(refine_condition(-1.0, -1.0, 4, 2, g, 0.95));
}
