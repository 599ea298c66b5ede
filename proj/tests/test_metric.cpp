#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "pgbj/metric.hpp"
#include "test_helpers.hpp"

namespace pgbj {
namespace {

const MetricKind kAllMetrics[] = {MetricKind::L1, MetricKind::L2, MetricKind::LINF};

TEST(Distance, Examples) {
  const DataPoint o{0, {0, 0}}, p{1, {3, 4}};
  EXPECT_DOUBLE_EQ(distance(o, p, MetricKind::L2), 5.0);
  EXPECT_DOUBLE_EQ(distance(DataPoint{0, {1, 2}}, DataPoint{1, {4, 6}}, MetricKind::L1), 7.0);
  EXPECT_DOUBLE_EQ(distance(o, p, MetricKind::LINF), 4.0);
  for (MetricKind m : kAllMetrics) EXPECT_EQ(distance(p, p, m), 0.0);
}

TEST(Distance, DefaultsToEuclidean) {
  EXPECT_DOUBLE_EQ(distance(DataPoint{0, {0, 0}}, DataPoint{1, {3, 4}}), 5.0);
}

TEST(Distance, DimensionMismatchNamesBothIds) {
  const DataPoint a{17, {0, 0}}, b{42, {1, 2, 3}};
  try {
    (void)distance(a, b);
    FAIL() << "expected an error";
  } catch (const Error& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("17"), std::string::npos);
    EXPECT_NE(msg.find("42"), std::string::npos);
  }
}

TEST(Distance, MetricAxiomsOnRandomTriples) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-5.0, 5.0);
  std::uniform_int_distribution<int> dims(1, 8);
  for (int trial = 0; trial < 500; ++trial) {
    const int n = dims(rng);
    DataPoint a{0, {}}, b{1, {}}, c{2, {}};
    for (int d = 0; d < n; ++d) {
      a.coords.push_back(u(rng));
      b.coords.push_back(u(rng));
      c.coords.push_back(u(rng));
    }
    for (MetricKind m : kAllMetrics) {
      const double ab = distance(a, b, m), ba = distance(b, a, m);
      const double bc = distance(b, c, m), ac = distance(a, c, m);
      EXPECT_GE(ab, 0.0);
      EXPECT_EQ(ab, ba);
      EXPECT_GT(ab, 0.0);  // continuous draws never coincide
      EXPECT_LE(ac, (ab + bc) * (1 + 1e-12));
    }
  }
}

TEST(Distance, EuclideanMatchesNaiveLoop) {
  const auto ds = testing::random_uniform(50, 6, 3);
  for (std::size_t x = 1; x < ds.size(); ++x) {
    const auto& a = ds.points[x - 1];
    const auto& b = ds.points[x];
    double sum = 0.0;
    for (std::size_t d = 0; d < a.dim(); ++d) sum += std::pow(a.coords[d] - b.coords[d], 2);
    EXPECT_NEAR(distance(a, b), std::sqrt(sum), 1e-15);
  }
}

TEST(Dataset, ValidateRejectsRaggedAndDuplicates) {
  Dataset ragged{"R", {{0, {1, 2}}, {1, {1}}}};
  EXPECT_THROW(ragged.validate(), Error);
  Dataset dup{"R", {{3, {1, 2}}, {3, {2, 2}}}};
  EXPECT_THROW(dup.validate(), Error);
  Dataset empty{"R", {}};
  EXPECT_THROW(empty.validate(), Error);
  Dataset ok{"R", {{0, {1, 2}}, {5, {2, 2}}}};
  EXPECT_NO_THROW(ok.validate());
}

TEST(Metric, ParseRoundTrip) {
  for (MetricKind m : kAllMetrics) EXPECT_EQ(parse_metric(to_string(m)), m);
  EXPECT_THROW(parse_metric("L3"), Error);
}

}  // namespace
}  // namespace pgbj
