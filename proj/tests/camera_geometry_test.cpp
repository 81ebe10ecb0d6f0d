#include <gtest/gtest.h>

#include <random>

#include "velest/camera_geometry.hpp"
#include "velest/errors.hpp"

using namespace velest;

TEST(CameraGeometry, DefaultConstantAndInterval) {
  const CameraModel model;
  EXPECT_DOUBLE_EQ(model.stereo_constant(), 560000.0);
  EXPECT_DOUBLE_EQ(model.frame_interval(), 0.05);
  EXPECT_FALSE(model.optics().has_value());
}

TEST(CameraGeometry, DisparityToDistanceExamples) {
  const CameraModel model;
  EXPECT_DOUBLE_EQ(disparity_to_distance(model, 56.0), 10000.0);
  EXPECT_DOUBLE_EQ(disparity_to_distance(model, 560.0), 1000.0);
  EXPECT_THROW(disparity_to_distance(model, 0.0), DomainError);
  EXPECT_THROW(disparity_to_distance(model, -3.0), DomainError);
}

TEST(CameraGeometry, DistanceToDisparityExamples) {
  const CameraModel model;
  EXPECT_DOUBLE_EQ(distance_to_disparity(model, 10000.0), 56.0);
  EXPECT_DOUBLE_EQ(distance_to_disparity(model, 560000.0), 1.0);
  EXPECT_THROW(distance_to_disparity(model, 0.0), DomainError);
  EXPECT_THROW(distance_to_disparity(model, -1.0), DomainError);
}

TEST(CameraGeometry, RoundTripListed) {
  const CameraModel model;
  for (double d : {1.0, 56.0, 200.0}) {
    const double back = distance_to_disparity(model, disparity_to_distance(model, d));
    EXPECT_NEAR(back / d, 1.0, 1e-9);
  }
}

TEST(CameraGeometry, RoundTripAndMonotoneRandom) {
  const CameraModel model;
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> log_d(-3.0, 4.0);
  for (int i = 0; i < 10000; ++i) {
    const double a = std::pow(10.0, log_d(rng));
    const double b = std::pow(10.0, log_d(rng));
    EXPECT_NEAR(distance_to_disparity(model, disparity_to_distance(model, a)) / a, 1.0, 1e-9);
    if (a < b) {
      EXPECT_GT(disparity_to_distance(model, a), disparity_to_distance(model, b));
      EXPECT_GT(distance_to_disparity(model, a), distance_to_disparity(model, b));
    }
  }
}

TEST(CameraGeometry, OpticsRecomputeConstant) {
  const auto model = CameraModel::from_optics({350.0, 6.0, 0.00375}, 0.04);
  EXPECT_DOUBLE_EQ(model.stereo_constant(), 350.0 * 6.0 / 0.00375);
  EXPECT_DOUBLE_EQ(model.frame_interval(), 0.04);
  ASSERT_TRUE(model.optics().has_value());
  EXPECT_DOUBLE_EQ(model.optics()->baseline_mm, 350.0);
}

TEST(CameraGeometry, RejectsNonPositiveParameters) {
  EXPECT_THROW(CameraModel::from_stereo_constant(0.0), UsageError);
  EXPECT_THROW(CameraModel::from_stereo_constant(560000.0, 0.0), UsageError);
  EXPECT_THROW(CameraModel::from_optics({0.0, 6.0, 0.004}), UsageError);
  EXPECT_THROW(CameraModel::from_optics({350.0, -6.0, 0.004}), UsageError);
  EXPECT_THROW(CameraModel::from_optics({350.0, 6.0, 0.0}), UsageError);
}
