// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "lidbench/data.hpp"
#include "support/oracles.hpp"
#include "support/tempdir.hpp"

using namespace lidbench;
using testing_support::TempDir;
using testing_support::write_bytes;

namespace {

std::vector<float> v2(float a, float b) { return {a, b}; }

}  // namespace

TEST(Distance, EuclideanTriangle) {
  const auto x = v2(0, 0), y = v2(3, 4);
  EXPECT_DOUBLE_EQ(distance(Metric::euclidean, x, y), 5.0);
}

TEST(Distance, AngularOrthogonal) {
  const auto x = v2(1, 0), y = v2(0, 1);
  EXPECT_DOUBLE_EQ(distance(Metric::angular, x, y), 1.0);
}

TEST(Distance, AngularParallel) {
  const auto x = v2(2, 0), y = v2(1, 0);
  EXPECT_DOUBLE_EQ(distance(Metric::angular, x, y), 0.0);
}

TEST(Distance, Errors) {
  const std::vector<float> a{1, 2}, b{1, 2, 3}, zero{0, 0};
  EXPECT_THROW(distance(Metric::euclidean, a, b), ValidationError);
  EXPECT_THROW(distance(Metric::angular, a, zero), ValidationError);
  EXPECT_NO_THROW(distance(Metric::euclidean, a, zero));
}

TEST(Distance, MetricPropertiesOnRandomVectors) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<float> u(-10, 10);
  std::uniform_int_distribution<int> dim(1, 40);
  std::uniform_real_distribution<float> scale(0.01f, 100.0f);
  for (int t = 0; t < 2000; ++t) {
    const int d = dim(rng);
    std::vector<float> x(d), y(d), cx(d);
    for (auto& v : x) v = u(rng);
    for (auto& v : y) v = u(rng);
    const float c = scale(rng);
    for (int i = 0; i < d; ++i) cx[i] = c * x[i];

    const double e = distance(Metric::euclidean, x, y);
    EXPECT_GE(e, 0.0);
    EXPECT_EQ(distance(Metric::euclidean, x, x), 0.0);
    EXPECT_EQ(e, distance(Metric::euclidean, y, x));
    EXPECT_NEAR(e, oracle::naive_distance(Metric::euclidean, x, y), 1e-9 * (1 + e));

    const double a = distance(Metric::angular, x, y);
    EXPECT_GE(a, 0.0);
    EXPECT_LE(a, 2.0);
    EXPECT_NEAR(a, oracle::naive_distance(Metric::angular, x, y), 1e-9);
    EXPECT_NEAR(distance(Metric::angular, x, cx), 0.0, 1e-6);
  }
}

TEST(Metric, ParseRoundTrip) {
  EXPECT_EQ(parse_metric("euclidean"), Metric::euclidean);
  EXPECT_EQ(parse_metric(to_string(Metric::angular)), Metric::angular);
  EXPECT_THROW(parse_metric("cosine-ish"), ValidationError);
}

TEST(Dataset, Invariants) {
  EXPECT_THROW(Dataset("x", Metric::euclidean, 0, {1.0f}), ValidationError);
  EXPECT_THROW(Dataset("x", Metric::euclidean, 2, {}), ValidationError);
  EXPECT_THROW(Dataset("x", Metric::euclidean, 2, {1, 2, 3}), ValidationError);
  EXPECT_THROW(Dataset("x", Metric::euclidean, 1, {NAN}), ValidationError);
  EXPECT_THROW(Dataset("x", Metric::euclidean, 1, {INFINITY}), ValidationError);
  EXPECT_THROW(Dataset("x", Metric::angular, 2, {1, 0, 0, 0}), ValidationError);
  const Dataset ok("x", Metric::euclidean, 2, {1, 0, 0, 0});
  EXPECT_EQ(ok.size(), 2u);
  EXPECT_EQ(ok.dim(), 2u);
}

TEST(Dataset, SelectAndFingerprint) {
  const Dataset d("x", Metric::euclidean, 2, {0, 1, 2, 3, 4, 5});
  const std::vector<PointId> ids{2, 0};
  const Dataset s = d.select(ids, "sub");
  EXPECT_EQ(s.size(), 2u);
  EXPECT_EQ(s.row(0)[0], 4.0f);
  EXPECT_EQ(s.row(1)[1], 1.0f);
  EXPECT_NE(s.fingerprint(), d.fingerprint());
  const Dataset again("other-name", Metric::euclidean, 2, {0, 1, 2, 3, 4, 5});
  EXPECT_EQ(again.fingerprint(), d.fingerprint());
  const Dataset angular("x", Metric::angular, 2, {0, 1, 2, 3, 4, 5});
  EXPECT_NE(angular.fingerprint(), d.fingerprint());
  EXPECT_EQ(parse_fingerprint(fingerprint_hex(d.fingerprint())), d.fingerprint());
  EXPECT_EQ(fingerprint_hex(d.fingerprint()).size(), 16u);
  const std::vector<PointId> bad{7};
  EXPECT_THROW(d.select(bad, "bad"), ValidationError);
}

TEST(Fvecs, SingleRecord) {
  TempDir dir;
  write_bytes(dir / "a.fvecs", std::string("\x02\x00\x00\x00\x00\x00\x80\x3F\x00\x00\x00\x40", 12));
  const Dataset d = load_fvecs(dir / "a.fvecs", Metric::euclidean);
  ASSERT_EQ(d.size(), 1u);
  ASSERT_EQ(d.dim(), 2u);
  EXPECT_EQ(d.row(0)[0], 1.0f);
  EXPECT_EQ(d.row(0)[1], 2.0f);
  EXPECT_EQ(d.name(), "a");
}

TEST(Fvecs, Errors) {
  TempDir dir;
  write_bytes(dir / "empty.fvecs", "");
  EXPECT_THROW(load_fvecs(dir / "empty.fvecs", Metric::euclidean), ValidationError);

  std::string two;
  two += std::string("\x02\x00\x00\x00", 4) + std::string(8, '\0');
  two += std::string("\x03\x00\x00\x00", 4) + std::string(12, '\0');
  write_bytes(dir / "mixed.fvecs", two);
  EXPECT_THROW(load_fvecs(dir / "mixed.fvecs", Metric::euclidean), ValidationError);

  write_bytes(dir / "trunc.fvecs", std::string("\x02\x00\x00\x00\x00\x00\x80\x3F", 8));
  EXPECT_THROW(load_fvecs(dir / "trunc.fvecs", Metric::euclidean), ValidationError);

  write_bytes(dir / "zero.fvecs", std::string("\x00\x00\x00\x00", 4));
  EXPECT_THROW(load_fvecs(dir / "zero.fvecs", Metric::euclidean), ValidationError);

  write_bytes(dir / "neg.fvecs", std::string("\xff\xff\xff\xff", 4));
  EXPECT_THROW(load_fvecs(dir / "neg.fvecs", Metric::euclidean), ValidationError);

  EXPECT_THROW(load_fvecs(dir / "missing.fvecs", Metric::euclidean), IoError);
}

TEST(Fvecs, WriteReadRoundTrip) {
  TempDir dir;
  std::mt19937_64 rng(5);
  const Dataset d = oracle::random_dataset(rng, 37, 5, Metric::euclidean);
  write_fvecs(dir / "r.fvecs", d);
  const Dataset back = load_fvecs(dir / "r.fvecs", Metric::euclidean);
  EXPECT_EQ(back.fingerprint(), d.fingerprint());
}

TEST(Csv, Basic) {
  TempDir dir;
  write_bytes(dir / "a.csv", "1.0,2.0\n3.0,4.0\n");
  const Dataset d = load_csv(dir / "a.csv", Metric::euclidean);
  EXPECT_EQ(d.size(), 2u);
  EXPECT_EQ(d.dim(), 2u);
  EXPECT_EQ(d.row(1)[0], 3.0f);
}

TEST(Csv, Errors) {
  TempDir dir;
  write_bytes(dir / "ragged.csv", "1.0,2.0\n3.0\n");
  EXPECT_THROW(load_csv(dir / "ragged.csv", Metric::euclidean), ValidationError);
  write_bytes(dir / "nan.csv", "nan,1.0\n");
  EXPECT_THROW(load_csv(dir / "nan.csv", Metric::euclidean), ValidationError);
  write_bytes(dir / "junk.csv", "1.0,abc\n");
  EXPECT_THROW(load_csv(dir / "junk.csv", Metric::euclidean), ValidationError);
  write_bytes(dir / "empty.csv", "");
  EXPECT_THROW(load_csv(dir / "empty.csv", Metric::euclidean), ValidationError);
}

TEST(Native, BitExactRoundTrip) {
  TempDir dir;
  std::mt19937_64 rng(9);
  for (auto metric : {Metric::euclidean, Metric::angular}) {
    const Dataset d = oracle::random_dataset(rng, 50, 7, metric);
    write_native(dir / "d.lidb", d);
    const auto bytes = testing_support::read_bytes(dir / "d.lidb");
    ASSERT_EQ(bytes.size(), 5 + 4 + 4 + 1 + 50 * 7 * 4u);
    EXPECT_EQ(bytes.substr(0, 5), "LIDB1");
    EXPECT_EQ(static_cast<unsigned char>(bytes[13]), metric == Metric::euclidean ? 0 : 1);
    const Dataset back = load_native(dir / "d.lidb");
    EXPECT_EQ(back.metric(), metric);
    ASSERT_EQ(back.size(), d.size());
    EXPECT_TRUE(std::equal(back.values().begin(), back.values().end(), d.values().begin()));
    EXPECT_EQ(back.fingerprint(), d.fingerprint());
  }
}

TEST(Native, RejectsCorruption) {
  TempDir dir;
  write_bytes(dir / "bad.lidb", "LIDB2xxxxxxxxxxx");
  EXPECT_THROW(load_native(dir / "bad.lidb"), ValidationError);
  const Dataset d("x", Metric::euclidean, 2, {1, 2, 3, 4});
  write_native(dir / "ok.lidb", d);
  auto bytes = testing_support::read_bytes(dir / "ok.lidb");
  write_bytes(dir / "short.lidb", bytes.substr(0, bytes.size() - 1));
  EXPECT_THROW(load_native(dir / "short.lidb"), ValidationError);
  bytes[13] = 7;
  write_bytes(dir / "tag.lidb", bytes);
  EXPECT_THROW(load_native(dir / "tag.lidb"), ValidationError);
}

TEST(Synthetic, Deterministic) {
  for (auto kind : {SyntheticKind::uniform_ball, SyntheticKind::uniform_cube,
                    SyntheticKind::gaussian_mixture}) {
    const SyntheticSpec spec{kind, 500, 6, 4, 0.2, 42};
    const Dataset a = generate_synthetic(spec), b = generate_synthetic(spec);
    EXPECT_TRUE(std::equal(a.values().begin(), a.values().end(), b.values().begin()));
    SyntheticSpec other = spec;
    other.seed = 43;
    EXPECT_NE(generate_synthetic(other).fingerprint(), a.fingerprint());
  }
}

TEST(Synthetic, BallNormsAtMostOne) {
  const Dataset d = generate_synthetic({SyntheticKind::uniform_ball, 1000, 8, 1, 0, 3});
  for (std::size_t i = 0; i < d.size(); ++i) {
    long double s = 0;
    for (float v : d.row(i)) s += static_cast<long double>(v) * v;
    EXPECT_LE(s, 1.0L);
  }
}

TEST(Synthetic, CubeInUnitCube) {
  const Dataset d = generate_synthetic({SyntheticKind::uniform_cube, 300, 5, 1, 0, 3});
  for (float v : d.values()) {
    EXPECT_GE(v, 0.0f);
    EXPECT_LE(v, 1.0f);
  }
}

TEST(Synthetic, SingleClusterNoNoiseGivesIdenticalRows) {
  const Dataset d = generate_synthetic({SyntheticKind::gaussian_mixture, 100, 4, 1, 0.0, 1});
  for (std::size_t i = 1; i < d.size(); ++i)
    EXPECT_TRUE(std::equal(d.row(i).begin(), d.row(i).end(), d.row(0).begin()));
}

TEST(Synthetic, Validation) {
  EXPECT_THROW(generate_synthetic({SyntheticKind::uniform_ball, 0, 2, 1, 0, 0}), ValidationError);
  EXPECT_THROW(generate_synthetic({SyntheticKind::uniform_ball, 2, 0, 1, 0, 0}), ValidationError);
  EXPECT_THROW(generate_synthetic({SyntheticKind::gaussian_mixture, 2, 2, 0, 0, 0}), ValidationError);
  EXPECT_THROW(generate_synthetic({SyntheticKind::gaussian_mixture, 2, 2, 1, -1, 0}), ValidationError);
  EXPECT_EQ(parse_synthetic_kind("gaussian-mixture"), SyntheticKind::gaussian_mixture);
  EXPECT_THROW(parse_synthetic_kind("ball"), ValidationError);
}
