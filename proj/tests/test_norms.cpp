#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "fracsim/error.hpp"
#include "fracsim/norms.hpp"

using namespace fracsim;

namespace {

struct RandomPath {
  NormedPath path;
  std::vector<std::vector<double>> vectors;  // e(t_i) in R^3
};

RandomPath random_path(std::mt19937_64& gen, std::size_t n, bool uniform_grid) {
  std::normal_distribution<double> nd;
  std::uniform_real_distribution<double> ud(0.01, 0.2);
  RandomPath r;
  double t = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<double> v{nd(gen), nd(gen), nd(gen)};
    r.path.times.push_back(t);
    r.path.values.push_back(std::sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2]));
    r.vectors.push_back(v);
    t += uniform_grid ? 0.1 : ud(gen);
  }
  return r;
}

DiffNorm euclidean(const RandomPath& r) {
  return [&r](std::size_t i, std::size_t j) {
    double s = 0.0;
    for (int c = 0; c < 3; ++c) s += std::pow(r.vectors[i][c] - r.vectors[j][c], 2);
    return std::sqrt(s);
  };
}

}  // namespace

TEST(Holder, HandExamples) {
  const NormedPath line{{0.0, 0.25, 1.0}, {0.0, 0.25, 1.0}};
  EXPECT_DOUBLE_EQ(holder_seminorm_scalar(line, 0.5), 1.0);
  const NormedPath bend{{0.0, 0.25, 1.0}, {0.0, 0.5, 0.5}};
  EXPECT_DOUBLE_EQ(holder_seminorm_scalar(bend, 0.5), 1.0);
  const NormedPath constant{{0.0, 0.5, 1.0}, {2.0, 2.0, 2.0}};
  EXPECT_EQ(holder_seminorm_scalar(constant, 0.3), 0.0);
  const NormedPath jump{{0.0, 0.01}, {0.0, 1.0}};
  EXPECT_DOUBLE_EQ(holder_seminorm_scalar(jump, 0.5), 10.0);
}

TEST(Holder, MatchesBruteForceExactly) {
  std::mt19937_64 gen(17);
  for (int trial = 0; trial < 100; ++trial) {
    const auto r = random_path(gen, 10, false);
    const auto diff = euclidean(r);
    for (double gamma : {0.05, 0.1, 0.45}) {
      double brute = 0.0;
      for (std::size_t i = 0; i < 10; ++i)
        for (std::size_t j = 0; j < 10; ++j)
          if (i < j) brute = std::max(brute, diff(i, j) / std::pow(r.path.times[j] - r.path.times[i], gamma));
      EXPECT_EQ(holder_seminorm(r.path, diff, gamma), brute);
    }
  }
}

TEST(Holder, SubsetMonotonicity) {
  std::mt19937_64 gen(23);
  std::bernoulli_distribution keep(0.5);
  for (int trial = 0; trial < 100; ++trial) {
    const auto r = random_path(gen, 12, false);
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < 12; ++i)
      if (keep(gen)) idx.push_back(i);
    if (idx.size() < 2) idx = {0, 11};
    NormedPath sub;
    for (auto i : idx) {
      sub.times.push_back(r.path.times[i]);
      sub.values.push_back(r.path.values[i]);
    }
    const auto full_diff = euclidean(r);
    const DiffNorm sub_diff = [&](std::size_t i, std::size_t j) { return full_diff(idx[i], idx[j]); };
    for (double gamma : {0.1, 0.3})
      EXPECT_LE(holder_seminorm(sub, sub_diff, gamma), holder_seminorm(r.path, full_diff, gamma));
  }
}

TEST(Holder, NondecreasingInGammaOnUnitGrids) {
  std::mt19937_64 gen(5);
  for (int trial = 0; trial < 20; ++trial) {
    const auto r = random_path(gen, 11, true);
    const auto diff = euclidean(r);
    double prev = 0.0;
    for (double gamma = 0.05; gamma < 1.0; gamma += 0.1) {
      const double v = holder_seminorm(r.path, diff, gamma);
      EXPECT_GE(v, prev);
      prev = v;
    }
  }
}

TEST(Holder, Validation) {
  const NormedPath p{{0.0, 1.0}, {1.0, 2.0}};
  EXPECT_THROW(holder_seminorm_scalar(p, 0.0), ValidationError);
  EXPECT_THROW(holder_seminorm_scalar(p, 1.0), ValidationError);
  EXPECT_THROW(holder_seminorm_scalar(NormedPath{{0.0, 0.0}, {1.0, 2.0}}, 0.5), ValidationError);
  EXPECT_THROW(holder_seminorm_scalar(NormedPath{{0.0, 1.0}, {1.0}}, 0.5), ValidationError);
  EXPECT_THROW(sup_norm(NormedPath{{0.0}, {-1.0}}), ValidationError);
  EXPECT_THROW(sup_norm(NormedPath{}), ValidationError);
}

TEST(SupNorm, Examples) {
  EXPECT_EQ(sup_norm(NormedPath{{0.0, 0.5, 1.0}, {0.2, 3.0, 1.0}}), 3.0);
  EXPECT_EQ(sup_norm(NormedPath{{0.0}, {0.0}}), 0.0);
}

TEST(LpOmega, ExamplesAndHomogeneity) {
  const std::vector<double> x{3.0, 4.0};
  EXPECT_DOUBLE_EQ(lp_omega_estimate(x, 2.0), std::sqrt(12.5));
  EXPECT_DOUBLE_EQ(lp_omega_estimate(x, 1.0), 3.5);
  const std::vector<double> y{6.0, 8.0};
  EXPECT_DOUBLE_EQ(lp_omega_estimate(y, 3.0), 2.0 * lp_omega_estimate(x, 3.0));
  EXPECT_THROW(lp_omega_estimate({}, 2.0), ValidationError);
  EXPECT_THROW(lp_omega_estimate(x, 0.0), ValidationError);
  const std::vector<double> neg{-1.0};
  EXPECT_THROW(lp_omega_estimate(neg, 2.0), ValidationError);

  std::mt19937_64 gen(8);
  std::normal_distribution<double> nd;
  std::vector<double> half(10000);
  for (double& v : half) v = std::abs(nd(gen));
  EXPECT_NEAR(lp_omega_estimate(half, 2.0), 1.0, 0.03);
  EXPECT_NEAR(lp_omega_estimate(half, 1.0), std::sqrt(2.0 / std::acos(-1.0)), 0.03);
}

TEST(EmpiricalRate, Examples) {
  const std::vector<double> dims{2, 4, 8, 16};
  const std::vector<double> exact{1.0, 0.5, 0.25, 0.125};
  EXPECT_NEAR(empirical_rate(exact, dims), 1.0, 1e-14);
  const std::vector<double> mixed{1.0, 0.25, 0.125, 0.1};
  EXPECT_NEAR(empirical_rate(mixed, dims), std::log2(1.25), 1e-14);
  std::vector<double> scaled(mixed);
  for (double& v : scaled) v *= 7.0;
  EXPECT_NEAR(empirical_rate(scaled, dims), empirical_rate(mixed, dims), 1e-14);
  const std::vector<double> growing{1.0, 2.0};
  EXPECT_NEAR(empirical_rate(growing, std::vector<double>{2, 4}), -1.0, 1e-14);
}

TEST(EmpiricalRate, Validation) {
  const std::vector<double> one{1.0};
  EXPECT_THROW(empirical_rate(one, one), ValidationError);
  EXPECT_THROW(empirical_rate(std::vector<double>{1.0, 0.0}, std::vector<double>{2, 4}), ValidationError);
  EXPECT_THROW(empirical_rate(std::vector<double>{1.0, 0.5}, std::vector<double>{4, 2}), ValidationError);
  EXPECT_THROW(empirical_rate(std::vector<double>{1.0, 0.5}, std::vector<double>{2, 4, 8}), ValidationError);
}

TEST(TheoreticalRate, Examples) {
  EXPECT_NEAR(theoretical_rate(Method::fem, 0.2, 0.0), 0.8333333333, 1e-9);
  EXPECT_NEAR(theoretical_rate(Method::spectral, 0.325, 0.1), 0.8 / 1.325 - 0.5, 1e-14);
  EXPECT_NEAR(theoretical_rate(Method::fem, 0.3, 0.1), 0.6153846154, 1e-9);
  EXPECT_NEAR(theoretical_rate(Method::spectral, 0.35, 0.0), 0.2407407407, 1e-9);
  EXPECT_THROW(theoretical_rate(Method::fem, 1.0, 0.0), ValidationError);
  EXPECT_THROW(theoretical_rate(Method::fem, 0.2, 0.5), ValidationError);
  EXPECT_EQ(method_name(Method::spectral), "spectral");
  EXPECT_EQ(method_name(Method::fem), "fem");
}

TEST(GramHolder, MatchesPairwiseDefinition) {
  std::mt19937_64 gen(31);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t n = 5 + trial;
    const auto r = random_path(gen, n, true);
    std::vector<double> gram(n * n);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) {
        double s = 0.0;
        for (int c = 0; c < 3; ++c) s += r.vectors[i][c] * r.vectors[j][c];
        gram[i * n + j] = s;
      }
    const std::vector<double> gammas{0.0, 0.05, 0.25};
    const auto g = gram_holder_norms(gram.data(), n, r.path.times, gammas);
    EXPECT_NEAR(g[0], sup_norm(r.path), 1e-12);
    for (std::size_t q = 1; q < gammas.size(); ++q) {
      const double ref = holder_seminorm(r.path, euclidean(r), gammas[q]);
      EXPECT_NEAR(g[q], ref, 1e-10 * ref);
    }
  }
  std::vector<double> gram(4, 1.0);
  const std::vector<double> uneven{0.0, 0.3};
  EXPECT_NO_THROW(gram_holder_norms(gram.data(), 2, uneven, std::vector<double>{0.1}));
  std::vector<double> g3(9, 1.0);
  EXPECT_THROW(gram_holder_norms(g3.data(), 3, std::vector<double>{0.0, 0.1, 0.5}, std::vector<double>{0.1}),
               ValidationError);
}
