#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

#include "support.hpp"

using namespace thav;

namespace {

std::size_t find_root(std::vector<std::size_t>& parent, std::size_t x) {
  while (parent[x] != x) x = parent[x] = parent[parent[x]];
  return x;
}

bool connected(const EdgeSet& edges) {
  std::vector<std::size_t> parent(edges.dim());
  std::iota(parent.begin(), parent.end(), 0);
  for (const auto& [i, j] : edges) parent[find_root(parent, i)] = find_root(parent, j);
  const std::size_t root = find_root(parent, 0);
  for (std::size_t v = 0; v < edges.dim(); ++v) {
    if (find_root(parent, v) != root) return false;
  }
  return true;
}

void expect_valid_truth(const GroundTruth& t) {
  const std::size_t d = t.theta.dim();
  EXPECT_GT(fixtures::jacobi_eigenvalues(t.theta).front(), 0.0);
  EXPECT_GT(min_eigenvalue(t.theta), 0.0);
  for (std::size_t i = 0; i < d; ++i) EXPECT_EQ(t.theta(i, i), 1.0);
  EXPECT_EQ(edge_set_of(t.theta), t.edges);
}

Dataset column(std::initializer_list<double> values) {
  Dataset out{DenseMatrix(values.size(), 1), Preprocessing::Raw};
  std::size_t i = 0;
  for (double v : values) out.values(i++, 0) = v;
  return out;
}

}  // namespace

TEST(Rng, DeterministicAndStreamSeparated) {
  Rng a(RngSeed{5, 0}, RngPurpose::Samples);
  Rng b(RngSeed{5, 0}, RngPurpose::Samples);
  Rng c(RngSeed{5, 1}, RngPurpose::Samples);
  Rng d(RngSeed{5, 0}, RngPurpose::EdgeWeights);
  const auto x = a.next_u64();
  EXPECT_EQ(x, b.next_u64());
  EXPECT_NE(x, c.next_u64());
  EXPECT_NE(x, d.next_u64());
  EXPECT_NE(derive_seed({1, 0}), derive_seed({0, 1}));
}

TEST(Rng, UniformAndNormalMoments) {
  Rng rng(42);
  const int n = 200000;
  double su = 0, sn = 0, sn2 = 0;
  for (int i = 0; i < n; ++i) {
    const double u = rng.uniform();
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
    su += u;
    const double z = rng.normal();
    sn += z;
    sn2 += z * z;
  }
  EXPECT_NEAR(su / n, 0.5, 4 * std::sqrt(1.0 / 12 / n));
  EXPECT_NEAR(sn / n, 0.0, 4 / std::sqrt(n));
  EXPECT_NEAR(sn2 / n, 1.0, 4 * std::sqrt(2.0 / n));
}

TEST(Gilbert, ExtremeProbabilities) {
  EXPECT_TRUE(gilbert_edges(20, 0.0, {1, 0}).empty());
  EXPECT_EQ(gilbert_edges(20, 1.0, {1, 0}).size(), 190u);
  EXPECT_THROW(gilbert_edges(20, 1.5, {1, 0}), Error);
  EXPECT_THROW(gilbert_edges(1, 0.5, {1, 0}), Error);
}

TEST(Gilbert, MeanEdgeCountMatchesBinomial) {
  const std::size_t d = 200;
  const double p = 3.0 / d;
  const double pairs = d * (d - 1) / 2.0;
  const int seeds = 1000;
  double total = 0.0;
  for (int s = 0; s < seeds; ++s) total += static_cast<double>(gilbert_edges(d, p, {77, static_cast<std::uint64_t>(s)}).size());
  const double sigma_of_mean = std::sqrt(pairs * p * (1 - p) / seeds);
  EXPECT_NEAR(total / seeds, 298.5, 3 * sigma_of_mean);
}

TEST(BarabasiAlbert, SmallCases) {
  const EdgeSet two = barabasi_albert_edges(2, {1, 0});
  EXPECT_EQ(two.pairs(), (std::vector<EdgeSet::Edge>{{0, 1}}));

  int attach_to_first = 0;
  const int trials = 4000;
  for (int s = 0; s < trials; ++s) {
    const EdgeSet e = barabasi_albert_edges(3, {9, static_cast<std::uint64_t>(s)});
    ASSERT_EQ(e.size(), 2u);
    ASSERT_TRUE(e.contains(0, 1));
    ASSERT_TRUE(e.contains(0, 2) != e.contains(1, 2));
    attach_to_first += e.contains(0, 2) ? 1 : 0;
  }
  EXPECT_NEAR(attach_to_first / static_cast<double>(trials), 0.5, 4 * std::sqrt(0.25 / trials));
}

TEST(BarabasiAlbert, AlwaysAConnectedTree) {
  for (std::uint64_t s = 0; s < 200; ++s) {
    const std::size_t d = 2 + s % 150;
    const EdgeSet e = barabasi_albert_edges(d, {3, s});
    EXPECT_EQ(e.size(), d - 1);
    EXPECT_TRUE(connected(e)) << "seed " << s;
  }
}

TEST(BarabasiAlbert, FormsHubsMoreThanGilbert) {
  const std::size_t d = 200;
  int wins = 0;
  const int draws = 500;
  for (int s = 0; s < draws; ++s) {
    const RngSeed seed{2024, static_cast<std::uint64_t>(s)};
    if (barabasi_albert_edges(d, seed).max_degree() > gilbert_edges(d, 3.0 / d, seed).max_degree()) ++wins;
  }
  EXPECT_GE(wins, static_cast<int>(0.95 * draws));
}

TEST(BuildPrecision, EmptyGraphIsIdentity) {
  const GroundTruth t = build_precision(EdgeSet(6), {1, 0});
  EXPECT_EQ(t.theta, SymMatrix::identity(6));
  EXPECT_DOUBLE_EQ(t.mu, 0.1);
}

TEST(BuildPrecision, TwoNodeSafeguard) {
  const double w[] = {0.6};
  const GroundTruth t = assemble_precision(EdgeSet(2, {{0, 1}}), w);
  EXPECT_NEAR(t.mu, 0.7, 1e-15);
  EXPECT_NEAR(t.theta(0, 1), 6.0 / 7.0, 1e-15);
  EXPECT_EQ(t.theta(0, 0), 1.0);
  EXPECT_NEAR(min_eigenvalue(t.theta), 1.0 / 7.0, 1e-14);
}

TEST(BuildPrecision, GeneratedInstancesAreValid) {
  for (std::uint64_t s = 0; s < 100; ++s) {
    const RngSeed seed{11, s};
    const TopologySpec topology = s % 2 == 0 ? TopologySpec::random(3.0 / 50) : TopologySpec::scale_free();
    const GroundTruth t = generate_truth(topology, 50, seed);
    expect_valid_truth(t);
    EXPECT_GE(t.mu, 0.1);
    for (const auto& [i, j] : t.edges) {
      const double w = std::abs(t.theta(i, j)) * t.mu;
      EXPECT_GE(w, 0.5 - 1e-12);
      EXPECT_LE(w, 0.9 + 1e-12);
    }
  }
}

TEST(BuildPrecision, MuFollowsFloorOfSmallestEigenvalue) {
  for (std::uint64_t s = 0; s < 30; ++s) {
    const EdgeSet e = gilbert_edges(40, 0.08, {6, s});
    Rng rng(s);
    std::vector<double> w;
    for (std::size_t k = 0; k < e.size(); ++k) w.push_back((rng.coin() ? -1 : 1) * rng.uniform(0.5, 0.9));
    SymMatrix off(40);
    std::size_t k = 0;
    for (const auto& [i, j] : e) off.set(i, j, w[k++]);
    const double lmin = fixtures::jacobi_eigenvalues(off).front();
    double mu = -std::floor(lmin * 10) / 10;
    if (lmin + mu < 1e-9) mu += 0.1;
    mu = std::max(mu, 0.1);
    const GroundTruth t = assemble_precision(e, w);
    EXPECT_NEAR(t.mu, mu, 1e-12);
    EXPECT_NEAR(min_eigenvalue(t.theta), (lmin + mu) / mu, 1e-10);
  }
}

TEST(BuildPrecision, Deterministic) {
  const RngSeed seed{8, 3};
  const GroundTruth a = generate_truth(TopologySpec::random(0.05), 80, seed);
  const GroundTruth b = generate_truth(TopologySpec::random(0.05), 80, seed);
  EXPECT_EQ(a.edges, b.edges);
  EXPECT_EQ(a.theta, b.theta);
  EXPECT_EQ(sample_gaussian(a, 20, seed).values, sample_gaussian(b, 20, seed).values);
  const GroundTruth c = generate_truth(TopologySpec::random(0.05), 80, {8, 4});
  EXPECT_NE(a.theta, c.theta);
}

TEST(SampleGaussian, IdentityPrecisionGivesIdentityCovariance) {
  const GroundTruth t = build_precision(EdgeSet(5), {1, 0});
  const Dataset data = sample_gaussian(t, 100000, {2, 0});
  const CovarianceMatrix s = empirical_covariance(data.values, false);
  EXPECT_LT(fixtures::max_abs_diff(s.base, SymMatrix::identity(5)), 0.05);
}

TEST(SampleGaussian, CovarianceMatchesInversePrecision) {
  const double w[] = {0.6};
  const GroundTruth t = assemble_precision(EdgeSet(2, {{0, 1}}), w);
  const Dataset data = sample_gaussian(t, 100000, {2, 1});
  const CovarianceMatrix s = empirical_covariance(data.values, false);
  // Sigma = (1 / (1 - 36/49)) [[1, -6/7], [-6/7, 1]] = [[49/13, -42/13], [-42/13, 49/13]].
  EXPECT_NEAR(s(0, 0), 49.0 / 13, 0.15);
  EXPECT_NEAR(s(0, 1), -42.0 / 13, 0.15);
}

TEST(SampleGaussian, SingleRowShape) {
  const GroundTruth t = generate_truth(TopologySpec::random(0.2), 7, {1, 0});
  const Dataset data = sample_gaussian(t, 1, {1, 0});
  EXPECT_EQ(data.n(), 1u);
  EXPECT_EQ(data.d(), 7u);
}

TEST(Standardize, HandExample) {
  const Dataset out = standardize(column({0.0, 2.0}));
  EXPECT_NEAR(out.values(0, 0), -0.70711, 1e-5);
  EXPECT_NEAR(out.values(1, 0), 0.70711, 1e-5);
  EXPECT_EQ(out.preprocessing, Preprocessing::Standardized);
}

TEST(Standardize, ConstantColumnIsDegenerate) {
  try {
    (void)standardize(column({3.0, 3.0, 3.0}));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::DegenerateColumn);
  }
}

TEST(Standardize, MomentsAndIdempotence) {
  const GroundTruth t = generate_truth(TopologySpec::random(0.1), 20, {4, 0});
  Dataset raw = sample_gaussian(t, 300, {4, 0});
  for (std::size_t i = 0; i < raw.n(); ++i) raw.values(i, 3) = 1000 + 50 * raw.values(i, 3);
  const Dataset once = standardize(raw);
  for (std::size_t j = 0; j < once.d(); ++j) {
    double mean = 0, ss = 0;
    for (std::size_t i = 0; i < once.n(); ++i) mean += once.values(i, j);
    mean /= static_cast<double>(once.n());
    for (std::size_t i = 0; i < once.n(); ++i) ss += (once.values(i, j) - mean) * (once.values(i, j) - mean);
    EXPECT_NEAR(mean, 0.0, 1e-10);
    EXPECT_NEAR(ss / static_cast<double>(once.n() - 1), 1.0, 1e-9);
  }
  const Dataset twice = standardize(once);
  for (std::size_t i = 0; i < once.n(); ++i) {
    for (std::size_t j = 0; j < once.d(); ++j) EXPECT_NEAR(twice.values(i, j), once.values(i, j), 1e-12);
  }
}

TEST(Nonparanormal, AverageRanks) {
  const double a[] = {3, 1, 2};
  EXPECT_EQ(average_ranks(a), (std::vector<double>{3, 1, 2}));
  const double b[] = {1, 1, 2};
  EXPECT_EQ(average_ranks(b), (std::vector<double>{1.5, 1.5, 3}));
  const double c[] = {5, 5, 5, 1};
  EXPECT_EQ(average_ranks(c), (std::vector<double>{3, 3, 3, 1}));
}

TEST(Nonparanormal, NormalScoresBeforeStandardization) {
  // Table values: Phi^{-1}(0.75) = 0.6744897502, Phi^{-1}(0.8) = 0.8416212336, Phi^{-1}(0.6) = 0.2533471031.
  const Dataset three = nonparanormal(column({3, 1, 2}));
  const double q75 = 0.6744897502;
  const double sd3 = std::sqrt(2 * q75 * q75 / 2);
  EXPECT_NEAR(three.values(0, 0), q75 / sd3, 1e-9);
  EXPECT_NEAR(three.values(1, 0), -q75 / sd3, 1e-9);
  EXPECT_NEAR(three.values(2, 0), 0.0, 1e-12);

  const Dataset four = nonparanormal(column({4, 1, 3, 2}));
  const double q80 = 0.8416212336;
  const double q60 = 0.2533471031;
  const double sd4 = std::sqrt(2 * (q80 * q80 + q60 * q60) / 3);
  EXPECT_NEAR(four.values(0, 0), q80 / sd4, 1e-9);
  EXPECT_NEAR(four.values(1, 0), -q80 / sd4, 1e-9);
  EXPECT_NEAR(four.values(2, 0), q60 / sd4, 1e-9);
  EXPECT_NEAR(four.values(3, 0), -q60 / sd4, 1e-9);
  EXPECT_EQ(four.preprocessing, Preprocessing::Nonparanormal);
}

TEST(Nonparanormal, InvariantUnderMonotoneTransforms) {
  const GroundTruth t = generate_truth(TopologySpec::random(0.2), 6, {5, 0});
  const Dataset raw = sample_gaussian(t, 200, {5, 0});
  Dataset warped = raw;
  for (std::size_t i = 0; i < raw.n(); ++i) {
    warped.values(i, 0) = std::exp(raw.values(i, 0));
    warped.values(i, 1) = std::pow(raw.values(i, 1), 3);
    warped.values(i, 2) = 5 + 2 * raw.values(i, 2);
    warped.values(i, 3) = std::atan(raw.values(i, 3));
  }
  EXPECT_EQ(nonparanormal(raw).values, nonparanormal(warped).values);
}

TEST(Nonparanormal, ConstantColumnBecomesZeros) {
  const Dataset out = nonparanormal(column({2, 2, 2, 2}));
  for (std::size_t i = 0; i < 4; ++i) EXPECT_EQ(out.values(i, 0), 0.0);
}
