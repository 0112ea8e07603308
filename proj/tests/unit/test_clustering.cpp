#include <gtest/gtest.h>

#include "oracles.hpp"
#include "stk/clustering.hpp"
#include "stk/error.hpp"
#include "stk/models.hpp"

#include <cmath>
#include <random>

using namespace stk;

namespace {

Matrix points_1d(std::initializer_list<double> xs)
{
    Matrix m(1, static_cast<Eigen::Index>(xs.size()));
    Eigen::Index j = 0;
    for (double x : xs)
        m(0, j++) = x;
    return m;
}

KMeansConfig cfg_k(int k, int restarts = 5, std::uint64_t seed = 1)
{
    KMeansConfig c;
    c.k = k;
    c.restarts = restarts;
    c.seed = seed;
    return c;
}

Labeling random_labels(int n, int k, std::mt19937& gen)
{
    Labeling l{std::vector<int>(static_cast<std::size_t>(n)), k};
    for (int& z : l.labels)
        z = std::uniform_int_distribution<int>(0, k - 1)(gen);
    return l;
}

}  // namespace

TEST(KMeans, TwoObviousGroups)
{
    const KMeansResult r = kmeans(points_1d({0, 0.1, 10, 10.1}), cfg_k(2));
    EXPECT_EQ(r.labeling.labels[0], r.labeling.labels[1]);
    EXPECT_EQ(r.labeling.labels[2], r.labeling.labels[3]);
    EXPECT_NE(r.labeling.labels[0], r.labeling.labels[2]);
    EXPECT_NEAR(r.inertia, 4 * 0.05 * 0.05, 1e-12);
}

TEST(KMeans, KEqualsNGivesZeroInertia)
{
    const KMeansResult r = kmeans(points_1d({1, 4, 9, 16, 25}), cfg_k(5));
    EXPECT_NEAR(r.inertia, 0.0, 1e-12);
}

TEST(KMeans, DuplicatedPointsShareLabel)
{
    const KMeansResult r = kmeans(points_1d({3, 3, 3, -7, -7}), cfg_k(2));
    EXPECT_EQ(r.labeling.labels[0], r.labeling.labels[2]);
    EXPECT_EQ(r.labeling.labels[3], r.labeling.labels[4]);
    EXPECT_NEAR(r.inertia, 0.0, 1e-12);
}

TEST(KMeans, InvalidInputs)
{
    EXPECT_THROW(kmeans(points_1d({1, 2}), cfg_k(3)), InvalidParameter);
    KMeansConfig bad = cfg_k(1);
    bad.restarts = 0;
    EXPECT_THROW(kmeans(points_1d({1, 2}), bad), InvalidParameter);
    Matrix nan = points_1d({1, 2});
    nan(0, 1) = std::nan("");
    EXPECT_THROW(kmeans(nan, cfg_k(1)), InvalidInput);
}

TEST(KMeans, InertiaTraceNonincreasing)
{
    const Matrix pts = oracle::random_matrix(3, 200, 4);
    const KMeansResult r = kmeans(pts, cfg_k(6, 1));
    for (std::size_t i = 1; i < r.trace.size(); ++i)
        EXPECT_LE(r.trace[i], r.trace[i - 1] * (1 + 1e-12));
}

TEST(KMeans, MoreRestartsNeverWorse)
{
    const Matrix pts = oracle::random_matrix(2, 150, 6);
    const double single = kmeans(pts, cfg_k(5, 1, 9)).inertia;
    const double many = kmeans(pts, cfg_k(5, 10, 9)).inertia;
    EXPECT_LE(many, single * (1 + 1e-12));
}

TEST(KMeans, Deterministic)
{
    const Matrix pts = oracle::random_matrix(4, 90, 2);
    const KMeansResult a = kmeans(pts, cfg_k(4, 6, 3));
    const KMeansResult b = kmeans(pts, cfg_k(4, 6, 3));
    EXPECT_EQ(a.labeling.labels, b.labeling.labels);
    EXPECT_EQ(a.inertia, b.inertia);
}

TEST(SpectralGmm, NoiselessExactRecovery)
{
    GmmSpec spec;
    spec.dim = 20;
    spec.samples = 60;
    spec.clusters = 3;
    for (int c = 0; c < 3; ++c) {
        Vector v = Vector::Zero(20);
        v(c) = 10.0;
        spec.centers.push_back(v);
    }
    spec.noiseless = true;
    const GmmSample s = sample_gmm(spec, 1);
    const Labeling found = spectral_gmm(s.data, 3, cfg_k(3));
    EXPECT_TRUE(evaluate_recovery(Labeling{s.labels, 3}, found).exact);
}

TEST(SpectralGmm, SingleClusterAllSameLabel)
{
    const Matrix x = oracle::random_matrix(5, 12, 3);
    const Labeling found = spectral_gmm(x, 1, cfg_k(1));
    for (int z : found.labels)
        EXPECT_EQ(z, 0);
    EXPECT_THROW(spectral_gmm(x, 6, cfg_k(6)), InvalidParameter);
}

TEST(SpectralSubmatrix, NoiselessBlocksRecovered)
{
    SubmatrixSpec spec = contiguous_blocks(30, 24, 6, 5, {8.0, -5.0});
    spec.noiseless = true;
    const SubmatrixSample s = plant_submatrices(spec, 1);
    const SubmatrixEstimate est = spectral_submatrix(s.data, 2, cfg_k(3));
    EXPECT_TRUE(families_match(est.row_sets, s.row_family));
    EXPECT_TRUE(families_match(est.col_sets, s.col_family));
}

TEST(SpectralSubmatrix, EmptyComplementPadded)
{
    // Blocks cover every column, so the column complement is empty.
    SubmatrixSpec spec = contiguous_blocks(12, 8, 4, 4, {6.0, 3.0});
    spec.noiseless = true;
    const SubmatrixSample s = plant_submatrices(spec, 1);
    ASSERT_TRUE(s.col_family.back().empty() || s.col_family.front().empty());
    const SubmatrixEstimate est = spectral_submatrix(s.data, 2, cfg_k(3));
    EXPECT_EQ(est.col_sets.size(), 3u);
    EXPECT_TRUE(families_match(est.col_sets, s.col_family));
    EXPECT_TRUE(families_match(est.row_sets, s.row_family));
}

TEST(Misclassification, Examples)
{
    const Labeling t{{0, 0, 1, 1}, 2};
    EXPECT_EQ(misclassification(t, Labeling{{1, 1, 0, 0}, 2}), 0.0);
    EXPECT_EQ(misclassification(t, Labeling{{0, 1, 1, 1}, 2}), 0.25);
    EXPECT_EQ(misclassification(t, t), 0.0);
    EXPECT_THROW(misclassification(t, Labeling{{0, 1}, 2}), InvalidInput);
    EXPECT_THROW(misclassification(Labeling{{}, 2}, Labeling{{}, 2}), InvalidInput);
}

TEST(Misclassification, MatchesBruteForceOracle)
{
    std::mt19937 gen(11);
    for (int trial = 0; trial < 200; ++trial) {
        const int k = std::uniform_int_distribution<int>(1, 5)(gen);
        const int n = std::uniform_int_distribution<int>(1, 40)(gen);
        const Labeling a = random_labels(n, k, gen);
        const Labeling b = random_labels(n, k, gen);
        EXPECT_DOUBLE_EQ(misclassification(a, b), oracle::misclassification(a.labels, b.labels, k));
    }
}

TEST(Misclassification, AssignmentSolverAtNineLabels)
{
    std::mt19937 gen(12);
    for (int trial = 0; trial < 3; ++trial) {
        const Labeling a = random_labels(30, 9, gen);
        const Labeling b = random_labels(30, 9, gen);
        EXPECT_DOUBLE_EQ(misclassification(a, b), oracle::misclassification(a.labels, b.labels, 9));
    }
}

TEST(Misclassification, RelabelInvariance)
{
    std::mt19937 gen(13);
    const Labeling a = random_labels(50, 4, gen);
    const Labeling b = random_labels(50, 4, gen);
    Labeling c = b;
    const std::vector<int> perm{2, 0, 3, 1};
    for (int& z : c.labels)
        z = perm[static_cast<std::size_t>(z)];
    EXPECT_DOUBLE_EQ(misclassification(a, b), misclassification(a, c));
    EXPECT_TRUE(evaluate_recovery(b, c).exact);
}

TEST(SpectralGmm, OrthogonalRotationOfDataKeepsLabels)
{
    GmmSpec spec;
    spec.dim = 10;
    spec.samples = 45;
    spec.clusters = 3;
    for (int c = 0; c < 3; ++c) {
        Vector v = Vector::Zero(10);
        v(c) = 40.0;
        spec.centers.push_back(v);
    }
    const GmmSample s = sample_gmm(spec, 4);
    const Matrix q = oracle::orthogonal(10, 5);
    const Labeling a = spectral_gmm(s.data, 3, cfg_k(3));
    const Labeling b = spectral_gmm(q * s.data, 3, cfg_k(3));
    EXPECT_EQ(misclassification(a, b), 0.0);
}

TEST(EmbeddingGap, ZeroNoise)
{
    GmmSpec spec;
    spec.dim = 6;
    spec.samples = 18;
    spec.clusters = 2;
    spec.centers = {5.0 * oracle::random_matrix(6, 1, 1).col(0), 5.0 * oracle::random_matrix(6, 1, 2).col(0)};
    spec.noiseless = true;
    const GmmSample s = sample_gmm(spec, 1);
    EXPECT_LE(embedding_gap(s.data, 2, s.truth_embedding), 1e-9);
    EXPECT_THROW(embedding_gap(s.data, 2, Matrix()), InvalidInput);
}

TEST(ThresholdLinkage, Examples)
{
    const Labeling l = threshold_linkage(points_1d({0, 1, 2, 10, 11, 30}), 1.5);
    EXPECT_EQ(l.k, 3);
    EXPECT_EQ(l.labels, (std::vector<int>{0, 0, 0, 1, 1, 2}));
    EXPECT_EQ(threshold_linkage(points_1d({0, 1, 2}), 0.5).k, 3);
}

TEST(Thresholds, ClosedForms)
{
    const double lg = std::log(200.0);
    EXPECT_NEAR(separation_threshold(100, 100, 2, 1.0, 25), std::max(40.0 * 20 / 5, 3600 * std::sqrt(8 * lg)),
                1e-9);
    EXPECT_NEAR(sigma_threshold(100, 100, 1, 1.0), 800 + 3.8e4 * std::sqrt(2 * std::log(9.0) + 8 * lg), 1e-7);
    EXPECT_FALSE(recovery_dim_ok(10, 10, 1, 1.0));
    EXPECT_TRUE(recovery_dim_ok(5000, 5000, 1, 1.0));
    EXPECT_THROW(separation_threshold(0, 1, 1, 1.0, 1), InvalidParameter);
}

TEST(FamiliesMatch, OrderIgnored)
{
    EXPECT_TRUE(families_match({{2, 1}, {0}, {}}, {{}, {0}, {1, 2}}));
    EXPECT_FALSE(families_match({{0, 1}, {2}}, {{0}, {1, 2}}));
    EXPECT_EQ(groups_of(Labeling{{1, 0, 1}, 3}), (std::vector<std::vector<int>>{{}, {0, 2}, {1}}));
}
