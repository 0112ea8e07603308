#include <gtest/gtest.h>

#include "oracles.hpp"
#include "stk/error.hpp"
#include "stk/subspace.hpp"

#include <cmath>
#include <numbers>
#include <random>

using namespace stk;

namespace {

Matrix unit(int dim, std::initializer_list<double> entries)
{
    Matrix m(dim, 1);
    int i = 0;
    for (double e : entries)
        m(i++, 0) = e;
    for (; i < dim; ++i)
        m(i, 0) = 0;
    m.col(0).normalize();
    return m;
}

OrthonormalBasis basis(int ambient, int dim, unsigned seed)
{
    return OrthonormalBasis(oracle::orthonormal(ambient, dim, seed));
}

}  // namespace

TEST(PrincipalAngles, Examples)
{
    const OrthonormalBasis e1(unit(3, {1}));
    const OrthonormalBasis e2(unit(3, {0, 1}));
    const OrthonormalBasis d(unit(3, {1, 1}));
    EXPECT_NEAR(principal_angles(e1, e1).angles[0], 0.0, 1e-15);
    EXPECT_NEAR(principal_angles(e1, e2).angles[0], std::numbers::pi / 2, 1e-15);
    EXPECT_NEAR(principal_angles(e1, d).angles[0], std::numbers::pi / 4, 1e-15);
}

TEST(PrincipalAngles, SymmetricAscendingAndInRange)
{
    const auto u = basis(12, 4, 1);
    const auto v = basis(12, 4, 2);
    const auto a = principal_angles(u, v);
    const auto b = principal_angles(v, u);
    ASSERT_EQ(a.size(), 4u);
    for (std::size_t i = 0; i < 4; ++i) {
        EXPECT_NEAR(a.angles[i], b.angles[i], 1e-12);
        EXPECT_GE(a.angles[i], 0.0);
        EXPECT_LE(a.angles[i], std::numbers::pi / 2);
        if (i > 0)
            EXPECT_LE(a.angles[i - 1], a.angles[i]);
    }
}

TEST(PrincipalAngles, DimensionMismatchRejected)
{
    EXPECT_THROW(principal_angles(basis(5, 2, 1), basis(5, 3, 2)), InvalidInput);
    EXPECT_THROW(principal_angles(basis(5, 2, 1), basis(6, 2, 2)), InvalidInput);
}

TEST(SinTheta, Examples)
{
    const auto u = basis(6, 2, 3);
    for (const auto& s : {NormSpec::operator_norm(), NormSpec::frobenius(), NormSpec::nuclear()})
        EXPECT_NEAR(sin_theta_norm(u, u, s), 0.0, 1e-7);
    const OrthonormalBasis e1(unit(4, {1}));
    const OrthonormalBasis e2(unit(4, {0, 1}));
    EXPECT_NEAR(sin_theta_norm(e1, e2, NormSpec::operator_norm()), 1.0, 1e-15);
}

TEST(SinTheta, MatchesExplicitProjectorProduct)
{
    const auto u = basis(6, 2, 4);
    const auto v = basis(6, 2, 5);
    const Matrix perp = Matrix::Identity(6, 6) - u.matrix() * u.matrix().transpose();
    const Matrix prod = perp * v.matrix() * v.matrix().transpose();
    EXPECT_NEAR(sin_theta_norm(u, v, NormSpec::frobenius()), prod.norm(), 1e-12);
    EXPECT_NEAR(sin_theta_norm(u, v, NormSpec::operator_norm()), oracle::singular_values(prod)(0), 1e-12);
}

TEST(SinTheta, NonInvariantNormRejected)
{
    const auto u = basis(5, 2, 1);
    EXPECT_THROW(sin_theta_norm(u, u, NormSpec::two_inf()), InvalidParameter);
    EXPECT_THROW(sin_theta_norm(u, u, NormSpec::max()), InvalidParameter);
}

TEST(ProjectorDistance, EachSineCountedTwice)
{
    const auto u = basis(9, 3, 6);
    const auto v = basis(9, 3, 7);
    const Matrix diff = u.matrix() * u.matrix().transpose() - v.matrix() * v.matrix().transpose();
    EXPECT_NEAR(projector_distance(u, v, NormSpec::frobenius()), diff.norm(), 1e-12);
    EXPECT_NEAR(projector_distance(u, v, NormSpec::nuclear()), oracle::schatten(diff, 1.0), 1e-10);
}

TEST(Procrustes, Examples)
{
    const auto u = basis(7, 3, 8);
    EXPECT_LE((procrustes_align(u, u) - Matrix::Identity(3, 3)).cwiseAbs().maxCoeff(), 1e-12);

    const Matrix q = oracle::orthogonal(3, 9);
    const OrthonormalBasis v(u.matrix() * q);
    const Matrix o = procrustes_align(u, v);
    EXPECT_LE((u.matrix() * o - v.matrix()).norm(), 1e-8);
    EXPECT_LE((o - q).cwiseAbs().maxCoeff(), 1e-8);

    const OrthonormalBasis a(unit(3, {1, 2, 2}));
    const OrthonormalBasis b(-a.matrix());
    EXPECT_NEAR(procrustes_align(a, b)(0, 0), -1.0, 1e-15);
}

TEST(Procrustes, Orthogonal)
{
    const Matrix o = procrustes_align(basis(10, 4, 1), basis(10, 4, 2));
    EXPECT_LE((o.transpose() * o - Matrix::Identity(4, 4)).cwiseAbs().maxCoeff(), 1e-8);
}

TEST(AlignedDistance, Examples)
{
    const auto u = basis(5, 2, 3);
    EXPECT_NEAR(aligned_distance(u, u, NormSpec::frobenius()), 0.0, 1e-7);
    for (double theta : {0.1, 0.7, 1.3}) {
        const OrthonormalBasis a(unit(2, {1}));
        const OrthonormalBasis b(unit(2, {std::cos(theta), std::sin(theta)}));
        EXPECT_NEAR(aligned_distance(a, b, NormSpec::frobenius()), 2 * std::sin(theta / 2), 1e-12);
    }
    const OrthonormalBasis e1(unit(3, {1}));
    const OrthonormalBasis e2(unit(3, {0, 1}));
    EXPECT_NEAR(aligned_distance(e1, e2, NormSpec::frobenius()), std::sqrt(2.0), 1e-12);
}

TEST(TwoInfResidual, Examples)
{
    const auto u = basis(8, 3, 2);
    const OrthonormalBasis inside(u.matrix().leftCols(2));
    EXPECT_NEAR(two_inf_residual(u, inside, ResidualMode::projector), 0.0, 1e-12);
    EXPECT_NEAR(two_inf_residual(u, u, ResidualMode::aligned), 0.0, 1e-7);
    EXPECT_THROW(two_inf_residual(inside, u, ResidualMode::projector), InvalidInput);
    EXPECT_THROW(two_inf_residual(u, inside, ResidualMode::aligned), InvalidInput);
}

// ---- properties over random pairs ----

class RandomSubspacePairs : public ::testing::Test {
protected:
    struct Pair {
        OrthonormalBasis u;
        OrthonormalBasis v;
    };
    static std::vector<Pair> pairs(int count, unsigned seed)
    {
        std::mt19937 gen(seed);
        std::vector<Pair> out;
        for (int i = 0; i < count; ++i) {
            const int ambient = std::uniform_int_distribution<int>(2, 80)(gen);
            const int dim = std::uniform_int_distribution<int>(1, std::min(20, ambient))(gen);
            out.push_back({basis(ambient, dim, gen()), basis(ambient, dim, gen())});
        }
        return out;
    }
};

TEST_F(RandomSubspacePairs, ProjectorProductSingularValuesAreCosines)
{
    for (const auto& [u, v] : pairs(120, 1)) {
        const oracle::Vec ref = oracle::projector_cosines(u.matrix(), v.matrix());
        Vector c = principal_angles(u, v).cosines();
        std::sort(c.data(), c.data() + c.size(), std::greater<>());
        for (Eigen::Index i = 0; i < c.size(); ++i)
            EXPECT_NEAR(c(i), ref(i), 1e-9);
    }
}

TEST_F(RandomSubspacePairs, ProcrustesResidualSpectrum)
{
    for (const auto& [u, v] : pairs(120, 2)) {
        const auto angles = principal_angles(u, v);
        const Matrix res = u.matrix() * procrustes_align(u, v) - v.matrix();
        const oracle::Vec sv = oracle::singular_values(res);
        std::vector<double> expect;
        for (double t : angles.angles)
            expect.push_back(2 * std::sin(t / 2));
        std::sort(expect.rbegin(), expect.rend());
        for (std::size_t i = 0; i < expect.size(); ++i)
            EXPECT_NEAR(sv(static_cast<Eigen::Index>(i)), expect[i], 1e-9);
    }
}

TEST_F(RandomSubspacePairs, FrobeniusSandwich)
{
    for (const auto& [u, v] : pairs(120, 3)) {
        const double s = sin_theta_norm(u, v, NormSpec::frobenius());
        const double a = aligned_distance(u, v, NormSpec::frobenius());
        EXPECT_LE(s, a + 1e-9);
        EXPECT_LE(a, std::sqrt(2.0) * s + 1e-9);
    }
}

TEST_F(RandomSubspacePairs, BasisInvariance)
{
    unsigned seed = 50;
    for (const auto& [u, v] : pairs(40, 4)) {
        const Matrix q = oracle::orthogonal(static_cast<int>(u.dim()), ++seed);
        const auto a = principal_angles(u, v);
        const auto b = principal_angles(OrthonormalBasis(u.matrix() * q), v);
        for (std::size_t i = 0; i < a.size(); ++i)
            EXPECT_NEAR(a.angles[i], b.angles[i], 1e-9);
    }
}

TEST_F(RandomSubspacePairs, AlignmentPropositionInequalities)
{
    std::mt19937 gen(77);
    for (const auto& [ub, vb] : pairs(120, 5)) {
        const Matrix& u = ub.matrix();
        const Matrix& v = vb.matrix();
        const Matrix o = procrustes_align(ub, vb);
        const Matrix aligned = v - u * o;
        const Matrix proj = v - u * (u.transpose() * v);
        const double s2 = std::pow(oracle::singular_values(proj)(0), 2);

        EXPECT_LE(oracle::two_inf(aligned), oracle::two_inf(proj) + oracle::two_inf(u) * s2 + 1e-9);
        EXPECT_LE(two_inf_residual(ub, vb, ResidualMode::aligned),
                  two_inf_residual(ub, vb, ResidualMode::projector) + oracle::two_inf(u) * s2 + 1e-9);

        const oracle::Vec x = oracle::random_matrix(static_cast<int>(u.rows()), 1, gen()).col(0).normalized();
        const oracle::Vec y = oracle::random_matrix(static_cast<int>(u.cols()), 1, gen()).col(0).normalized();
        const double xu = (x.transpose() * u).norm();
        EXPECT_LE((x.transpose() * aligned).norm(), (x.transpose() * proj).norm() + xu * s2 + 1e-9);
        EXPECT_LE(std::abs(x.dot(aligned * y)), std::abs(x.dot(proj * y)) + xu * s2 + 1e-9);
    }
}
