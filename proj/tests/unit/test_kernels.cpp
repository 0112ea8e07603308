#include <gtest/gtest.h>

#include "oracles.hpp"
#include "stk/error.hpp"
#include "stk/kernels.hpp"
#include "stk/models.hpp"

#include <stdexcept>

using namespace stk;

TEST(Kernels, AssignNearestMatchesSerial)
{
    const Matrix pts = oracle::random_matrix(5, 500, 1);
    const Matrix centers = oracle::random_matrix(5, 7, 2);
    for (int t : {1, 2, 4}) {
        set_threads(t);
        std::vector<int> la, lb;
        Vector da, db;
        const double ia = assign_nearest(pts, centers, la, da);
        const double ib = assign_nearest_serial(pts, centers, lb, db);
        EXPECT_EQ(la, lb);
        EXPECT_EQ(da, db);
        EXPECT_EQ(ia, ib);
    }
    set_threads(0);
}

TEST(Kernels, AssignNearestTiesGoToLowestIndex)
{
    Matrix pts = Matrix::Zero(1, 1);
    Matrix centers(1, 2);
    centers << -1, 1;
    std::vector<int> l;
    Vector d;
    assign_nearest(pts, centers, l, d);
    EXPECT_EQ(l[0], 0);
}

TEST(Kernels, RowNormsMatchSerial)
{
    const Matrix a = oracle::random_matrix(333, 17, 3);
    EXPECT_EQ(row_norms(a), row_norms_serial(a));
    EXPECT_NEAR(row_norms(a)(4), a.row(4).norm(), 1e-14);
}

TEST(Kernels, VarphiGridMatchesSerial)
{
    const LinearizationSpectrum spec = LinearizationSpectrum::values_only(gen_gaussian(40, 30, 4));
    std::vector<double> xs;
    for (int i = 0; i < 64; ++i)
        xs.push_back(spec.noise_norm() * (1.1 + 0.05 * i));
    EXPECT_EQ(varphi_grid(spec, xs), varphi_grid_serial(spec, xs));
}

TEST(ParallelMap, IndexOrderedAndDeterministic)
{
    auto f = [](int i) { return derive_seed(7, static_cast<std::uint64_t>(i)); };
    EXPECT_EQ(parallel_map(1000, f), serial_map(1000, f));
    EXPECT_TRUE(parallel_map(0, f).empty());
}

TEST(ParallelMap, RethrowsSmallestIndexError)
{
    set_threads(4);
    try {
        parallel_map(100, [](int i) -> int {
            if (i == 17 || i == 60)
                throw std::runtime_error("fail " + std::to_string(i));
            return i;
        });
        FAIL() << "expected an exception";
    } catch (const std::runtime_error& e) {
        EXPECT_STREQ(e.what(), "fail 17");
    }
    set_threads(0);
}
