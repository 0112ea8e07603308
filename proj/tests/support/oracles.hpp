#pragma once
// Reference computations for tests. These deliberately avoid the library's
// code paths: Jacobi SVD instead of divide and conquer, dense complex
// inversion instead of the eigen-expansion, brute-force permutations.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <numeric>
#include <random>
#include <vector>

namespace oracle {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;
using CMat = Eigen::MatrixXcd;
using Cplx = std::complex<double>;

inline Vec singular_values(const Mat& a)
{
    Eigen::JacobiSVD<Mat> dec(a);
    return dec.singularValues();
}

inline Mat random_matrix(int rows, int cols, unsigned seed)
{
    std::mt19937 gen(seed);
    std::normal_distribution<double> nd;
    Mat m(rows, cols);
    for (int j = 0; j < cols; ++j)
        for (int i = 0; i < rows; ++i)
            m(i, j) = nd(gen);
    return m;
}

// Orthonormal columns by modified Gram-Schmidt.
inline Mat orthonormal(int rows, int cols, unsigned seed)
{
    Mat q = random_matrix(rows, cols, seed);
    for (int j = 0; j < cols; ++j) {
        for (int i = 0; i < j; ++i)
            q.col(j) -= q.col(i).dot(q.col(j)) * q.col(i);
        q.col(j).normalize();
    }
    return q;
}

inline Mat orthogonal(int n, unsigned seed) { return orthonormal(n, n, seed); }

inline double schatten(const Mat& a, double p)
{
    const Vec s = singular_values(a);
    double acc = 0;
    for (int i = 0; i < s.size(); ++i)
        acc += std::pow(s(i), p);
    return std::pow(acc, 1.0 / p);
}

inline double kyfan(const Mat& a, int k)
{
    const Vec s = singular_values(a);
    return s.head(k).sum();
}

// (N+n) x (N+n) linearization [[0, E], [E^T, 0]].
inline Mat linearization(const Mat& e)
{
    const int N = static_cast<int>(e.rows());
    const int n = static_cast<int>(e.cols());
    Mat h = Mat::Zero(N + n, N + n);
    h.topRightCorner(N, n) = e;
    h.bottomLeftCorner(n, N) = e.transpose();
    return h;
}

// G(z) = (zI - H)^{-1} by dense LU.
inline CMat resolvent(const Mat& e, Cplx z)
{
    const Mat h = linearization(e);
    const int d = static_cast<int>(h.rows());
    CMat a = z * CMat::Identity(d, d) - h.cast<Cplx>();
    return a.partialPivLu().inverse();
}

struct Phi {
    Cplx phi1;
    Cplx phi2;
};

// phi_1 = z - tr(G_lower), phi_2 = z - tr(G_upper).
inline Phi phi_dense(const Mat& e, Cplx z)
{
    const int N = static_cast<int>(e.rows());
    const int n = static_cast<int>(e.cols());
    const CMat g = resolvent(e, z);
    const Cplx upper = g.topLeftCorner(N, N).trace();
    const Cplx lower = g.bottomRightCorner(n, n).trace();
    return {z - lower, z - upper};
}

inline Cplx bilinear_dense(const Mat& e, Cplx z, const Vec& x, const Vec& y)
{
    const CMat g = resolvent(e, z);
    return (x.cast<Cplx>().transpose() * g * y.cast<Cplx>())(0, 0);
}

// min over permutations of the fraction of disagreeing labels.
inline double misclassification(const std::vector<int>& truth, const std::vector<int>& found, int k)
{
    std::vector<int> perm(static_cast<std::size_t>(k));
    std::iota(perm.begin(), perm.end(), 0);
    std::size_t best = truth.size();
    do {
        std::size_t miss = 0;
        for (std::size_t i = 0; i < truth.size(); ++i)
            miss += truth[i] != perm[static_cast<std::size_t>(found[i])];
        best = std::min(best, miss);
    } while (std::next_permutation(perm.begin(), perm.end()));
    return static_cast<double>(best) / static_cast<double>(truth.size());
}

// Cosines of principal angles from the projector product, descending.
inline Vec projector_cosines(const Mat& u, const Mat& v)
{
    const Mat p = (u * u.transpose()) * (v * v.transpose());
    return singular_values(p).head(u.cols());
}

inline double two_inf(const Mat& a) { return a.rowwise().norm().maxCoeff(); }

}  // namespace oracle
