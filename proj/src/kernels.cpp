#include "stk/kernels.hpp"

#include "stk/error.hpp"

#include <limits>

#include <omp.h>

namespace stk {

void set_threads(int threads)
{
    if (threads > 0)
        omp_set_num_threads(threads);
}

int max_threads() { return omp_get_max_threads(); }

namespace {

void check_assign_shapes(const Matrix& points, const Matrix& centers)
{
    if (points.rows() != centers.rows())
        throw InvalidInput("assign_nearest: points and centers differ in dimension");
    if (centers.cols() == 0)
        throw InvalidInput("assign_nearest: no centers");
}

inline void nearest_one(const Matrix& points, const Matrix& centers, Eigen::Index j, int& label, double& dist)
{
    double best = std::numeric_limits<double>::infinity();
    int arg = 0;
    for (Eigen::Index c = 0; c < centers.cols(); ++c) {
        const double d = (points.col(j) - centers.col(c)).squaredNorm();
        if (d < best) {
            best = d;
            arg = static_cast<int>(c);
        }
    }
    label = arg;
    dist = best;
}

}  // namespace

double assign_nearest(const Matrix& points, const Matrix& centers, std::vector<int>& labels, Vector& sq_dist)
{
    check_assign_shapes(points, centers);
    const Eigen::Index n = points.cols();
    labels.assign(static_cast<std::size_t>(n), 0);
    sq_dist.resize(n);
#pragma omp parallel for schedule(static)
    for (Eigen::Index j = 0; j < n; ++j)
        nearest_one(points, centers, j, labels[j], sq_dist(j));
    // Summed serially so the inertia is bit-identical to the reference.
    return sq_dist.sum();
}

double assign_nearest_serial(const Matrix& points, const Matrix& centers, std::vector<int>& labels, Vector& sq_dist)
{
    check_assign_shapes(points, centers);
    const Eigen::Index n = points.cols();
    labels.assign(static_cast<std::size_t>(n), 0);
    sq_dist.resize(n);
    for (Eigen::Index j = 0; j < n; ++j)
        nearest_one(points, centers, j, labels[j], sq_dist(j));
    return sq_dist.sum();
}

Vector row_norms(const Matrix& a)
{
    Vector out(a.rows());
#pragma omp parallel for schedule(static)
    for (Eigen::Index i = 0; i < a.rows(); ++i)
        out(i) = a.row(i).norm();
    return out;
}

Vector row_norms_serial(const Matrix& a)
{
    Vector out(a.rows());
    for (Eigen::Index i = 0; i < a.rows(); ++i)
        out(i) = a.row(i).norm();
    return out;
}

std::vector<double> varphi_grid(const LinearizationSpectrum& spec, const std::vector<double>& xs)
{
    const int count = static_cast<int>(xs.size());
    return parallel_map(count, [&](int i) { return varphi_real(spec, xs[i]); });
}

std::vector<double> varphi_grid_serial(const LinearizationSpectrum& spec, const std::vector<double>& xs)
{
    std::vector<double> out;
    out.reserve(xs.size());
    for (double x : xs)
        out.push_back(varphi_real(spec, x));
    return out;
}

}  // namespace stk
