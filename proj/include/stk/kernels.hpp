#pragma once
//
// Data-parallel kernels. Every OpenMP kernel has a *_serial twin that is
// the reference implementation in tests and the baseline in benchmarks;
// both produce identical results independent of the thread count.
//

#include "stk/matcore.hpp"
#include "stk/resolvent.hpp"

#include <cstddef>
#include <exception>
#include <type_traits>
#include <vector>

namespace stk {

// Thread count for subsequent parallel regions (<= 0 keeps the default).
void set_threads(int threads);
int max_threads();

// Nearest-center assignment for the columns of `points` (d x n) against
// the columns of `centers` (d x k). Ties go to the lowest center index.
// Writes labels and squared distances, returns the total (inertia).
double assign_nearest(const Matrix& points, const Matrix& centers, std::vector<int>& labels, Vector& sq_dist);
double assign_nearest_serial(const Matrix& points, const Matrix& centers, std::vector<int>& labels, Vector& sq_dist);

// Euclidean length of every row.
Vector row_norms(const Matrix& a);
Vector row_norms_serial(const Matrix& a);

// varphi(x) at every grid point (each x must exceed ||E||).
std::vector<double> varphi_grid(const LinearizationSpectrum& spec, const std::vector<double>& xs);
std::vector<double> varphi_grid_serial(const LinearizationSpectrum& spec, const std::vector<double>& xs);

// out[i] = fn(i) for i in [0, count), evaluated on the OpenMP pool.
// Results are stored by index, so the output does not depend on scheduling.
// If any call throws, the exception from the smallest index is rethrown.
template <class Fn>
auto parallel_map(int count, Fn&& fn) -> std::vector<std::invoke_result_t<Fn&, int>>
{
    using T = std::invoke_result_t<Fn&, int>;
    std::vector<T> out(static_cast<std::size_t>(count > 0 ? count : 0));
    std::vector<std::exception_ptr> errors(out.size());
#pragma omp parallel for schedule(dynamic, 1)
    for (int i = 0; i < count; ++i) {
        try {
            out[i] = fn(i);
        } catch (...) {
            errors[i] = std::current_exception();
        }
    }
    for (auto& e : errors)
        if (e)
            std::rethrow_exception(e);
    return out;
}

template <class Fn>
auto serial_map(int count, Fn&& fn) -> std::vector<std::invoke_result_t<Fn&, int>>
{
    std::vector<std::invoke_result_t<Fn&, int>> out;
    out.reserve(static_cast<std::size_t>(count > 0 ? count : 0));
    for (int i = 0; i < count; ++i)
        out.push_back(fn(i));
    return out;
}

}  // namespace stk
