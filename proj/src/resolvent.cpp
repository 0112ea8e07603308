#include "stk/resolvent.hpp"

#include "stk/error.hpp"

#include <algorithm>
#include <cmath>

namespace stk {

LinearizationSpectrum LinearizationSpectrum::from_noise(const Matrix& noise)
{
    const SvdFactors f = svd(noise);
    LinearizationSpectrum spec;
    spec.rows = static_cast<int>(noise.rows());
    spec.cols = static_cast<int>(noise.cols());
    spec.eta = f.singulars;
    spec.left = f.left;
    spec.right = f.right;
    return spec;
}

LinearizationSpectrum LinearizationSpectrum::values_only(const Matrix& noise)
{
    if (!noise.allFinite())
        throw InvalidInput("values_only: noise has non-finite entries");
    const Matrix gram = noise.rows() >= noise.cols() ? Matrix(noise.transpose() * noise)
                                                     : Matrix(noise * noise.transpose());
    Eigen::SelfAdjointEigenSolver<Matrix> eig(gram, Eigen::EigenvaluesOnly);
    if (eig.info() != Eigen::Success)
        throw NumericalFailure("values_only: eigen solver failed");
    const Vector& lambda = eig.eigenvalues();  // ascending
    LinearizationSpectrum spec;
    spec.rows = static_cast<int>(noise.rows());
    spec.cols = static_cast<int>(noise.cols());
    spec.eta.resize(lambda.size());
    for (Eigen::Index i = 0; i < lambda.size(); ++i)
        spec.eta(i) = std::sqrt(std::max(0.0, lambda(lambda.size() - 1 - i)));
    return spec;
}

namespace {

void require_domain(const LinearizationSpectrum& spec, Complex z)
{
    if (!(std::abs(z) > spec.noise_norm()))
        throw DomainError("resolvent: |z| must exceed ||E||");
}

}  // namespace

BlockTraces block_traces(const LinearizationSpectrum& spec, Complex z)
{
    require_domain(spec, z);
    const int m = spec.min_dim();
    Complex shared = 0.0;
    for (int i = 0; i < m; ++i) {
        const double e = spec.eta(i);
        shared += z / (z * z - e * e);
    }
    return {shared + static_cast<double>(spec.rows - m) / z, shared + static_cast<double>(spec.cols - m) / z};
}

ResolventProbe phi_values(const LinearizationSpectrum& spec, Complex z)
{
    const BlockTraces t = block_traces(spec, z);
    ResolventProbe p;
    p.z = z;
    p.phi1 = z - t.lower;
    p.phi2 = z - t.upper;
    p.varphi = p.phi1 * p.phi2;
    p.alpha = 0.5 * (1.0 / p.phi1 + 1.0 / p.phi2);
    p.beta = 0.5 * (1.0 / p.phi1 - 1.0 / p.phi2);
    return p;
}

double varphi_real(const LinearizationSpectrum& spec, double x)
{
    if (!(x > spec.noise_norm()))
        throw DomainError("varphi_real: x must exceed ||E||");
    const int m = spec.min_dim();
    double shared = 0.0;
    for (int i = 0; i < m; ++i) {
        const double e = spec.eta(i);
        shared += x / ((x - e) * (x + e));
    }
    const double phi1 = x - shared - static_cast<double>(spec.cols - m) / x;
    const double phi2 = x - shared - static_cast<double>(spec.rows - m) / x;
    return phi1 * phi2;
}

Complex resolvent_bilinear(const LinearizationSpectrum& spec, Complex z, const Vector& x, const Vector& y)
{
    require_domain(spec, z);
    if (!spec.has_vectors())
        throw InvalidInput("resolvent_bilinear: spectrum was built without singular vectors");
    const int N = spec.rows;
    const int n = spec.cols;
    if (x.size() != N + n || y.size() != N + n)
        throw InvalidInput("resolvent_bilinear: vectors must live in R^{N+n}");

    const auto xu = x.head(N);
    const auto xd = x.tail(n);
    const auto yu = y.head(N);
    const auto yd = y.tail(n);
    const Vector a = spec.left.transpose() * xu;
    const Vector b = spec.right.transpose() * xd;
    const Vector c = spec.left.transpose() * yu;
    const Vector d = spec.right.transpose() * yd;

    Complex acc = 0.0;
    for (int i = 0; i < spec.min_dim(); ++i) {
        const double e = spec.eta(i);
        const Complex denom = z * z - e * e;
        acc += ((a(i) * c(i) + b(i) * d(i)) * z + (a(i) * d(i) + b(i) * c(i)) * e) / denom;
    }
    const double null_part = (xu.dot(yu) - a.dot(c)) + (xd.dot(yd) - b.dot(d));
    return acc + null_part / z;
}

double local_law_gap(const LinearizationSpectrum& spec, Complex z, const Vector& x, const Vector& y)
{
    const Complex g = resolvent_bilinear(spec, z, x, y);
    const ResolventProbe p = phi_values(spec, z);
    const int N = spec.rows;
    const int n = spec.cols;
    const Complex surrogate = x.head(N).dot(y.head(N)) / p.phi1 + x.tail(n).dot(y.tail(n)) / p.phi2;
    return std::abs(g - surrogate);
}

double local_law_threshold(int rows, int cols, double b, double K, Complex z)
{
    const double c = 5.0 * b * b / ((b - 1) * (b - 1));
    return c * std::sqrt((K + 1) * std::log(static_cast<double>(rows + cols))) / std::norm(z);
}

Matrix linearized_basis(const Matrix& left, const Matrix& right)
{
    if (left.cols() != right.cols())
        throw InvalidInput("linearized_basis: factor column counts differ");
    const Eigen::Index N = left.rows();
    const Eigen::Index n = right.rows();
    const Eigen::Index r = left.cols();
    const double s = 1.0 / std::sqrt(2.0);
    Matrix out(N + n, 2 * r);
    out.topLeftCorner(N, r) = s * left;
    out.bottomLeftCorner(n, r) = s * right;
    out.topRightCorner(N, r) = s * left;
    out.bottomRightCorner(n, r) = -s * right;
    return out;
}

double uphiu_deviation(const LinearizationSpectrum& spec, const Matrix& u_lin, Complex z)
{
    const int N = spec.rows;
    const int n = spec.cols;
    if (u_lin.rows() != N + n || u_lin.cols() % 2 != 0 || u_lin.cols() == 0)
        throw InvalidInput("uphiu_deviation: basis must be (N+n) x 2r");
    const Eigen::Index r = u_lin.cols() / 2;
    const Matrix top = u_lin.topRows(N);
    const Matrix bottom = u_lin.bottomRows(n);
    const double layout = std::max((top.leftCols(r) - top.rightCols(r)).cwiseAbs().maxCoeff(),
                                   (bottom.leftCols(r) + bottom.rightCols(r)).cwiseAbs().maxCoeff());
    if (layout > kOrthoTol)
        throw InvalidInput("uphiu_deviation: columns are not of the form (u, +-v)/sqrt2");

    const ResolventProbe p = phi_values(spec, z);
    const Matrix top_gram = top.transpose() * top;
    const Matrix bottom_gram = bottom.transpose() * bottom;
    double worst = 0.0;
    for (Eigen::Index i = 0; i < 2 * r; ++i) {
        for (Eigen::Index j = 0; j < 2 * r; ++j) {
            const Complex value = top_gram(i, j) / p.phi1 + bottom_gram(i, j) / p.phi2;
            const bool same_block = (i < r) == (j < r);
            Complex target = 0.0;
            if (i % r == j % r)
                target = same_block ? p.alpha : p.beta;
            worst = std::max(worst, std::abs(value - target));
        }
    }
    return worst;
}

ResolventNorms resolvent_norms(const LinearizationSpectrum& spec, Complex z)
{
    require_domain(spec, z);
    ResolventNorms out{0.0, 0.0, 0.0};
    const double az = std::abs(z);
    auto visit = [&](double lambda) {
        const double gap = std::abs(z - lambda);
        out.resolvent = std::max(out.resolvent, 1.0 / gap);
        out.first_order = std::max(out.first_order, std::abs(lambda) / (az * gap));
        out.second_order = std::max(out.second_order, lambda * lambda / (az * az * gap));
    };
    for (int i = 0; i < spec.min_dim(); ++i) {
        visit(spec.eta(i));
        visit(-spec.eta(i));
    }
    if (spec.rows + spec.cols > 2 * spec.min_dim())
        visit(0.0);
    return out;
}

double solve_zj(const LinearizationSpectrum& spec, double sigma_j, double b)
{
    const double M = 2.0 * b * (std::sqrt(static_cast<double>(spec.rows)) + std::sqrt(static_cast<double>(spec.cols)));
    if (!(M > spec.noise_norm()))
        throw DomainError("solve_zj: M = 2b(sqrt N + sqrt n) must exceed ||E||");
    if (sigma_j < M)
        throw InvalidParameter("solve_zj: sigma_j must be at least M");

    const double target = sigma_j * sigma_j;
    auto residual = [&](double x) { return varphi_real(spec, x) - target; };

    double lo = M;
    if (residual(lo) > 0)
        throw NumericalFailure("solve_zj: varphi(M) exceeds sigma_j^2");
    const double chi = 1.0 + 1.0 / (4.0 * b * (b - 1.0));
    double hi = 2.0 * chi * sigma_j;
    int expansions = 0;
    while (residual(hi) <= 0) {
        hi *= 2.0;
        if (++expansions > 60)
            throw NumericalFailure("solve_zj: no sign change in expanded bracket");
    }

    const double tol = 1e-8 * target;
    double best = lo;
    double best_res = std::abs(residual(lo));
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        const double res = residual(mid);
        if (std::abs(res) < best_res) {
            best = mid;
            best_res = std::abs(res);
        }
        if (best_res <= tol)
            break;
        if (res > 0)
            hi = mid;
        else
            lo = mid;
    }
    if (best_res > tol)
        throw NumericalFailure("solve_zj: bisection did not reach the residual tolerance");
    return best;
}

}  // namespace stk
