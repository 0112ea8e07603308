#include "stk/matcore.hpp"

#include "stk/error.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <functional>
#include <vector>

namespace stk {

Matrix SvdFactors::left_cols(Eigen::Index first, Eigen::Index last) const
{
    return left.middleCols(first, last - first);
}

Matrix SvdFactors::right_cols(Eigen::Index first, Eigen::Index last) const
{
    return right.middleCols(first, last - first);
}

Matrix SvdFactors::reconstruct() const
{
    return left * singulars.asDiagonal() * right.transpose();
}

bool all_finite(const Matrix& a)
{
    return a.allFinite();
}

namespace {

void apply_sign_convention(Matrix& left, Matrix& right)
{
    for (Eigen::Index j = 0; j < left.cols(); ++j) {
        const double scale = left.col(j).cwiseAbs().maxCoeff();
        for (Eigen::Index i = 0; i < left.rows(); ++i) {
            const double x = left(i, j);
            if (std::abs(x) > 1e-12 * std::max(scale, 1e-300)) {
                if (x < 0) {
                    left.col(j) *= -1.0;
                    right.col(j) *= -1.0;
                }
                break;
            }
        }
    }
}

// Eigen 3.4.0's divide-and-conquer SVD can return a wrong spectrum when a
// singular value is repeated many times (projector products hit this). Its
// output is checked against two cheap invariants and recomputed with
// one-sided Jacobi when either fails.
bool spectrum_plausible(const Matrix& a, const Vector& s)
{
    for (Eigen::Index i = 0; i < s.size(); ++i)
        if (!(s(i) >= 0) || (i > 0 && s(i) > s(i - 1)))
            return false;
    const double fro2 = a.squaredNorm();
    return std::abs(s.squaredNorm() - fro2) <= 1e-10 * std::max(fro2, 1e-300);
}

bool factors_plausible(const Matrix& a, const Matrix& u, const Vector& s, const Matrix& v)
{
    if (!spectrum_plausible(a, s) || orthonormality_defect(u) > 1e-10 || orthonormality_defect(v) > 1e-10)
        return false;
    const double fro = std::sqrt(a.squaredNorm());
    return (a - u * s.asDiagonal() * v.transpose()).norm() <= 1e-10 * std::max(fro, 1e-300);
}

}  // namespace

SvdFactors svd(const Matrix& a)
{
    if (a.size() == 0)
        throw InvalidInput("svd: empty matrix");
    if (!a.allFinite())
        throw InvalidInput("svd: matrix has non-finite entries");

    SvdFactors f;
    Eigen::BDCSVD<Matrix> dec(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
    if (dec.info() == Eigen::Success && factors_plausible(a, dec.matrixU(), dec.singularValues(), dec.matrixV())) {
        f = SvdFactors{dec.matrixU(), dec.singularValues(), dec.matrixV()};
    } else {
        Eigen::JacobiSVD<Matrix> jac(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
        if (jac.info() != Eigen::Success)
            throw NumericalFailure("svd: decomposition did not converge");
        f = SvdFactors{jac.matrixU(), jac.singularValues(), jac.matrixV()};
    }

    // BDCSVD already sorts; a stable pass keeps ties in their original order
    // should a backend ever return them unsorted.
    const Eigen::Index m = f.singulars.size();
    std::vector<Eigen::Index> order(static_cast<std::size_t>(m));
    for (Eigen::Index i = 0; i < m; ++i)
        order[static_cast<std::size_t>(i)] = i;
    std::stable_sort(order.begin(), order.end(), [&](Eigen::Index x, Eigen::Index y) {
        return f.singulars(x) > f.singulars(y);
    });
    if (!std::is_sorted(order.begin(), order.end())) {
        SvdFactors sorted{Matrix(f.left.rows(), m), Vector(m), Matrix(f.right.rows(), m)};
        for (Eigen::Index i = 0; i < m; ++i) {
            const auto src = order[static_cast<std::size_t>(i)];
            sorted.left.col(i) = f.left.col(src);
            sorted.right.col(i) = f.right.col(src);
            sorted.singulars(i) = f.singulars(src);
        }
        f = std::move(sorted);
    }

    apply_sign_convention(f.left, f.right);

    if (orthonormality_defect(f.left) > kOrthoTol || orthonormality_defect(f.right) > kOrthoTol)
        throw NumericalFailure("svd: singular vectors lost orthonormality");
    return f;
}

Vector singular_values(const Matrix& a)
{
    if (a.size() == 0)
        return Vector();
    if (!a.allFinite())
        throw InvalidInput("singular_values: matrix has non-finite entries");
    Eigen::BDCSVD<Matrix> dec(a);
    if (dec.info() == Eigen::Success && spectrum_plausible(a, dec.singularValues()))
        return dec.singularValues();
    Eigen::JacobiSVD<Matrix> jac(a);
    if (jac.info() != Eigen::Success)
        throw NumericalFailure("singular_values: decomposition did not converge");
    return jac.singularValues();
}

NormSpec NormSpec::schatten(double p)
{
    if (!(p >= 1.0) || !std::isfinite(p))
        throw InvalidParameter("schatten norm needs finite p >= 1");
    return NormSpec(Kind::schatten, p, 0);
}

NormSpec NormSpec::kyfan(int k)
{
    if (k < 1)
        throw InvalidParameter("Ky Fan norm needs k >= 1");
    return NormSpec(Kind::kyfan, 0.0, k);
}

NormSpec NormSpec::parse(std::string_view text)
{
    const auto colon = text.find(':');
    const auto head = text.substr(0, colon);
    const auto arg = colon == std::string_view::npos ? std::string_view{} : text.substr(colon + 1);

    if (head == "operator" || head == "spectral")
        return operator_norm();
    if (head == "frobenius")
        return frobenius();
    if (head == "nuclear")
        return nuclear();
    if (head == "two_inf")
        return two_inf();
    if (head == "max")
        return max();
    if (head == "schatten") {
        try {
            return schatten(std::stod(std::string(arg)));
        } catch (const std::logic_error&) {
            throw InvalidParameter("bad schatten parameter in '" + std::string(text) + "'");
        }
    }
    if (head == "kyfan") {
        int k = 0;
        const auto [ptr, ec] = std::from_chars(arg.data(), arg.data() + arg.size(), k);
        if (ec != std::errc() || ptr != arg.data() + arg.size())
            throw InvalidParameter("bad Ky Fan parameter in '" + std::string(text) + "'");
        return kyfan(k);
    }
    throw InvalidParameter("unknown norm '" + std::string(text) + "'");
}

std::string NormSpec::name() const
{
    switch (kind_) {
    case Kind::operator_norm: return "operator";
    case Kind::frobenius: return "frobenius";
    case Kind::nuclear: return "nuclear";
    case Kind::schatten: {
        auto s = std::to_string(p_);
        s.erase(s.find_last_not_of('0') + 1);
        if (!s.empty() && s.back() == '.')
            s.pop_back();
        return "schatten:" + s;
    }
    case Kind::kyfan: return "kyfan:" + std::to_string(k_);
    case Kind::two_inf: return "two_inf";
    case Kind::max: return "max";
    }
    return "?";
}

double gauge(const Vector& values, const NormSpec& spec)
{
    if (!spec.unitarily_invariant())
        throw InvalidParameter("gauge: " + spec.name() + " is not unitarily invariant");
    if (values.size() == 0)
        return 0.0;
    const Vector a = values.cwiseAbs();
    switch (spec.kind()) {
    case NormSpec::Kind::operator_norm:
        return a.maxCoeff();
    case NormSpec::Kind::frobenius:
        return a.norm();
    case NormSpec::Kind::nuclear:
        return a.sum();
    case NormSpec::Kind::schatten: {
        const double scale = a.maxCoeff();
        if (scale == 0.0)
            return 0.0;
        double acc = 0.0;
        for (double x : a)
            acc += std::pow(x / scale, spec.p());
        return scale * std::pow(acc, 1.0 / spec.p());
    }
    case NormSpec::Kind::kyfan: {
        std::vector<double> v(a.begin(), a.end());
        const auto k = std::min<std::size_t>(static_cast<std::size_t>(spec.k()), v.size());
        std::partial_sort(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(k), v.end(),
                          std::greater<>());
        double acc = 0.0;
        for (std::size_t i = 0; i < k; ++i)
            acc += v[i];
        return acc;
    }
    default:
        break;
    }
    throw InvalidParameter("gauge: unsupported norm");
}

double two_inf_norm(const Matrix& a)
{
    if (a.size() == 0)
        return 0.0;
    return a.rowwise().norm().maxCoeff();
}

double max_norm(const Matrix& a)
{
    if (a.size() == 0)
        return 0.0;
    return a.cwiseAbs().maxCoeff();
}

double apply_norm(const Matrix& a, const NormSpec& spec)
{
    if (!a.allFinite())
        throw InvalidInput("apply_norm: matrix has non-finite entries");
    switch (spec.kind()) {
    case NormSpec::Kind::two_inf:
        return two_inf_norm(a);
    case NormSpec::Kind::max:
        return max_norm(a);
    case NormSpec::Kind::frobenius:
        return a.norm();
    case NormSpec::Kind::kyfan:
        if (spec.k() > std::min(a.rows(), a.cols()))
            throw InvalidParameter("apply_norm: Ky Fan index exceeds min(N, n)");
        break;
    default:
        break;
    }
    return gauge(singular_values(a), spec);
}

int effective_rank(const SvdFactors& f, double tol)
{
    if (tol < 0)
        throw InvalidParameter("effective_rank: negative tolerance");
    if (f.singulars.size() == 0 || f.singulars(0) <= 0.0)
        return 0;
    const double cut = tol * f.singulars(0);
    int count = 0;
    for (double s : f.singulars)
        if (s > cut)
            ++count;
    return count;
}

double orthonormality_defect(const Matrix& b)
{
    if (b.cols() == 0)
        return 0.0;
    const Matrix gram = b.transpose() * b;
    return (gram - Matrix::Identity(b.cols(), b.cols())).cwiseAbs().maxCoeff();
}

Matrix orth_projector(const Matrix& b)
{
    if (!b.allFinite() || orthonormality_defect(b) > kOrthoTol)
        throw InvalidInput("orth_projector: columns are not orthonormal");
    return b * b.transpose();
}

}  // namespace stk
