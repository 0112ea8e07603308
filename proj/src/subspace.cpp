#include "stk/subspace.hpp"

#include "stk/error.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace stk {

OrthonormalBasis::OrthonormalBasis(Matrix basis) : basis_(std::move(basis))
{
    if (basis_.cols() > basis_.rows())
        throw InvalidInput("OrthonormalBasis: more columns than ambient dimension");
    if (!basis_.allFinite() || orthonormality_defect(basis_) > kOrthoTol)
        throw InvalidInput("OrthonormalBasis: columns are not orthonormal");
}

OrthonormalBasis OrthonormalBasis::orthonormalize(const Matrix& spanning)
{
    if (spanning.cols() > spanning.rows())
        throw InvalidInput("orthonormalize: more columns than rows");
    Eigen::HouseholderQR<Matrix> qr(spanning);
    Matrix q = qr.householderQ() * Matrix::Identity(spanning.rows(), spanning.cols());
    const Matrix r = qr.matrixQR().topRows(spanning.cols()).triangularView<Eigen::Upper>();
    for (Eigen::Index j = 0; j < q.cols(); ++j) {
        if (std::abs(r(j, j)) < 1e-12 * std::max(1.0, r.cwiseAbs().maxCoeff()))
            throw InvalidInput("orthonormalize: columns are linearly dependent");
        if (r(j, j) < 0)
            q.col(j) *= -1.0;
    }
    return OrthonormalBasis(std::move(q));
}

Vector AngleSpectrum::sines() const
{
    Vector s(static_cast<Eigen::Index>(angles.size()));
    for (std::size_t i = 0; i < angles.size(); ++i)
        s(static_cast<Eigen::Index>(i)) = std::sin(angles[i]);
    return s;
}

Vector AngleSpectrum::cosines() const
{
    Vector c(static_cast<Eigen::Index>(angles.size()));
    for (std::size_t i = 0; i < angles.size(); ++i)
        c(static_cast<Eigen::Index>(i)) = std::cos(angles[i]);
    return c;
}

namespace {

void require_same_shape(const OrthonormalBasis& u, const OrthonormalBasis& v, const char* what)
{
    if (u.ambient_dim() != v.ambient_dim() || u.dim() != v.dim())
        throw InvalidInput(std::string(what) + ": subspaces must share ambient dimension and dimension");
}

Vector small_singular_values(const Matrix& m)
{
    Eigen::JacobiSVD<Matrix> dec(m);
    return dec.singularValues();
}

}  // namespace

AngleSpectrum principal_angles(const OrthonormalBasis& u, const OrthonormalBasis& v)
{
    require_same_shape(u, v, "principal_angles");
    const Eigen::Index d = u.dim();
    AngleSpectrum out;
    if (d == 0)
        return out;

    const Matrix& U = u.matrix();
    const Matrix& V = v.matrix();
    const Matrix cross = U.transpose() * V;

    // cosines descend -> angles ascend
    const Vector cosines = small_singular_values(cross);
    // sines of (I - UU^T)V, sorted ascending to pair with ascending angles
    const Matrix residual = V - U * cross;
    Vector sines = small_singular_values(residual);
    std::sort(sines.begin(), sines.end());

    out.angles.resize(static_cast<std::size_t>(d));
    const double half = std::numbers::sqrt2 / 2.0;
    for (Eigen::Index i = 0; i < d; ++i) {
        const double c = std::clamp(cosines(i), 0.0, 1.0);
        const double s = std::clamp(sines(i), 0.0, 1.0);
        // arccos is ill-conditioned near 0, arcsin near pi/2
        out.angles[static_cast<std::size_t>(i)] = c >= half ? std::asin(s) : std::acos(c);
    }
    std::sort(out.angles.begin(), out.angles.end());
    return out;
}

double sin_theta_norm(const OrthonormalBasis& u, const OrthonormalBasis& v, const NormSpec& spec)
{
    if (!spec.unitarily_invariant())
        throw InvalidParameter("sin_theta_norm: " + spec.name() + " is not unitarily invariant");
    return gauge(principal_angles(u, v).sines(), spec);
}

double projector_distance(const OrthonormalBasis& u, const OrthonormalBasis& v, const NormSpec& spec)
{
    if (!spec.unitarily_invariant())
        throw InvalidParameter("projector_distance: " + spec.name() + " is not unitarily invariant");
    const Vector s = principal_angles(u, v).sines();
    Vector doubled(2 * s.size());
    doubled << s, s;
    return gauge(doubled, spec);
}

Matrix procrustes_align(const OrthonormalBasis& u, const OrthonormalBasis& v)
{
    require_same_shape(u, v, "procrustes_align");
    const Matrix cross = u.matrix().transpose() * v.matrix();
    Eigen::JacobiSVD<Matrix> dec(cross, Eigen::ComputeFullU | Eigen::ComputeFullV);
    return dec.matrixU() * dec.matrixV().transpose();
}

double aligned_distance(const OrthonormalBasis& u, const OrthonormalBasis& v, const NormSpec& spec)
{
    if (!spec.unitarily_invariant())
        throw InvalidParameter("aligned_distance: " + spec.name() + " is not unitarily invariant");
    const Matrix o = procrustes_align(u, v);
    return apply_norm(u.matrix() * o - v.matrix(), spec);
}

double two_inf_residual(const OrthonormalBasis& u, const OrthonormalBasis& w, ResidualMode mode)
{
    if (u.ambient_dim() != w.ambient_dim())
        throw InvalidInput("two_inf_residual: ambient dimensions differ");
    const Matrix& U = u.matrix();
    const Matrix& W = w.matrix();
    if (mode == ResidualMode::projector) {
        if (u.dim() < w.dim())
            throw InvalidInput("two_inf_residual: projector mode needs dim(U) >= dim(W)");
        return two_inf_norm(W - U * (U.transpose() * W));
    }
    if (u.dim() != w.dim())
        throw InvalidInput("two_inf_residual: aligned mode needs equal dimensions");
    return two_inf_norm(W - U * procrustes_align(u, w));
}

}  // namespace stk
