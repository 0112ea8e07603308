#pragma once
//
// Principal angles, sin-theta distances, Procrustes alignment and the
// aligned residuals used by the l2,inf results.
//

#include "stk/matcore.hpp"

#include <vector>

namespace stk {

// A matrix with orthonormal columns spanning a subspace of R^ambient_dim.
class OrthonormalBasis {
public:
    // Validates orthonormality to kOrthoTol; throws InvalidInput otherwise.
    explicit OrthonormalBasis(Matrix basis);

    // Orthonormalizes the columns of a full-column-rank matrix (Householder QR).
    static OrthonormalBasis orthonormalize(const Matrix& spanning);

    const Matrix& matrix() const { return basis_; }
    Eigen::Index ambient_dim() const { return basis_.rows(); }
    Eigen::Index dim() const { return basis_.cols(); }

private:
    Matrix basis_;
};

// Principal angles, ascending, each in [0, pi/2].
struct AngleSpectrum {
    std::vector<double> angles;

    Vector sines() const;
    Vector cosines() const;
    std::size_t size() const { return angles.size(); }
};

AngleSpectrum principal_angles(const OrthonormalBasis& u, const OrthonormalBasis& v);

// |||sin angle(U, V)||| for a unitarily invariant norm.
double sin_theta_norm(const OrthonormalBasis& u, const OrthonormalBasis& v, const NormSpec& spec);

// |||P_U - P_V||| without forming N x N projectors: its nonzero singular
// values are the sines, each counted twice.
double projector_distance(const OrthonormalBasis& u, const OrthonormalBasis& v, const NormSpec& spec);

// O = O1 O2^T from U^T V = O1 cos(Theta) O2^T, so that U O is close to V.
Matrix procrustes_align(const OrthonormalBasis& u, const OrthonormalBasis& v);

// |||U * procrustes_align(U, V) - V|||.
double aligned_distance(const OrthonormalBasis& u, const OrthonormalBasis& v, const NormSpec& spec);

enum class ResidualMode { projector, aligned };

// projector: ||W - P_U W||_{2,inf} (requires U.dim >= W.dim)
// aligned:   ||W - U O||_{2,inf} with O = procrustes_align(U, W) (equal dims)
double two_inf_residual(const OrthonormalBasis& u, const OrthonormalBasis& w, ResidualMode mode);

}  // namespace stk
