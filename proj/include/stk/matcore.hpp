#pragma once
//
// Dense real matrices, SVD with a fixed sign convention, and the matrix
// norms used throughout the toolkit.
//

#include <Eigen/Dense>

#include <string>
#include <string_view>

namespace stk {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// Orthonormality tolerance for bases and projector inputs.
inline constexpr double kOrthoTol = 1e-8;

// Thin SVD  A = left * diag(singulars) * right^T.
//
// left is N x p, right is n x p, singulars has length p and is sorted in
// descending order. svd() returns p = min(N, n); generators that know the
// exact factors of a rank-r matrix may store p = r.
struct SvdFactors {
    Matrix left;
    Vector singulars;
    Matrix right;

    Eigen::Index size() const { return singulars.size(); }
    // Columns [first, last) of the factors, 0-based, half-open.
    Matrix left_cols(Eigen::Index first, Eigen::Index last) const;
    Matrix right_cols(Eigen::Index first, Eigen::Index last) const;
    Matrix reconstruct() const;
};

// Thin SVD of A. Singular vectors follow the convention that the first
// nonzero coordinate of every left singular vector is nonnegative (the
// paired right vector is flipped with it). Ties keep input order.
//
// Throws InvalidInput on non-finite entries and NumericalFailure if the
// decomposition does not satisfy the factor invariants.
SvdFactors svd(const Matrix& a);

// Singular values only, descending.
Vector singular_values(const Matrix& a);

class NormSpec {
public:
    enum class Kind { operator_norm, frobenius, nuclear, schatten, kyfan, two_inf, max };

    static NormSpec operator_norm() { return NormSpec(Kind::operator_norm); }
    static NormSpec frobenius() { return NormSpec(Kind::frobenius); }
    static NormSpec nuclear() { return NormSpec(Kind::nuclear); }
    static NormSpec schatten(double p);
    static NormSpec kyfan(int k);
    static NormSpec two_inf() { return NormSpec(Kind::two_inf); }
    static NormSpec max() { return NormSpec(Kind::max); }

    // Accepts "operator", "frobenius", "nuclear", "schatten:<p>",
    // "kyfan:<k>", "two_inf", "max".
    static NormSpec parse(std::string_view text);

    Kind kind() const { return kind_; }
    double p() const { return p_; }
    int k() const { return k_; }
    bool unitarily_invariant() const { return kind_ != Kind::two_inf && kind_ != Kind::max; }
    std::string name() const;

    bool operator==(const NormSpec&) const = default;

private:
    explicit NormSpec(Kind kind, double p = 0.0, int k = 0) : kind_(kind), p_(p), k_(k) {}

    Kind kind_;
    double p_;
    int k_;
};

// Symmetric gauge function of an invariant norm applied to a vector of
// singular values (absolute values are taken, order does not matter).
// Vectors shorter than a Ky Fan index are treated as zero padded.
double gauge(const Vector& values, const NormSpec& spec);

// ||A|| under spec. Throws InvalidParameter when a Ky Fan index exceeds
// min(N, n).
double apply_norm(const Matrix& a, const NormSpec& spec);

// Largest row length.
double two_inf_norm(const Matrix& a);
double max_norm(const Matrix& a);

// Number of singular values strictly above tol * sigma_1.
int effective_rank(const SvdFactors& f, double tol);

// P = B B^T for B with orthonormal columns; throws InvalidInput otherwise.
Matrix orth_projector(const Matrix& b);

// max |B^T B - I| entrywise.
double orthonormality_defect(const Matrix& b);

bool all_finite(const Matrix& a);

}  // namespace stk
