#pragma once
//
// Resolvent G(z) = (z - calE)^{-1} of the symmetric linearization
// calE = [[0, E], [E^T, 0]], evaluated through the eigen-structure of calE
// (eigenvalues +-eta_i with eigenvectors (p_i, +-q_i)/sqrt2, plus an explicit
// null space) instead of dense inversion.
//

#include "stk/matcore.hpp"

#include <complex>

namespace stk {

using Complex = std::complex<double>;

struct LinearizationSpectrum {
    int rows = 0;  // N
    int cols = 0;  // n
    Vector eta;    // singular values of E, descending, length min(N, n)
    Matrix left;   // N x min(N, n), empty when built values-only
    Matrix right;  // n x min(N, n)

    // Full spectrum with singular vectors (needed for bilinear forms).
    static LinearizationSpectrum from_noise(const Matrix& noise);
    // Singular values only, taken from the eigenvalues of the smaller Gram
    // matrix. Enough for phi_1, phi_2, varphi and solve_zj.
    static LinearizationSpectrum values_only(const Matrix& noise);

    bool has_vectors() const { return left.size() > 0 || right.size() > 0; }
    double noise_norm() const { return eta.size() ? eta(0) : 0.0; }
    int min_dim() const { return static_cast<int>(eta.size()); }
};

struct ResolventProbe {
    Complex z;
    Complex phi1;
    Complex phi2;
    Complex varphi;  // phi1 * phi2
    Complex alpha;   // (1/phi1 + 1/phi2) / 2
    Complex beta;    // (1/phi1 - 1/phi2) / 2
};

// tr I^u G(z) and tr I^d G(z).
struct BlockTraces {
    Complex upper;
    Complex lower;
};

BlockTraces block_traces(const LinearizationSpectrum& spec, Complex z);

// Throws DomainError unless |z| > ||E||.
ResolventProbe phi_values(const LinearizationSpectrum& spec, Complex z);

// Real-axis varphi(x) for x > ||E||.
double varphi_real(const LinearizationSpectrum& spec, double x);

// x^T G(z) y for x, y in R^{N+n}.
Complex resolvent_bilinear(const LinearizationSpectrum& spec, Complex z, const Vector& x, const Vector& y);

// |x^T (G(z) - Phi(z)) y| with Phi = diag(I_N / phi1, I_n / phi2).
double local_law_gap(const LinearizationSpectrum& spec, Complex z, const Vector& x, const Vector& y);

// Right-hand side of the isotropic local law: 5b^2/(b-1)^2 sqrt((K+1) ln(N+n)) / |z|^2.
double local_law_threshold(int rows, int cols, double b, double K, Complex z);

// Columns (u_j, v_j)/sqrt2 for j = 1..r followed by (u_j, -v_j)/sqrt2.
Matrix linearized_basis(const Matrix& left, const Matrix& right);

// max entrywise |calU^T Phi calU - [[alpha I, beta I], [beta I, alpha I]]|.
// Throws InvalidInput when u_lin does not have the (u, +-v)/sqrt2 layout.
double uphiu_deviation(const LinearizationSpectrum& spec, const Matrix& u_lin, Complex z);

// ||G(z)||, ||G - I/z||, ||G - I/z - calE/z^2|| from the eigenvalues.
struct ResolventNorms {
    double resolvent;
    double first_order;
    double second_order;
};
ResolventNorms resolvent_norms(const LinearizationSpectrum& spec, Complex z);

// Root z_j > M of varphi(z) = sigma_j^2 with M = 2b(sqrt N + sqrt n).
// Bisection to 1e-8 relative residual, at most 200 iterations.
// Throws DomainError if M <= ||E|| and NumericalFailure if no bracket is found.
double solve_zj(const LinearizationSpectrum& spec, double sigma_j, double b);

}  // namespace stk
