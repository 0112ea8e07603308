#pragma once
//
// Seeded generators: Gaussian noise, low-rank signals with a prescribed
// spectrum, the Gaussian mixture model and the planted-submatrix model.
//

#include "stk/matcore.hpp"

#include <cstdint>
#include <vector>

namespace stk {

// Trial streams: base_seed XOR (trial * golden-ratio constant).
std::uint64_t derive_seed(std::uint64_t base_seed, std::uint64_t trial_index);

// N x n matrix of iid N(0,1) entries, filled row by row from a
// mt19937_64 stream seeded with `seed`.
Matrix gen_gaussian(int rows, int cols, std::uint64_t seed);

// Haar-distributed N x r matrix with orthonormal columns (QR of a Gaussian
// block with the sign of diag(R) folded into Q).
Matrix haar_orthonormal(int rows, int cols, std::uint64_t seed);

enum class FactorMode { haar, coherent };

struct LowRankSpec {
    int rows = 0;
    int cols = 0;
    std::vector<double> singulars;  // strictly positive, descending
    FactorMode mode = FactorMode::haar;
    int coherent_row = 0;           // left vector u_1 = e_{coherent_row} in coherent mode

    void validate() const;
    int rank() const { return static_cast<int>(singulars.size()); }
};

struct LowRankSample {
    Matrix matrix;
    SvdFactors factors;  // exact rank-r factors
};

LowRankSample gen_low_rank(const LowRankSpec& spec, std::uint64_t seed);

// A = signal, E = noise, sum = A + E with both SVDs cached.
struct PerturbationInstance {
    Matrix signal;
    Matrix noise;
    Matrix sum;
    SvdFactors svd_signal;
    SvdFactors svd_sum;
    std::uint64_t seed = 0;

    int rows() const { return static_cast<int>(sum.rows()); }
    int cols() const { return static_cast<int>(sum.cols()); }
    // Rank of the signal, taken from its cached factors at relative tol 1e-10.
    int signal_rank() const;
};

PerturbationInstance perturb(const Matrix& signal, const Matrix& noise, std::uint64_t seed = 0);

// Reuses the generator's exact factors instead of decomposing the signal.
PerturbationInstance perturb(const LowRankSample& signal, const Matrix& noise, std::uint64_t seed = 0);

// ---------------------------------------------------------------------------
// Gaussian mixture model: X_i = theta_{z_i} + eps_i.

enum class LabelRule { balanced, explicit_list };

struct GmmSpec {
    int dim = 0;      // p
    int samples = 0;  // n
    int clusters = 0; // k
    std::vector<Vector> centers;
    LabelRule rule = LabelRule::balanced;
    std::vector<int> labels;  // explicit_list only, values in [0, k)
    bool noiseless = false;

    void validate() const;
};

struct GmmSample {
    Matrix data;       // p x n
    Matrix mean;       // E(X), p x n
    std::vector<int> labels;
    double delta = 0;      // minimum pairwise center distance
    int smallest_cluster = 0;
    double sigma_min = 0;  // k-th singular value of E(X)
    // U^T E(X) with U the leading k left singular vectors of E(X).
    Matrix truth_embedding;
};

// Balanced rule: label of column i is i mod k.
std::vector<int> balanced_labels(int n, int k);
double min_center_distance(const std::vector<Vector>& centers);

GmmSample sample_gmm(const GmmSpec& spec, std::uint64_t seed);

// ---------------------------------------------------------------------------
// Planted submatrices: X = sum_i lambda_i 1_{R_i} 1_{C_i}^T + E.

struct SubmatrixSpec {
    int rows = 0;  // m
    int cols = 0;  // n
    std::vector<std::vector<int>> row_sets;
    std::vector<std::vector<int>> col_sets;
    std::vector<double> amplitudes;
    bool noiseless = false;

    int blocks() const { return static_cast<int>(amplitudes.size()); }
    void validate() const;
};

struct SubmatrixSample {
    Matrix data;
    Matrix signal;
    double delta_rows = 0;  // min |lambda_i| sqrt(r_i)
    double delta_cols = 0;  // min |lambda_i| sqrt(c_i)
    double sigma_min = 0;   // min |lambda_i| sqrt(r_i c_i)
    int r_min = 0;
    int c_min = 0;
    // Truth families including the isolated sets R_0 / C_0 (possibly empty), sorted.
    std::vector<std::vector<int>> row_family;
    std::vector<std::vector<int>> col_family;
};

SubmatrixSample plant_submatrices(const SubmatrixSpec& spec, std::uint64_t seed);

// Contiguous blocks: block i gets rows [i*rows_each, (i+1)*rows_each) and
// likewise for columns.
SubmatrixSpec contiguous_blocks(int m, int n, int rows_each, int cols_each, std::vector<double> amplitudes);

}  // namespace stk
