#include "stk/models.hpp"

#include "stk/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <set>

namespace stk {

std::uint64_t derive_seed(std::uint64_t base_seed, std::uint64_t trial_index)
{
    return base_seed ^ (trial_index * 0x9E3779B97F4A7C15ULL);
}

namespace {

Matrix gaussian_block(std::mt19937_64& engine, int rows, int cols)
{
    std::normal_distribution<double> normal(0.0, 1.0);
    Matrix m(rows, cols);
    for (int i = 0; i < rows; ++i)
        for (int j = 0; j < cols; ++j)
            m(i, j) = normal(engine);
    return m;
}

Matrix q_factor(const Matrix& block)
{
    Eigen::HouseholderQR<Matrix> qr(block);
    Matrix q = qr.householderQ() * Matrix::Identity(block.rows(), block.cols());
    const auto& packed = qr.matrixQR();
    for (Eigen::Index j = 0; j < q.cols(); ++j)
        if (packed(j, j) < 0)
            q.col(j) *= -1.0;
    return q;
}

}  // namespace

Matrix gen_gaussian(int rows, int cols, std::uint64_t seed)
{
    if (rows < 1 || cols < 1)
        throw InvalidParameter("gen_gaussian: dimensions must be positive");
    std::mt19937_64 engine(seed);
    return gaussian_block(engine, rows, cols);
}

Matrix haar_orthonormal(int rows, int cols, std::uint64_t seed)
{
    if (cols < 1 || cols > rows)
        throw InvalidParameter("haar_orthonormal: need 1 <= cols <= rows");
    std::mt19937_64 engine(seed);
    return q_factor(gaussian_block(engine, rows, cols));
}

void LowRankSpec::validate() const
{
    if (rows < 1 || cols < 1)
        throw InvalidParameter("LowRankSpec: dimensions must be positive");
    if (singulars.empty())
        throw InvalidParameter("LowRankSpec: rank must be at least 1");
    if (static_cast<int>(singulars.size()) > std::min(rows, cols))
        throw InvalidParameter("LowRankSpec: rank exceeds min(N, n)");
    for (std::size_t i = 0; i < singulars.size(); ++i) {
        if (!(singulars[i] > 0) || !std::isfinite(singulars[i]))
            throw InvalidParameter("LowRankSpec: singular values must be positive and finite");
        if (i > 0 && singulars[i] > singulars[i - 1])
            throw InvalidParameter("LowRankSpec: singular values must be descending");
    }
    if (mode == FactorMode::coherent && (coherent_row < 0 || coherent_row >= rows))
        throw InvalidParameter("LowRankSpec: coherent row out of range");
}

LowRankSample gen_low_rank(const LowRankSpec& spec, std::uint64_t seed)
{
    spec.validate();
    const int r = spec.rank();
    std::mt19937_64 engine(seed);

    Matrix left_block = gaussian_block(engine, spec.rows, r);
    if (spec.mode == FactorMode::coherent) {
        left_block.col(0).setZero();
        left_block(spec.coherent_row, 0) = 1.0;
    }
    Matrix left = q_factor(left_block);
    Matrix right = q_factor(gaussian_block(engine, spec.cols, r));

    Vector s(r);
    for (int i = 0; i < r; ++i)
        s(i) = spec.singulars[static_cast<std::size_t>(i)];

    LowRankSample out;
    out.matrix = left * s.asDiagonal() * right.transpose();
    out.factors = SvdFactors{std::move(left), std::move(s), std::move(right)};
    return out;
}

int PerturbationInstance::signal_rank() const
{
    return effective_rank(svd_signal, 1e-10);
}

PerturbationInstance perturb(const Matrix& signal, const Matrix& noise, std::uint64_t seed)
{
    if (signal.rows() != noise.rows() || signal.cols() != noise.cols())
        throw InvalidInput("perturb: signal and noise shapes differ");
    PerturbationInstance inst;
    inst.signal = signal;
    inst.noise = noise;
    inst.sum = signal + noise;
    inst.svd_signal = svd(signal);
    inst.svd_sum = svd(inst.sum);
    inst.seed = seed;
    return inst;
}

PerturbationInstance perturb(const LowRankSample& signal, const Matrix& noise, std::uint64_t seed)
{
    if (signal.matrix.rows() != noise.rows() || signal.matrix.cols() != noise.cols())
        throw InvalidInput("perturb: signal and noise shapes differ");
    PerturbationInstance inst;
    inst.signal = signal.matrix;
    inst.noise = noise;
    inst.sum = signal.matrix + noise;
    inst.svd_signal = signal.factors;
    inst.svd_sum = svd(inst.sum);
    inst.seed = seed;
    return inst;
}

// ---------------------------------------------------------------------------

std::vector<int> balanced_labels(int n, int k)
{
    std::vector<int> labels(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i)
        labels[static_cast<std::size_t>(i)] = i % k;
    return labels;
}

double min_center_distance(const std::vector<Vector>& centers)
{
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t a = 0; a < centers.size(); ++a)
        for (std::size_t b = a + 1; b < centers.size(); ++b)
            best = std::min(best, (centers[a] - centers[b]).norm());
    return best;
}

void GmmSpec::validate() const
{
    if (dim < 1 || samples < 1 || clusters < 1)
        throw InvalidParameter("GmmSpec: p, n, k must be positive");
    if (clusters > samples)
        throw InvalidParameter("GmmSpec: more clusters than samples");
    if (static_cast<int>(centers.size()) != clusters)
        throw InvalidParameter("GmmSpec: need exactly k centers");
    for (const auto& c : centers)
        if (c.size() != dim)
            throw InvalidParameter("GmmSpec: center dimension mismatch");
    if (clusters > 1 && !(min_center_distance(centers) > 0))
        throw InvalidParameter("GmmSpec: centers must be pairwise distinct");
    if (rule == LabelRule::explicit_list) {
        if (static_cast<int>(labels.size()) != samples)
            throw InvalidParameter("GmmSpec: explicit label list has wrong length");
        for (int z : labels)
            if (z < 0 || z >= clusters)
                throw InvalidParameter("GmmSpec: label out of range");
    }
}

GmmSample sample_gmm(const GmmSpec& spec, std::uint64_t seed)
{
    spec.validate();
    GmmSample out;
    out.labels = spec.rule == LabelRule::balanced ? balanced_labels(spec.samples, spec.clusters) : spec.labels;

    out.mean.resize(spec.dim, spec.samples);
    for (int i = 0; i < spec.samples; ++i)
        out.mean.col(i) = spec.centers[static_cast<std::size_t>(out.labels[static_cast<std::size_t>(i)])];

    out.data = out.mean;
    if (!spec.noiseless)
        out.data += gen_gaussian(spec.dim, spec.samples, seed);

    out.delta = spec.clusters > 1 ? min_center_distance(spec.centers) : 0.0;
    std::vector<int> sizes(static_cast<std::size_t>(spec.clusters), 0);
    for (int z : out.labels)
        ++sizes[static_cast<std::size_t>(z)];
    out.smallest_cluster = *std::min_element(sizes.begin(), sizes.end());

    const SvdFactors f = svd(out.mean);
    const Eigen::Index k = std::min<Eigen::Index>(spec.clusters, f.size());
    out.sigma_min = f.singulars(k - 1);
    out.truth_embedding = f.left.leftCols(k).transpose() * out.mean;
    return out;
}

// ---------------------------------------------------------------------------

void SubmatrixSpec::validate() const
{
    if (rows < 1 || cols < 1)
        throw InvalidParameter("SubmatrixSpec: dimensions must be positive");
    const auto k = amplitudes.size();
    if (k == 0 || row_sets.size() != k || col_sets.size() != k)
        throw InvalidParameter("SubmatrixSpec: need k row sets, k column sets and k amplitudes");
    for (double lambda : amplitudes)
        if (lambda == 0.0 || !std::isfinite(lambda))
            throw InvalidParameter("SubmatrixSpec: amplitudes must be nonzero and finite");

    auto check_family = [](const std::vector<std::vector<int>>& family, int limit, const char* what) {
        std::set<int> seen;
        for (const auto& set : family) {
            if (set.empty())
                throw InvalidParameter(std::string("SubmatrixSpec: empty ") + what + " set");
            for (int idx : set) {
                if (idx < 0 || idx >= limit)
                    throw InvalidParameter(std::string("SubmatrixSpec: ") + what + " index out of range");
                if (!seen.insert(idx).second)
                    throw InvalidParameter(std::string("SubmatrixSpec: ") + what + " sets overlap");
            }
        }
    };
    check_family(row_sets, rows, "row");
    check_family(col_sets, cols, "column");
}

namespace {

std::vector<std::vector<int>> family_with_complement(const std::vector<std::vector<int>>& sets, int limit)
{
    std::vector<char> used(static_cast<std::size_t>(limit), 0);
    std::vector<std::vector<int>> family;
    for (auto s : sets) {
        std::sort(s.begin(), s.end());
        for (int idx : s)
            used[static_cast<std::size_t>(idx)] = 1;
        family.push_back(std::move(s));
    }
    std::vector<int> rest;
    for (int i = 0; i < limit; ++i)
        if (!used[static_cast<std::size_t>(i)])
            rest.push_back(i);
    family.push_back(std::move(rest));
    std::sort(family.begin(), family.end());
    return family;
}

}  // namespace

SubmatrixSample plant_submatrices(const SubmatrixSpec& spec, std::uint64_t seed)
{
    spec.validate();
    SubmatrixSample out;
    out.signal = Matrix::Zero(spec.rows, spec.cols);
    out.delta_rows = out.delta_cols = out.sigma_min = std::numeric_limits<double>::infinity();
    out.r_min = spec.rows;
    out.c_min = spec.cols;
    for (int b = 0; b < spec.blocks(); ++b) {
        const auto bi = static_cast<std::size_t>(b);
        const double lambda = spec.amplitudes[bi];
        for (int i : spec.row_sets[bi])
            for (int j : spec.col_sets[bi])
                out.signal(i, j) = lambda;
        const double ri = static_cast<double>(spec.row_sets[bi].size());
        const double ci = static_cast<double>(spec.col_sets[bi].size());
        out.delta_rows = std::min(out.delta_rows, std::abs(lambda) * std::sqrt(ri));
        out.delta_cols = std::min(out.delta_cols, std::abs(lambda) * std::sqrt(ci));
        out.sigma_min = std::min(out.sigma_min, std::abs(lambda) * std::sqrt(ri * ci));
        out.r_min = std::min(out.r_min, static_cast<int>(ri));
        out.c_min = std::min(out.c_min, static_cast<int>(ci));
    }
    out.data = out.signal;
    if (!spec.noiseless)
        out.data += gen_gaussian(spec.rows, spec.cols, seed);
    out.row_family = family_with_complement(spec.row_sets, spec.rows);
    out.col_family = family_with_complement(spec.col_sets, spec.cols);
    return out;
}

SubmatrixSpec contiguous_blocks(int m, int n, int rows_each, int cols_each, std::vector<double> amplitudes)
{
    SubmatrixSpec spec;
    spec.rows = m;
    spec.cols = n;
    const int k = static_cast<int>(amplitudes.size());
    for (int b = 0; b < k; ++b) {
        std::vector<int> r, c;
        for (int i = 0; i < rows_each; ++i)
            r.push_back(b * rows_each + i);
        for (int j = 0; j < cols_each; ++j)
            c.push_back(b * cols_each + j);
        spec.row_sets.push_back(std::move(r));
        spec.col_sets.push_back(std::move(c));
    }
    spec.amplitudes = std::move(amplitudes);
    return spec;
}

}  // namespace stk
