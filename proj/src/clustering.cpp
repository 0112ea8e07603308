#include "stk/clustering.hpp"

#include "stk/error.hpp"
#include "stk/kernels.hpp"
#include "stk/models.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

namespace stk {

void Labeling::validate() const
{
    if (k < 1)
        throw InvalidParameter("Labeling: k must be positive");
    for (int l : labels)
        if (l < 0 || l >= k)
            throw InvalidInput("Labeling: label out of range");
}

void KMeansConfig::validate() const
{
    if (k < 1 || restarts < 1 || max_iter < 1 || !(tol > 0))
        throw InvalidParameter("KMeansConfig: k, restarts, max_iter and tol must be positive");
}

namespace {

Matrix plus_plus_seed(const Matrix& points, int k, std::mt19937_64& rng)
{
    const Eigen::Index n = points.cols();
    Matrix centers(points.rows(), k);
    std::uniform_int_distribution<Eigen::Index> pick(0, n - 1);
    centers.col(0) = points.col(pick(rng));

    Vector d2 = (points.colwise() - centers.col(0)).colwise().squaredNorm().transpose();
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (int c = 1; c < k; ++c) {
        const double total = d2.sum();
        Eigen::Index chosen = 0;
        if (total > 0) {
            const double target = unit(rng) * total;
            double acc = 0.0;
            chosen = n - 1;
            for (Eigen::Index j = 0; j < n; ++j) {
                acc += d2(j);
                if (acc > target && d2(j) > 0) {
                    chosen = j;
                    break;
                }
            }
        } else {
            chosen = pick(rng);
        }
        centers.col(c) = points.col(chosen);
        const Vector fresh = (points.colwise() - centers.col(c)).colwise().squaredNorm().transpose();
        d2 = d2.cwiseMin(fresh);
    }
    return centers;
}

KMeansResult lloyd(const Matrix& points, const KMeansConfig& cfg, int restart)
{
    std::mt19937_64 rng(derive_seed(cfg.seed, static_cast<std::uint64_t>(restart)));
    KMeansResult res;
    res.restart = restart;
    res.centers = plus_plus_seed(points, cfg.k, rng);

    std::vector<int> labels;
    Vector d2;
    double inertia = assign_nearest(points, res.centers, labels, d2);
    res.trace.push_back(inertia);

    for (int it = 0; it < cfg.max_iter; ++it) {
        Matrix sums = Matrix::Zero(points.rows(), cfg.k);
        std::vector<int> counts(static_cast<std::size_t>(cfg.k), 0);
        for (Eigen::Index j = 0; j < points.cols(); ++j) {
            sums.col(labels[j]) += points.col(j);
            ++counts[labels[j]];
        }
        std::vector<char> taken(static_cast<std::size_t>(points.cols()), 0);
        for (int c = 0; c < cfg.k; ++c) {
            if (counts[c] > 0) {
                res.centers.col(c) = sums.col(c) / counts[c];
                continue;
            }
            Eigen::Index far = -1;
            for (Eigen::Index j = 0; j < points.cols(); ++j)
                if (!taken[j] && (far < 0 || d2(j) > d2(far)))
                    far = j;
            taken[far] = 1;
            res.centers.col(c) = points.col(far);
        }

        std::vector<int> next;
        const double updated = assign_nearest(points, res.centers, next, d2);
        res.trace.push_back(updated);
        const bool same = next == labels;
        const double drop = inertia - updated;
        labels = std::move(next);
        inertia = updated;
        if (same || drop <= cfg.tol * std::max(inertia, std::numeric_limits<double>::min()))
            break;
    }
    res.labeling = Labeling{std::move(labels), cfg.k};
    res.inertia = inertia;
    return res;
}

// Minimum-cost assignment on a square cost matrix (rows -> columns).
std::vector<int> hungarian(const Matrix& cost)
{
    const int n = static_cast<int>(cost.rows());
    const double inf = std::numeric_limits<double>::infinity();
    std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0), minv(n + 1);
    std::vector<int> p(n + 1, 0), way(n + 1, 0);
    std::vector<char> used(n + 1);
    for (int i = 1; i <= n; ++i) {
        p[0] = i;
        int j0 = 0;
        std::fill(minv.begin(), minv.end(), inf);
        std::fill(used.begin(), used.end(), 0);
        do {
            used[j0] = 1;
            const int i0 = p[j0];
            double delta = inf;
            int j1 = 0;
            for (int j = 1; j <= n; ++j) {
                if (used[j])
                    continue;
                const double cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
                if (cur < minv[j]) {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if (minv[j] < delta) {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for (int j = 0; j <= n; ++j) {
                if (used[j]) {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
        } while (p[j0] != 0);
        do {
            const int j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
        } while (j0 != 0);
    }
    std::vector<int> row_to_col(n, 0);
    for (int j = 1; j <= n; ++j)
        row_to_col[p[j] - 1] = j - 1;
    return row_to_col;
}

// Best matching found label -> truth label; returns agreement count.
long best_matching(const Labeling& truth, const Labeling& found, std::vector<int>& perm)
{
    if (truth.size() != found.size())
        throw InvalidInput("misclassification: labelings differ in length");
    truth.validate();
    found.validate();
    const int k = std::max(truth.k, found.k);
    Matrix confusion = Matrix::Zero(k, k);  // (found, truth)
    for (std::size_t i = 0; i < truth.size(); ++i)
        confusion(found.labels[i], truth.labels[i]) += 1.0;

    perm.resize(static_cast<std::size_t>(k));
    if (k <= 8) {
        std::vector<int> trial(static_cast<std::size_t>(k));
        std::iota(trial.begin(), trial.end(), 0);
        double best = -1.0;
        do {
            double agree = 0.0;
            for (int f = 0; f < k; ++f)
                agree += confusion(f, trial[f]);
            if (agree > best) {
                best = agree;
                perm = trial;
            }
        } while (std::next_permutation(trial.begin(), trial.end()));
        return std::lround(best);
    }
    perm = hungarian(-confusion);
    double agree = 0.0;
    for (int f = 0; f < k; ++f)
        agree += confusion(f, perm[f]);
    return std::lround(agree);
}

std::vector<std::vector<int>> merge_split_groups(const Matrix& points, const Labeling& lab, int target)
{
    std::vector<std::vector<int>> groups(static_cast<std::size_t>(lab.k));
    for (std::size_t j = 0; j < lab.size(); ++j)
        groups[lab.labels[j]].push_back(static_cast<int>(j));
    groups.erase(std::remove_if(groups.begin(), groups.end(), [](const auto& g) { return g.empty(); }),
                 groups.end());

    auto center = [&](const std::vector<int>& g) {
        Vector c = Vector::Zero(points.rows());
        for (int j : g)
            c += points.col(j);
        return Vector(c / static_cast<double>(g.size()));
    };
    auto diameter = [&](const std::vector<int>& g) {
        double d = 0.0;
        for (std::size_t a = 0; a < g.size(); ++a)
            for (std::size_t b = a + 1; b < g.size(); ++b)
                d = std::max(d, (points.col(g[a]) - points.col(g[b])).norm());
        return d;
    };

    bool merged = true;
    while (merged && groups.size() > 1) {
        merged = false;
        double reach = 0.0;
        for (const auto& g : groups)
            reach = std::max(reach, diameter(g));
        double closest = std::numeric_limits<double>::infinity();
        std::size_t ia = 0, ib = 0;
        for (std::size_t a = 0; a < groups.size(); ++a)
            for (std::size_t b = a + 1; b < groups.size(); ++b) {
                const double d = (center(groups[a]) - center(groups[b])).norm();
                if (d < closest) {
                    closest = d;
                    ia = a;
                    ib = b;
                }
            }
        if (closest <= reach) {
            groups[ia].insert(groups[ia].end(), groups[ib].begin(), groups[ib].end());
            groups.erase(groups.begin() + static_cast<std::ptrdiff_t>(ib));
            merged = true;
        }
    }
    for (auto& g : groups)
        std::sort(g.begin(), g.end());
    while (static_cast<int>(groups.size()) < target)
        groups.emplace_back();
    std::sort(groups.begin(), groups.end());
    return groups;
}

Matrix leading_left(const Matrix& x, int k)
{
    return svd(x).left.leftCols(k);
}

}  // namespace

KMeansResult kmeans(const Matrix& points, const KMeansConfig& cfg)
{
    cfg.validate();
    if (points.cols() < cfg.k)
        throw InvalidParameter("kmeans: fewer points than clusters");
    if (!points.allFinite())
        throw InvalidInput("kmeans: non-finite coordinates");

    std::vector<KMeansResult> runs = parallel_map(cfg.restarts, [&](int r) { return lloyd(points, cfg, r); });
    std::size_t best = 0;
    for (std::size_t i = 1; i < runs.size(); ++i)
        if (runs[i].inertia < runs[best].inertia)
            best = i;
    return std::move(runs[best]);
}

Labeling spectral_gmm(const Matrix& x, int k, const KMeansConfig& cfg)
{
    if (k < 1 || k > std::min(x.rows(), x.cols()))
        throw InvalidParameter("spectral_gmm: need 1 <= k <= min(p, n)");
    const Matrix embedded = leading_left(x, k).transpose() * x;
    KMeansConfig local = cfg;
    local.k = k;
    return kmeans(embedded, local).labeling;
}

SubmatrixEstimate spectral_submatrix(const Matrix& x, int k, const KMeansConfig& cfg)
{
    if (k < 1 || k > std::min(x.rows(), x.cols()))
        throw InvalidParameter("spectral_submatrix: need 1 <= k <= min(m, n)");
    const SvdFactors f = svd(x);
    const Matrix col_points = f.left.leftCols(k).transpose() * x;   // k x n
    const Matrix row_points = (x * f.right.leftCols(k)).transpose();  // k x m

    KMeansConfig local = cfg;
    local.k = k + 1;
    SubmatrixEstimate est;
    if (col_points.cols() >= local.k) {
        est.col_sets = merge_split_groups(col_points, kmeans(col_points, local).labeling, k + 1);
    } else {
        throw InvalidParameter("spectral_submatrix: need at least k + 1 columns");
    }
    KMeansConfig rows_cfg = local;
    rows_cfg.seed = derive_seed(cfg.seed, 0x5EEDULL);
    if (row_points.cols() < local.k)
        throw InvalidParameter("spectral_submatrix: need at least k + 1 rows");
    est.row_sets = merge_split_groups(row_points, kmeans(row_points, rows_cfg).labeling, k + 1);
    return est;
}

double misclassification(const Labeling& truth, const Labeling& found)
{
    if (truth.size() == 0)
        throw InvalidInput("misclassification: empty labeling");
    std::vector<int> perm;
    const long agree = best_matching(truth, found, perm);
    return static_cast<double>(static_cast<long>(truth.size()) - agree) / static_cast<double>(truth.size());
}

RecoveryResult evaluate_recovery(const Labeling& truth, const Labeling& found)
{
    if (truth.size() == 0)
        throw InvalidInput("evaluate_recovery: empty labeling");
    RecoveryResult out;
    out.found = found;
    const long agree = best_matching(truth, found, out.permutation);
    const long wrong = static_cast<long>(truth.size()) - agree;
    out.misclassification = static_cast<double>(wrong) / static_cast<double>(truth.size());
    out.exact = wrong == 0;
    return out;
}

bool families_match(std::vector<std::vector<int>> a, std::vector<std::vector<int>> b)
{
    for (auto* fam : {&a, &b}) {
        for (auto& s : *fam)
            std::sort(s.begin(), s.end());
        std::sort(fam->begin(), fam->end());
    }
    return a == b;
}

std::vector<std::vector<int>> groups_of(const Labeling& labeling)
{
    std::vector<std::vector<int>> groups(static_cast<std::size_t>(labeling.k));
    for (std::size_t i = 0; i < labeling.size(); ++i)
        groups[labeling.labels[i]].push_back(static_cast<int>(i));
    std::sort(groups.begin(), groups.end());
    return groups;
}

double embedding_gap(const Matrix& x, int k, const Matrix& truth_embedding)
{
    if (truth_embedding.size() == 0)
        throw InvalidInput("embedding_gap: missing truth embedding");
    if (truth_embedding.rows() != k || truth_embedding.cols() != x.cols())
        throw InvalidInput("embedding_gap: truth embedding must be k x n");
    const Matrix y = leading_left(x, k).transpose() * x;
    // Procrustes: O = W Z^T from the SVD of Y T^T maximizes tr(O^T Y T^T).
    Eigen::JacobiSVD<Matrix> core(y * truth_embedding.transpose(), Eigen::ComputeFullU | Eigen::ComputeFullV);
    const Matrix o = core.matrixU() * core.matrixV().transpose();
    return (o * truth_embedding - y).colwise().norm().maxCoeff();
}

double separation_threshold(int a, int b, int k, double L, int min_size)
{
    if (a < 1 || b < 1 || k < 1 || min_size < 1 || !(L > 0))
        throw InvalidParameter("separation_threshold: sizes, k and L must be positive");
    const double root = std::sqrt(static_cast<double>(a)) + std::sqrt(static_cast<double>(b));
    const double lg = std::log(static_cast<double>(a) + static_cast<double>(b));
    return std::max(40.0 * root / std::sqrt(static_cast<double>(min_size)), 1800.0 * k * std::sqrt((L + 7.0) * lg));
}

double sigma_threshold(int a, int b, int k, double L)
{
    if (a < 1 || b < 1 || k < 1 || !(L > 0))
        throw InvalidParameter("sigma_threshold: sizes, k and L must be positive");
    const double root = std::sqrt(static_cast<double>(a)) + std::sqrt(static_cast<double>(b));
    const double lg = std::log(static_cast<double>(a) + static_cast<double>(b));
    return 40.0 * root + 3.8e4 * k * std::sqrt(2.0 * std::log(9.0) * k + (L + 7.0) * lg);
}

bool recovery_dim_ok(int a, int b, int k, double L)
{
    const double root = std::sqrt(static_cast<double>(a)) + std::sqrt(static_cast<double>(b));
    const double lg = std::log(static_cast<double>(a) + static_cast<double>(b));
    return root * root >= 32.0 * (L + 7.0) * lg + 64.0 * std::log(9.0) * k;
}

Labeling threshold_linkage(const Matrix& points, double threshold)
{
    const Eigen::Index n = points.cols();
    std::vector<int> parent(static_cast<std::size_t>(n));
    std::iota(parent.begin(), parent.end(), 0);
    auto find = [&](int i) {
        while (parent[i] != i) {
            parent[i] = parent[parent[i]];
            i = parent[i];
        }
        return i;
    };
    for (Eigen::Index a = 0; a < n; ++a)
        for (Eigen::Index b = a + 1; b < n; ++b)
            if ((points.col(a) - points.col(b)).norm() <= threshold) {
                const int ra = find(static_cast<int>(a));
                const int rb = find(static_cast<int>(b));
                if (ra != rb)
                    parent[std::max(ra, rb)] = std::min(ra, rb);
            }

    Labeling out;
    out.labels.resize(static_cast<std::size_t>(n));
    std::vector<int> id(static_cast<std::size_t>(n), -1);
    for (Eigen::Index j = 0; j < n; ++j) {
        const int root = find(static_cast<int>(j));
        if (id[root] < 0)
            id[root] = out.k++;
        out.labels[j] = id[root];
    }
    return out;
}

}  // namespace stk
