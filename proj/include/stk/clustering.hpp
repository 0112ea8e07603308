#pragma once
//
// k-means, the spectral algorithms for the mixture and planted-submatrix
// models, misclassification rate and set-family matching.
//

#include "stk/matcore.hpp"

#include <cstdint>
#include <optional>
#include <vector>

namespace stk {

// Labels are 0-based, in [0, k).
struct Labeling {
    std::vector<int> labels;
    int k = 0;

    void validate() const;
    std::size_t size() const { return labels.size(); }
};

struct KMeansConfig {
    int k = 1;
    int restarts = 10;
    int max_iter = 100;
    double tol = 1e-8;  // stop once the relative inertia decrease falls below tol
    std::uint64_t seed = 0;

    void validate() const;
};

struct KMeansResult {
    Labeling labeling;
    Matrix centers;  // d x k
    double inertia = 0;
    std::vector<double> trace;  // inertia after every assignment of the winning restart
    int restart = 0;
};

// Clusters the columns of `points` (d x n). k-means++ seeding, Lloyd
// iterations, empty clusters reseeded at the point farthest from its
// center. Restarts use derive_seed(cfg.seed, restart) and the winner is the
// smallest (inertia, restart) pair.
KMeansResult kmeans(const Matrix& points, const KMeansConfig& cfg);

// k-means on the columns of U~_k^T X.
Labeling spectral_gmm(const Matrix& x, int k, const KMeansConfig& cfg);

struct SubmatrixEstimate {
    // k + 1 sorted index sets each (some possibly empty), family sorted.
    std::vector<std::vector<int>> row_sets;
    std::vector<std::vector<int>> col_sets;
};

// (k+1)-means on the columns of U~_k^T X and on the rows of X V~_k.
// Groups whose centers are no farther apart than the largest group
// diameter are merged (this undoes the split of a true group when the
// isolated set is empty), then empty groups pad the family to k + 1.
SubmatrixEstimate spectral_submatrix(const Matrix& x, int k, const KMeansConfig& cfg);

// (1/n) min over label permutations of the disagreement count.
double misclassification(const Labeling& truth, const Labeling& found);

struct RecoveryResult {
    Labeling found;
    double misclassification = 0;
    bool exact = false;
    // permutation[f] = truth label matched to found label f.
    std::vector<int> permutation;
};

RecoveryResult evaluate_recovery(const Labeling& truth, const Labeling& found);

// Equality of two set families up to a bijection (order of sets ignored).
bool families_match(std::vector<std::vector<int>> a, std::vector<std::vector<int>> b);

// Sorted family of index sets from a labeling.
std::vector<std::vector<int>> groups_of(const Labeling& labeling);

// max_j ||(U~_k^T X)_j - (O T)_j|| where T = U_k^T E(X) is the generator's
// truth embedding and O is the Procrustes rotation of T onto U~_k^T X.
double embedding_gap(const Matrix& x, int k, const Matrix& truth_embedding);

// Thresholds of the exact-recovery results for data of size a x b with k
// clusters and exponent L:
//   separation: max{40(sqrt a + sqrt b)/sqrt(min_size), 1800k sqrt((L+7) ln(a+b))}
//   sigma:      40(sqrt a + sqrt b) + 3.8e4 k sqrt(2 ln9 k + (L+7) ln(a+b))
//   dimension:  (sqrt a + sqrt b)^2 >= 32(L+7) ln(a+b) + 64 ln9 k
double separation_threshold(int a, int b, int k, double L, int min_size);
double sigma_threshold(int a, int b, int k, double L);
bool recovery_dim_ok(int a, int b, int k, double L);

// Single linkage at a distance threshold: columns within `threshold` of
// each other (transitively) share a label. Labels follow first appearance.
Labeling threshold_linkage(const Matrix& points, double threshold);

}  // namespace stk
