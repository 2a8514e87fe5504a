#pragma once

#include "gccfp/matrix.hpp"

#include <vector>

namespace gccfp {

struct ClusterAssignment {
    std::vector<int> labels; // length N, values in [0, k_clusters)
    int k_clusters = 0;
    long zero_rows = 0; // rows of V that were all zero (assigned cluster 0)
};

struct EvalReport {
    double nmi = 0.0;
    double accuracy = 0.0;
    std::vector<std::vector<long>> contingency; // K_pred x K_true
    long n_scored = 0;
};

/// Hard assignment by row argmax; ties break toward the smallest index.
ClusterAssignment extract_clusters(const Matrix& v);

/// Normalized mutual information with arithmetic-mean normalization and
/// natural logs. Pairs where either label is negative (missing) are skipped.
/// Identical single-cluster partitions score 1; if exactly one side has zero
/// entropy the score is 0.
double nmi(const std::vector<int>& a, const std::vector<int>& b);

/// Best achievable fraction of correct labels over injective mappings from
/// predicted clusters to truth clusters (optimal assignment on the
/// contingency table). Skips missing (negative) truth labels.
double matched_accuracy(const std::vector<int>& pred, const std::vector<int>& truth);

/// Full report: nmi + matched accuracy + contingency over scored vertices.
EvalReport evaluate(const ClusterAssignment& pred, const std::vector<int>& truth);

namespace detail {
/// Maximum-total assignment on a (possibly rectangular) nonnegative score
/// table; returns the best total. Exposed for testing against enumeration.
double max_assignment_total(const std::vector<std::vector<long>>& table);
}

} // namespace gccfp
