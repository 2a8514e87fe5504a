#include "gccfp/eval.hpp"

#include "gccfp/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <string>

namespace gccfp {

ClusterAssignment extract_clusters(const Matrix& v) {
    if (v.cols() < 1)
        throw ShapeError("membership matrix needs at least one column");
    ClusterAssignment out;
    out.k_clusters = v.cols();
    out.labels.resize(v.rows());
    for (int i = 0; i < v.rows(); ++i) {
        const double* row = v.row(i);
        int best = 0;
        double best_val = row[0];
        bool all_zero = row[0] == 0.0;
        for (int k = 1; k < v.cols(); ++k) {
            if (row[k] > best_val) { // strict: ties keep the smaller index
                best_val = row[k];
                best = k;
            }
            all_zero = all_zero && row[k] == 0.0;
        }
        if (all_zero) ++out.zero_rows;
        out.labels[i] = best;
    }
    return out;
}

namespace {

struct Contingency {
    std::vector<std::vector<long>> table; // rows: a labels, cols: b labels
    std::vector<long> row_sums;
    std::vector<long> col_sums;
    long n = 0;
};

// Counts over pairs where both labels are nonnegative; label values are
// compacted in sorted order.
Contingency contingency_of(const std::vector<int>& a, const std::vector<int>& b) {
    if (a.size() != b.size())
        throw ShapeError("label vectors differ in length: " + std::to_string(a.size()) +
                         " vs " + std::to_string(b.size()));
    std::map<int, int> amap, bmap;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (a[i] < 0 || b[i] < 0) continue;
        amap.emplace(a[i], 0);
        bmap.emplace(b[i], 0);
    }
    int idx = 0;
    for (auto& [label, slot] : amap) slot = idx++;
    idx = 0;
    for (auto& [label, slot] : bmap) slot = idx++;

    Contingency c;
    c.table.assign(amap.size(), std::vector<long>(bmap.size(), 0));
    c.row_sums.assign(amap.size(), 0);
    c.col_sums.assign(bmap.size(), 0);
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (a[i] < 0 || b[i] < 0) continue;
        int r = amap[a[i]];
        int col = bmap[b[i]];
        ++c.table[r][col];
        ++c.row_sums[r];
        ++c.col_sums[col];
        ++c.n;
    }
    return c;
}

double entropy(const std::vector<long>& sums, long n) {
    double h = 0.0;
    for (long s : sums) {
        if (s == 0) continue;
        double p = static_cast<double>(s) / static_cast<double>(n);
        h -= p * std::log(p);
    }
    return h;
}

} // namespace

double nmi(const std::vector<int>& a, const std::vector<int>& b) {
    // canonical argument order makes the summation order, and therefore the
    // rounding, identical for nmi(a, b) and nmi(b, a)
    if (std::lexicographical_compare(b.begin(), b.end(), a.begin(), a.end()))
        return nmi(b, a);
    Contingency c = contingency_of(a, b);
    if (c.n == 0)
        throw ValidationError("no scored vertices (all labels missing)");

    double ha = entropy(c.row_sums, c.n);
    double hb = entropy(c.col_sums, c.n);
    if (ha == 0.0 && hb == 0.0) return 1.0; // both single-cluster: identical partitions
    if (ha == 0.0 || hb == 0.0) return 0.0;

    double info = 0.0;
    double n = static_cast<double>(c.n);
    for (std::size_t i = 0; i < c.table.size(); ++i) {
        for (std::size_t j = 0; j < c.table[i].size(); ++j) {
            long nij = c.table[i][j];
            if (nij == 0) continue;
            double pij = nij / n;
            info += pij * std::log(n * nij / (static_cast<double>(c.row_sums[i]) *
                                              static_cast<double>(c.col_sums[j])));
        }
    }
    double value = info / (0.5 * (ha + hb));
    return std::clamp(value, 0.0, 1.0);
}

namespace detail {

// Hungarian algorithm (potentials formulation) on the negated score table,
// padded square so injective partial matchings are handled by zero columns.
double max_assignment_total(const std::vector<std::vector<long>>& table) {
    int rows = static_cast<int>(table.size());
    int cols = rows > 0 ? static_cast<int>(table[0].size()) : 0;
    int n = std::max(rows, cols);
    if (n == 0) return 0.0;

    auto cost = [&](int i, int j) -> double {
        if (i < rows && j < cols) return -static_cast<double>(table[i][j]);
        return 0.0;
    };

    const double inf = std::numeric_limits<double>::infinity();
    std::vector<double> pot_u(n + 1, 0.0), pot_v(n + 1, 0.0);
    std::vector<int> match(n + 1, 0), way(n + 1, 0);
    for (int i = 1; i <= n; ++i) {
        match[0] = i;
        int j0 = 0;
        std::vector<double> minv(n + 1, inf);
        std::vector<char> used(n + 1, 0);
        do {
            used[j0] = 1;
            int i0 = match[j0], j1 = 0;
            double delta = inf;
            for (int j = 1; j <= n; ++j) {
                if (used[j]) continue;
                double cur = cost(i0 - 1, j - 1) - pot_u[i0] - pot_v[j];
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
                    pot_u[match[j]] += delta;
                    pot_v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
        } while (match[j0] != 0);
        do {
            int j1 = way[j0];
            match[j0] = match[j1];
            j0 = j1;
        } while (j0);
    }

    double total = 0.0;
    for (int j = 1; j <= n; ++j) {
        int i = match[j];
        if (i >= 1) total += -cost(i - 1, j - 1);
    }
    return total;
}

} // namespace detail

double matched_accuracy(const std::vector<int>& pred, const std::vector<int>& truth) {
    Contingency c = contingency_of(pred, truth);
    if (c.n == 0)
        throw ValidationError("no scored vertices (all labels missing)");
    return detail::max_assignment_total(c.table) / static_cast<double>(c.n);
}

EvalReport evaluate(const ClusterAssignment& pred, const std::vector<int>& truth) {
    if (pred.labels.size() != truth.size())
        throw ShapeError("assignment and truth labels differ in length");
    EvalReport report;
    report.nmi = nmi(pred.labels, truth);
    report.accuracy = matched_accuracy(pred.labels, truth);

    // contingency indexed by predicted cluster id (all K rows, even empty ones)
    std::map<int, int> tmap;
    for (std::size_t i = 0; i < truth.size(); ++i)
        if (truth[i] >= 0 && pred.labels[i] >= 0) tmap.emplace(truth[i], 0);
    int idx = 0;
    for (auto& [label, slot] : tmap) slot = idx++;
    report.contingency.assign(std::max(pred.k_clusters, 1),
                              std::vector<long>(std::max<std::size_t>(tmap.size(), 1), 0));
    for (std::size_t i = 0; i < truth.size(); ++i) {
        if (truth[i] < 0 || pred.labels[i] < 0) continue;
        ++report.contingency[pred.labels[i]][tmap[truth[i]]];
        ++report.n_scored;
    }
    return report;
}

} // namespace gccfp
