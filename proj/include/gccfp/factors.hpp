#pragma once

#include "gccfp/graph.hpp"
#include "gccfp/matrix.hpp"

#include <cstdint>
#include <iosfwd>
#include <vector>

namespace gccfp {

enum class EpsilonMode { absolute, relative };

struct Hyperparams {
    double alpha = 5.0;  // structural weight
    double lambda = 1.0; // propagation-regularizer weight
    double delta = 1e5;  // orthogonality penalty
    int k_clusters = 2;
    int s_dim = 0; // 0 means "match k_clusters"
    int t_max = 300;
    double epsilon = 1e-6;
    EpsilonMode epsilon_mode = EpsilonMode::relative;
    std::uint64_t seed = 42;

    int s() const noexcept { return s_dim > 0 ? s_dim : k_clusters; }
    void validate() const;
};

/// The six factor matrices. P^i blocks are stored stacked row-wise in `p`
/// (view order), addressed through view_offsets; they concatenate to the
/// global M x S matrix by construction. All entries stay >= 0 for the whole
/// life of a fit.
struct LatentFactors {
    Matrix v; // N x K  cluster membership
    Matrix u; // M x K  feature-cluster contribution
    Matrix x; // N x S  vertex-propagation preference
    Matrix p; // M x S  feature-propagation contribution, views stacked
    Matrix c; // S x K
    Matrix w; // S x K
    std::vector<int> view_offsets; // size D+1, row offsets into p and u

    int n_views() const noexcept { return static_cast<int>(view_offsets.size()) - 1; }
    int view_rows(int i) const noexcept { return view_offsets[i + 1] - view_offsets[i]; }
    MatView p_view(int i) const noexcept {
        return {p.row(view_offsets[i]), view_rows(i), p.cols()};
    }
    MatView u_view(int i) const noexcept {
        return {u.row(view_offsets[i]), view_rows(i), u.cols()};
    }

    bool all_nonnegative() const noexcept;
    bool all_finite() const noexcept;
};

/// Every term of the unified objective, evaluated exactly. `total` sums the
/// five data terms; the two orthogonality penalties are tracked separately
/// and excluded from the convergence statistic.
struct ObjectiveBreakdown {
    double total = 0.0;
    double feature_term = 0.0;                 // ||F - U V^T||_F^2
    std::vector<double> propagation_terms;     // ||H^i - P^i X^T||_F^2 per view
    double coupling_u = 0.0;                   // ||P W - U||_F^2
    double structural = 0.0;                   // alpha ||D - V V^T||_F^2
    double coupling_v = 0.0;                   // lambda ||X C - V||_F^2
    double ortho_c = 0.0;                      // ||C C^T - I||_F^2
    double ortho_w = 0.0;                      // ||W W^T - I||_F^2

    double propagation_total() const noexcept {
        double s = 0.0;
        for (double t : propagation_terms) s += t;
        return s;
    }
};

/// Preprocessed inputs consumed by the objective and the update rules:
/// the re-weighted adjacency D (in place of the binary Y), the stacked
/// features F, the propagated views H^i, and transposes of the static
/// sparse matrices so every per-iteration product walks rows forward.
struct FitData {
    CsrMatrix d;   // N x N
    CsrMatrix f;   // M x N
    CsrMatrix f_t; // N x M
    std::vector<CsrMatrix> h;   // M^i x N per view
    std::vector<CsrMatrix> h_t; // N x M^i per view
    std::vector<int> view_offsets;
    double d_norm_sq = 0.0;
    double f_norm_sq = 0.0;
    std::vector<double> h_norm_sq;

    int n() const noexcept { return d.rows(); }
    int m() const noexcept { return f.rows(); }
    int n_views() const noexcept { return static_cast<int>(h.size()); }
    std::vector<int> view_feature_counts() const;

    static FitData assemble(const MultiViewGraph& graph, const DiffusionWeights& dw,
                            const PropagatedFeatures& pf);
    static FitData prepare(const MultiViewGraph& graph);
};

/// Fills every factor with uniform draws from (0, 1] scaled by 1/sqrt(K)
/// (V, U, C, W) or 1/sqrt(S) (X, P), fully determined by the seed.
LatentFactors init_factors(int n_vertices, const std::vector<int>& view_features, int k,
                           int s, std::uint64_t seed);

/// Evaluates all objective terms; throws NumericError naming the first
/// non-finite term.
ObjectiveBreakdown objective(const LatentFactors& factors, const FitData& data,
                             const Hyperparams& hp);

/// ||P W - U||^2 + lambda ||X C - V||^2 + delta (||C C^T - I||^2 + ||W W^T - I||^2).
double relaxed_cw_objective(const LatentFactors& factors, const Hyperparams& hp);

// Text container with a shape header and row-major values; used for
// checkpoints and the evaluation CLI.
void save_factors(const LatentFactors& factors, std::ostream& out);
void save_factors(const LatentFactors& factors, const std::string& path);
LatentFactors load_factors(std::istream& in);
LatentFactors load_factors(const std::string& path);

} // namespace gccfp
