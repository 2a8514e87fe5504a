#include "gccfp/factors.hpp"

#include "gccfp/error.hpp"
#include "gccfp/kernels.hpp"
#include "gccfp/rng.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <random>
#include <sstream>
#include <string>

namespace gccfp {

void Hyperparams::validate() const {
    if (alpha < 0.0 || lambda < 0.0 || delta < 0.0)
        throw ValidationError("alpha, lambda, and delta must be nonnegative");
    if (!(epsilon > 0.0))
        throw ValidationError("epsilon must be positive");
    if (k_clusters < 2)
        throw ValidationError("k must be at least 2");
    if (s() < 1)
        throw ValidationError("s must be at least 1");
    if (t_max < 1)
        throw ValidationError("t_max must be at least 1");
}

bool LatentFactors::all_nonnegative() const noexcept {
    return v.min_entry() >= 0.0 && u.min_entry() >= 0.0 && x.min_entry() >= 0.0 &&
           p.min_entry() >= 0.0 && c.min_entry() >= 0.0 && w.min_entry() >= 0.0;
}

bool LatentFactors::all_finite() const noexcept {
    return v.all_finite() && u.all_finite() && x.all_finite() && p.all_finite() &&
           c.all_finite() && w.all_finite();
}

std::vector<int> FitData::view_feature_counts() const {
    std::vector<int> out(h.size());
    for (std::size_t i = 0; i < h.size(); ++i) out[i] = h[i].rows();
    return out;
}

FitData FitData::assemble(const MultiViewGraph& graph, const DiffusionWeights& dw,
                          const PropagatedFeatures& pf) {
    if (pf.per_view.size() != graph.views.size())
        throw ShapeError("propagated views do not match graph views");
    FitData data;
    data.d = dw.matrix;
    data.f = stack_features(graph);
    data.f_t = data.f.transposed();
    data.view_offsets.push_back(0);
    for (const auto& hi : pf.per_view) {
        if (hi.cols() != graph.n_vertices)
            throw ShapeError("propagated view has wrong vertex count");
        data.h.push_back(hi);
        data.h_t.push_back(hi.transposed());
        data.h_norm_sq.push_back(hi.frob_sq());
        data.view_offsets.push_back(data.view_offsets.back() + hi.rows());
    }
    data.d_norm_sq = data.d.frob_sq();
    data.f_norm_sq = data.f.frob_sq();
    return data;
}

FitData FitData::prepare(const MultiViewGraph& graph) {
    DiffusionWeights dw = diffusion_reweight(graph);
    PropagatedFeatures pf = propagate_features(graph, dw);
    return assemble(graph, dw, pf);
}

namespace {

void fill_uniform(Matrix& m, std::mt19937_64& rng, double scale) {
    double* d = m.data();
    for (std::size_t i = 0; i < m.size(); ++i) d[i] = uniform_unit(rng) * scale;
}

} // namespace

LatentFactors init_factors(int n_vertices, const std::vector<int>& view_features, int k,
                           int s, std::uint64_t seed) {
    if (n_vertices < 1 || k < 1 || s < 1 || view_features.empty())
        throw ShapeError("factor dimensions must be positive");
    int m = 0;
    for (int mi : view_features) {
        if (mi < 1) throw ShapeError("every view needs at least one feature");
        m += mi;
    }

    LatentFactors f;
    f.v = Matrix(n_vertices, k);
    f.u = Matrix(m, k);
    f.x = Matrix(n_vertices, s);
    f.p = Matrix(m, s);
    f.c = Matrix(s, k);
    f.w = Matrix(s, k);
    f.view_offsets.push_back(0);
    for (int mi : view_features) f.view_offsets.push_back(f.view_offsets.back() + mi);

    std::mt19937_64 rng(seed);
    double inv_k = 1.0 / std::sqrt(static_cast<double>(k));
    double inv_s = 1.0 / std::sqrt(static_cast<double>(s));
    // fill order is part of the determinism contract
    fill_uniform(f.v, rng, inv_k);
    fill_uniform(f.u, rng, inv_k);
    fill_uniform(f.x, rng, inv_s);
    fill_uniform(f.p, rng, inv_s);
    // C and W start near row-orthonormal (identity plus small positive noise):
    // a uniform start puts the delta-weighted orthogonality penalty two orders
    // of magnitude above the data terms and the resulting burn-off phase
    // destabilizes the early sweeps. Entries stay strictly positive.
    fill_uniform(f.c, rng, 1e-2 * inv_k);
    fill_uniform(f.w, rng, 1e-2 * inv_k);
    for (int i = 0; i < s && i < k; ++i) {
        f.c(i, i) += 1.0;
        f.w(i, i) += 1.0;
    }
    return f;
}

namespace {

double checked(double value, const char* term) {
    if (!std::isfinite(value))
        throw NumericError(term, std::string("objective term ") + term + " is not finite");
    return value;
}

// ||S - A B^T||^2 via the gram expansion; never materializes the dense
// product. Clamped at zero against cancellation once the residual is tiny.
double sparse_residual_sq(const CsrMatrix& s, double s_norm_sq, MatView a, MatView b) {
    double cross = kernels::masked_bilinear_sum(s, a, b);
    Matrix ga = kernels::gemm_tn(a, a);
    Matrix gb = kernels::gemm_tn(b, b);
    double quad = kernels::trace_product(ga, gb);
    double value = s_norm_sq - 2.0 * cross + quad;
    return value < 0.0 ? 0.0 : value;
}

double ortho_penalty_sq(MatView a) {
    Matrix g = kernels::gemm_nt(a, a); // rows x rows gram
    double acc = 0.0;
    for (int i = 0; i < g.rows(); ++i) {
        for (int j = 0; j < g.cols(); ++j) {
            double d = g(i, j) - (i == j ? 1.0 : 0.0);
            acc += d * d;
        }
    }
    return acc;
}

} // namespace

ObjectiveBreakdown objective(const LatentFactors& factors, const FitData& data,
                             const Hyperparams& hp) {
    ObjectiveBreakdown ob;
    ob.feature_term =
        checked(sparse_residual_sq(data.f, data.f_norm_sq, factors.u, factors.v),
                "feature");
    for (int i = 0; i < data.n_views(); ++i) {
        double t = sparse_residual_sq(data.h[i], data.h_norm_sq[i], factors.p_view(i),
                                      factors.x);
        ob.propagation_terms.push_back(
            checked(t, ("propagation view " + std::to_string(i)).c_str()));
    }
    Matrix pw = kernels::gemm_nn(factors.p, factors.w);
    ob.coupling_u = checked(kernels::frob_sq_diff(pw, factors.u), "coupling_u");
    ob.structural = checked(
        hp.alpha * sparse_residual_sq(data.d, data.d_norm_sq, factors.v, factors.v),
        "structural");
    Matrix xc = kernels::gemm_nn(factors.x, factors.c);
    ob.coupling_v =
        checked(hp.lambda * kernels::frob_sq_diff(xc, factors.v), "coupling_v");
    ob.ortho_c = checked(ortho_penalty_sq(factors.c), "ortho_c");
    ob.ortho_w = checked(ortho_penalty_sq(factors.w), "ortho_w");

    ob.total = checked(ob.feature_term + ob.propagation_total() + ob.coupling_u +
                           ob.structural + ob.coupling_v,
                       "total");
    return ob;
}

double relaxed_cw_objective(const LatentFactors& factors, const Hyperparams& hp) {
    Matrix pw = kernels::gemm_nn(factors.p, factors.w);
    Matrix xc = kernels::gemm_nn(factors.x, factors.c);
    double value = kernels::frob_sq_diff(pw, factors.u) +
                   hp.lambda * kernels::frob_sq_diff(xc, factors.v) +
                   hp.delta * (ortho_penalty_sq(factors.c) + ortho_penalty_sq(factors.w));
    return checked(value, "relaxed_cw");
}

namespace {

void write_matrix(std::ostream& out, const char* name, const Matrix& m) {
    out << name << ' ' << m.rows() << ' ' << m.cols() << '\n';
    for (int r = 0; r < m.rows(); ++r) {
        for (int c = 0; c < m.cols(); ++c) {
            if (c) out << ' ';
            out << m(r, c);
        }
        out << '\n';
    }
}

Matrix read_matrix(std::istream& in, const std::string& expect_name) {
    std::string name;
    int rows = 0, cols = 0;
    if (!(in >> name >> rows >> cols) || name != expect_name)
        throw ParseError("factor container: expected matrix \"" + expect_name + "\"");
    if (rows < 0 || cols < 0)
        throw ShapeError("factor container: negative dimensions");
    Matrix m(rows, cols);
    for (int r = 0; r < rows; ++r)
        for (int c = 0; c < cols; ++c)
            if (!(in >> m(r, c)))
                throw ParseError("factor container: truncated values for " + expect_name);
    return m;
}

} // namespace

void save_factors(const LatentFactors& factors, std::ostream& out) {
    out << std::setprecision(17);
    out << "gccfp-factors 1\n";
    out << "views";
    for (int i = 0; i < factors.n_views(); ++i) out << ' ' << factors.view_rows(i);
    out << '\n';
    write_matrix(out, "V", factors.v);
    write_matrix(out, "U", factors.u);
    write_matrix(out, "X", factors.x);
    write_matrix(out, "P", factors.p);
    write_matrix(out, "C", factors.c);
    write_matrix(out, "W", factors.w);
}

void save_factors(const LatentFactors& factors, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path);
    save_factors(factors, out);
    if (!out) throw IoError("failed writing " + path);
}

LatentFactors load_factors(std::istream& in) {
    std::string magic;
    int version = 0;
    if (!(in >> magic >> version) || magic != "gccfp-factors" || version != 1)
        throw ParseError("factor container: bad header");
    std::string tag;
    if (!(in >> tag) || tag != "views")
        throw ParseError("factor container: missing view list");
    std::string rest;
    std::getline(in, rest);
    std::istringstream viewline(rest);
    LatentFactors f;
    f.view_offsets.push_back(0);
    int mi = 0;
    while (viewline >> mi) {
        if (mi < 1) throw ShapeError("factor container: bad view row count");
        f.view_offsets.push_back(f.view_offsets.back() + mi);
    }
    if (f.n_views() < 1)
        throw ShapeError("factor container: needs at least one view");

    f.v = read_matrix(in, "V");
    f.u = read_matrix(in, "U");
    f.x = read_matrix(in, "X");
    f.p = read_matrix(in, "P");
    f.c = read_matrix(in, "C");
    f.w = read_matrix(in, "W");
    if (f.u.rows() != f.view_offsets.back() || f.p.rows() != f.view_offsets.back())
        throw ShapeError("factor container: view list does not match U/P rows");
    if (f.v.cols() != f.u.cols() || f.x.cols() != f.p.cols() ||
        f.c.rows() != f.x.cols() || f.c.cols() != f.v.cols() || !(f.w.rows() == f.c.rows()) ||
        f.w.cols() != f.c.cols())
        throw ShapeError("factor container: inconsistent factor shapes");
    return f;
}

LatentFactors load_factors(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw FileNotFoundError("cannot open " + path);
    return load_factors(in);
}

} // namespace gccfp
