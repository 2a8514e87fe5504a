#include "gccfp/optimizer.hpp"

#include "gccfp/error.hpp"
#include "gccfp/kernels.hpp"

#include <chrono>
#include <cmath>
#include <cstring>
#include <ostream>

namespace gccfp {

const char* to_string(StopReason reason) noexcept {
    switch (reason) {
        case StopReason::threshold: return "threshold";
        case StopReason::t_max: return "t_max";
        case StopReason::numeric_guard: return "numeric_guard";
    }
    return "unknown";
}

namespace {

// out = old * num / (den + floor), elementwise.
Matrix ratio_update(const Matrix& old, const Matrix& num, const Matrix& den,
                    const GuardPolicy& guard) {
    Matrix out(old.rows(), old.cols());
    const double* po = old.data();
    const double* pn = num.data();
    const double* pd = den.data();
    double* pr = out.data();
    for (std::size_t i = 0; i < out.size(); ++i)
        pr[i] = po[i] * pn[i] / (pd[i] + guard.denom_floor);
    return out;
}

// out = old * sqrt(sqrt(a^2 + 2*den_sq*c) - a) / sqrt(den_sq), with
// den_sq = 4*coef*b. The numerator radicand is evaluated as
// t / (sqrt(a^2 + t) + a) with t = 2*den_sq*c, which is algebraically equal
// to sqrt(a^2 + t) - a but does not cancel when t is small. Entries whose
// denominator vanishes keep their prior value.
Matrix quartic_root_update(const Matrix& old, const Matrix& a, const Matrix& b,
                           const Matrix& c, double coef, const GuardPolicy& guard) {
    Matrix out(old.rows(), old.cols());
    const double* po = old.data();
    const double* pa = a.data();
    const double* pb = b.data();
    const double* pc = c.data();
    double* pr = out.data();
    for (std::size_t i = 0; i < out.size(); ++i) {
        double den_sq = 4.0 * coef * pb[i];
        if (den_sq <= guard.denom_floor) {
            pr[i] = po[i];
            continue;
        }
        double t = 2.0 * den_sq * pc[i];
        double rad = t == 0.0 ? 0.0 : t / (std::sqrt(pa[i] * pa[i] + t) + pa[i]);
        if (guard.clamp_negative_radicand && rad < 0.0) rad = 0.0;
        pr[i] = po[i] * std::sqrt(rad) / (std::sqrt(den_sq) + guard.denom_floor);
    }
    return out;
}

void add_scaled(Matrix& dst, const Matrix& src, double scale) {
    double* d = dst.data();
    const double* s = src.data();
    for (std::size_t i = 0; i < dst.size(); ++i) d[i] += scale * s[i];
}

} // namespace

Matrix update_v(const LatentFactors& f, const FitData& data, const Hyperparams& hp,
                const GuardPolicy& guard) {
    using namespace kernels;
    Matrix gu = gemm_tn(f.u, f.u); // U^T U, K x K
    Matrix gv = gemm_tn(f.v, f.v); // V^T V, K x K

    Matrix a = gemm_nn(f.v, gu); // V U^T U
    add_scaled(a, f.v, hp.lambda);

    Matrix b = gemm_nn(f.v, gv); // V V^T V

    Matrix c = spmm(data.d, f.v); // D V
    for (std::size_t i = 0; i < c.size(); ++i) c.data()[i] *= 2.0 * hp.alpha;
    Matrix ftu = spmm(data.f_t, f.u); // F^T U
    add_scaled(c, ftu, 1.0);
    Matrix xc = gemm_nn(f.x, f.c); // X C
    add_scaled(c, xc, hp.lambda);

    return quartic_root_update(f.v, a, b, c, hp.alpha, guard);
}

Matrix update_u(const LatentFactors& f, const FitData& data, const Hyperparams&,
                const GuardPolicy& guard) {
    using namespace kernels;
    Matrix num = spmm(data.f, f.v); // F V
    Matrix pw = gemm_nn(f.p, f.w);  // P W
    add_scaled(num, pw, 1.0);

    Matrix gv = gemm_tn(f.v, f.v);
    Matrix den = gemm_nn(f.u, gv); // U V^T V
    add_scaled(den, f.u, 1.0);

    return ratio_update(f.u, num, den, guard);
}

Matrix update_p(const LatentFactors& f, const FitData& data, const Hyperparams&,
                const GuardPolicy& guard, int view) {
    using namespace kernels;
    MatView pi = f.p_view(view);
    Matrix old(pi.rows, pi.cols);
    std::memcpy(old.data(), pi.data, sizeof(double) * old.size());

    Matrix num = spmm(data.h[view], f.x); // H^i X
    Matrix uw = gemm_nt(f.u_view(view), f.w); // U^i W^T
    add_scaled(num, uw, 1.0);

    Matrix gx = gemm_tn(f.x, f.x); // X^T X, S x S
    Matrix gw = gemm_nt(f.w, f.w); // W W^T, S x S
    add_scaled(gx, gw, 1.0);
    Matrix den = gemm_nn(pi, gx); // P^i (X^T X + W W^T)

    return ratio_update(old, num, den, guard);
}

Matrix update_x(const LatentFactors& f, const FitData& data, const Hyperparams& hp,
                const GuardPolicy& guard) {
    using namespace kernels;
    Matrix num(f.x.rows(), f.x.cols());
    for (int i = 0; i < data.n_views(); ++i) {
        Matrix hp_i = spmm(data.h_t[i], f.p_view(i)); // H^i^T P^i
        add_scaled(num, hp_i, 1.0);
    }
    Matrix vct = gemm_nt(f.v, f.c); // V C^T, N x S
    add_scaled(num, vct, hp.lambda);

    Matrix gc = gemm_nt(f.c, f.c); // C C^T, S x S
    Matrix gp = gemm_tn(f.p, f.p); // P^T P = sum_i P^i^T P^i, S x S
    for (std::size_t i = 0; i < gc.size(); ++i)
        gc.data()[i] = hp.lambda * gc.data()[i] + gp.data()[i];
    Matrix den = gemm_nn(f.x, gc);

    return ratio_update(f.x, num, den, guard);
}

Matrix update_c(const LatentFactors& f, const Hyperparams& hp, const GuardPolicy& guard) {
    using namespace kernels;
    Matrix gx = gemm_tn(f.x, f.x); // X^T X, S x S
    Matrix a = gemm_nn(gx, f.c);   // X^T X C
    for (std::size_t i = 0; i < a.size(); ++i) a.data()[i] *= hp.lambda;

    Matrix gcc = gemm_tn(f.c, f.c); // C^T C, K x K
    Matrix b = gemm_nn(f.c, gcc);   // C C^T C

    Matrix c = gemm_tn(f.x, f.v); // X^T V, S x K
    for (std::size_t i = 0; i < c.size(); ++i)
        c.data()[i] = 2.0 * hp.delta * f.c.data()[i] + hp.lambda * c.data()[i];

    return quartic_root_update(f.c, a, b, c, hp.delta, guard);
}

Matrix update_w(const LatentFactors& f, const Hyperparams& hp, const GuardPolicy& guard) {
    using namespace kernels;
    Matrix gp = gemm_tn(f.p, f.p); // P^T P, S x S
    Matrix a = gemm_nn(gp, f.w);   // P^T P W

    Matrix gww = gemm_tn(f.w, f.w); // W^T W, K x K
    Matrix b = gemm_nn(f.w, gww);   // W W^T W

    Matrix c = gemm_tn(f.p, f.u); // P^T U, S x K
    for (std::size_t i = 0; i < c.size(); ++i)
        c.data()[i] = 2.0 * hp.delta * f.w.data()[i] + c.data()[i];

    return quartic_root_update(f.w, a, b, c, hp.delta, guard);
}

void update_sweep(LatentFactors& f, const FitData& data, const Hyperparams& hp,
                  const GuardPolicy& guard) {
    f.v = update_v(f, data, hp, guard);
    f.u = update_u(f, data, hp, guard);
    for (int i = 0; i < f.n_views(); ++i) {
        Matrix pi = update_p(f, data, hp, guard, i);
        std::memcpy(f.p.row(f.view_offsets[i]), pi.data(), sizeof(double) * pi.size());
    }
    f.x = update_x(f, data, hp, guard);
    f.c = update_c(f, hp, guard);
    f.w = update_w(f, hp, guard);
}

FitResult fit(const FitData& data, const Hyperparams& hp, const FitOptions& options) {
    hp.validate();

    FitResult result;
    result.factors =
        init_factors(data.n(), data.view_feature_counts(), hp.k_clusters, hp.s(), hp.seed);
    result.trace.initial = objective(result.factors, data, hp);
    result.trace.epsilon_used = hp.epsilon_mode == EpsilonMode::relative
                                    ? hp.epsilon * result.trace.initial.total
                                    : hp.epsilon;

    LatentFactors last_good = result.factors;
    double prev_total = result.trace.initial.total;

    for (int l = 1; l <= hp.t_max; ++l) {
        auto t0 = std::chrono::steady_clock::now();
        update_sweep(result.factors, data, hp, options.guard);

        ObjectiveBreakdown ob;
        bool finite = result.factors.all_finite();
        if (finite) {
            try {
                ob = objective(result.factors, data, hp);
            } catch (const NumericError&) {
                finite = false;
            }
        }
        if (!finite) {
            result.factors = last_good; // best-so-far state
            result.trace.converged = false;
            result.trace.stop_reason = StopReason::numeric_guard;
            return result;
        }
        auto t1 = std::chrono::steady_clock::now();

        IterationRecord rec;
        rec.iteration = l;
        rec.objective = ob;
        rec.delta = prev_total - ob.total;
        rec.wall_ms = std::chrono::duration<double, std::milli>(t1 - t0).count();
        result.trace.iterations.push_back(rec);

        if (options.observer) options.observer(l, result.factors, ob);
        if (options.checkpoint && options.checkpoint_every > 0 &&
            l % options.checkpoint_every == 0)
            options.checkpoint(l, result.factors);

        last_good = result.factors;
        prev_total = ob.total;

        if (rec.delta <= result.trace.epsilon_used) {
            result.trace.converged = true;
            result.trace.stop_reason = StopReason::threshold;
            return result;
        }
    }
    result.trace.converged = false;
    result.trace.stop_reason = StopReason::t_max;
    return result;
}

FitResult fit(const MultiViewGraph& graph, const Hyperparams& hp,
              const FitOptions& options) {
    return fit(FitData::prepare(graph), hp, options);
}

void write_trace_csv(const FitTrace& trace, std::ostream& out) {
    int n_views = static_cast<int>(trace.initial.propagation_terms.size());
    out << "iteration,total,feature";
    for (int i = 0; i < n_views; ++i) out << ",prop_view" << i;
    out << ",coupling_u,structural,coupling_v,ortho_c,ortho_w,delta,wall_ms\n";
    out.precision(17);

    auto row = [&](int iteration, const ObjectiveBreakdown& ob, double delta,
                   double wall_ms) {
        out << iteration << ',' << ob.total << ',' << ob.feature_term;
        for (double t : ob.propagation_terms) out << ',' << t;
        out << ',' << ob.coupling_u << ',' << ob.structural << ',' << ob.coupling_v << ','
            << ob.ortho_c << ',' << ob.ortho_w << ',' << delta << ',' << wall_ms << '\n';
    };
    row(0, trace.initial, 0.0, 0.0);
    for (const auto& rec : trace.iterations)
        row(rec.iteration, rec.objective, rec.delta, rec.wall_ms);
}

} // namespace gccfp
