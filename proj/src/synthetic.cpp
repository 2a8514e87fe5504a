#include "gccfp/synthetic.hpp"

#include "gccfp/error.hpp"
#include "gccfp/optimizer.hpp"
#include "gccfp/rng.hpp"

#include <cmath>
#include <random>
#include <string>
#include <utility>

namespace gccfp {

void PlantedSpec::validate() const {
    if (n_vertices < 1)
        throw ValidationError("planted spec: n_vertices must be positive");
    if (k_clusters < 1)
        throw ValidationError("planted spec: k_clusters must be positive");
    if (k_clusters > n_vertices)
        throw ValidationError("planted spec: k_clusters exceeds n_vertices");
    if (!(0.0 <= p_out && p_out < p_in && p_in <= 1.0))
        throw ValidationError("planted spec: need 0 <= p_out < p_in <= 1");
    if (views.empty())
        throw ValidationError("planted spec: at least one view is required");
    for (const auto& v : views) {
        if (v.features_per_cluster < 1)
            throw ValidationError("planted spec: features_per_cluster must be positive");
        if (!(0.0 <= v.flip_noise && v.flip_noise < 0.5))
            throw ValidationError("planted spec: flip_noise must be in [0, 0.5)");
    }
}

PlantedGraph generate(const PlantedSpec& spec) {
    spec.validate();
    std::mt19937_64 rng(spec.seed);

    // contiguous balanced blocks; the first n % k clusters get the extra vertex
    std::vector<int> labels(spec.n_vertices);
    int base = spec.n_vertices / spec.k_clusters;
    int rem = spec.n_vertices % spec.k_clusters;
    int v = 0;
    for (int c = 0; c < spec.k_clusters; ++c) {
        int size = base + (c < rem ? 1 : 0);
        for (int t = 0; t < size; ++t) labels[v++] = c;
    }

    std::vector<std::pair<int, int>> edges;
    for (int i = 0; i < spec.n_vertices; ++i) {
        for (int j = i + 1; j < spec.n_vertices; ++j) {
            double p = labels[i] == labels[j] ? spec.p_in : spec.p_out;
            if (uniform_unit(rng) <= p) edges.emplace_back(i, j);
        }
    }

    std::vector<ViewFeatures> views;
    for (std::size_t vi = 0; vi < spec.views.size(); ++vi) {
        const auto& vs = spec.views[vi];
        int m = vs.features_per_cluster * spec.k_clusters;
        std::vector<CooEntry> coo;
        for (int f = 0; f < m; ++f) {
            int cluster = f / vs.features_per_cluster;
            for (int n = 0; n < spec.n_vertices; ++n) {
                bool bit = labels[n] == cluster;
                if (uniform_unit(rng) <= vs.flip_noise) bit = !bit;
                if (bit) coo.push_back({f, n, 1.0});
            }
        }
        ViewFeatures view;
        view.view_index = static_cast<int>(vi) + 1;
        view.n_features = m;
        view.matrix = CsrMatrix::from_coo(m, spec.n_vertices, std::move(coo));
        views.push_back(std::move(view));
    }

    PlantedGraph out;
    out.graph = assemble_graph(spec.n_vertices, std::move(edges), std::move(views));
    out.labels = std::move(labels);
    return out;
}

namespace {

constexpr int kOracleCap = 32;

// Literal per-entry rule shared by the V/C/W transcriptions.
double quartic_entry(double old, double a, double b, double c, double coef,
                     const GuardPolicy& guard) {
    double den_sq = 4.0 * coef * b;
    if (den_sq <= guard.denom_floor) return old;
    double delta = a * a + 2.0 * den_sq * c;
    double rad = std::sqrt(delta) - a;
    if (guard.clamp_negative_radicand && rad < 0.0) rad = 0.0;
    return old * std::sqrt(rad) / (std::sqrt(den_sq) + guard.denom_floor);
}

double ratio_entry(double old, double num, double den, const GuardPolicy& guard) {
    return old * num / (den + guard.denom_floor);
}

} // namespace

Matrix oracle_update(UpdateRule rule, const LatentFactors& f, const FitData& data,
                     const Hyperparams& hp, int view) {
    if (data.n() > kOracleCap || data.m() > kOracleCap)
        throw SizeError("oracle instances are capped at N, M <= " +
                        std::to_string(kOracleCap));
    if (view < 0 || view >= f.n_views())
        throw ShapeError("oracle view index out of range");

    const GuardPolicy guard; // defaults, matching the optimizer's defaults
    const int n = data.n();
    const int m = data.m();
    const int k = f.v.cols();
    const int s = f.x.cols();
    const Matrix dd = data.d.to_dense();
    const Matrix fd = data.f.to_dense();
    const Matrix& v = f.v;
    const Matrix& u = f.u;
    const Matrix& x = f.x;
    const Matrix& p = f.p;
    const Matrix& c = f.c;
    const Matrix& w = f.w;

    switch (rule) {
        case UpdateRule::V: {
            Matrix out(n, k);
            for (int j = 0; j < n; ++j) {
                for (int kk = 0; kk < k; ++kk) {
                    double a = hp.lambda * v(j, kk);
                    for (int mm = 0; mm < m; ++mm) {
                        double vut = 0.0;
                        for (int ss = 0; ss < k; ++ss) vut += v(j, ss) * u(mm, ss);
                        a += vut * u(mm, kk);
                    }
                    double b = 0.0;
                    for (int l = 0; l < n; ++l) {
                        double vvt = 0.0;
                        for (int ss = 0; ss < k; ++ss) vvt += v(j, ss) * v(l, ss);
                        b += vvt * v(l, kk);
                    }
                    double cc = 0.0;
                    for (int l = 0; l < n; ++l) cc += 2.0 * hp.alpha * dd(j, l) * v(l, kk);
                    for (int mm = 0; mm < m; ++mm) cc += fd(mm, j) * u(mm, kk);
                    for (int ss = 0; ss < s; ++ss) cc += hp.lambda * x(j, ss) * c(ss, kk);
                    out(j, kk) = quartic_entry(v(j, kk), a, b, cc, hp.alpha, guard);
                }
            }
            return out;
        }
        case UpdateRule::U: {
            Matrix out(m, k);
            for (int j = 0; j < m; ++j) {
                for (int kk = 0; kk < k; ++kk) {
                    double num = 0.0;
                    for (int l = 0; l < n; ++l) num += fd(j, l) * v(l, kk);
                    for (int ss = 0; ss < s; ++ss) num += p(j, ss) * w(ss, kk);
                    double den = u(j, kk);
                    for (int l = 0; l < n; ++l) {
                        double uvt = 0.0;
                        for (int ss = 0; ss < k; ++ss) uvt += u(j, ss) * v(l, ss);
                        den += uvt * v(l, kk);
                    }
                    out(j, kk) = ratio_entry(u(j, kk), num, den, guard);
                }
            }
            return out;
        }
        case UpdateRule::P: {
            const int off = f.view_offsets[view];
            const int mi = f.view_rows(view);
            const Matrix hd = data.h[view].to_dense();
            Matrix out(mi, s);
            for (int j = 0; j < mi; ++j) {
                for (int ss = 0; ss < s; ++ss) {
                    double num = 0.0;
                    for (int l = 0; l < n; ++l) num += hd(j, l) * x(l, ss);
                    for (int kk = 0; kk < k; ++kk) num += u(off + j, kk) * w(ss, kk);
                    double den = 0.0;
                    for (int l = 0; l < n; ++l) {
                        double pxt = 0.0;
                        for (int s2 = 0; s2 < s; ++s2) pxt += p(off + j, s2) * x(l, s2);
                        den += pxt * x(l, ss);
                    }
                    for (int kk = 0; kk < k; ++kk) {
                        double pwk = 0.0;
                        for (int s2 = 0; s2 < s; ++s2) pwk += p(off + j, s2) * w(s2, kk);
                        den += pwk * w(ss, kk);
                    }
                    out(j, ss) = ratio_entry(p(off + j, ss), num, den, guard);
                }
            }
            return out;
        }
        case UpdateRule::X: {
            Matrix out(n, s);
            for (int nn = 0; nn < n; ++nn) {
                for (int ss = 0; ss < s; ++ss) {
                    double num = 0.0;
                    for (int i = 0; i < f.n_views(); ++i) {
                        const Matrix hd = data.h[i].to_dense();
                        const int off = f.view_offsets[i];
                        for (int mm = 0; mm < f.view_rows(i); ++mm)
                            num += hd(mm, nn) * p(off + mm, ss);
                    }
                    for (int kk = 0; kk < k; ++kk)
                        num += hp.lambda * v(nn, kk) * c(ss, kk);
                    double den = 0.0;
                    for (int kk = 0; kk < k; ++kk) {
                        double xck = 0.0;
                        for (int s2 = 0; s2 < s; ++s2) xck += x(nn, s2) * c(s2, kk);
                        den += hp.lambda * xck * c(ss, kk);
                    }
                    for (int mm = 0; mm < m; ++mm) {
                        double xpt = 0.0;
                        for (int s2 = 0; s2 < s; ++s2) xpt += x(nn, s2) * p(mm, s2);
                        den += xpt * p(mm, ss);
                    }
                    out(nn, ss) = ratio_entry(x(nn, ss), num, den, guard);
                }
            }
            return out;
        }
        case UpdateRule::C: {
            Matrix out(s, k);
            for (int ss = 0; ss < s; ++ss) {
                for (int kk = 0; kk < k; ++kk) {
                    double a = 0.0;
                    for (int l = 0; l < n; ++l) {
                        double xck = 0.0;
                        for (int s2 = 0; s2 < s; ++s2) xck += x(l, s2) * c(s2, kk);
                        a += x(l, ss) * xck;
                    }
                    a *= hp.lambda;
                    double b = 0.0;
                    for (int s2 = 0; s2 < s; ++s2) {
                        double cct = 0.0;
                        for (int k2 = 0; k2 < k; ++k2) cct += c(ss, k2) * c(s2, k2);
                        b += cct * c(s2, kk);
                    }
                    double cc = 2.0 * hp.delta * c(ss, kk);
                    for (int l = 0; l < n; ++l) cc += hp.lambda * x(l, ss) * v(l, kk);
                    out(ss, kk) = quartic_entry(c(ss, kk), a, b, cc, hp.delta, guard);
                }
            }
            return out;
        }
        case UpdateRule::W: {
            Matrix out(s, k);
            for (int ss = 0; ss < s; ++ss) {
                for (int kk = 0; kk < k; ++kk) {
                    double a = 0.0;
                    for (int mm = 0; mm < m; ++mm) {
                        double pwk = 0.0;
                        for (int s2 = 0; s2 < s; ++s2) pwk += p(mm, s2) * w(s2, kk);
                        a += p(mm, ss) * pwk;
                    }
                    double b = 0.0;
                    for (int s2 = 0; s2 < s; ++s2) {
                        double wwt = 0.0;
                        for (int k2 = 0; k2 < k; ++k2) wwt += w(ss, k2) * w(s2, k2);
                        b += wwt * w(s2, kk);
                    }
                    double cc = 2.0 * hp.delta * w(ss, kk);
                    for (int mm = 0; mm < m; ++mm) cc += p(mm, ss) * u(mm, kk);
                    out(ss, kk) = quartic_entry(w(ss, kk), a, b, cc, hp.delta, guard);
                }
            }
            return out;
        }
    }
    throw InternalError("unknown update rule");
}

} // namespace gccfp
