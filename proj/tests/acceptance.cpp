// Acceptance suite: one pass/fail line per criterion. Gating criteria
// contribute to the exit code; REPORT/SKIP lines are informational.

#include "gccfp/error.hpp"
#include "gccfp/eval.hpp"
#include "gccfp/factors.hpp"
#include "gccfp/graph.hpp"
#include "gccfp/kernels.hpp"
#include "gccfp/matrix.hpp"
#include "gccfp/optimizer.hpp"
#include "gccfp/rng.hpp"
#include "gccfp/synthetic.hpp"

#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <map>
#include <random>
#include <string>
#include <vector>

using namespace gccfp;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    std::string status; // PASS, FAIL, REPORT, REPORT-FAIL, SKIP
    std::string name;
    std::string details;
};

std::map<int, Outcome> outcomes;

void gate(int id, const std::string& name, bool pass, const std::string& details) {
    outcomes[id] = {pass ? "PASS" : "FAIL", name, details};
}

void report_only(int id, const std::string& name, bool pass, const std::string& details) {
    outcomes[id] = {pass ? "REPORT" : "REPORT-FAIL", name, details};
}

double now_s() {
    return std::chrono::duration<double>(
               std::chrono::steady_clock::now().time_since_epoch())
        .count();
}

std::string fmt(const char* f, ...) {
    char buf[512];
    va_list args;
    va_start(args, f);
    std::vsnprintf(buf, sizeof buf, f, args);
    va_end(args);
    return buf;
}

CsrMatrix random_sparse(int rows, int cols, double density, std::mt19937_64& rng) {
    std::vector<CooEntry> coo;
    for (int r = 0; r < rows; ++r)
        for (int c = 0; c < cols; ++c)
            if (uniform_unit(rng) <= density) coo.push_back({r, c, uniform_unit(rng)});
    return CsrMatrix::from_coo(rows, cols, std::move(coo));
}

double rel_err(const Matrix& got, const Matrix& want) {
    double worst = 0.0;
    for (int i = 0; i < got.rows(); ++i)
        for (int j = 0; j < got.cols(); ++j) {
            double scale = std::max(std::abs(want(i, j)), 1e-300);
            double err = std::abs(got(i, j) - want(i, j));
            if (err > 1e-30) worst = std::max(worst, err / scale);
        }
    return worst;
}

// --- criterion 1 ------------------------------------------------------------

void criterion_oracle() {
    double t0 = now_s();
    double worst = 0.0;
    for (std::uint64_t seed = 1; seed <= 50; ++seed) {
        std::mt19937_64 rng(seed);
        int n = 4 + static_cast<int>(rng() % 9); // <= 12
        int d = 1 + static_cast<int>(rng() % 3);
        std::vector<int> view_rows;
        int m = 0;
        for (int i = 0; i < d; ++i) {
            int rows = 1 + static_cast<int>(rng() % 4);
            view_rows.push_back(rows);
            m += rows;
        }
        int k = 2 + static_cast<int>(rng() % 2);
        int s = 2 + static_cast<int>(rng() % 2);

        FitData data;
        data.d = random_sparse(n, n, 0.4, rng);
        data.f = random_sparse(m, n, 0.5, rng);
        data.f_t = data.f.transposed();
        data.f_norm_sq = data.f.frob_sq();
        data.d_norm_sq = data.d.frob_sq();
        data.view_offsets.push_back(0);
        for (int rows : view_rows) {
            data.h.push_back(random_sparse(rows, n, 0.5, rng));
            data.h_t.push_back(data.h.back().transposed());
            data.h_norm_sq.push_back(data.h.back().frob_sq());
            data.view_offsets.push_back(data.view_offsets.back() + rows);
        }

        Hyperparams hp;
        hp.k_clusters = k;
        hp.s_dim = s;
        hp.alpha = 0.5 + uniform_unit(rng) * 5.0;
        hp.lambda = 0.1 + uniform_unit(rng) * 2.0;
        hp.delta = 10.0 + uniform_unit(rng) * 1e3;
        LatentFactors f = init_factors(n, view_rows, k, s, seed * 101 + 3);
        GuardPolicy guard;

        worst = std::max(worst, rel_err(update_v(f, data, hp, guard),
                                        oracle_update(UpdateRule::V, f, data, hp)));
        worst = std::max(worst, rel_err(update_u(f, data, hp, guard),
                                        oracle_update(UpdateRule::U, f, data, hp)));
        for (int view = 0; view < d; ++view)
            worst = std::max(worst,
                             rel_err(update_p(f, data, hp, guard, view),
                                     oracle_update(UpdateRule::P, f, data, hp, view)));
        worst = std::max(worst, rel_err(update_x(f, data, hp, guard),
                                        oracle_update(UpdateRule::X, f, data, hp)));
        worst = std::max(worst, rel_err(update_c(f, hp, guard),
                                        oracle_update(UpdateRule::C, f, data, hp)));
        worst = std::max(worst, rel_err(update_w(f, hp, guard),
                                        oracle_update(UpdateRule::W, f, data, hp)));
    }
    double elapsed = now_s() - t0;
    gate(1, "oracle equivalence of all six update rules",
         worst <= 1e-10 && elapsed < 10.0,
         fmt("max rel err %.2e over 50 instances, %.2f s", worst, elapsed));
}

// --- shared planted machinery ------------------------------------------------

PlantedSpec planted_spec(std::uint64_t seed, int n_views) {
    PlantedSpec spec;
    spec.n_vertices = 120;
    spec.k_clusters = 3;
    spec.p_in = 0.3;
    spec.p_out = 0.02;
    for (int i = 0; i < n_views; ++i) spec.views.push_back({3, 0.05});
    spec.seed = seed;
    return spec;
}

Hyperparams default_hp(int k = 3) {
    Hyperparams hp;
    hp.k_clusters = k; // alpha = 5, lambda = 1, delta = 1e5, eps 1e-6 relative
    return hp;
}

struct PlantedRun {
    FitResult result;
    FitData data;
    bool nonneg = true;
    long monotone_violations = 0;
};

PlantedRun run_planted(std::uint64_t seed, int n_views) {
    PlantedRun run;
    run.data = FitData::prepare(generate(planted_spec(seed, n_views)).graph);
    Hyperparams hp = default_hp();
    hp.seed = seed * 13 + 1;
    FitOptions options;
    options.observer = [&](int, const LatentFactors& f, const ObjectiveBreakdown&) {
        run.nonneg = run.nonneg && f.all_nonnegative();
    };
    run.result = fit(run.data, hp, options);
    double prev = run.result.trace.initial.total;
    for (const auto& rec : run.result.trace.iterations) {
        if (rec.objective.total > prev + 1e-9 * std::abs(prev)) ++run.monotone_violations;
        prev = rec.objective.total;
    }
    return run;
}

struct KktStats {
    double v_residual = 0.0; // worst normalized stationarity residual over active V
    double u_ratio_err = 0.0;
};

KktStats kkt_stats(const LatentFactors& f, const FitData& data) {
    using namespace kernels;
    const Hyperparams hp = default_hp();
    const double rho = 1e-6;

    // dO/dV = 4a (V V^T V - D V) + 2 (V U^T U - F^T U) + 2l (V - X C)
    Matrix gv = gemm_tn(f.v, f.v);
    Matrix gu = gemm_tn(f.u, f.u);
    Matrix grad = gemm_nn(f.v, gv);
    Matrix dv = spmm(data.d, f.v);
    Matrix vut = gemm_nn(f.v, gu);
    Matrix ftu = spmm(data.f_t, f.u);
    Matrix xc = gemm_nn(f.x, f.c);
    for (int i = 0; i < grad.rows(); ++i)
        for (int j = 0; j < grad.cols(); ++j)
            grad(i, j) = 4.0 * hp.alpha * (grad(i, j) - dv(i, j)) +
                         2.0 * (vut(i, j) - ftu(i, j)) +
                         2.0 * hp.lambda * (f.v(i, j) - xc(i, j));

    double max_grad = 0.0;
    for (std::size_t i = 0; i < grad.size(); ++i)
        max_grad = std::max(max_grad, std::abs(grad.data()[i]));

    KktStats stats;
    if (max_grad > 0.0) {
        for (int i = 0; i < grad.rows(); ++i)
            for (int j = 0; j < grad.cols(); ++j)
                if (f.v(i, j) > rho)
                    stats.v_residual =
                        std::max(stats.v_residual, std::abs(grad(i, j)) / max_grad);
    }

    Matrix num = spmm(data.f, f.v);
    Matrix pw = gemm_nn(f.p, f.w);
    Matrix den = gemm_nn(f.u, gv);
    for (int i = 0; i < num.rows(); ++i)
        for (int j = 0; j < num.cols(); ++j) {
            if (f.u(i, j) <= rho) continue;
            double ratio = (num(i, j) + pw(i, j)) / (den(i, j) + f.u(i, j) + 1e-12);
            stats.u_ratio_err = std::max(stats.u_ratio_err, std::abs(ratio - 1.0));
        }
    return stats;
}

// --- criteria 4 and 8 ---------------------------------------------------------

double mean_row_peakedness(const Matrix& m) {
    double total = 0.0;
    for (int i = 0; i < m.rows(); ++i) {
        double mx = 0.0, norm_sq = 0.0;
        for (int j = 0; j < m.cols(); ++j) {
            mx = std::max(mx, std::abs(m(i, j)));
            norm_sq += m(i, j) * m(i, j);
        }
        total += norm_sq > 0.0 ? mx / std::sqrt(norm_sq) : 0.0;
    }
    return total / m.rows();
}

void criterion_recovery_and_discreteness() {
    double nmi_sum = 0.0;
    bool cliques_exact = true;
    std::vector<std::uint64_t> seeds{3001, 3002, 3003, 3004, 3005,
                                     3006, 3007, 3008, 3009, 3010};
    double peak_hi = 0.0, peak_lo = 0.0;

    for (std::size_t i = 0; i < seeds.size(); ++i) {
        int n_views = 1 + static_cast<int>(i % 3);
        PlantedGraph pg = generate(planted_spec(seeds[i], n_views));
        FitData data = FitData::prepare(pg.graph);

        Hyperparams hp = default_hp();
        hp.seed = seeds[i];
        FitResult result = fit(data, hp);
        nmi_sum += nmi(extract_clusters(result.factors.v).labels, pg.labels);

        peak_hi += mean_row_peakedness(result.factors.c) +
                   mean_row_peakedness(result.factors.w);
        Hyperparams lo = hp;
        lo.delta = 10.0;
        FitResult low = fit(data, lo);
        peak_lo += mean_row_peakedness(low.factors.c) +
                   mean_row_peakedness(low.factors.w);

        // exact-recovery variant: disjoint cliques with exact indicators
        PlantedSpec clique = planted_spec(seeds[i], n_views);
        clique.p_in = 1.0;
        clique.p_out = 0.0;
        for (auto& view : clique.views) view.flip_noise = 0.0;
        PlantedGraph cpg = generate(clique);
        FitResult cres = fit(FitData::prepare(cpg.graph), hp);
        double cnmi = nmi(extract_clusters(cres.factors.v).labels, cpg.labels);
        cliques_exact = cliques_exact && cnmi == 1.0;
    }
    double mean_nmi = nmi_sum / seeds.size();
    gate(4, "cluster recovery on planted instances", mean_nmi >= 0.90 && cliques_exact,
         fmt("mean nmi %.4f (>= 0.90), clique nmi exactly 1.0: %s", mean_nmi,
             cliques_exact ? "yes" : "no"));

    gate(8, "row peakedness of C and W grows with delta", peak_hi > peak_lo,
         fmt("mean peakedness %.4f at delta=1e5 vs %.4f at delta=10",
             peak_hi / (2.0 * seeds.size()), peak_lo / (2.0 * seeds.size())));
}

// --- criterion 5 ---------------------------------------------------------------

void criterion_zero_injection(bool planted_nonneg) {
    PlantedSpec spec = planted_spec(4242, 2);
    FitData data = FitData::prepare(generate(spec).graph);
    Hyperparams hp = default_hp();
    LatentFactors f =
        init_factors(data.n(), data.view_feature_counts(), hp.k_clusters, hp.s(), 7);
    f.v(0, 0) = 0.0;
    f.v(5, 2) = 0.0;
    f.u(1, 1) = 0.0;
    f.x(2, 0) = 0.0;
    f.p(0, 1) = 0.0;
    f.c(0, 0) = 0.0;
    f.w(1, 2) = 0.0;

    bool zeros_stay = true, nonneg = true;
    for (int sweep = 0; sweep < 5; ++sweep) {
        update_sweep(f, data, hp, GuardPolicy{});
        zeros_stay = zeros_stay && f.v(0, 0) == 0.0 && f.v(5, 2) == 0.0 &&
                     f.u(1, 1) == 0.0 && f.x(2, 0) == 0.0 && f.p(0, 1) == 0.0 &&
                     f.c(0, 0) == 0.0 && f.w(1, 2) == 0.0;
        nonneg = nonneg && f.all_nonnegative();
    }
    gate(5, "nonnegativity and zero absorption", planted_nonneg && zeros_stay && nonneg,
         fmt("factors nonnegative in all runs: %s, injected zeros preserved: %s",
             planted_nonneg && nonneg ? "yes" : "no", zeros_stay ? "yes" : "no"));
}

// --- criterion 6 ---------------------------------------------------------------

void criterion_diffusion() {
    auto one_view = [](int n) {
        ViewFeatures view;
        view.view_index = 1;
        view.n_features = 1;
        view.matrix = CsrMatrix::from_coo(1, n, {{0, 0, 1.0}});
        return view;
    };
    MultiViewGraph k3 = assemble_graph(3, {{0, 1}, {1, 2}, {0, 2}}, {one_view(3)});
    MultiViewGraph p3 = assemble_graph(3, {{0, 1}, {1, 2}}, {one_view(3)});
    MultiViewGraph e2 = assemble_graph(2, {{0, 1}}, {one_view(2)});

    Matrix dk = diffusion_reweight(k3).matrix.to_dense();
    Matrix dp = diffusion_reweight(p3).matrix.to_dense();
    Matrix de = diffusion_reweight(e2).matrix.to_dense();
    bool pass = dk(0, 1) == 1.0 && dk(1, 2) == 1.0 && dk(0, 2) == 1.0 &&
                dk(1, 0) == 1.0 && dp(0, 1) == 0.75 && dp(1, 2) == 0.75 &&
                dp(0, 2) == 0.0 && de(0, 1) == 1.0 && de(1, 0) == 1.0;
    gate(6, "diffusion re-weighting matches hand-derived values", pass,
         fmt("K3 -> %.2f, P3 -> %.2f, edge -> %.2f", dk(0, 1), dp(0, 1), de(0, 1)));
}

// --- criterion 9 ---------------------------------------------------------------

void criterion_scaling() {
    std::vector<int> sizes{100, 200, 400};
    std::vector<double> per_iter_ms;
    for (int n : sizes) {
        PlantedSpec spec;
        spec.n_vertices = n;
        spec.k_clusters = 4;
        spec.p_in = 0.3;
        spec.p_out = 0.02;
        spec.views = {{3, 0.05}};
        spec.seed = 99;
        FitData data = FitData::prepare(generate(spec).graph);
        Hyperparams hp;
        hp.k_clusters = 4;
        hp.t_max = 30;
        hp.epsilon = 1e-300;
        hp.epsilon_mode = EpsilonMode::absolute;

        double best = 1e300;
        for (int rep = 0; rep < 3; ++rep) {
            FitResult result = fit(data, hp);
            double total = 0.0;
            for (const auto& rec : result.trace.iterations) total += rec.wall_ms;
            best = std::min(best, total / result.trace.iterations.size());
        }
        per_iter_ms.push_back(best);
    }
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int n_pts = static_cast<int>(sizes.size());
    for (int i = 0; i < n_pts; ++i) {
        double x = std::log(static_cast<double>(sizes[i]));
        double y = std::log(per_iter_ms[i]);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    double slope = (n_pts * sxy - sx * sy) / (n_pts * sxx - sx * sx);
    report_only(9, "per-iteration wall time scales at most quadratically in N",
                slope <= 2.3,
                fmt("%.3f / %.3f / %.3f ms per iteration, log-log slope %.2f (<= 2.30)",
                    per_iter_ms[0], per_iter_ms[1], per_iter_ms[2], slope));
}

// --- criterion 10 ---------------------------------------------------------------

void criterion_real_data() {
    const char* env = std::getenv("GCCFP_CORNELL_DIR");
    fs::path dir = env ? fs::path(env) : fs::path("data/cornell");
    fs::path edges = dir / "edges.txt";
    if (!fs::exists(edges)) {
        outcomes[10] = {"SKIP", "real-data smoke test",
                        "no dataset at " + dir.string() +
                            "; set GCCFP_CORNELL_DIR to enable"};
        return;
    }
    std::vector<std::string> views;
    for (int i = 0; fs::exists(dir / ("view" + std::to_string(i) + ".txt")); ++i)
        views.push_back((dir / ("view" + std::to_string(i) + ".txt")).string());
    try {
        MultiViewGraph graph = load_graph(edges.string(), views);
        std::vector<int> truth = load_labels((dir / "labels.txt").string());
        Hyperparams hp = default_hp(5);
        FitResult result = fit(FitData::prepare(graph), hp);
        double score = nmi(extract_clusters(result.factors.v).labels, truth);
        report_only(10, "real-data smoke test", result.trace.converged && score > 0.10,
                    fmt("converged: %s, nmi %.4f (> 0.10)",
                        result.trace.converged ? "yes" : "no", score));
    } catch (const std::exception& e) {
        report_only(10, "real-data smoke test", false, e.what());
    }
}

} // namespace

int main() {
    kernels::set_backend(kernels::Backend::parallel);

    try {
        criterion_oracle();

        // criteria 2 and 3 (and inputs to 5 and 7): 20 planted fits
        double t0 = now_s();
        long violations = 0;
        bool all_converged = true;
        bool all_nonneg = true;
        int max_iterations = 0;
        for (int i = 0; i < 20; ++i) {
            PlantedRun run = run_planted(2001 + i, 1 + (i % 3));
            violations += run.monotone_violations;
            all_nonneg = all_nonneg && run.nonneg;
            bool converged_early =
                run.result.trace.converged &&
                static_cast<int>(run.result.trace.iterations.size()) < 300;
            all_converged = all_converged && converged_early;
            max_iterations = std::max(
                max_iterations, static_cast<int>(run.result.trace.iterations.size()));
        }
        double elapsed = now_s() - t0;

        gate(2, "monotone descent over 20 planted runs", violations == 0,
             fmt("%ld violation(s) of O_l <= O_{l-1} + 1e-9 |O_{l-1}|", violations));
        gate(3, "convergence before iteration 300", all_converged && elapsed < 60.0,
             fmt("max iterations %d, total %.1f s (< 60 s)", max_iterations, elapsed));

        // criterion 7 checks the stationarity of converged solutions, so the
        // same instances are run to their numeric plateau rather than to the
        // looser speed-oriented threshold of criterion 3
        double worst_v_residual = 0.0, worst_u_ratio = 0.0;
        bool all_deep_converged = true;
        for (int i = 0; i < 20; ++i) {
            FitData data =
                FitData::prepare(generate(planted_spec(2001 + i, 1 + (i % 3))).graph);
            Hyperparams hp = default_hp();
            hp.seed = (2001 + i) * 13 + 1;
            hp.t_max = 20000;
            hp.epsilon = 1e-30;
            hp.epsilon_mode = EpsilonMode::absolute;
            FitResult deep = fit(data, hp);
            all_deep_converged = all_deep_converged && deep.trace.converged;
            KktStats stats = kkt_stats(deep.factors, data);
            worst_v_residual = std::max(worst_v_residual, stats.v_residual);
            worst_u_ratio = std::max(worst_u_ratio, stats.u_ratio_err);
        }
        gate(7, "KKT residuals at converged solutions",
             all_deep_converged && worst_v_residual <= 1e-3 && worst_u_ratio <= 1e-3,
             fmt("max V residual %.2e, max |U ratio - 1| %.2e", worst_v_residual,
                 worst_u_ratio));

        criterion_recovery_and_discreteness();
        criterion_zero_injection(all_nonneg);
        criterion_diffusion();
        criterion_scaling();
        criterion_real_data();
    } catch (const std::exception& e) {
        std::printf("FAIL   acceptance suite aborted: %s\n", e.what());
        return 99;
    }

    int failures = 0;
    for (const auto& [id, outcome] : outcomes) {
        if (outcome.status == "FAIL") ++failures;
        std::printf("%-11s criterion %2d: %s (%s)\n", outcome.status.c_str(), id,
                    outcome.name.c_str(), outcome.details.c_str());
    }
    std::printf("%d gating criterion failure(s)\n", failures);
    return failures;
}
