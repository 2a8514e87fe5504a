#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "gccfp/error.hpp"
#include "gccfp/factors.hpp"
#include "gccfp/kernels.hpp"
#include "gccfp/optimizer.hpp"
#include "gccfp/rng.hpp"
#include "gccfp/synthetic.hpp"

#include <cmath>
#include <random>
#include <sstream>

using namespace gccfp;

namespace {

CsrMatrix random_sparse(int rows, int cols, double density, std::mt19937_64& rng) {
    std::vector<CooEntry> coo;
    for (int r = 0; r < rows; ++r)
        for (int c = 0; c < cols; ++c)
            if (uniform_unit(rng) <= density) coo.push_back({r, c, uniform_unit(rng)});
    return CsrMatrix::from_coo(rows, cols, std::move(coo));
}

struct Instance {
    LatentFactors factors;
    FitData data;
    Hyperparams hp;
};

Instance random_instance(std::uint64_t seed, int n_views = 2) {
    std::mt19937_64 rng(seed);
    int n = 3 + static_cast<int>(rng() % 8);
    int k = 2 + static_cast<int>(rng() % 2);
    int s = 2 + static_cast<int>(rng() % 2);
    std::vector<int> view_rows;
    for (int i = 0; i < n_views; ++i) view_rows.push_back(1 + static_cast<int>(rng() % 5));

    Instance inst;
    inst.factors = init_factors(n, view_rows, k, s, seed * 31 + 7);
    inst.data.d = random_sparse(n, n, 0.4, rng);
    int m = 0;
    inst.data.view_offsets.push_back(0);
    for (int rows : view_rows) {
        inst.data.h.push_back(random_sparse(rows, n, 0.5, rng));
        inst.data.h_t.push_back(inst.data.h.back().transposed());
        inst.data.h_norm_sq.push_back(inst.data.h.back().frob_sq());
        inst.data.view_offsets.push_back(inst.data.view_offsets.back() + rows);
        m += rows;
    }
    inst.data.f = random_sparse(m, n, 0.5, rng);
    inst.data.f_t = inst.data.f.transposed();
    inst.data.f_norm_sq = inst.data.f.frob_sq();
    inst.data.d_norm_sq = inst.data.d.frob_sq();

    inst.hp.k_clusters = k;
    inst.hp.s_dim = s;
    inst.hp.alpha = 0.5 + uniform_unit(rng) * 4.0;
    inst.hp.lambda = 0.1 + uniform_unit(rng) * 2.0;
    inst.hp.delta = 10.0 + uniform_unit(rng) * 100.0;
    return inst;
}

void check_close(const Matrix& got, const Matrix& want, double rel) {
    REQUIRE(got.rows() == want.rows());
    REQUIRE(got.cols() == want.cols());
    for (int i = 0; i < got.rows(); ++i)
        for (int j = 0; j < got.cols(); ++j) {
            double scale = std::max({std::abs(want(i, j)), std::abs(got(i, j)), 1e-30});
            CHECK(std::abs(got(i, j) - want(i, j)) / scale <= rel);
        }
}

} // namespace

TEST_CASE("vectorized rules match the scalar-loop oracle") {
    GuardPolicy guard;
    for (std::uint64_t seed = 1; seed <= 8; ++seed) {
        Instance inst = random_instance(seed, 1 + static_cast<int>(seed % 3));
        check_close(update_v(inst.factors, inst.data, inst.hp, guard),
                    oracle_update(UpdateRule::V, inst.factors, inst.data, inst.hp), 1e-10);
        check_close(update_u(inst.factors, inst.data, inst.hp, guard),
                    oracle_update(UpdateRule::U, inst.factors, inst.data, inst.hp), 1e-10);
        for (int view = 0; view < inst.factors.n_views(); ++view)
            check_close(update_p(inst.factors, inst.data, inst.hp, guard, view),
                        oracle_update(UpdateRule::P, inst.factors, inst.data, inst.hp, view),
                        1e-10);
        check_close(update_x(inst.factors, inst.data, inst.hp, guard),
                    oracle_update(UpdateRule::X, inst.factors, inst.data, inst.hp), 1e-10);
        check_close(update_c(inst.factors, inst.hp, guard),
                    oracle_update(UpdateRule::C, inst.factors, inst.data, inst.hp), 1e-10);
        check_close(update_w(inst.factors, inst.hp, guard),
                    oracle_update(UpdateRule::W, inst.factors, inst.data, inst.hp), 1e-10);
    }
}

TEST_CASE("exact zeros are absorbing for every rule") {
    GuardPolicy guard;
    Instance inst = random_instance(42);
    inst.factors.v(0, 0) = 0.0;
    inst.factors.u(1, 1) = 0.0;
    inst.factors.x(0, 1) = 0.0;
    inst.factors.p(0, 0) = 0.0;
    inst.factors.c(0, 0) = 0.0;
    inst.factors.w(1, 0) = 0.0;

    CHECK(update_v(inst.factors, inst.data, inst.hp, guard)(0, 0) == 0.0);
    CHECK(update_u(inst.factors, inst.data, inst.hp, guard)(1, 1) == 0.0);
    CHECK(update_p(inst.factors, inst.data, inst.hp, guard, 0)(0, 0) == 0.0);
    CHECK(update_x(inst.factors, inst.data, inst.hp, guard)(0, 1) == 0.0);
    CHECK(update_c(inst.factors, inst.hp, guard)(0, 0) == 0.0);
    CHECK(update_w(inst.factors, inst.hp, guard)(1, 0) == 0.0);
}

TEST_CASE("updates preserve nonnegativity and finiteness") {
    GuardPolicy guard;
    for (std::uint64_t seed = 100; seed < 106; ++seed) {
        Instance inst = random_instance(seed);
        for (int sweep = 0; sweep < 5; ++sweep) {
            update_sweep(inst.factors, inst.data, inst.hp, guard);
            CHECK(inst.factors.all_nonnegative());
            CHECK(inst.factors.all_finite());
        }
    }
}

TEST_CASE("U update is a fixed point when numerator equals denominator") {
    Instance inst = random_instance(7);
    // with V = 0: numerator is P W, denominator is U; set U := P W
    inst.factors.v = Matrix(inst.factors.v.rows(), inst.factors.v.cols());
    inst.factors.u = kernels::gemm_nn(inst.factors.p, inst.factors.w);
    Matrix next = update_u(inst.factors, inst.data, inst.hp, GuardPolicy{});
    for (int i = 0; i < next.rows(); ++i)
        for (int j = 0; j < next.cols(); ++j)
            CHECK(next(i, j) ==
                  doctest::Approx(inst.factors.u(i, j)).epsilon(1e-9));
}

TEST_CASE("W update steps shrink as delta grows") {
    // with row-orthonormal W the orthogonality term is already satisfied, so
    // the remaining drift comes from the data pull, which the penalty damps
    Instance inst = random_instance(55);
    int s = inst.factors.w.rows();
    int k = inst.factors.w.cols();
    inst.factors.w = Matrix(s, k);
    for (int i = 0; i < s && i < k; ++i) inst.factors.w(i, i) = 1.0;

    GuardPolicy guard;
    Hyperparams lo = inst.hp, hi = inst.hp;
    lo.delta = 1e3;
    hi.delta = 1e5;
    Matrix w_lo = update_w(inst.factors, lo, guard);
    Matrix w_hi = update_w(inst.factors, hi, guard);
    double step_lo = kernels::frob_sq_diff(w_lo, inst.factors.w);
    double step_hi = kernels::frob_sq_diff(w_hi, inst.factors.w);
    CHECK(step_hi < step_lo);
}

TEST_CASE("fit runs exactly one sweep when t_max = 1") {
    PlantedSpec spec;
    spec.n_vertices = 24;
    spec.k_clusters = 3;
    spec.p_in = 0.6;
    spec.p_out = 0.05;
    spec.views = {{2, 0.05}};
    spec.seed = 3;
    FitData data = FitData::prepare(generate(spec).graph);

    Hyperparams hp;
    hp.k_clusters = 3;
    hp.t_max = 1;
    FitResult result = fit(data, hp);
    CHECK(result.trace.iterations.size() == 1);
    CHECK(result.trace.iterations[0].iteration == 1);
}

TEST_CASE("fit is deterministic for a fixed seed and input") {
    PlantedSpec spec;
    spec.n_vertices = 30;
    spec.k_clusters = 3;
    spec.p_in = 0.5;
    spec.p_out = 0.05;
    spec.views = {{3, 0.05}};
    spec.seed = 12;
    FitData data = FitData::prepare(generate(spec).graph);

    Hyperparams hp;
    hp.k_clusters = 3;
    hp.t_max = 40;
    FitResult a = fit(data, hp);
    FitResult b = fit(data, hp);
    REQUIRE(a.trace.iterations.size() == b.trace.iterations.size());
    for (std::size_t i = 0; i < a.trace.iterations.size(); ++i)
        CHECK(a.trace.iterations[i].objective.total ==
              b.trace.iterations[i].objective.total);
    CHECK(a.factors.v == b.factors.v);
    CHECK(a.factors.w == b.factors.w);

    Hyperparams hp2 = hp;
    hp2.seed = hp.seed + 1;
    FitResult c = fit(data, hp2);
    CHECK(c.trace.initial.total != a.trace.initial.total);
}

TEST_CASE("fit descends on a planted instance") {
    PlantedSpec spec;
    spec.n_vertices = 60;
    spec.k_clusters = 3;
    spec.p_in = 0.3;
    spec.p_out = 0.02;
    spec.views = {{3, 0.05}};
    spec.seed = 17;
    FitData data = FitData::prepare(generate(spec).graph);

    Hyperparams hp;
    hp.k_clusters = 3;
    bool nonneg_everywhere = true;
    FitOptions options;
    options.observer = [&](int, const LatentFactors& f, const ObjectiveBreakdown&) {
        nonneg_everywhere = nonneg_everywhere && f.all_nonnegative();
    };
    FitResult result = fit(data, hp, options);

    CHECK(result.trace.final_total() < result.trace.initial.total);
    CHECK(nonneg_everywhere);

    double prev = result.trace.initial.total;
    for (const auto& rec : result.trace.iterations) {
        CHECK(rec.objective.total <= prev + 1e-9 * std::abs(prev));
        CHECK(rec.delta == doctest::Approx(prev - rec.objective.total));
        prev = rec.objective.total;
    }
    CHECK(result.trace.converged);
    CHECK(result.trace.stop_reason == StopReason::threshold);
    CHECK(result.trace.iterations.back().delta <= result.trace.epsilon_used);
}

TEST_CASE("absolute and relative epsilon modes") {
    PlantedSpec spec;
    spec.n_vertices = 24;
    spec.k_clusters = 2;
    spec.p_in = 0.5;
    spec.p_out = 0.05;
    spec.views = {{2, 0.0}};
    spec.seed = 2;
    FitData data = FitData::prepare(generate(spec).graph);

    Hyperparams hp;
    hp.k_clusters = 2;
    hp.epsilon = 1e-3;
    hp.epsilon_mode = EpsilonMode::absolute;
    FitResult abs_fit = fit(data, hp);
    CHECK(abs_fit.trace.epsilon_used == 1e-3);

    hp.epsilon_mode = EpsilonMode::relative;
    FitResult rel_fit = fit(data, hp);
    CHECK(rel_fit.trace.epsilon_used ==
          doctest::Approx(1e-3 * rel_fit.trace.initial.total));
}

TEST_CASE("numeric blowup trips the guard and returns the last finite state") {
    Instance inst = random_instance(77);
    inst.hp.delta = 1e300; // quartic W/C terms overflow on the first sweep
    inst.hp.t_max = 10;

    // route through fit(): build a FitData-compatible seed state
    FitResult result = fit(inst.data, inst.hp);
    CHECK_FALSE(result.trace.converged);
    CHECK(result.trace.stop_reason == StopReason::numeric_guard);
    CHECK(result.factors.all_finite());
}

TEST_CASE("trace CSV has a header, an initial row, and one row per iteration") {
    PlantedSpec spec;
    spec.n_vertices = 20;
    spec.k_clusters = 2;
    spec.p_in = 0.5;
    spec.p_out = 0.1;
    spec.views = {{2, 0.0}};
    spec.seed = 6;
    FitData data = FitData::prepare(generate(spec).graph);
    Hyperparams hp;
    hp.k_clusters = 2;
    hp.t_max = 5;
    hp.epsilon = 1e-300;
    hp.epsilon_mode = EpsilonMode::absolute;
    FitResult result = fit(data, hp);

    std::stringstream out;
    write_trace_csv(result.trace, out);
    std::string line;
    std::getline(out, line);
    CHECK(line ==
          "iteration,total,feature,prop_view0,coupling_u,structural,coupling_v,ortho_c,"
          "ortho_w,delta,wall_ms");
    int rows = 0;
    while (std::getline(out, line))
        if (!line.empty()) ++rows;
    CHECK(rows == static_cast<int>(result.trace.iterations.size()) + 1);
}

TEST_CASE("checkpoint callback fires on the configured cadence") {
    PlantedSpec spec;
    spec.n_vertices = 20;
    spec.k_clusters = 2;
    spec.p_in = 0.5;
    spec.p_out = 0.1;
    spec.views = {{2, 0.0}};
    spec.seed = 8;
    FitData data = FitData::prepare(generate(spec).graph);
    Hyperparams hp;
    hp.k_clusters = 2;
    hp.t_max = 7;
    hp.epsilon = 1e-300;
    hp.epsilon_mode = EpsilonMode::absolute;

    std::vector<int> fired;
    FitOptions options;
    options.checkpoint_every = 3;
    options.checkpoint = [&](int iteration, const LatentFactors&) {
        fired.push_back(iteration);
    };
    FitResult result = fit(data, hp, options);
    (void)result;
    CHECK(fired == std::vector<int>{3, 6});
}
