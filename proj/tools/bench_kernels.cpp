// Compares the serial reference kernels against the OpenMP versions, then
// times one full update sweep under each backend. Verifies bit-identical
// results while timing.

#include "gccfp/factors.hpp"
#include "gccfp/kernels.hpp"
#include "gccfp/matrix.hpp"
#include "gccfp/optimizer.hpp"
#include "gccfp/rng.hpp"
#include "gccfp/synthetic.hpp"

#include <omp.h>

#include <cstdio>
#include <functional>
#include <random>
#include <string>

using namespace gccfp;

namespace {

Matrix random_matrix(int rows, int cols, std::mt19937_64& rng) {
    Matrix m(rows, cols);
    for (std::size_t i = 0; i < m.size(); ++i) m.data()[i] = uniform_unit(rng);
    return m;
}

CsrMatrix random_sparse(int rows, int cols, double density, std::mt19937_64& rng) {
    std::vector<CooEntry> coo;
    for (int r = 0; r < rows; ++r)
        for (int c = 0; c < cols; ++c)
            if (uniform_unit(rng) <= density) coo.push_back({r, c, uniform_unit(rng)});
    return CsrMatrix::from_coo(rows, cols, std::move(coo));
}

double time_ms(const std::function<void()>& fn, int reps) {
    double best = 1e300;
    for (int r = 0; r < reps; ++r) {
        double t0 = omp_get_wtime();
        fn();
        double t1 = omp_get_wtime();
        best = std::min(best, (t1 - t0) * 1e3);
    }
    return best;
}

void report(const char* name, double serial_ms, double parallel_ms, bool identical) {
    std::printf("%-28s %10.3f ms %10.3f ms   x%5.2f  %s\n", name, serial_ms, parallel_ms,
                serial_ms / parallel_ms, identical ? "identical" : "MISMATCH");
}

} // namespace

int main(int argc, char** argv) {
    int size = argc > 1 ? std::atoi(argv[1]) : 512;
    int k = 16;
    int reps = 5;
    std::mt19937_64 rng(7);

    std::printf("threads: %d, size: %d, k: %d (best of %d)\n", omp_get_max_threads(),
                size, k, reps);
    std::printf("%-28s %13s %13s %7s\n", "kernel", "serial", "openmp", "speedup");

    {
        Matrix a = random_matrix(size, k, rng);
        Matrix b = random_matrix(k, size, rng);
        Matrix cs(size, size), cp(size, size);
        double ts = time_ms([&] { kernels::detail::gemm_nn_serial(a, b, cs.data()); }, reps);
        double tp = time_ms([&] { kernels::detail::gemm_nn_parallel(a, b, cp.data()); }, reps);
        report("gemm_nn", ts, tp, cs == cp);
    }
    {
        Matrix a = random_matrix(size, k, rng);
        Matrix b = random_matrix(size, k, rng);
        Matrix cs(k, k), cp(k, k);
        double ts = time_ms([&] { kernels::detail::gemm_tn_serial(a, b, cs.data()); }, reps);
        double tp = time_ms([&] { kernels::detail::gemm_tn_parallel(a, b, cp.data()); }, reps);
        report("gemm_tn", ts, tp, cs == cp);
    }
    {
        Matrix a = random_matrix(size, k, rng);
        Matrix b = random_matrix(size, k, rng);
        Matrix cs(size, size), cp(size, size);
        double ts = time_ms([&] { kernels::detail::gemm_nt_serial(a, b, cs.data()); }, reps);
        double tp = time_ms([&] { kernels::detail::gemm_nt_parallel(a, b, cp.data()); }, reps);
        report("gemm_nt", ts, tp, cs == cp);
    }
    {
        CsrMatrix s = random_sparse(size, size, 0.05, rng);
        Matrix b = random_matrix(size, k, rng);
        Matrix cs(size, k), cp(size, k);
        double ts = time_ms([&] { kernels::detail::spmm_serial(s, b, cs.data()); }, reps);
        double tp = time_ms([&] { kernels::detail::spmm_parallel(s, b, cp.data()); }, reps);
        report("spmm (5% dense)", ts, tp, cs == cp);
    }
    {
        CsrMatrix s = random_sparse(size, size, 0.05, rng);
        CsrMatrix t = random_sparse(size, size, 0.05, rng);
        CsrMatrix cs, cp;
        double ts = time_ms([&] { cs = kernels::detail::spgemm_serial(s, t); }, reps);
        double tp = time_ms([&] { cp = kernels::detail::spgemm_parallel(s, t); }, reps);
        report("spgemm (5% dense)", ts, tp, cs == cp);
    }
    {
        CsrMatrix s = random_sparse(size, size, 0.05, rng);
        Matrix a = random_matrix(size, k, rng);
        Matrix b = random_matrix(size, k, rng);
        double vs = 0.0, vp = 0.0;
        double ts = time_ms([&] { vs = kernels::detail::masked_bilinear_sum_serial(s, a, b); }, reps);
        double tp = time_ms([&] { vp = kernels::detail::masked_bilinear_sum_parallel(s, a, b); }, reps);
        report("masked_bilinear_sum", ts, tp, vs == vp);
    }

    // whole update sweep on a planted instance
    PlantedSpec spec;
    spec.n_vertices = std::min(size, 400);
    spec.k_clusters = 4;
    spec.p_in = 0.3;
    spec.p_out = 0.02;
    spec.views = {{3, 0.05}};
    spec.seed = 11;
    PlantedGraph pg = generate(spec);
    FitData data = FitData::prepare(pg.graph);
    Hyperparams hp;
    hp.k_clusters = 4;
    LatentFactors f0 = init_factors(data.n(), data.view_feature_counts(), hp.k_clusters,
                                    hp.s(), hp.seed);
    GuardPolicy guard;

    LatentFactors fs = f0, fp = f0;
    kernels::set_backend(kernels::Backend::serial);
    double ts = time_ms([&] { update_sweep(fs, data, hp, guard); }, reps);
    kernels::set_backend(kernels::Backend::parallel);
    double tp = time_ms([&] { update_sweep(fp, data, hp, guard); }, reps);
    std::string name = "update_sweep (N=" + std::to_string(spec.n_vertices) + ")";
    report(name.c_str(), ts, tp,
           fs.v == fp.v && fs.u == fp.u && fs.x == fp.x && fs.p == fp.p && fs.c == fp.c &&
               fs.w == fp.w);
    return 0;
}
