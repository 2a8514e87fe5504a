#include "gccfp/kernels.hpp"

#include "gccfp/error.hpp"

#include <algorithm>
#include <atomic>
#include <cstring>
#include <string>
#include <vector>

namespace gccfp::kernels {

namespace {

std::atomic<Backend> g_backend{Backend::parallel};

void require(bool ok, const char* what) {
    if (!ok) throw ShapeError(std::string("kernel shape mismatch: ") + what);
}

} // namespace

void set_backend(Backend b) noexcept { g_backend.store(b, std::memory_order_relaxed); }
Backend active_backend() noexcept { return g_backend.load(std::memory_order_relaxed); }

namespace detail {

// Each output row accumulates in a fixed k-ascending order; the parallel
// variants split work by output row only, so serial and parallel results
// are bit-identical.

static inline void gemm_nn_row(MatView a, MatView b, double* crow, int i) {
    std::memset(crow, 0, sizeof(double) * b.cols);
    for (int k = 0; k < a.cols; ++k) {
        double aik = a.at(i, k);
        if (aik == 0.0) continue;
        const double* brow = b.row(k);
        for (int j = 0; j < b.cols; ++j) crow[j] += aik * brow[j];
    }
}

void gemm_nn_serial(MatView a, MatView b, double* c) {
    for (int i = 0; i < a.rows; ++i)
        gemm_nn_row(a, b, c + std::size_t(i) * b.cols, i);
}

void gemm_nn_parallel(MatView a, MatView b, double* c) {
#pragma omp parallel for schedule(static)
    for (int i = 0; i < a.rows; ++i)
        gemm_nn_row(a, b, c + std::size_t(i) * b.cols, i);
}

static inline void gemm_tn_row(MatView a, MatView b, double* crow, int i) {
    for (int j = 0; j < b.cols; ++j) {
        double acc = 0.0;
        for (int r = 0; r < a.rows; ++r) acc += a.at(r, i) * b.at(r, j);
        crow[j] = acc;
    }
}

void gemm_tn_serial(MatView a, MatView b, double* c) {
    for (int i = 0; i < a.cols; ++i)
        gemm_tn_row(a, b, c + std::size_t(i) * b.cols, i);
}

void gemm_tn_parallel(MatView a, MatView b, double* c) {
#pragma omp parallel for schedule(static)
    for (int i = 0; i < a.cols; ++i)
        gemm_tn_row(a, b, c + std::size_t(i) * b.cols, i);
}

static inline void gemm_nt_row(MatView a, MatView b, double* crow, int i) {
    const double* arow = a.row(i);
    for (int j = 0; j < b.rows; ++j) {
        const double* brow = b.row(j);
        double acc = 0.0;
        for (int k = 0; k < a.cols; ++k) acc += arow[k] * brow[k];
        crow[j] = acc;
    }
}

void gemm_nt_serial(MatView a, MatView b, double* c) {
    for (int i = 0; i < a.rows; ++i)
        gemm_nt_row(a, b, c + std::size_t(i) * b.rows, i);
}

void gemm_nt_parallel(MatView a, MatView b, double* c) {
#pragma omp parallel for schedule(static)
    for (int i = 0; i < a.rows; ++i)
        gemm_nt_row(a, b, c + std::size_t(i) * b.rows, i);
}

static inline void spmm_row(const CsrMatrix& s, MatView b, double* crow, int i) {
    std::memset(crow, 0, sizeof(double) * b.cols);
    auto cols = s.row_cols(i);
    auto vals = s.row_vals(i);
    for (std::size_t p = 0; p < cols.size(); ++p) {
        double v = vals[p];
        const double* brow = b.row(cols[p]);
        for (int j = 0; j < b.cols; ++j) crow[j] += v * brow[j];
    }
}

void spmm_serial(const CsrMatrix& s, MatView b, double* c) {
    for (int i = 0; i < s.rows(); ++i)
        spmm_row(s, b, c + std::size_t(i) * b.cols, i);
}

void spmm_parallel(const CsrMatrix& s, MatView b, double* c) {
#pragma omp parallel for schedule(static)
    for (int i = 0; i < s.rows(); ++i)
        spmm_row(s, b, c + std::size_t(i) * b.cols, i);
}

namespace {

// Gustavson row product with a dense accumulator; touched columns are sorted
// before emission, so row content does not depend on visit order.
struct SpgemmScratch {
    std::vector<double> acc;
    std::vector<char> seen;
    std::vector<int> touched;
};

void spgemm_row(const CsrMatrix& a, const CsrMatrix& b, int i, SpgemmScratch& ws,
                std::vector<int>& out_cols, std::vector<double>& out_vals) {
    ws.touched.clear();
    auto acols = a.row_cols(i);
    auto avals = a.row_vals(i);
    for (std::size_t p = 0; p < acols.size(); ++p) {
        double av = avals[p];
        int k = acols[p];
        auto bcols = b.row_cols(k);
        auto bvals = b.row_vals(k);
        for (std::size_t q = 0; q < bcols.size(); ++q) {
            int j = bcols[q];
            if (!ws.seen[j]) {
                ws.seen[j] = 1;
                ws.acc[j] = 0.0;
                ws.touched.push_back(j);
            }
            ws.acc[j] += av * bvals[q];
        }
    }
    std::sort(ws.touched.begin(), ws.touched.end());
    out_cols.assign(ws.touched.begin(), ws.touched.end());
    out_vals.resize(ws.touched.size());
    for (std::size_t t = 0; t < ws.touched.size(); ++t) {
        int j = ws.touched[t];
        out_vals[t] = ws.acc[j];
        ws.seen[j] = 0;
    }
}

CsrMatrix spgemm_assemble(const CsrMatrix& a, const CsrMatrix& b,
                          const std::vector<std::vector<int>>& cols,
                          const std::vector<std::vector<double>>& vals) {
    std::vector<CooEntry> entries;
    std::size_t total = 0;
    for (const auto& rc : cols) total += rc.size();
    entries.reserve(total);
    for (int i = 0; i < a.rows(); ++i)
        for (std::size_t p = 0; p < cols[i].size(); ++p)
            entries.push_back({i, cols[i][p], vals[i][p]});
    return CsrMatrix::from_coo(a.rows(), b.cols(), std::move(entries));
}

} // namespace

CsrMatrix spgemm_serial(const CsrMatrix& a, const CsrMatrix& b) {
    std::vector<std::vector<int>> cols(a.rows());
    std::vector<std::vector<double>> vals(a.rows());
    SpgemmScratch ws;
    ws.acc.assign(b.cols(), 0.0);
    ws.seen.assign(b.cols(), 0);
    for (int i = 0; i < a.rows(); ++i)
        spgemm_row(a, b, i, ws, cols[i], vals[i]);
    return spgemm_assemble(a, b, cols, vals);
}

CsrMatrix spgemm_parallel(const CsrMatrix& a, const CsrMatrix& b) {
    std::vector<std::vector<int>> cols(a.rows());
    std::vector<std::vector<double>> vals(a.rows());
#pragma omp parallel
    {
        SpgemmScratch ws;
        ws.acc.assign(b.cols(), 0.0);
        ws.seen.assign(b.cols(), 0);
#pragma omp for schedule(static)
        for (int i = 0; i < a.rows(); ++i)
            spgemm_row(a, b, i, ws, cols[i], vals[i]);
    }
    return spgemm_assemble(a, b, cols, vals);
}

// Reductions store one partial per row and fold the partials in row order,
// which keeps the total independent of the thread count.

static inline double masked_row(const CsrMatrix& s, MatView a, MatView b, int i) {
    const double* arow = a.row(i);
    auto cols = s.row_cols(i);
    auto vals = s.row_vals(i);
    double acc = 0.0;
    for (std::size_t p = 0; p < cols.size(); ++p) {
        const double* brow = b.row(cols[p]);
        double dot = 0.0;
        for (int k = 0; k < a.cols; ++k) dot += arow[k] * brow[k];
        acc += vals[p] * dot;
    }
    return acc;
}

double masked_bilinear_sum_serial(const CsrMatrix& s, MatView a, MatView b) {
    std::vector<double> partial(s.rows());
    for (int i = 0; i < s.rows(); ++i) partial[i] = masked_row(s, a, b, i);
    double total = 0.0;
    for (double v : partial) total += v;
    return total;
}

double masked_bilinear_sum_parallel(const CsrMatrix& s, MatView a, MatView b) {
    std::vector<double> partial(s.rows());
#pragma omp parallel for schedule(static)
    for (int i = 0; i < s.rows(); ++i) partial[i] = masked_row(s, a, b, i);
    double total = 0.0;
    for (double v : partial) total += v;
    return total;
}

static inline double frob_diff_row(MatView a, MatView b, int i) {
    const double* ar = a.row(i);
    const double* br = b.row(i);
    double acc = 0.0;
    for (int j = 0; j < a.cols; ++j) {
        double d = ar[j] - br[j];
        acc += d * d;
    }
    return acc;
}

double frob_sq_diff_serial(MatView a, MatView b) {
    std::vector<double> partial(a.rows);
    for (int i = 0; i < a.rows; ++i) partial[i] = frob_diff_row(a, b, i);
    double total = 0.0;
    for (double v : partial) total += v;
    return total;
}

double frob_sq_diff_parallel(MatView a, MatView b) {
    std::vector<double> partial(a.rows);
#pragma omp parallel for schedule(static)
    for (int i = 0; i < a.rows; ++i) partial[i] = frob_diff_row(a, b, i);
    double total = 0.0;
    for (double v : partial) total += v;
    return total;
}

static inline double frob_row(MatView a, int i) {
    const double* ar = a.row(i);
    double acc = 0.0;
    for (int j = 0; j < a.cols; ++j) acc += ar[j] * ar[j];
    return acc;
}

double frob_sq_serial(MatView a) {
    std::vector<double> partial(a.rows);
    for (int i = 0; i < a.rows; ++i) partial[i] = frob_row(a, i);
    double total = 0.0;
    for (double v : partial) total += v;
    return total;
}

double frob_sq_parallel(MatView a) {
    std::vector<double> partial(a.rows);
#pragma omp parallel for schedule(static)
    for (int i = 0; i < a.rows; ++i) partial[i] = frob_row(a, i);
    double total = 0.0;
    for (double v : partial) total += v;
    return total;
}

} // namespace detail

Matrix gemm_nn(MatView a, MatView b) {
    require(a.cols == b.rows, "gemm_nn inner dimension");
    Matrix c(a.rows, b.cols);
    if (active_backend() == Backend::parallel)
        detail::gemm_nn_parallel(a, b, c.data());
    else
        detail::gemm_nn_serial(a, b, c.data());
    return c;
}

Matrix gemm_tn(MatView a, MatView b) {
    require(a.rows == b.rows, "gemm_tn row count");
    Matrix c(a.cols, b.cols);
    if (active_backend() == Backend::parallel)
        detail::gemm_tn_parallel(a, b, c.data());
    else
        detail::gemm_tn_serial(a, b, c.data());
    return c;
}

Matrix gemm_nt(MatView a, MatView b) {
    require(a.cols == b.cols, "gemm_nt column count");
    Matrix c(a.rows, b.rows);
    if (active_backend() == Backend::parallel)
        detail::gemm_nt_parallel(a, b, c.data());
    else
        detail::gemm_nt_serial(a, b, c.data());
    return c;
}

Matrix spmm(const CsrMatrix& s, MatView b) {
    require(s.cols() == b.rows, "spmm inner dimension");
    Matrix c(s.rows(), b.cols);
    if (active_backend() == Backend::parallel)
        detail::spmm_parallel(s, b, c.data());
    else
        detail::spmm_serial(s, b, c.data());
    return c;
}

CsrMatrix spgemm(const CsrMatrix& a, const CsrMatrix& b) {
    require(a.cols() == b.rows(), "spgemm inner dimension");
    return active_backend() == Backend::parallel ? detail::spgemm_parallel(a, b)
                                                 : detail::spgemm_serial(a, b);
}

double masked_bilinear_sum(const CsrMatrix& s, MatView a, MatView b) {
    require(s.rows() == a.rows && s.cols() == b.rows && a.cols == b.cols,
            "masked_bilinear_sum shapes");
    return active_backend() == Backend::parallel
               ? detail::masked_bilinear_sum_parallel(s, a, b)
               : detail::masked_bilinear_sum_serial(s, a, b);
}

double frob_sq_diff(MatView a, MatView b) {
    require(a.rows == b.rows && a.cols == b.cols, "frob_sq_diff shapes");
    return active_backend() == Backend::parallel ? detail::frob_sq_diff_parallel(a, b)
                                                 : detail::frob_sq_diff_serial(a, b);
}

double frob_sq(MatView a) {
    return active_backend() == Backend::parallel ? detail::frob_sq_parallel(a)
                                                 : detail::frob_sq_serial(a);
}

double trace_product(MatView a, MatView b) {
    require(a.cols == b.rows && a.rows == b.cols, "trace_product shapes");
    double acc = 0.0;
    for (int i = 0; i < a.rows; ++i)
        for (int j = 0; j < a.cols; ++j) acc += a.at(i, j) * b.at(j, i);
    return acc;
}

} // namespace gccfp::kernels
