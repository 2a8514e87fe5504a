#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace gccfp {

/// Dense row-major matrix of doubles.
class Matrix {
public:
    Matrix() = default;
    Matrix(int rows, int cols); // zero-initialized

    int rows() const noexcept { return rows_; }
    int cols() const noexcept { return cols_; }
    std::size_t size() const noexcept { return values_.size(); }

    double& operator()(int r, int c) { return values_[idx(r, c)]; }
    double operator()(int r, int c) const { return values_[idx(r, c)]; }

    double* data() noexcept { return values_.data(); }
    const double* data() const noexcept { return values_.data(); }
    double* row(int r) noexcept { return values_.data() + std::size_t(r) * cols_; }
    const double* row(int r) const noexcept { return values_.data() + std::size_t(r) * cols_; }

    bool same_shape(const Matrix& o) const noexcept {
        return rows_ == o.rows_ && cols_ == o.cols_;
    }
    bool all_finite() const noexcept;
    double min_entry() const noexcept; // 0 for an empty matrix

    bool operator==(const Matrix&) const = default;

private:
    std::size_t idx(int r, int c) const noexcept {
        return std::size_t(r) * cols_ + c;
    }

    int rows_ = 0, cols_ = 0;
    std::vector<double> values_;
};

/// Lightweight read-only view of a dense row-major block (stride == cols).
struct MatView {
    const double* data = nullptr;
    int rows = 0;
    int cols = 0;

    MatView() = default;
    MatView(const Matrix& m) : data(m.data()), rows(m.rows()), cols(m.cols()) {}
    MatView(const double* d, int r, int c) : data(d), rows(r), cols(c) {}

    const double* row(int r) const noexcept { return data + std::size_t(r) * cols; }
    double at(int r, int c) const noexcept { return data[std::size_t(r) * cols + c]; }
};

struct CooEntry {
    int row;
    int col;
    double value;
};

/// Compressed sparse row matrix with sorted column indices per row.
/// Duplicate coordinates are summed on construction; exact zeros are kept
/// only when explicitly requested (from_coo keeps them, from_dense drops).
class CsrMatrix {
public:
    CsrMatrix() = default;

    static CsrMatrix from_coo(int rows, int cols, std::vector<CooEntry> entries);
    static CsrMatrix from_dense(const Matrix& m);

    int rows() const noexcept { return rows_; }
    int cols() const noexcept { return cols_; }
    std::int64_t nnz() const noexcept { return static_cast<std::int64_t>(col_.size()); }

    int row_nnz(int r) const noexcept {
        return static_cast<int>(row_ptr_[r + 1] - row_ptr_[r]);
    }
    std::span<const int> row_cols(int r) const noexcept {
        return {col_.data() + row_ptr_[r], static_cast<std::size_t>(row_nnz(r))};
    }
    std::span<const double> row_vals(int r) const noexcept {
        return {val_.data() + row_ptr_[r], static_cast<std::size_t>(row_nnz(r))};
    }
    const std::vector<std::int64_t>& row_ptr() const noexcept { return row_ptr_; }

    CsrMatrix transposed() const;
    Matrix to_dense() const;
    double frob_sq() const noexcept;
    bool all_finite() const noexcept;

    bool operator==(const CsrMatrix&) const = default;

private:
    int rows_ = 0, cols_ = 0;
    std::vector<std::int64_t> row_ptr_{0};
    std::vector<int> col_;
    std::vector<double> val_;
};

} // namespace gccfp
