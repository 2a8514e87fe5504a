#include "gccfp/matrix.hpp"

#include "gccfp/error.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace gccfp {

Matrix::Matrix(int rows, int cols) : rows_(rows), cols_(cols) {
    if (rows < 0 || cols < 0)
        throw ShapeError("matrix dimensions must be nonnegative");
    values_.assign(std::size_t(rows) * std::size_t(cols), 0.0);
}

bool Matrix::all_finite() const noexcept {
    for (double v : values_)
        if (!std::isfinite(v)) return false;
    return true;
}

double Matrix::min_entry() const noexcept {
    if (values_.empty()) return 0.0;
    return *std::min_element(values_.begin(), values_.end());
}

CsrMatrix CsrMatrix::from_coo(int rows, int cols, std::vector<CooEntry> entries) {
    if (rows < 0 || cols < 0)
        throw ShapeError("matrix dimensions must be nonnegative");
    for (const auto& e : entries) {
        if (e.row < 0 || e.row >= rows || e.col < 0 || e.col >= cols)
            throw BoundsError("coordinate (" + std::to_string(e.row) + ", " +
                              std::to_string(e.col) + ") outside " +
                              std::to_string(rows) + "x" + std::to_string(cols));
    }
    std::sort(entries.begin(), entries.end(), [](const CooEntry& a, const CooEntry& b) {
        return a.row != b.row ? a.row < b.row : a.col < b.col;
    });

    CsrMatrix m;
    m.rows_ = rows;
    m.cols_ = cols;
    m.row_ptr_.assign(std::size_t(rows) + 1, 0);
    m.col_.reserve(entries.size());
    m.val_.reserve(entries.size());

    std::size_t i = 0;
    for (int r = 0; r < rows; ++r) {
        while (i < entries.size() && entries[i].row == r) {
            double v = entries[i].value;
            int c = entries[i].col;
            ++i;
            while (i < entries.size() && entries[i].row == r && entries[i].col == c) {
                v += entries[i].value; // duplicates sum
                ++i;
            }
            m.col_.push_back(c);
            m.val_.push_back(v);
        }
        m.row_ptr_[r + 1] = static_cast<std::int64_t>(m.col_.size());
    }
    return m;
}

CsrMatrix CsrMatrix::from_dense(const Matrix& d) {
    CsrMatrix m;
    m.rows_ = d.rows();
    m.cols_ = d.cols();
    m.row_ptr_.assign(std::size_t(d.rows()) + 1, 0);
    for (int r = 0; r < d.rows(); ++r) {
        for (int c = 0; c < d.cols(); ++c) {
            double v = d(r, c);
            if (v != 0.0) {
                m.col_.push_back(c);
                m.val_.push_back(v);
            }
        }
        m.row_ptr_[r + 1] = static_cast<std::int64_t>(m.col_.size());
    }
    return m;
}

CsrMatrix CsrMatrix::transposed() const {
    CsrMatrix t;
    t.rows_ = cols_;
    t.cols_ = rows_;
    t.row_ptr_.assign(std::size_t(cols_) + 1, 0);
    t.col_.resize(col_.size());
    t.val_.resize(val_.size());

    for (int c : col_) t.row_ptr_[c + 1]++;
    for (int r = 0; r < cols_; ++r) t.row_ptr_[r + 1] += t.row_ptr_[r];

    std::vector<std::int64_t> next(t.row_ptr_.begin(), t.row_ptr_.end() - 1);
    for (int r = 0; r < rows_; ++r) {
        for (std::int64_t p = row_ptr_[r]; p < row_ptr_[r + 1]; ++p) {
            std::int64_t q = next[col_[p]]++;
            t.col_[q] = r; // rows visited in order, so output stays sorted
            t.val_[q] = val_[p];
        }
    }
    return t;
}

Matrix CsrMatrix::to_dense() const {
    Matrix d(rows_, cols_);
    for (int r = 0; r < rows_; ++r) {
        for (std::int64_t p = row_ptr_[r]; p < row_ptr_[r + 1]; ++p)
            d(r, col_[p]) = val_[p];
    }
    return d;
}

double CsrMatrix::frob_sq() const noexcept {
    double total = 0.0;
    for (int r = 0; r < rows_; ++r) {
        double partial = 0.0;
        for (std::int64_t p = row_ptr_[r]; p < row_ptr_[r + 1]; ++p)
            partial += val_[p] * val_[p];
        total += partial;
    }
    return total;
}

bool CsrMatrix::all_finite() const noexcept {
    for (double v : val_)
        if (!std::isfinite(v)) return false;
    return true;
}

} // namespace gccfp
