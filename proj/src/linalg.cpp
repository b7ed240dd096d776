#include "mackeyk/linalg.hpp"

#include <algorithm>
#include <stdexcept>

namespace mackeyk {

Mat Mat::identity(std::size_t n) {
    Mat I(n, n);
    for (std::size_t i = 0; i < n; ++i) I.at(i, i) = 1;
    return I;
}

Mat Mat::from_rows(const std::vector<Vec>& rows) {
    if (rows.empty()) return Mat();
    Mat M(rows.size(), rows[0].size());
    for (std::size_t r = 0; r < rows.size(); ++r) {
        if (rows[r].size() != M.cols)
            throw std::invalid_argument("ragged rows");
        std::copy(rows[r].begin(), rows[r].end(), M.a.begin() + r * M.cols);
    }
    return M;
}

bool is_zero(const Vec& v) {
    return std::all_of(v.begin(), v.end(), [](Sym s) { return s == 0; });
}

Vec vec_add(const Field& F, const Vec& x, const Vec& y) {
    Vec r(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) r[i] = F.add(x[i], y[i]);
    return r;
}

Vec vec_sub(const Field& F, const Vec& x, const Vec& y) {
    Vec r(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) r[i] = F.sub(x[i], y[i]);
    return r;
}

Vec vec_scale(const Field& F, Sym c, const Vec& x) {
    Vec r(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) r[i] = F.mul(c, x[i]);
    return r;
}

Mat transpose(const Mat& A) {
    Mat T(A.cols, A.rows);
    for (std::size_t r = 0; r < A.rows; ++r)
        for (std::size_t c = 0; c < A.cols; ++c) T.at(c, r) = A.at(r, c);
    return T;
}

Mat mat_mul(const Field& F, const Mat& A, const Mat& B) {
    if (A.cols != B.rows) throw std::invalid_argument("shape mismatch");
    Mat C(A.rows, B.cols);
    for (std::size_t i = 0; i < A.rows; ++i)
        for (std::size_t k = 0; k < A.cols; ++k) {
            Sym aik = A.at(i, k);
            if (aik == 0) continue;
            for (std::size_t j = 0; j < B.cols; ++j)
                C.at(i, j) = F.add(C.at(i, j), F.mul(aik, B.at(k, j)));
        }
    return C;
}

Vec mat_vec(const Field& F, const Mat& A, const Vec& v) {
    if (A.cols != v.size()) throw std::invalid_argument("shape mismatch");
    Vec r(A.rows, 0);
    for (std::size_t i = 0; i < A.rows; ++i)
        for (std::size_t j = 0; j < A.cols; ++j)
            r[i] = F.add(r[i], F.mul(A.at(i, j), v[j]));
    return r;
}

Vec vec_mat(const Field& F, const Vec& v, const Mat& A) {
    if (A.rows != v.size()) throw std::invalid_argument("shape mismatch");
    Vec r(A.cols, 0);
    for (std::size_t i = 0; i < A.rows; ++i) {
        Sym vi = v[i];
        if (vi == 0) continue;
        for (std::size_t j = 0; j < A.cols; ++j)
            r[j] = F.add(r[j], F.mul(vi, A.at(i, j)));
    }
    return r;
}

Rref rref(const Field& F, Mat A) {
    std::vector<std::size_t> pivots;
    std::size_t row = 0;
    for (std::size_t col = 0; col < A.cols && row < A.rows; ++col) {
        std::size_t sel = row;
        while (sel < A.rows && A.at(sel, col) == 0) ++sel;
        if (sel == A.rows) continue;
        if (sel != row)
            for (std::size_t c = 0; c < A.cols; ++c)
                std::swap(A.at(sel, c), A.at(row, c));
        Sym piv_inv = F.inv(A.at(row, col));
        for (std::size_t c = 0; c < A.cols; ++c)
            A.at(row, c) = F.mul(piv_inv, A.at(row, c));
        for (std::size_t r = 0; r < A.rows; ++r) {
            if (r == row) continue;
            Sym f = A.at(r, col);
            if (f == 0) continue;
            for (std::size_t c = 0; c < A.cols; ++c)
                A.at(r, c) = F.sub(A.at(r, c), F.mul(f, A.at(row, c)));
        }
        pivots.push_back(col);
        ++row;
    }
    Mat out(row, A.cols);
    std::copy(A.a.begin(), A.a.begin() + row * A.cols, out.a.begin());
    return {std::move(out), std::move(pivots)};
}

std::size_t rank(const Field& F, const Mat& A) { return rref(F, A).pivots.size(); }

Vec reduce_row(const Field& F, const Rref& span, Vec v) {
    for (std::size_t r = 0; r < span.pivots.size(); ++r) {
        Sym f = v[span.pivots[r]];
        if (f == 0) continue;
        for (std::size_t c = 0; c < span.mat.cols; ++c)
            v[c] = F.sub(v[c], F.mul(f, span.mat.at(r, c)));
    }
    return v;
}

bool in_row_span(const Field& F, const Rref& span, const Vec& v) {
    return is_zero(reduce_row(F, span, v));
}

bool RowSpan::insert(const Field& F, Vec v) {
    v = reduce(F, v);
    std::size_t lead = cols_;
    for (std::size_t c = 0; c < cols_; ++c)
        if (v[c] != 0) {
            lead = c;
            break;
        }
    if (lead == cols_) return false;
    Sym piv_inv = F.inv(v[lead]);
    for (auto& s : v) s = F.mul(piv_inv, s);
    // Eliminate the new pivot column from existing rows.
    for (auto& row : rows_) {
        Sym f = row[lead];
        if (f == 0) continue;
        for (std::size_t c = 0; c < cols_; ++c)
            row[c] = F.sub(row[c], F.mul(f, v[c]));
    }
    auto pos = std::lower_bound(pivots_.begin(), pivots_.end(), lead);
    std::size_t idx = static_cast<std::size_t>(pos - pivots_.begin());
    pivots_.insert(pos, lead);
    rows_.insert(rows_.begin() + idx, std::move(v));
    return true;
}

Vec RowSpan::reduce(const Field& F, Vec v) const {
    for (std::size_t r = 0; r < rows_.size(); ++r) {
        Sym f = v[pivots_[r]];
        if (f == 0) continue;
        for (std::size_t c = 0; c < cols_; ++c)
            v[c] = F.sub(v[c], F.mul(f, rows_[r][c]));
    }
    return v;
}

bool RowSpan::contains(const Field& F, const Vec& v) const {
    return is_zero(reduce(F, v));
}

Mat RowSpan::to_mat() const { return Mat::from_rows(rows_); }

std::optional<Vec> solve_right(const Field& F, const Mat& A, const Vec& b) {
    if (A.rows != b.size()) throw std::invalid_argument("shape mismatch");
    Mat aug(A.rows, A.cols + 1);
    for (std::size_t r = 0; r < A.rows; ++r) {
        for (std::size_t c = 0; c < A.cols; ++c) aug.at(r, c) = A.at(r, c);
        aug.at(r, A.cols) = b[r];
    }
    Rref e = rref(F, std::move(aug));
    Vec x(A.cols, 0);
    for (std::size_t r = 0; r < e.pivots.size(); ++r) {
        if (e.pivots[r] == A.cols) return std::nullopt; // inconsistent
        x[e.pivots[r]] = e.mat.at(r, A.cols);
    }
    return x;
}

std::optional<Vec> solve_left(const Field& F, const Mat& A, const Vec& b) {
    return solve_right(F, transpose(A), b);
}

Mat left_nullspace(const Field& F, const Mat& A) {
    // v * A = 0  <=>  A^T v^T = 0.
    Mat T = transpose(A);
    Rref e = rref(F, T);
    std::vector<std::size_t> free_cols;
    for (std::size_t c = 0; c < T.cols; ++c)
        if (!std::binary_search(e.pivots.begin(), e.pivots.end(), c))
            free_cols.push_back(c);
    Mat out(free_cols.size(), T.cols);
    for (std::size_t i = 0; i < free_cols.size(); ++i) {
        std::size_t fc = free_cols[i];
        out.at(i, fc) = 1;
        for (std::size_t r = 0; r < e.pivots.size(); ++r)
            out.at(i, e.pivots[r]) = F.neg(e.mat.at(r, fc));
    }
    return rref(F, std::move(out)).mat;
}

std::optional<Mat> mat_inverse(const Field& F, const Mat& A) {
    if (A.rows != A.cols) throw std::invalid_argument("not square");
    std::size_t n = A.rows;
    Mat aug(n, 2 * n);
    for (std::size_t r = 0; r < n; ++r) {
        for (std::size_t c = 0; c < n; ++c) aug.at(r, c) = A.at(r, c);
        aug.at(r, n + r) = 1;
    }
    Rref e = rref(F, std::move(aug));
    if (e.pivots.size() < n || e.pivots[n - 1] != n - 1) return std::nullopt;
    Mat inv(n, n);
    for (std::size_t r = 0; r < n; ++r)
        for (std::size_t c = 0; c < n; ++c) inv.at(r, c) = e.mat.at(r, n + c);
    return inv;
}

} // namespace mackeyk
