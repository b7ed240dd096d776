#ifndef MACKEYK_LINALG_HPP
#define MACKEYK_LINALG_HPP

#include <cstddef>
#include <optional>
#include <vector>

#include "mackeyk/gf.hpp"

namespace mackeyk {

// Coordinate vector over F_q.  Used both as a row (algebra coordinates) and
// as a column, depending on the operation.
using Vec = std::vector<Sym>;

struct Mat {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<Sym> a; // row-major

    Mat() = default;
    Mat(std::size_t r, std::size_t c) : rows(r), cols(c), a(r * c, 0) {}

    Sym& at(std::size_t r, std::size_t c) { return a[r * cols + c]; }
    Sym at(std::size_t r, std::size_t c) const { return a[r * cols + c]; }
    Vec row(std::size_t r) const {
        return Vec(a.begin() + r * cols, a.begin() + (r + 1) * cols);
    }
    bool operator==(const Mat&) const = default;

    static Mat identity(std::size_t n);
    static Mat from_rows(const std::vector<Vec>& rows);
};

bool is_zero(const Vec& v);
Vec vec_add(const Field& F, const Vec& x, const Vec& y);
Vec vec_sub(const Field& F, const Vec& x, const Vec& y);
Vec vec_scale(const Field& F, Sym c, const Vec& x);

Mat transpose(const Mat& A);
Mat mat_mul(const Field& F, const Mat& A, const Mat& B);
// Column action: (A * v) with v a column vector.
Vec mat_vec(const Field& F, const Mat& A, const Vec& v);
// Row action: (v * A) with v a row vector.
Vec vec_mat(const Field& F, const Vec& v, const Mat& A);

// Reduced row echelon form.  Deterministic: pivots are the first nonzero
// entry scanning columns left to right, rows top to bottom.
struct Rref {
    Mat mat;                         // zero rows dropped
    std::vector<std::size_t> pivots; // pivot column per row, increasing
};
Rref rref(const Field& F, Mat A);

std::size_t rank(const Field& F, const Mat& A);

// Reduce v against an echelonized row span; in_span iff result is zero.
Vec reduce_row(const Field& F, const Rref& span, Vec v);
bool in_row_span(const Field& F, const Rref& span, const Vec& v);

// Incrementally maintained row space in reduced echelon form.
class RowSpan {
public:
    explicit RowSpan(std::size_t cols) : cols_(cols) {}
    std::size_t cols() const { return cols_; }
    std::size_t dim() const { return rows_.size(); }
    // Returns true when v enlarged the span.
    bool insert(const Field& F, Vec v);
    Vec reduce(const Field& F, Vec v) const;
    bool contains(const Field& F, const Vec& v) const;
    Mat to_mat() const;
    const std::vector<std::size_t>& pivots() const { return pivots_; }

private:
    std::size_t cols_;
    std::vector<Vec> rows_;           // reduced echelon rows
    std::vector<std::size_t> pivots_; // sorted, parallel to rows_
};

// Solve A * x = b for a column vector x.
std::optional<Vec> solve_right(const Field& F, const Mat& A, const Vec& b);
// Solve x * A = b for a row vector x.
std::optional<Vec> solve_left(const Field& F, const Mat& A, const Vec& b);
// Rows form an RREF basis of { v : v * A = 0 }.
Mat left_nullspace(const Field& F, const Mat& A);
// Square inverse, if it exists.
std::optional<Mat> mat_inverse(const Field& F, const Mat& A);

} // namespace mackeyk

#endif
