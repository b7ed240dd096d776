#include <doctest.h>

#include "mackeyk/gf.hpp"
#include "mackeyk/linalg.hpp"

using namespace mackeyk;

namespace {

Mat random_mat(const Field& F, std::size_t r, std::size_t c,
               std::uint64_t& seed) {
    Mat m(r, c);
    for (auto& s : m.a) {
        seed = seed * 6364136223846793005ULL + 1442695040888963407ULL;
        s = static_cast<Sym>((seed >> 33) % F.q());
    }
    return m;
}

} // namespace

TEST_CASE("rref of a known matrix over F_3") {
    Field F(3, 1);
    Mat A = Mat::from_rows({{1, 1, 0}, {0, 1, 1}, {0, 0, 1}});
    Rref e = rref(F, A);
    CHECK(e.pivots == std::vector<std::size_t>{0, 1, 2});
    CHECK(e.mat == Mat::identity(3));

    // Third row is the sum of the first two.
    Mat B = Mat::from_rows({{1, 2, 0}, {0, 0, 1}, {1, 2, 1}});
    CHECK(rank(F, B) == 2);
}

TEST_CASE("rref is idempotent on random matrices") {
    std::uint64_t seed = 7;
    for (std::uint32_t p : {2u, 3u, 5u}) {
        Field F(p, 1);
        for (int trial = 0; trial < 20; ++trial) {
            Mat A = random_mat(F, 4, 6, seed);
            Rref e1 = rref(F, A);
            Rref e2 = rref(F, e1.mat);
            CHECK(e1.mat == e2.mat);
            CHECK(e1.pivots == e2.pivots);
        }
    }
}

TEST_CASE("solve and inverse agree with multiplication") {
    std::uint64_t seed = 99;
    Field F(5, 1);
    for (int trial = 0; trial < 30; ++trial) {
        Mat A = random_mat(F, 4, 4, seed);
        Vec b = random_mat(F, 4, 1, seed).a;
        auto x = solve_right(F, A, b);
        if (x) CHECK(mat_vec(F, A, *x) == b);
        auto inv = mat_inverse(F, A);
        if (inv) {
            CHECK(mat_mul(F, A, *inv) == Mat::identity(4));
            CHECK(mat_mul(F, *inv, A) == Mat::identity(4));
            CHECK(x.has_value());
        } else {
            CHECK(rank(F, A) < 4);
        }
    }
}

TEST_CASE("left nullspace annihilates and has complementary rank") {
    std::uint64_t seed = 1234;
    Field F(3, 1);
    for (int trial = 0; trial < 30; ++trial) {
        Mat A = random_mat(F, 5, 3, seed);
        Mat N = left_nullspace(F, A);
        CHECK(N.rows + rank(F, A) == 5);
        for (std::size_t r = 0; r < N.rows; ++r)
            CHECK(is_zero(vec_mat(F, N.row(r), A)));
    }
}

TEST_CASE("row span insertion tracks rank and membership") {
    Field F(2, 1);
    RowSpan span(4);
    CHECK(span.insert(F, {1, 1, 0, 0}));
    CHECK(span.insert(F, {0, 1, 1, 0}));
    CHECK_FALSE(span.insert(F, {1, 0, 1, 0})); // dependent
    CHECK(span.dim() == 2);
    CHECK(span.contains(F, {1, 0, 1, 0}));
    CHECK_FALSE(span.contains(F, {0, 0, 0, 1}));
}

TEST_CASE("solve_left matches row-vector action") {
    Field F(3, 1);
    Mat A = Mat::from_rows({{1, 2}, {0, 1}, {2, 2}});
    Vec b{2, 1};
    auto x = solve_left(F, A, b);
    REQUIRE(x.has_value());
    CHECK(vec_mat(F, *x, A) == b);
}
