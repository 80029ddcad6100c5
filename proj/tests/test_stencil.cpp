#include <doctest.h>

#include "helpers.hpp"

using namespace aprkit;
using namespace testutil;

namespace {

// Dense operators on small grids, used to check the restricted stencil against
// its definition: coarse-stencil application == block-average after fine
// convolution after piecewise-constant upsampling.
struct Dims3 {
    int nz, nx, ny;
    std::size_t size() const { return static_cast<std::size_t>(nz) * nx * ny; }
    std::size_t idx(int z, int x, int y) const {
        return (static_cast<std::size_t>(z) * nx + x) * ny + y;
    }
};

using Matrix = std::vector<std::vector<double>>;

// Piecewise-constant prolongation from the coarse grid to the m-times finer grid.
Matrix prolongation(const Dims3& fine, const Dims3& coarse, int m) {
    Matrix P(fine.size(), std::vector<double>(coarse.size(), 0.0));
    for (int z = 0; z < fine.nz; ++z)
        for (int x = 0; x < fine.nx; ++x)
            for (int y = 0; y < fine.ny; ++y)
                P[fine.idx(z, x, y)][coarse.idx(z / m, x / m, y / m)] = 1.0;
    return P;
}

// Block-average restriction, the adjoint of P up to the cell volume.
Matrix restriction(const Dims3& fine, const Dims3& coarse, int m) {
    Matrix R(coarse.size(), std::vector<double>(fine.size(), 0.0));
    const double inv = 1.0 / (static_cast<double>(m) * m * m);
    for (int z = 0; z < fine.nz; ++z)
        for (int x = 0; x < fine.nx; ++x)
            for (int y = 0; y < fine.ny; ++y)
                R[coarse.idx(z / m, x / m, y / m)][fine.idx(z, x, y)] = inv;
    return R;
}

// Zero-padded convolution as a dense matrix: o(p) = sum_r w(r) u(p - r).
Matrix convolution_matrix(const Dims3& d, const Stencil& w) {
    Matrix K(d.size(), std::vector<double>(d.size(), 0.0));
    for (int z = 0; z < d.nz; ++z)
        for (int x = 0; x < d.nx; ++x)
            for (int y = 0; y < d.ny; ++y)
                for (int rz = -w.hz(); rz <= w.hz(); ++rz)
                    for (int rx = -w.hx(); rx <= w.hx(); ++rx)
                        for (int ry = -w.hy(); ry <= w.hy(); ++ry) {
                            const int sz = z - rz, sx = x - rx, sy = y - ry;
                            if (sz < 0 || sz >= d.nz || sx < 0 || sx >= d.nx || sy < 0 ||
                                sy >= d.ny)
                                continue;
                            K[d.idx(z, x, y)][d.idx(sz, sx, sy)] += w.at(rz, rx, ry);
                        }
    return K;
}

Matrix multiply(const Matrix& A, const Matrix& B) {
    Matrix C(A.size(), std::vector<double>(B[0].size(), 0.0));
    for (std::size_t i = 0; i < A.size(); ++i)
        for (std::size_t k = 0; k < B.size(); ++k) {
            const double a = A[i][k];
            if (a == 0.0) continue;
            for (std::size_t j = 0; j < B[0].size(); ++j) C[i][j] += a * B[k][j];
        }
    return C;
}

double max_entry_diff(const Matrix& A, const Matrix& B) {
    double m = 0.0;
    for (std::size_t i = 0; i < A.size(); ++i)
        for (std::size_t j = 0; j < A[0].size(); ++j) m = std::max(m, std::abs(A[i][j] - B[i][j]));
    return m;
}

void check_restriction_case(CounterRng& rng, int dim_count) {
    // The dense matrices grow with the fine grid volume, so higher dimension
    // counts use smaller per-axis grids (16 cells down to 8).
    const int fine_cap = dim_count == 3 ? 8 : 16;
    const int delta = static_cast<int>(rng.uniform_int(1, dim_count == 3 ? 2 : 3));
    const int m = 1 << delta;
    auto rand_odd = [&](int cap) { return 2 * static_cast<int>(rng.uniform_int(0, cap)) + 1; };
    int kz = 1, kx = 1, ky = 1, cz = 1, cx = 1, cy = 1;
    if (dim_count >= 1) {
        ky = rand_odd(3);
        cy = static_cast<int>(rng.uniform_int(1, std::max(1, fine_cap / m)));
    }
    if (dim_count >= 2) {
        kx = rand_odd(3);
        cx = static_cast<int>(rng.uniform_int(1, std::max(1, fine_cap / m)));
    }
    if (dim_count >= 3) {
        kz = rand_odd(3);
        cz = static_cast<int>(rng.uniform_int(1, std::max(1, fine_cap / m)));
    }
    const Stencil w = random_stencil(rng, kz, kx, ky);
    const Stencil wc = restrict_stencil(w, delta);

    const Dims3 coarse{cz, cx, cy};
    const Dims3 fine{cz * m, cx * m, cy * m};
    const Matrix P = prolongation(fine, coarse, m);
    const Matrix R = restriction(fine, coarse, m);
    const Matrix K = convolution_matrix(fine, w);
    const Matrix composite = multiply(R, multiply(K, P));
    const Matrix direct = convolution_matrix(coarse, wc);
    CHECK(max_entry_diff(composite, direct) <= 1e-6);

    // Restriction after prolongation is the identity on the coarse grid.
    const Matrix RP = multiply(R, P);
    for (std::size_t i = 0; i < RP.size(); ++i)
        for (std::size_t j = 0; j < RP.size(); ++j)
            CHECK(RP[i][j] == doctest::Approx(i == j ? 1.0 : 0.0));
}

} // namespace

TEST_CASE("restricted stencil equals the explicit operator composition") {
    CounterRng rng(777);
    for (int dim_count = 1; dim_count <= 3; ++dim_count)
        for (int trial = 0; trial < 8; ++trial) check_restriction_case(rng, dim_count);
}

TEST_CASE("restriction preserves the weight sum") {
    CounterRng rng(778);
    for (int trial = 0; trial < 20; ++trial) {
        const Stencil w = random_stencil(rng, 3, 5, 3);
        for (int delta = 0; delta <= 4; ++delta)
            CHECK(std::abs(restrict_stencil(w, delta).sum() - w.sum()) <= 1e-5);
    }
}

TEST_CASE("restriction special cases") {
    // delta = 0 is the identity mapping.
    CounterRng rng(779);
    const Stencil w = random_stencil(rng, 3, 3, 5);
    const Stencil same = restrict_stencil(w, 0);
    CHECK(bit_identical(w.weights, same.weights));

    // A delta stencil restricts to a delta stencil: block averaging commutes
    // with the identity operation.
    const Stencil id = identity_stencil();
    for (int delta = 1; delta <= 3; ++delta) {
        const Stencil r = restrict_stencil(id, delta);
        CHECK(r.sum() == doctest::Approx(1.0));
        CHECK(r.at(0, 0, 0) == doctest::Approx(1.0));
    }
}

TEST_CASE("rescaled stencil halves per level step") {
    CounterRng rng(780);
    const Stencil w = random_stencil(rng, 3, 3, 3);
    for (int delta = 0; delta <= 3; ++delta) {
        const Stencil r = rescale_stencil(w, delta);
        for (std::size_t i = 0; i < w.weights.size(); ++i)
            CHECK(r.weights[i] == doctest::Approx(w.weights[i] * std::ldexp(1.0, -delta)));
    }
}

TEST_CASE("flip is an involution and reverses every axis") {
    CounterRng rng(781);
    const Stencil w = random_stencil(rng, 3, 5, 7);
    const Stencil f = flip_stencil(w);
    for (int rz = -w.hz(); rz <= w.hz(); ++rz)
        for (int rx = -w.hx(); rx <= w.hx(); ++rx)
            for (int ry = -w.hy(); ry <= w.hy(); ++ry)
                CHECK(f.at(rz, rx, ry) == w.at(-rz, -rx, -ry));
    CHECK(bit_identical(flip_stencil(f).weights, w.weights));
}

TEST_CASE("stencil constructors") {
    CHECK_THROWS_AS(Stencil(2, 3, 3), RangeError);
    CHECK_THROWS_AS(Stencil(3, 0, 3), RangeError);
    CHECK(box_stencil(3).sum() == doctest::Approx(1.0));
    CHECK(gaussian_stencil(1.5).sum() == doctest::Approx(1.0));
    CHECK(gaussian_stencil(5.0).kz == 13); // capped extent
    CHECK(sobel_stencil(2).sum() == doctest::Approx(0.0));
    CHECK_THROWS_AS(sobel_stencil(3), RangeError);

    // pyramid coverage and modes
    const Stencil w = gaussian_stencil(1.0);
    const StencilPyramid p = make_pyramid(w, 2, 6, PyramidMode::Restricted);
    CHECK(p.at(6).kz == w.kz);
    CHECK_THROWS_AS(p.at(1), RangeError);
    CHECK_THROWS_AS(explicit_pyramid({w}, 2, 6), RangeError);
}
