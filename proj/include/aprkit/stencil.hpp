#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "aprkit/errors.hpp"

namespace aprkit {

// Dense filter weights with odd extent per axis, stored (z, x, y) row-major.
// The weight at stencil offset (dz, dx, dy), dz in [-hz, hz] etc., lives at
// array position (dz + hz, dx + hx, dy + hy).
struct Stencil {
    int kz = 1, kx = 1, ky = 1;
    std::vector<float> weights;

    Stencil() : weights(1, 0.0f) {}

    Stencil(int z_ext, int x_ext, int y_ext, float fill = 0.0f)
        : kz(z_ext), kx(x_ext), ky(y_ext),
          weights(static_cast<std::size_t>(z_ext) * x_ext * y_ext, fill) {
        if (kz < 1 || kx < 1 || ky < 1 || kz % 2 == 0 || kx % 2 == 0 || ky % 2 == 0)
            throw RangeError("stencil extents must be odd and positive");
    }

    int hz() const { return kz / 2; }
    int hx() const { return kx / 2; }
    int hy() const { return ky / 2; }

    float& at(int dz, int dx, int dy) {
        return weights[(static_cast<std::size_t>(dz + hz()) * kx + (dx + hx())) * ky + (dy + hy())];
    }
    float at(int dz, int dx, int dy) const {
        return weights[(static_cast<std::size_t>(dz + hz()) * kx + (dx + hx())) * ky + (dy + hy())];
    }

    double sum() const {
        double s = 0.0;
        for (float w : weights) s += w;
        return s;
    }
};

inline Stencil identity_stencil() {
    Stencil s(1, 1, 1);
    s.weights[0] = 1.0f;
    return s;
}

inline Stencil box_stencil(int k) {
    Stencil s(k, k, k, 1.0f / static_cast<float>(k) / k / k);
    return s;
}

// Truncated separable Gaussian, normalized to sum 1. If size <= 0 the extent
// is chosen as the smallest odd size covering 3 sigma, capped at 13.
inline Stencil gaussian_stencil(double sigma, int size = 0) {
    if (size <= 0) {
        size = 2 * static_cast<int>(std::ceil(3.0 * sigma)) + 1;
        size = std::min(size, 13);
    }
    const int h = size / 2;
    std::vector<double> g(size);
    double norm = 0.0;
    for (int i = -h; i <= h; ++i) {
        g[i + h] = std::exp(-0.5 * (i * i) / (sigma * sigma));
        norm += g[i + h];
    }
    for (double& w : g) w /= norm;
    Stencil s(size, size, size);
    for (int a = 0; a < size; ++a)
        for (int b = 0; b < size; ++b)
            for (int c = 0; c < size; ++c)
                s.weights[(static_cast<std::size_t>(a) * size + b) * size + c] =
                    static_cast<float>(g[a] * g[b] * g[c]);
    return s;
}

// Sobel derivative along the given axis (0 = z, 1 = x, 2 = y): central
// difference on the axis, [1 2 1]/4 smoothing orthogonal to it.
inline Stencil sobel_stencil(int axis) {
    if (axis < 0 || axis > 2) throw RangeError("sobel axis must be 0, 1 or 2");
    static const double smooth[3] = {0.25, 0.5, 0.25};
    static const double diff[3] = {-0.5, 0.0, 0.5};
    Stencil s(3, 3, 3);
    for (int a = 0; a < 3; ++a)
        for (int b = 0; b < 3; ++b)
            for (int c = 0; c < 3; ++c) {
                const double wz = axis == 0 ? diff[a] : smooth[a];
                const double wx = axis == 1 ? diff[b] : smooth[b];
                const double wy = axis == 2 ? diff[c] : smooth[c];
                s.weights[(static_cast<std::size_t>(a) * 3 + b) * 3 + c] =
                    static_cast<float>(wz * wx * wy);
            }
    return s;
}

// Element order reversed in every dimension.
inline Stencil flip_stencil(const Stencil& w) {
    Stencil out(w.kz, w.kx, w.ky);
    for (int a = 0; a < w.kz; ++a)
        for (int b = 0; b < w.kx; ++b)
            for (int c = 0; c < w.ky; ++c)
                out.weights[(static_cast<std::size_t>(w.kz - 1 - a) * w.kx + (w.kx - 1 - b)) * w.ky +
                            (w.ky - 1 - c)] =
                    w.weights[(static_cast<std::size_t>(a) * w.kx + b) * w.ky + c];
    return out;
}

// Element-wise scaling by 2^(-delta), matching the particle spacing at a
// level delta coarser than the finest.
inline Stencil rescale_stencil(const Stencil& w, int delta) {
    if (delta < 0) throw RangeError("rescale_stencil: delta must be >= 0");
    Stencil out = w;
    const float scale = std::ldexp(1.0f, -delta);
    for (float& v : out.weights) v *= scale;
    return out;
}

// Coarse-level stencil equivalent to upsample (piecewise constant), convolve
// with w, downsample (block average) across delta levels. Computed exactly by
// averaging the contributions of all fine-stencil elements over all fine
// positions inside a coarse cell; the support is padded to odd extents
// symmetric about the center.
inline Stencil restrict_stencil(const Stencil& w, int delta) {
    if (delta < 0) throw RangeError("restrict_stencil: delta must be >= 0");
    if (delta == 0) return w;
    const int m = 1 << delta;
    auto coarse_span = [&](int k) {
        // largest |K| reachable: K = floor_div(o - r, m), o in [0, m), r in [-h, h]
        const int h = k / 2;
        const int lo = -((h + m - 1) / m); // floor((0 - h) / m) .. conservative
        const int hi = (m - 1 + h) / m;
        return std::max(-lo, hi);
    };
    const int Hz = coarse_span(w.kz), Hx = coarse_span(w.kx), Hy = coarse_span(w.ky);
    Stencil out(2 * Hz + 1, 2 * Hx + 1, 2 * Hy + 1);
    std::vector<double> acc(out.weights.size(), 0.0);
    auto floor_div = [](int a, int b) { return a >= 0 ? a / b : -((-a + b - 1) / b); };
    const double inv = 1.0 / (static_cast<double>(m) * m * m);
    for (int oz = 0; oz < m; ++oz)
        for (int ox = 0; ox < m; ++ox)
            for (int oy = 0; oy < m; ++oy)
                for (int rz = -w.hz(); rz <= w.hz(); ++rz)
                    for (int rx = -w.hx(); rx <= w.hx(); ++rx)
                        for (int ry = -w.hy(); ry <= w.hy(); ++ry) {
                            // coarse cell read by fine position (o - r); the
                            // output is a true convolution, so the weight
                            // lands at the negated offset.
                            const int Kz = -floor_div(oz - rz, m);
                            const int Kx = -floor_div(ox - rx, m);
                            const int Ky = -floor_div(oy - ry, m);
                            acc[(static_cast<std::size_t>(Kz + Hz) * out.kx + (Kx + Hx)) * out.ky +
                                (Ky + Hy)] += inv * w.at(rz, rx, ry);
                        }
    for (std::size_t i = 0; i < acc.size(); ++i) out.weights[i] = static_cast<float>(acc[i]);
    return out;
}

enum class PyramidMode { Restricted, Rescaled, Uniform, Explicit };

// Per-level stencils for l in [l_min, l_max]; level l uses stencils[l - l_min].
struct StencilPyramid {
    int l_min = 0, l_max = 0;
    PyramidMode mode = PyramidMode::Uniform;
    std::vector<Stencil> stencils;

    const Stencil& at(int l) const {
        if (l < l_min || l > l_max) throw RangeError("StencilPyramid: level out of range");
        return stencils[l - l_min];
    }
};

inline StencilPyramid make_pyramid(const Stencil& w, int l_min, int l_max, PyramidMode mode) {
    StencilPyramid p;
    p.l_min = l_min;
    p.l_max = l_max;
    p.mode = mode;
    p.stencils.reserve(l_max - l_min + 1);
    for (int l = l_min; l <= l_max; ++l) {
        const int delta = l_max - l;
        switch (mode) {
        case PyramidMode::Restricted: p.stencils.push_back(restrict_stencil(w, delta)); break;
        case PyramidMode::Rescaled: p.stencils.push_back(rescale_stencil(w, delta)); break;
        default: p.stencils.push_back(w); break;
        }
    }
    return p;
}

inline StencilPyramid explicit_pyramid(std::vector<Stencil> stencils, int l_min, int l_max) {
    if (stencils.size() != static_cast<std::size_t>(l_max - l_min + 1))
        throw RangeError("explicit_pyramid: one stencil per level required");
    StencilPyramid p;
    p.l_min = l_min;
    p.l_max = l_max;
    p.mode = PyramidMode::Explicit;
    p.stencils = std::move(stencils);
    return p;
}

} // namespace aprkit
