#pragma once

// Shared test utilities: randomized APR generation and brute-force reference
// implementations used as oracles for the optimized library code paths.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <numeric>
#include <vector>

#include "aprkit/aprkit.hpp"

namespace testutil {

using namespace aprkit;

// Random APR over random dims: target levels form a low background with a few
// high-resolution blobs, pushed through the level solver. Structures made this
// way exercise all levels and ragged (non-power-of-two) boundaries.
inline APR random_apr(CounterRng& rng, int min_dim = 4, int max_dim = 40) {
    const int nz = static_cast<int>(rng.uniform_int(min_dim, max_dim));
    const int nx = static_cast<int>(rng.uniform_int(min_dim, max_dim));
    const int ny = static_cast<int>(rng.uniform_int(min_dim, max_dim));
    const int l_max = compute_l_max(nz, nx, ny);
    const int l_min = compute_l_min(l_max);

    std::vector<int> targets(static_cast<std::size_t>(nz) * nx * ny, l_min);
    const int blobs = static_cast<int>(rng.uniform_int(0, 4));
    for (int b = 0; b < blobs; ++b) {
        const int level = static_cast<int>(rng.uniform_int(l_min, l_max));
        const double cz = rng.uniform(0, nz), cx = rng.uniform(0, nx), cy = rng.uniform(0, ny);
        const double r = rng.uniform(1.0, 0.3 * max_dim);
        for (int z = 0; z < nz; ++z)
            for (int x = 0; x < nx; ++x)
                for (int y = 0; y < ny; ++y) {
                    const double d2 = (z - cz) * (z - cz) + (x - cx) * (x - cx) + (y - cy) * (y - cy);
                    if (d2 <= r * r) {
                        int& t = targets[(static_cast<std::size_t>(z) * nx + x) * ny + y];
                        t = std::max(t, level);
                    }
                }
    }

    APR apr;
    apr.source_dims = {nz, nx, ny};
    apr.access = solve_levels(targets, apr.source_dims, l_min, l_max);
    apr.tree_access = init_tree_structure(apr.access, apr.source_dims);
    return apr;
}

inline ParticleValues random_values(CounterRng& rng, std::size_t n, double lo = 0.0,
                                    double hi = 1000.0) {
    ParticleValues v(n);
    for (float& x : v) x = static_cast<float>(rng.uniform(lo, hi));
    return v;
}

// Index of the particle at cell (l, z, x, y), or -1 if absent.
inline std::int64_t find_particle(const LinearAccess& a, int l, int z, int x, int y) {
    if (l < a.l_min || l > a.l_max) return -1;
    if (z < 0 || z >= a.z_dim[l] || x < 0 || x >= a.x_dim[l]) return -1;
    auto [begin, end] = a.get_row(l, z, x);
    const auto it = std::lower_bound(a.y_idx.begin() + begin, a.y_idx.begin() + end,
                                     static_cast<std::uint16_t>(y));
    if (it == a.y_idx.begin() + end || *it != y) return -1;
    return static_cast<std::int64_t>(it - a.y_idx.begin());
}

// Reference full reconstruction: per pixel, scan all levels for the covering
// leaf. Independent of fill_level_row.
inline PixelVolume reference_reconstruct(const APR& apr, const ParticleValues& values) {
    const auto& d = apr.source_dims;
    PixelVolume out(d[0], d[1], d[2]);
    const LinearAccess& a = apr.access;
    for (int z = 0; z < d[0]; ++z)
        for (int x = 0; x < d[1]; ++x)
            for (int y = 0; y < d[2]; ++y) {
                const int l = resolution_level_at(a, z, x, y);
                const int dd = a.l_max - l;
                const std::int64_t i = find_particle(a, l, z >> dd, x >> dd, y >> dd);
                out.at(z, x, y) = values[static_cast<std::size_t>(i)];
            }
    return out;
}

// Reference level-l image: covering leaf value where one exists at level <= l,
// interior-node value otherwise.
inline PixelVolume reference_level_image(const APR& apr, const ParticleValues& values,
                                         const ParticleValues& tree_values, int l) {
    const LinearAccess& a = apr.access;
    PixelVolume out(a.z_dim[l], a.x_dim[l], a.y_dim[l]);
    for (int z = 0; z < out.nz; ++z)
        for (int x = 0; x < out.nx; ++x)
            for (int y = 0; y < out.ny; ++y) {
                float v = 0.0f;
                bool found = false;
                for (int ll = l; ll >= a.l_min && !found; --ll) {
                    const int d = l - ll;
                    const std::int64_t i = find_particle(a, ll, z >> d, x >> d, y >> d);
                    if (i >= 0) {
                        v = values[static_cast<std::size_t>(i)];
                        found = true;
                    }
                }
                if (!found) {
                    const std::int64_t i = find_particle(apr.tree_access, l, z, x, y);
                    if (i >= 0) {
                        v = tree_values[static_cast<std::size_t>(i)];
                        found = true;
                    }
                }
                out.at(z, x, y) = v;
            }
    return out;
}

// Reference dense convolution: direct triple loop over the stencil with
// explicit boundary handling, double accumulation.
inline PixelVolume reference_convolve(const PixelVolume& v, const Stencil& w, PadMode pad) {
    PixelVolume out(v.nz, v.nx, v.ny);
    for (int z = 0; z < v.nz; ++z)
        for (int x = 0; x < v.nx; ++x)
            for (int y = 0; y < v.ny; ++y) {
                double acc = 0.0;
                for (int rz = -w.hz(); rz <= w.hz(); ++rz)
                    for (int rx = -w.hx(); rx <= w.hx(); ++rx)
                        for (int ry = -w.hy(); ry <= w.hy(); ++ry) {
                            int sz = z - rz, sx = x - rx, sy = y - ry;
                            const bool outside = sz < 0 || sz >= v.nz || sx < 0 || sx >= v.nx ||
                                                 sy < 0 || sy >= v.ny;
                            if (outside) {
                                if (pad == PadMode::Zero) continue;
                                sz = reflect_index(sz, v.nz);
                                sx = reflect_index(sx, v.nx);
                                sy = reflect_index(sy, v.ny);
                            }
                            acc += static_cast<double>(w.at(rz, rx, ry)) * v.at(sz, sx, sy);
                        }
                out.at(z, x, y) = static_cast<float>(acc);
            }
    return out;
}

inline Stencil random_stencil(CounterRng& rng, int kz, int kx, int ky, double lo = -1.0,
                              double hi = 1.0) {
    Stencil w(kz, kx, ky);
    for (float& v : w.weights) v = static_cast<float>(rng.uniform(lo, hi));
    return w;
}

inline double max_abs_diff(const std::vector<float>& a, const std::vector<float>& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i)
        m = std::max(m, std::abs(static_cast<double>(a[i]) - b[i]));
    return m;
}

inline double max_rel_diff(const std::vector<float>& a, const std::vector<float>& b,
                           double scale_floor = 1e-12) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double s = std::max({std::abs(static_cast<double>(a[i])),
                                   std::abs(static_cast<double>(b[i])), scale_floor});
        m = std::max(m, std::abs(static_cast<double>(a[i]) - b[i]) / s);
    }
    return m;
}

inline bool bit_identical(const std::vector<float>& a, const std::vector<float>& b) {
    if (a.size() != b.size()) return false;
    for (std::size_t i = 0; i < a.size(); ++i) {
        std::uint32_t ua, ub;
        std::memcpy(&ua, &a[i], 4);
        std::memcpy(&ub, &b[i], 4);
        if (ua != ub) return false;
    }
    return true;
}

inline double spearman(const std::vector<double>& a, const std::vector<double>& b) {
    auto ranks = [](const std::vector<double>& v) {
        std::vector<std::size_t> order(v.size());
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) { return v[i] < v[j]; });
        std::vector<double> r(v.size());
        for (std::size_t k = 0; k < order.size(); ++k) r[order[k]] = static_cast<double>(k);
        return r;
    };
    const std::vector<double> ra = ranks(a), rb = ranks(b);
    const double n = static_cast<double>(a.size());
    double ma = 0, mb = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        ma += ra[i];
        mb += rb[i];
    }
    ma /= n;
    mb /= n;
    double num = 0, da = 0, db = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        num += (ra[i] - ma) * (rb[i] - mb);
        da += (ra[i] - ma) * (ra[i] - ma);
        db += (rb[i] - mb) * (rb[i] - mb);
    }
    return num / std::sqrt(da * db);
}

} // namespace testutil
