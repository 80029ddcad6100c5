#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <utility>
#include <vector>

#include "aprkit/apr.hpp"
#include "aprkit/linear_access.hpp"
#include "aprkit/parallel.hpp"
#include "aprkit/pixel_volume.hpp"
#include "aprkit/tree.hpp"

namespace aprkit {

namespace detail {

inline int clamp_index(int i, int n) { return i < 0 ? 0 : (i >= n ? n - 1 : i); }

// One 3^3 box-smoothing pass with replicate boundary.
inline PixelVolume box_smooth(const PixelVolume& v) {
    PixelVolume out(v.nz, v.nx, v.ny);
    for (int z = 0; z < v.nz; ++z)
        for (int x = 0; x < v.nx; ++x)
            for (int y = 0; y < v.ny; ++y) {
                double acc = 0.0;
                for (int dz = -1; dz <= 1; ++dz)
                    for (int dx = -1; dx <= 1; ++dx)
                        for (int dy = -1; dy <= 1; ++dy)
                            acc += v.at(clamp_index(z + dz, v.nz), clamp_index(x + dx, v.nx),
                                        clamp_index(y + dy, v.ny));
                out.at(z, x, y) = static_cast<float>(acc / 27.0);
            }
    return out;
}

} // namespace detail

// Per-pixel gradient magnitude with replicate boundary padding.
inline PixelVolume gradient_magnitude(const PixelVolume& v, GradientMode mode, int threads = 0) {
    PixelVolume out(v.nz, v.nx, v.ny);
    auto clampz = [&](int i) { return detail::clamp_index(i, v.nz); };
    auto clampx = [&](int i) { return detail::clamp_index(i, v.nx); };
    auto clampy = [&](int i) { return detail::clamp_index(i, v.ny); };
    parallel_for_dynamic(v.nz, threads, [&](std::size_t zi) {
        const int z = static_cast<int>(zi);
        for (int x = 0; x < v.nx; ++x)
            for (int y = 0; y < v.ny; ++y) {
                double gz = 0, gx = 0, gy = 0;
                if (mode == GradientMode::CentralDiff) {
                    gz = 0.5 * (v.at(clampz(z + 1), x, y) - v.at(clampz(z - 1), x, y));
                    gx = 0.5 * (v.at(z, clampx(x + 1), y) - v.at(z, clampx(x - 1), y));
                    gy = 0.5 * (v.at(z, x, clampy(y + 1)) - v.at(z, x, clampy(y - 1)));
                } else {
                    // Sobel: central difference along the axis, [1 2 1]/4 smoothing
                    // in the two orthogonal directions.
                    static const double s[3] = {0.25, 0.5, 0.25};
                    static const double d[3] = {-0.5, 0.0, 0.5};
                    for (int a = 0; a < 3; ++a)
                        for (int b = 0; b < 3; ++b)
                            for (int c = 0; c < 3; ++c) {
                                const double val = v.at(clampz(z + a - 1), clampx(x + b - 1),
                                                        clampy(y + c - 1));
                                gz += d[a] * s[b] * s[c] * val;
                                gx += s[a] * d[b] * s[c] * val;
                                gy += s[a] * s[b] * d[c] * val;
                            }
                }
                out.at(z, x, y) = static_cast<float>(std::sqrt(gz * gz + gx * gx + gy * gy));
            }
    });
    return out;
}

// Local error scale. The constant policy returns the constant everywhere; the
// local-range policy is the sliding-window (max - min) over the given radius,
// box-smoothed once, clamped below at the floor.
inline PixelVolume local_scale(const PixelVolume& v, const SigmaPolicy& policy) {
    double floor_value = policy.floor;
    if (floor_value <= 0.0) floor_value = 1e-3 * std::max(1e-30f, intensity_range(v));
    if (policy.mode == SigmaMode::Constant) {
        return PixelVolume(v.nz, v.nx, v.ny,
                           static_cast<float>(std::max(policy.value, floor_value)));
    }
    const int r = policy.window_radius;
    PixelVolume range(v.nz, v.nx, v.ny);
    for (int z = 0; z < v.nz; ++z)
        for (int x = 0; x < v.nx; ++x)
            for (int y = 0; y < v.ny; ++y) {
                float lo = v.at(z, x, y), hi = lo;
                for (int dz = -r; dz <= r; ++dz)
                    for (int dx = -r; dx <= r; ++dx)
                        for (int dy = -r; dy <= r; ++dy) {
                            const int zz = z + dz, xx = x + dx, yy = y + dy;
                            if (zz < 0 || zz >= v.nz || xx < 0 || xx >= v.nx || yy < 0 || yy >= v.ny)
                                continue;
                            const float val = v.at(zz, xx, yy);
                            lo = std::min(lo, val);
                            hi = std::max(hi, val);
                        }
                range.at(z, x, y) = hi - lo;
            }
    PixelVolume out = detail::box_smooth(range);
    for (float& s : out.values) s = std::max(s, static_cast<float>(floor_value));
    return out;
}

// Per-pixel target level from the local length scale L = E*sigma/|grad f|:
// l = clamp(ceil(log2(|Omega| / L)), l_min, l_max). Zero gradient means an
// infinite length scale and the coarsest level.
inline std::vector<int> level_function(const PixelVolume& grad, const PixelVolume& sigma, double E,
                                       int l_min, int l_max) {
    if (!grad.same_dims(sigma)) throw RangeError("level_function: shape mismatch");
    const double omega = static_cast<double>(1u << l_max);
    std::vector<int> levels(grad.size());
    for (std::size_t i = 0; i < grad.size(); ++i) {
        const double g = grad.values[i];
        if (g <= 0.0) {
            levels[i] = l_min;
            continue;
        }
        const double L = E * sigma.values[i] / g;
        const int l = static_cast<int>(std::ceil(std::log2(omega / L)));
        levels[i] = std::clamp(l, l_min, l_max);
    }
    return levels;
}

// Domain-partition solver. Per-pixel target levels are max-reduced into each
// level's grid; demands at a level are dilated to their 3^3 cell-neighborhood
// before reduction onto the next coarser level, which enforces the
// one-level-difference constraint between adjacent leaf cells. Leaves are the
// coarsest cells not dominated by a finer demand.
inline LinearAccess solve_levels(const std::vector<int>& targets,
                                 const std::array<int, 3>& source_dims, int l_min, int l_max) {
    const int nz = source_dims[0], nx = source_dims[1], ny = source_dims[2];
    if (targets.size() != static_cast<std::size_t>(nz) * nx * ny)
        throw RangeError("solve_levels: target field size mismatch");
    if (ny > kMaxYDim) throw CapabilityError("y dimension exceeds the 16-bit index limit");

    struct Grid {
        int zd, xd, yd;
        std::vector<std::int16_t> v;
        std::int16_t& at(int z, int x, int y) {
            return v[(static_cast<std::size_t>(z) * xd + x) * yd + y];
        }
        std::int16_t at(int z, int x, int y) const {
            return v[(static_cast<std::size_t>(z) * xd + x) * yd + y];
        }
    };
    auto make_grid = [&](int l) {
        Grid g{grid_dim(nz, l_max, l), grid_dim(nx, l_max, l), grid_dim(ny, l_max, l), {}};
        g.v.assign(static_cast<std::size_t>(g.zd) * g.xd * g.yd, 0);
        return g;
    };
    auto max_reduce = [&](const Grid& fine, Grid& coarse) {
        for (auto& e : coarse.v) e = 0;
        for (int z = 0; z < fine.zd; ++z)
            for (int x = 0; x < fine.xd; ++x)
                for (int y = 0; y < fine.yd; ++y) {
                    auto& c = coarse.at(z / 2, x / 2, y / 2);
                    c = std::max(c, fine.at(z, x, y));
                }
    };

    // Max-reduced target pyramid.
    std::vector<Grid> T(l_max + 1);
    T[l_max] = make_grid(l_max);
    for (std::size_t i = 0; i < targets.size(); ++i)
        T[l_max].v[i] = static_cast<std::int16_t>(std::clamp(targets[i], l_min, l_max));
    for (int l = l_max - 1; l >= l_min; --l) {
        T[l] = make_grid(l);
        max_reduce(T[l + 1], T[l]);
    }

    // Demand fields: need[l](i) == 1 forces resolution >= l at cell i. Finer
    // demands propagate one level per step through the dilated reduction.
    std::vector<Grid> need(l_max + 1);
    for (int l = l_max; l >= l_min; --l) {
        need[l] = make_grid(l);
        for (std::size_t i = 0; i < need[l].v.size(); ++i)
            need[l].v[i] = T[l].v[i] >= l ? 1 : 0;
        if (l < l_max) {
            const Grid& fine = need[l + 1];
            Grid& g = need[l];
            for (int z = 0; z < fine.zd; ++z)
                for (int x = 0; x < fine.xd; ++x)
                    for (int y = 0; y < fine.yd; ++y) {
                        if (!fine.at(z, x, y)) continue;
                        for (int dz = -1; dz <= 1; ++dz)
                            for (int dx = -1; dx <= 1; ++dx)
                                for (int dy = -1; dy <= 1; ++dy) {
                                    const int zz = z + dz, xx = x + dx, yy = y + dy;
                                    if (zz < 0 || zz >= fine.zd || xx < 0 || xx >= fine.xd ||
                                        yy < 0 || yy >= fine.yd)
                                        continue;
                                    g.at(zz / 2, xx / 2, yy / 2) = 1;
                                }
                    }
        }
    }

    // Per-pixel finest demanded level, then its max-reduced pyramid.
    Grid G = make_grid(l_max);
    for (auto& e : G.v) e = static_cast<std::int16_t>(l_min);
    for (int l = l_min; l <= l_max; ++l) {
        const int s = cell_size(l_max, l);
        for (int z = 0; z < need[l].zd; ++z)
            for (int x = 0; x < need[l].xd; ++x)
                for (int y = 0; y < need[l].yd; ++y) {
                    if (!need[l].at(z, x, y)) continue;
                    const int z1 = std::min((z + 1) * s, nz), x1 = std::min((x + 1) * s, nx);
                    const int y1 = std::min((y + 1) * s, ny);
                    for (int zz = z * s; zz < z1; ++zz)
                        for (int xx = x * s; xx < x1; ++xx)
                            for (int yy = y * s; yy < y1; ++yy) {
                                auto& e = G.at(zz, xx, yy);
                                e = std::max(e, static_cast<std::int16_t>(l));
                            }
                }
    }
    std::vector<Grid> Gmax(l_max + 1);
    Gmax[l_max] = G;
    for (int l = l_max - 1; l >= l_min; --l) {
        Gmax[l] = make_grid(l);
        max_reduce(Gmax[l + 1], Gmax[l]);
    }

    // A cell is a leaf iff nothing inside it demands a finer level and its
    // parent does not already satisfy the same condition.
    std::vector<std::vector<std::uint16_t>> rows;
    for (int l = l_min; l <= l_max; ++l) {
        const Grid& g = Gmax[l];
        for (int z = 0; z < g.zd; ++z)
            for (int x = 0; x < g.xd; ++x) {
                rows.emplace_back();
                auto& ys = rows.back();
                for (int y = 0; y < g.yd; ++y) {
                    if (g.at(z, x, y) > l) continue;
                    if (l > l_min && Gmax[l - 1].at(z / 2, x / 2, y / 2) <= l - 1) continue;
                    ys.push_back(static_cast<std::uint16_t>(y));
                }
            }
    }
    return assemble_access(l_min, l_max, source_dims, rows);
}

// Particle value sampling by average downsampling: a level-l particle takes
// the mean of the source pixels in its (boundary-clipped) cell footprint.
inline ParticleValues sample_particles(const PixelVolume& v, const LinearAccess& access) {
    const int l_max = access.l_max;
    struct SumGrid {
        int zd, xd, yd;
        std::vector<double> s, w;
    };
    std::vector<SumGrid> pyr(l_max + 1);
    pyr[l_max] = {v.nz, v.nx, v.ny, std::vector<double>(v.size()), std::vector<double>(v.size(), 1.0)};
    for (std::size_t i = 0; i < v.size(); ++i) pyr[l_max].s[i] = v.values[i];
    for (int l = l_max - 1; l >= access.l_min; --l) {
        const SumGrid& f = pyr[l + 1];
        SumGrid g{grid_dim(v.nz, l_max, l), grid_dim(v.nx, l_max, l), grid_dim(v.ny, l_max, l), {}, {}};
        g.s.assign(static_cast<std::size_t>(g.zd) * g.xd * g.yd, 0.0);
        g.w.assign(g.s.size(), 0.0);
        for (int z = 0; z < f.zd; ++z)
            for (int x = 0; x < f.xd; ++x)
                for (int y = 0; y < f.yd; ++y) {
                    const std::size_t fi = (static_cast<std::size_t>(z) * f.xd + x) * f.yd + y;
                    const std::size_t gi =
                        (static_cast<std::size_t>(z / 2) * g.xd + x / 2) * g.yd + y / 2;
                    g.s[gi] += f.s[fi];
                    g.w[gi] += f.w[fi];
                }
        pyr[l] = std::move(g);
    }
    ParticleValues out(access.particle_count());
    access.for_each_particle([&](int l, int z, int x, int y, std::uint64_t i) {
        const SumGrid& g = pyr[l];
        const std::size_t gi = (static_cast<std::size_t>(z) * g.xd + x) * g.yd + y;
        out[i] = static_cast<float>(g.s[gi] / g.w[gi]);
    });
    return out;
}

// Full pipeline: gradient magnitude, local error scale, target levels, level
// solve, tree construction, particle sampling. With a constant error scale one
// safety level is added to the targets so that the sampled (averaged) particle
// values keep the reconstruction-error bound with respect to the input pixels.
inline std::pair<APR, ParticleValues> build_apr(const PixelVolume& v, const BuildParams& params,
                                                int threads = 0) {
    if (v.nz < 1 || v.nx < 1 || v.ny < 1) throw RangeError("build_apr: empty volume");
    if (v.ny > kMaxYDim) throw CapabilityError("y dimension exceeds the 16-bit index limit");
    const int l_max = compute_l_max(v.nz, v.nx, v.ny);
    const int l_min = compute_l_min(l_max);

    PixelVolume grad = gradient_magnitude(v, params.gradient, threads);
    for (int p = 0; p < params.smoothing_passes; ++p) grad = detail::box_smooth(grad);
    const PixelVolume sigma = local_scale(v, params.sigma);
    std::vector<int> targets = level_function(grad, sigma, params.rel_error, l_min, l_max);
    if (params.sigma.mode == SigmaMode::Constant) {
        for (int& t : targets) t = std::min(t + 1, l_max);
    }

    APR apr;
    apr.source_dims = {v.nz, v.nx, v.ny};
    apr.params = params;
    apr.access = solve_levels(targets, apr.source_dims, l_min, l_max);
    apr.tree_access = init_tree_structure(apr.access, apr.source_dims);
    ParticleValues values = sample_particles(v, apr.access);
    return {std::move(apr), std::move(values)};
}

} // namespace aprkit
