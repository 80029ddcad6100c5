#pragma once

#include <algorithm>
#include <cstdint>
#include <cstring>
#include <vector>

#include "aprkit/apr.hpp"
#include "aprkit/linear_access.hpp"
#include "aprkit/parallel.hpp"
#include "aprkit/pixel_volume.hpp"
#include "aprkit/reconstruct.hpp"
#include "aprkit/stencil.hpp"

namespace aprkit {

// Largest stencil extent per axis accepted by the convolution paths.
inline constexpr int kMaxStencilExtent = 13;

struct ConvolveOptions {
    int threads = 0;          // 0 selects the default thread count
    bool use_row_skip = true; // skip empty (l, z) slices and clip y traversal
};

// Occupied sparse row with its y extent, used to skip empty neighborhoods.
struct RowSpan {
    int z = 0, x = 0;
    std::uint16_t y_min = 0, y_max = 0;
};

// Exact per-level row occupancy (rows with at least one particle).
inline std::vector<std::vector<RowSpan>> nonempty_row_index(const LinearAccess& a) {
    std::vector<std::vector<RowSpan>> index(a.level_count());
    for (int l = a.l_min; l <= a.l_max; ++l) {
        auto& rows = index[l - a.l_min];
        for (int z = 0; z < a.z_dim[l]; ++z)
            for (int x = 0; x < a.x_dim[l]; ++x) {
                auto [begin, end] = a.get_row(l, z, x);
                if (begin == end) continue;
                rows.push_back({z, x, a.y_idx[begin], a.y_idx[end - 1]});
            }
    }
    return index;
}

// Dense spatial convolution, true-convolution convention (weights flipped
// relative to correlation): o(p) = sum_r w(r) u(p - r).
inline PixelVolume convolve_pixels(const PixelVolume& v, const Stencil& w, PadMode pad,
                                   int threads = 0) {
    if (w.kz > kMaxStencilExtent || w.kx > kMaxStencilExtent || w.ky > kMaxStencilExtent)
        throw CapabilityError("convolve_pixels: stencil extent exceeds the supported maximum");
    const int hz = w.hz(), hx = w.hx(), hy = w.hy();
    const int pz = v.nz + 2 * hz, px = v.nx + 2 * hx, py = v.ny + 2 * hy;
    PixelVolume padded(pz, px, py, 0.0f);
    for (int z = 0; z < pz; ++z) {
        const int sz = z - hz;
        const bool z_out = sz < 0 || sz >= v.nz;
        if (z_out && pad == PadMode::Zero) continue;
        const int zr = z_out ? reflect_index(sz, v.nz) : sz;
        for (int x = 0; x < px; ++x) {
            const int sx = x - hx;
            const bool x_out = sx < 0 || sx >= v.nx;
            if (x_out && pad == PadMode::Zero) continue;
            const int xr = x_out ? reflect_index(sx, v.nx) : sx;
            float* dst = &padded.values[padded.index(z, x, 0)];
            const float* src = &v.values[v.index(zr, xr, 0)];
            std::memcpy(dst + hy, src, sizeof(float) * v.ny);
            if (pad == PadMode::Reflect) {
                for (int p = 0; p < hy; ++p) {
                    dst[p] = src[reflect_index(p - hy, v.ny)];
                    dst[hy + v.ny + p] = src[reflect_index(v.ny + p, v.ny)];
                }
            }
        }
    }

    PixelVolume out(v.nz, v.nx, v.ny);
    parallel_for_dynamic(v.nz, threads, [&](std::size_t zi) {
        const int z = static_cast<int>(zi);
        std::vector<double> acc(v.ny);
        for (int x = 0; x < v.nx; ++x) {
            std::fill(acc.begin(), acc.end(), 0.0);
            for (int az = 0; az < w.kz; ++az)
                for (int ax = 0; ax < w.kx; ++ax)
                    for (int ay = 0; ay < w.ky; ++ay) {
                        const float wv =
                            w.weights[(static_cast<std::size_t>(az) * w.kx + ax) * w.ky + ay];
                        if (wv == 0.0f) continue;
                        const float* src =
                            &padded.values[padded.index(z + 2 * hz - az, x + 2 * hx - ax, 2 * hy - ay)];
                        for (int y = 0; y < v.ny; ++y) acc[y] += wv * static_cast<double>(src[y]);
                    }
            float* dst = &out.values[out.index(z, x, 0)];
            for (int y = 0; y < v.ny; ++y) dst[y] = static_cast<float>(acc[y]);
        }
    });
    return out;
}

namespace detail {

// Ring buffer of kz reconstructed level-l planes with (x, y) padding. Planes
// are filled lazily while sliding along z inside a work chunk.
class LevelSlab {
public:
    LevelSlab(const APR& apr, const ParticleValues& values, const ParticleValues& tree_values,
              int l, const Stencil& w, PadMode pad, int y_fill_lo, int y_fill_hi)
        : apr_(apr), values_(values), tree_values_(tree_values), l_(l), w_(w), pad_(pad) {
        const LinearAccess& a = apr.access;
        zd_ = a.z_dim[l];
        xd_ = a.x_dim[l];
        yd_ = a.y_dim[l];
        bx_ = xd_ + 2 * w.hx();
        by_ = yd_ + 2 * w.hy();
        ya_ = std::max(0, y_fill_lo - w.hy());
        yb_ = std::min(yd_, y_fill_hi + 1 + w.hy());
        planes_.assign(w.kz, std::vector<float>(static_cast<std::size_t>(bx_) * by_, 0.0f));
        plane_tag_.assign(w.kz, INT32_MIN);
        row_.assign(yd_, 0.0f);
        acc_.assign(yd_, 0.0);
    }

    // Ensures the plane for level-z index z_src is present in the ring.
    void ensure_plane(int z_src) {
        const int slot = mod(z_src, w_.kz);
        if (plane_tag_[slot] == z_src) return;
        plane_tag_[slot] = z_src;
        auto& plane = planes_[slot];
        std::fill(plane.begin(), plane.end(), 0.0f);
        const bool z_out = z_src < 0 || z_src >= zd_;
        if (z_out && pad_ == PadMode::Zero) return;
        const int zr = z_out ? reflect_index(z_src, zd_) : z_src;
        const int hx = w_.hx(), hy = w_.hy();
        for (int bxi = 0; bxi < bx_; ++bxi) {
            const int x_src = bxi - hx;
            const bool x_out = x_src < 0 || x_src >= xd_;
            if (x_out && pad_ == PadMode::Zero) continue;
            const int xr = x_out ? reflect_index(x_src, xd_) : x_src;
            fill_level_row(apr_.access, values_, apr_.tree_access, tree_values_, l_, zr, xr,
                           row_.data(), ya_, yb_);
            float* dst = &plane[static_cast<std::size_t>(bxi) * by_];
            for (int y = ya_; y < yb_; ++y) dst[hy + y] = row_[y];
            if (pad_ == PadMode::Reflect) {
                if (ya_ == 0)
                    for (int p = 0; p < hy; ++p) dst[p] = row_[reflect_index(p - hy, yd_)];
                if (yb_ == yd_)
                    for (int p = 0; p < hy; ++p) dst[hy + yd_ + p] = row_[reflect_index(yd_ + p, yd_)];
            }
        }
    }

    // Stencil applied at particle (z, x, y); caller guarantees the planes
    // z - hz .. z + hz are present.
    double apply(int z, int x, int y) const {
        double acc = 0.0;
        const int hz = w_.hz(), hx = w_.hx(), hy = w_.hy();
        for (int az = 0; az < w_.kz; ++az) {
            const auto& plane = planes_[mod(z + hz - az, w_.kz)];
            for (int ax = 0; ax < w_.kx; ++ax) {
                const float* src = &plane[static_cast<std::size_t>(x + 2 * hx - ax) * by_];
                const float* wrow =
                    &w_.weights[(static_cast<std::size_t>(az) * w_.kx + ax) * w_.ky];
                const int base = y + 2 * hy;
                for (int ay = 0; ay < w_.ky; ++ay)
                    acc += static_cast<double>(wrow[ay]) * src[base - ay];
            }
        }
        return acc;
    }

    // Row-pass variant: the stencil applied at every cell of row (z, x) with
    // y in [y0, y1], written to acc(y). Per output cell the scalar additions
    // happen in exactly the same (az, ax, ay) order as apply(), so the two
    // code paths produce bit-identical values; this one amortizes the weight
    // and plane-row lookups over dense rows.
    const double* apply_row(int z, int x, int y0, int y1) {
        const int hz = w_.hz(), hx = w_.hx(), hy = w_.hy();
        std::fill(acc_.begin() + y0, acc_.begin() + y1 + 1, 0.0);
        for (int az = 0; az < w_.kz; ++az) {
            const auto& plane = planes_[mod(z + hz - az, w_.kz)];
            for (int ax = 0; ax < w_.kx; ++ax) {
                const float* row = &plane[static_cast<std::size_t>(x + 2 * hx - ax) * by_];
                const float* wrow =
                    &w_.weights[(static_cast<std::size_t>(az) * w_.kx + ax) * w_.ky];
                for (int ay = 0; ay < w_.ky; ++ay) {
                    const float wv = wrow[ay];
                    const float* src = &row[2 * hy - ay];
                    for (int y = y0; y <= y1; ++y)
                        acc_[y] += static_cast<double>(wv) * src[y];
                }
            }
        }
        return acc_.data();
    }

private:
    static int mod(int a, int b) { return ((a % b) + b) % b; }

    const APR& apr_;
    const ParticleValues& values_;
    const ParticleValues& tree_values_;
    int l_;
    const Stencil& w_;
    PadMode pad_;
    int zd_ = 0, xd_ = 0, yd_ = 0, bx_ = 0, by_ = 0;
    int ya_ = 0, yb_ = 0;
    std::vector<std::vector<float>> planes_;
    std::vector<int> plane_tag_;
    std::vector<float> row_;
    std::vector<double> acc_;
};

} // namespace detail

// APR-native convolution: the level-l stencil of the pyramid applied at every
// particle position of the level-l reconstruction, with pad_mode boundaries.
// Work is distributed over (level, z-chunk) units via dynamic pull scheduling;
// each particle is written by exactly one worker and the output is
// bit-identical for any thread count and with or without row skipping.
inline ParticleValues convolve_apr(const APR& apr, const ParticleValues& values,
                                   const ParticleValues& tree_values, const StencilPyramid& pyramid,
                                   PadMode pad = PadMode::Reflect, const ConvolveOptions& opt = {}) {
    const LinearAccess& a = apr.access;
    if (pyramid.l_min > a.l_min || pyramid.l_max < a.l_max)
        throw RangeError("convolve_apr: pyramid does not cover the APR levels");
    for (int l = a.l_min; l <= a.l_max; ++l) {
        const Stencil& w = pyramid.at(l);
        if (w.kz > kMaxStencilExtent || w.kx > kMaxStencilExtent || w.ky > kMaxStencilExtent)
            throw CapabilityError("convolve_apr: stencil extent exceeds the supported maximum");
    }

    // Per-level occupancy: which z-slices hold particles, and the global y
    // span of each level (used to clip the reconstruction fill).
    struct LevelInfo {
        std::vector<std::uint8_t> slice_occupied;
        int y_lo = 0, y_hi = -1;
        bool empty = true;
    };
    std::vector<LevelInfo> info(a.l_max + 1);
    for (int l = a.l_min; l <= a.l_max; ++l) {
        LevelInfo& li = info[l];
        li.slice_occupied.assign(a.z_dim[l], 0);
        li.y_lo = a.y_dim[l];
        li.y_hi = -1;
        for (int z = 0; z < a.z_dim[l]; ++z)
            for (int x = 0; x < a.x_dim[l]; ++x) {
                auto [begin, end] = a.get_row(l, z, x);
                if (begin == end) continue;
                li.slice_occupied[z] = 1;
                li.empty = false;
                li.y_lo = std::min(li.y_lo, static_cast<int>(a.y_idx[begin]));
                li.y_hi = std::max(li.y_hi, static_cast<int>(a.y_idx[end - 1]));
            }
        if (!opt.use_row_skip) {
            // identical output either way; this only disables the shortcuts
            std::fill(li.slice_occupied.begin(), li.slice_occupied.end(), 1);
            li.y_lo = 0;
            li.y_hi = a.y_dim[l] - 1;
            li.empty = false;
        }
    }

    // Work units: contiguous z-chunks per level.
    struct Chunk {
        int l, z_begin, z_end;
    };
    // Larger chunks amortize the refill of the hz overlap planes between
    // consecutive chunks; smaller chunks balance better across threads.
    std::vector<Chunk> chunks;
    const int chunk_size = resolve_threads(opt.threads) == 1 ? 64 : 8;
    for (int l = a.l_min; l <= a.l_max; ++l) {
        if (info[l].empty) continue;
        for (int z = 0; z < a.z_dim[l]; z += chunk_size)
            chunks.push_back({l, z, std::min(z + chunk_size, a.z_dim[l])});
    }

    ParticleValues out(a.particle_count(), 0.0f);
    parallel_for_dynamic(chunks.size(), opt.threads, [&](std::size_t ci) {
        const Chunk& c = chunks[ci];
        const Stencil& w = pyramid.at(c.l);
        const LevelInfo& li = info[c.l];
        detail::LevelSlab slab(apr, values, tree_values, c.l, w, pad, li.y_lo, li.y_hi);
        for (int z = c.z_begin; z < c.z_end; ++z) {
            if (!li.slice_occupied[z]) continue;
            for (int zz = z - w.hz(); zz <= z + w.hz(); ++zz) slab.ensure_plane(zz);
            for (int x = 0; x < a.x_dim[c.l]; ++x) {
                auto [begin, end] = a.get_row(c.l, z, x);
                if (begin == end) continue;
                const int y0 = a.y_idx[begin], y1 = a.y_idx[end - 1];
                const std::uint64_t count = end - begin;
                if (count >= 8 && 4 * count >= static_cast<std::uint64_t>(y1 - y0 + 1)) {
                    const double* acc = slab.apply_row(z, x, y0, y1);
                    for (std::uint64_t i = begin; i < end; ++i)
                        out[i] = static_cast<float>(acc[a.y_idx[i]]);
                } else {
                    for (std::uint64_t i = begin; i < end; ++i)
                        out[i] = static_cast<float>(slab.apply(z, x, a.y_idx[i]));
                }
            }
        }
    });
    return out;
}

} // namespace aprkit
