#pragma once

#include <algorithm>
#include <cstdint>
#include <vector>

#include "aprkit/apr.hpp"
#include "aprkit/linear_access.hpp"
#include "aprkit/pixel_volume.hpp"

namespace aprkit {

enum class PadMode { Zero, Reflect };

// Symmetric (edge-repeating) reflection of an index into [0, n). Handles
// indices that fall several domain widths outside.
inline int reflect_index(int i, int n) {
    while (i < 0 || i >= n) {
        if (i < 0)
            i = -i - 1;
        else
            i = 2 * n - 1 - i;
    }
    return i;
}

// Isotropic patch at level l: half-open (z, x) cell ranges, the full sparse
// y span, and per-side padding filled according to pad_mode.
struct PatchSpec {
    int level = 0;
    int z_begin = 0, z_end = 0;
    int x_begin = 0, x_end = 0;
    int pad = 0;
    PadMode pad_mode = PadMode::Reflect;
};

// Writes the level-l reconstruction of row (l, z, x) restricted to y in
// [y_begin, y_end) into dst (dst[y] is cell y). Case 1 cells take the value
// of the covering leaf at level <= l; case 2 cells take the interior-node
// value at level l. Every cell in range is written exactly once.
inline void fill_level_row(const LinearAccess& access, const ParticleValues& values,
                           const LinearAccess& tree, const ParticleValues& tree_values, int l,
                           int z, int x, float* dst, int y_begin, int y_end) {
    // Leaves at level l - d covering this row.
    const int d_max = l - access.l_min;
    for (int d = 0; d <= d_max; ++d) {
        const int ll = l - d;
        if (ll > access.l_max) continue;
        const int cz = z >> d, cx = x >> d;
        if (cz >= access.z_dim[ll] || cx >= access.x_dim[ll]) continue;
        auto [begin, end] = access.get_row(ll, cz, cx);
        for (std::uint64_t i = begin; i < end; ++i) {
            const int y0 = access.y_idx[i] << d;
            const int ya = std::max(y0, y_begin);
            const int yb = std::min({y0 + (1 << d), access.y_dim[l], y_end});
            for (int y = ya; y < yb; ++y) dst[y] = values[i];
        }
    }
    // Interior nodes at level l itself.
    if (l <= tree.l_max && l >= tree.l_min && !tree_values.empty()) {
        if (z < tree.z_dim[l] && x < tree.x_dim[l]) {
            auto [begin, end] = tree.get_row(l, z, x);
            for (std::uint64_t i = begin; i < end; ++i) {
                const int y = tree.y_idx[i];
                if (y >= y_begin && y < y_end) dst[y] = tree_values[i];
            }
        }
    }
}

// Piecewise-constant reconstruction sampled on the level-l grid. Equals
// average-downsampling the full reconstruction to level l.
inline PixelVolume reconstruct_level(const APR& apr, const ParticleValues& values,
                                     const ParticleValues& tree_values, int l) {
    if (l < apr.access.l_min || l > apr.access.l_max)
        throw RangeError("reconstruct_level: level out of range");
    const LinearAccess& a = apr.access;
    PixelVolume out(a.z_dim[l], a.x_dim[l], a.y_dim[l]);
    for (int z = 0; z < out.nz; ++z)
        for (int x = 0; x < out.nx; ++x)
            fill_level_row(a, values, apr.tree_access, tree_values, l, z, x,
                           &out.values[out.index(z, x, 0)], 0, out.ny);
    return out;
}

// Full pixel reconstruction: every pixel takes the value of its covering leaf.
inline PixelVolume reconstruct_full(const APR& apr, const ParticleValues& values) {
    static const ParticleValues no_tree;
    return reconstruct_level(apr, values, no_tree, apr.access.l_max);
}

// Dense window of reconstruct_level(l) plus padding; only rows inside the
// spec are reconstructed.
inline PixelVolume reconstruct_patch(const APR& apr, const ParticleValues& values,
                                     const ParticleValues& tree_values, const PatchSpec& spec) {
    const LinearAccess& a = apr.access;
    const int l = spec.level;
    if (l < a.l_min || l > a.l_max) throw RangeError("reconstruct_patch: level out of range");
    if (spec.z_begin < 0 || spec.z_end > a.z_dim[l] || spec.x_begin < 0 || spec.x_end > a.x_dim[l] ||
        spec.z_begin > spec.z_end || spec.x_begin > spec.x_end || spec.pad < 0)
        throw RangeError("reconstruct_patch: spec outside the level grid");

    const int pad = spec.pad;
    const int yd = a.y_dim[l];
    const int out_nz = spec.z_end - spec.z_begin + 2 * pad;
    const int out_nx = spec.x_end - spec.x_begin + 2 * pad;
    const int out_ny = yd + 2 * pad;
    PixelVolume out(out_nz, out_nx, out_ny, 0.0f);
    std::vector<float> row(yd, 0.0f);
    for (int oz = 0; oz < out_nz; ++oz) {
        const int z = spec.z_begin - pad + oz;
        for (int ox = 0; ox < out_nx; ++ox) {
            const int x = spec.x_begin - pad + ox;
            float* dst = &out.values[out.index(oz, ox, 0)];
            const bool inside_zx = z >= 0 && z < a.z_dim[l] && x >= 0 && x < a.x_dim[l];
            if (!inside_zx && spec.pad_mode == PadMode::Zero) continue; // stays zero
            const int zr = inside_zx ? z : reflect_index(z, a.z_dim[l]);
            const int xr = inside_zx ? x : reflect_index(x, a.x_dim[l]);
            fill_level_row(a, values, apr.tree_access, tree_values, l, zr, xr, row.data(), 0, yd);
            for (int y = 0; y < yd; ++y) dst[pad + y] = row[y];
            for (int p = 0; p < pad; ++p) {
                dst[p] = spec.pad_mode == PadMode::Zero ? 0.0f : row[reflect_index(p - pad, yd)];
                dst[pad + yd + p] =
                    spec.pad_mode == PadMode::Zero ? 0.0f : row[reflect_index(yd + p, yd)];
            }
        }
    }
    return out;
}

} // namespace aprkit
