#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "aprkit/linear_access.hpp"

namespace aprkit {

enum class SigmaMode { Constant, LocalRange };
enum class GradientMode { CentralDiff, Sobel };

struct SigmaPolicy {
    SigmaMode mode = SigmaMode::Constant;
    double value = 1.0;     // Constant
    int window_radius = 2;  // LocalRange
    double floor = 0.0;     // 0 selects the default (1e-3 x intensity range)

    static SigmaPolicy constant(double v) { return {SigmaMode::Constant, v, 2, 0.0}; }
    static SigmaPolicy local_range(int radius, double floor_value) {
        return {SigmaMode::LocalRange, 1.0, radius, floor_value};
    }
};

struct BuildParams {
    double rel_error = 0.1; // E in the reconstruction-error bound
    SigmaPolicy sigma = SigmaPolicy::constant(1.0);
    GradientMode gradient = GradientMode::CentralDiff;
    int smoothing_passes = 0; // 3^3 box passes applied to the gradient magnitude
};

struct APR {
    LinearAccess access;      // leaf particle cells
    LinearAccess tree_access; // interior nodes, levels [max(l_min-1, 0), l_max-1]
    std::array<int, 3> source_dims{0, 0, 0}; // (nz, nx, ny)
    BuildParams params;

    std::uint64_t pixel_count() const {
        return static_cast<std::uint64_t>(source_dims[0]) * source_dims[1] * source_dims[2];
    }
};

inline double computational_ratio(const APR& apr) {
    return static_cast<double>(apr.pixel_count()) / static_cast<double>(apr.access.particle_count());
}

struct ValidationReport {
    bool ok = true;
    std::string message;

    static ValidationReport success() { return {}; }
    static ValidationReport violation(std::string msg) { return {false, std::move(msg)}; }
};

// Checks the structural invariants of a LinearAccess plus the domain-partition
// property: every source pixel is covered by exactly one particle cell.
// Empty rows are legal. Violations are reported, not thrown.
inline ValidationReport validate(const LinearAccess& a, const std::array<int, 3>& source_dims) {
    if (a.l_min > a.l_max) return ValidationReport::violation("l_min > l_max");
    if ((int)a.z_dim.size() <= a.l_max || (int)a.x_dim.size() <= a.l_max || (int)a.y_dim.size() <= a.l_max)
        return ValidationReport::violation("per-level dim arrays too short");

    std::uint64_t expected_rows = 0;
    for (int l = a.l_min; l <= a.l_max; ++l) {
        if (a.level_offset[l] != expected_rows)
            return ValidationReport::violation("level_offset mismatch at level " + std::to_string(l));
        expected_rows += static_cast<std::uint64_t>(a.z_dim[l]) * a.x_dim[l];
    }
    if (a.xz_end.size() != expected_rows)
        return ValidationReport::violation("xz_end length does not match level grids");

    std::uint64_t prev = 0;
    for (std::uint64_t r = 0; r < a.xz_end.size(); ++r) {
        if (a.xz_end[r] < prev) return ValidationReport::violation("xz_end decreases at row " + std::to_string(r));
        prev = a.xz_end[r];
    }
    if (!a.xz_end.empty() && a.xz_end.back() != a.y_idx.size())
        return ValidationReport::violation("xz_end[last] != y_idx length");
    if (a.xz_end.empty() && !a.y_idx.empty())
        return ValidationReport::violation("particles present but no rows");

    for (int l = a.l_min; l <= a.l_max; ++l) {
        for (int z = 0; z < a.z_dim[l]; ++z) {
            for (int x = 0; x < a.x_dim[l]; ++x) {
                auto [begin, end] = a.get_row(l, z, x);
                int last = -1;
                for (std::uint64_t i = begin; i < end; ++i) {
                    const int y = a.y_idx[i];
                    if (y <= last)
                        return ValidationReport::violation("non-increasing y in row (" + std::to_string(l) +
                                                           ", " + std::to_string(z) + ", " + std::to_string(x) + ")");
                    if (y >= a.y_dim[l])
                        return ValidationReport::violation("y index out of level grid in level " + std::to_string(l));
                    last = y;
                }
            }
        }
    }

    // Partition of the pixel domain: mark every covered pixel once.
    const std::uint64_t n_pixels =
        static_cast<std::uint64_t>(source_dims[0]) * source_dims[1] * source_dims[2];
    if (n_pixels == 0) return ValidationReport::success();
    std::vector<std::uint8_t> cover(n_pixels, 0);
    const int geom_l_max = a.l_max;
    bool double_cover = false, overflow = false;
    a.for_each_particle([&](int l, int z, int x, int y, std::uint64_t) {
        const int s = cell_size(geom_l_max, l);
        const int z0 = z * s, x0 = x * s, y0 = y * s;
        const int z1 = std::min(z0 + s, source_dims[0]);
        const int x1 = std::min(x0 + s, source_dims[1]);
        const int y1 = std::min(y0 + s, source_dims[2]);
        if (z0 >= source_dims[0] || x0 >= source_dims[1] || y0 >= source_dims[2]) {
            overflow = true;
            return;
        }
        for (int zz = z0; zz < z1; ++zz)
            for (int xx = x0; xx < x1; ++xx)
                for (int yy = y0; yy < y1; ++yy) {
                    std::uint8_t& c = cover[(static_cast<std::uint64_t>(zz) * source_dims[1] + xx) *
                                               source_dims[2] + yy];
                    if (c) double_cover = true;
                    c = 1;
                }
    });
    if (overflow) return ValidationReport::violation("particle cell outside the image domain");
    if (double_cover) return ValidationReport::violation("double coverage: overlapping particle cells");
    for (std::uint64_t i = 0; i < n_pixels; ++i)
        if (!cover[i]) return ValidationReport::violation("uncovered pixel at flat index " + std::to_string(i));
    return ValidationReport::success();
}

inline ValidationReport validate(const APR& apr) { return validate(apr.access, apr.source_dims); }

// Level of the unique leaf cell containing pixel (z, x, y). Scans all levels
// so corrupt structures (uncovered or doubly covered pixels) are detected.
inline int resolution_level_at(const LinearAccess& a, int z, int x, int y) {
    int found = -1;
    for (int l = a.l_max; l >= a.l_min; --l) {
        const int d = a.l_max - l;
        const int cz = z >> d, cx = x >> d, cy = y >> d;
        if (cz >= a.z_dim[l] || cx >= a.x_dim[l]) continue;
        auto [begin, end] = a.get_row(l, cz, cx);
        const std::uint16_t key = static_cast<std::uint16_t>(cy);
        if (std::binary_search(a.y_idx.begin() + begin, a.y_idx.begin() + end, key)) {
            if (found >= 0) throw IntegrityError("pixel covered by cells at two levels");
            found = l;
        }
    }
    if (found < 0) throw IntegrityError("pixel not covered by any particle cell");
    return found;
}

} // namespace aprkit
