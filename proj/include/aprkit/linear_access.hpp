#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "aprkit/errors.hpp"

namespace aprkit {

using ParticleValues = std::vector<float>;

// Largest sparse y index representable by the 16-bit coordinate vector.
inline constexpr int kMaxYDim = 65536;

inline int cell_size(int l_max, int l) { return 1 << (l_max - l); }

inline int grid_dim(int pixel_dim, int l_max, int l) {
    const int s = cell_size(l_max, l);
    return (pixel_dim + s - 1) / s;
}

// Smallest l with 2^l >= max edge length (so cells at l_max are pixels).
inline int compute_l_max(int nz, int nx, int ny) {
    const int m = std::max(nz, std::max(nx, ny));
    int l = 0;
    while ((1 << l) < m) ++l;
    return l;
}

inline int compute_l_min(int l_max) { return std::min(1, l_max); }

// Particle cell at some resolution level. Cells at level l have edge length
// 2^(l_max - l) pixels; cells across all levels of an APR partition the image.
struct ParticleCell {
    int level = 0;
    int iz = 0, ix = 0, iy = 0;
};

// Cell-center coordinate in pixel units: origin i * 2^(l_max-l) plus half a
// cell edge, shifted so that level l_max coincides with pixel indices.
inline double particle_position(int l, int i, int l_max) {
    return (i + 0.5) * static_cast<double>(cell_size(l_max, l)) - 0.5;
}

// Per-level CSR-style sparse coordinate structure. Particles are ordered
// l -> z -> x -> y with the y coordinates stored explicitly; xz_end holds one
// cumulative end offset per (l, z, x) row. Immutable after construction.
struct LinearAccess {
    int l_min = 0;
    int l_max = 0;
    std::vector<int> z_dim, x_dim, y_dim; // indexed by absolute level, size l_max + 1
    std::vector<std::uint16_t> y_idx;
    std::vector<std::uint64_t> xz_end;       // one entry per (l, z, x) row
    std::vector<std::uint64_t> level_offset; // start row of each level, size l_max + 1

    std::uint64_t particle_count() const { return y_idx.size(); }
    std::uint64_t row_count() const { return xz_end.size(); }
    int level_count() const { return l_max - l_min + 1; }

    std::uint64_t row_index(int l, int z, int x) const {
        return level_offset[l] + static_cast<std::uint64_t>(z) * x_dim[l] + x;
    }

    // Half-open particle-index range of row (l, z, x). The first row of the
    // structure begins at 0; every other row begins where its predecessor ends.
    std::pair<std::uint64_t, std::uint64_t> get_row(int l, int z, int x) const {
        if (l < l_min || l > l_max)
            throw RangeError("get_row: level " + std::to_string(l) + " outside [" +
                             std::to_string(l_min) + ", " + std::to_string(l_max) + "]");
        if (z < 0 || z >= z_dim[l] || x < 0 || x >= x_dim[l])
            throw RangeError("get_row: (z, x) = (" + std::to_string(z) + ", " + std::to_string(x) +
                             ") outside level " + std::to_string(l) + " grid");
        const std::uint64_t row = row_index(l, z, x);
        const std::uint64_t begin = (row == 0) ? 0 : xz_end[row - 1];
        return {begin, xz_end[row]};
    }

    // Visits every particle once in l -> z -> x -> y order. The particle index
    // passed to the visitor is the position in y_idx / any paired value vector.
    template <typename Visitor>
    void for_each_particle(Visitor&& visit) const {
        for (int l = l_min; l <= l_max; ++l) {
            for (int z = 0; z < z_dim[l]; ++z) {
                for (int x = 0; x < x_dim[l]; ++x) {
                    auto [begin, end] = get_row(l, z, x);
                    for (std::uint64_t i = begin; i < end; ++i)
                        visit(l, z, x, static_cast<int>(y_idx[i]), i);
                }
            }
        }
    }
};

// Assembles a LinearAccess from per-row sparse y lists. rows must be indexed
// row-major over (l, z, x) for l in [l_min, l_max] and contain strictly
// increasing y values.
inline LinearAccess assemble_access(int l_min, int l_max, const std::array<int, 3>& source_dims,
                                    const std::vector<std::vector<std::uint16_t>>& rows) {
    LinearAccess a;
    a.l_min = l_min;
    a.l_max = l_max;
    a.z_dim.assign(l_max + 1, 0);
    a.x_dim.assign(l_max + 1, 0);
    a.y_dim.assign(l_max + 1, 0);
    a.level_offset.assign(l_max + 1, 0);
    const int geom_l_max = std::max(l_max, compute_l_max(source_dims[0], source_dims[1], source_dims[2]));
    std::uint64_t row = 0;
    std::size_t n_particles = 0;
    for (const auto& r : rows) n_particles += r.size();
    a.y_idx.reserve(n_particles);
    a.xz_end.reserve(rows.size());
    for (int l = l_min; l <= l_max; ++l) {
        a.z_dim[l] = grid_dim(source_dims[0], geom_l_max, l);
        a.x_dim[l] = grid_dim(source_dims[1], geom_l_max, l);
        a.y_dim[l] = grid_dim(source_dims[2], geom_l_max, l);
        a.level_offset[l] = row;
        const std::uint64_t level_rows = static_cast<std::uint64_t>(a.z_dim[l]) * a.x_dim[l];
        for (std::uint64_t r = 0; r < level_rows; ++r, ++row) {
            const auto& ys = rows[row];
            a.y_idx.insert(a.y_idx.end(), ys.begin(), ys.end());
            a.xz_end.push_back(a.y_idx.size());
        }
    }
    if (row != rows.size()) throw RangeError("assemble_access: row list does not match level grids");
    return a;
}

// Builds a LinearAccess over an explicit cell list (any order; duplicates not
// allowed). Used by tests and by the level solver.
inline LinearAccess access_from_cells(int l_min, int l_max, const std::array<int, 3>& source_dims,
                                      std::vector<ParticleCell> cells) {
    std::sort(cells.begin(), cells.end(), [](const ParticleCell& a, const ParticleCell& b) {
        if (a.level != b.level) return a.level < b.level;
        if (a.iz != b.iz) return a.iz < b.iz;
        if (a.ix != b.ix) return a.ix < b.ix;
        return a.iy < b.iy;
    });
    const int geom_l_max = std::max(l_max, compute_l_max(source_dims[0], source_dims[1], source_dims[2]));
    std::uint64_t total_rows = 0;
    for (int l = l_min; l <= l_max; ++l)
        total_rows += static_cast<std::uint64_t>(grid_dim(source_dims[0], geom_l_max, l)) *
                      grid_dim(source_dims[1], geom_l_max, l);
    std::vector<std::vector<std::uint16_t>> rows(total_rows);
    std::uint64_t offset = 0;
    for (int l = l_min; l <= l_max; ++l) {
        const int zd = grid_dim(source_dims[0], geom_l_max, l);
        const int xd = grid_dim(source_dims[1], geom_l_max, l);
        for (const auto& c : cells) {
            if (c.level != l) continue;
            rows[offset + static_cast<std::uint64_t>(c.iz) * xd + c.ix].push_back(
                static_cast<std::uint16_t>(c.iy));
        }
        offset += static_cast<std::uint64_t>(zd) * xd;
    }
    return assemble_access(l_min, l_max, source_dims, rows);
}

} // namespace aprkit
