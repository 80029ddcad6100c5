#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <vector>

#include "aprkit/apr.hpp"
#include "aprkit/linear_access.hpp"
#include "aprkit/parallel.hpp"

namespace aprkit {

// Clipped footprint volume (in pixels) of cell (l, iz, ix, iy).
inline double cell_footprint_volume(int l, int iz, int ix, int iy, int geom_l_max,
                                    const std::array<int, 3>& dims) {
    const int s = cell_size(geom_l_max, l);
    const double dz = std::min((iz + 1) * s, dims[0]) - iz * s;
    const double dx = std::min((ix + 1) * s, dims[1]) - ix * s;
    const double dy = std::min((iy + 1) * s, dims[2]) - iy * s;
    return dz * dx * dy;
}

// Interior-node structure: a node exists at (l, i) iff some leaf at a level
// greater than l has ancestor (l, i). Levels span [max(l_min - 1, 0), l_max - 1].
inline LinearAccess init_tree_structure(const LinearAccess& apr_access,
                                        const std::array<int, 3>& source_dims) {
    const int geom_l_max = apr_access.l_max;
    const int t_l_max = apr_access.l_max - 1;
    const int t_l_min = std::max(apr_access.l_min - 1, 0);
    if (t_l_max < t_l_min) {
        // Single-level APR over a single-cell domain: no interior nodes.
        LinearAccess empty;
        empty.l_min = 0;
        empty.l_max = 0;
        empty.z_dim.assign(1, grid_dim(source_dims[0], geom_l_max, 0));
        empty.x_dim.assign(1, grid_dim(source_dims[1], geom_l_max, 0));
        empty.y_dim.assign(1, grid_dim(source_dims[2], geom_l_max, 0));
        empty.level_offset.assign(1, 0);
        empty.xz_end.assign(static_cast<std::size_t>(empty.z_dim[0]) * empty.x_dim[0], 0);
        return empty;
    }

    // Per-level sparse row sets, built coarsening from l_max - 1 downwards:
    // parents of the leaves at l+1 joined with parents of the nodes at l+1.
    std::vector<std::vector<std::vector<std::uint16_t>>> level_rows(t_l_max + 1);
    for (int lt = t_l_max; lt >= t_l_min; --lt) {
        const int zd = grid_dim(source_dims[0], geom_l_max, lt);
        const int xd = grid_dim(source_dims[1], geom_l_max, lt);
        level_rows[lt].assign(static_cast<std::size_t>(zd) * xd, {});
        const int child_l = lt + 1;
        const int czd = grid_dim(source_dims[0], geom_l_max, child_l);
        const int cxd = grid_dim(source_dims[1], geom_l_max, child_l);
        for (int z = 0; z < zd; ++z) {
            for (int x = 0; x < xd; ++x) {
                auto& ys = level_rows[lt][static_cast<std::size_t>(z) * xd + x];
                for (int cz = 2 * z; cz < std::min(2 * z + 2, czd); ++cz) {
                    for (int cx = 2 * x; cx < std::min(2 * x + 2, cxd); ++cx) {
                        if (child_l >= apr_access.l_min && child_l <= apr_access.l_max) {
                            auto [b, e] = apr_access.get_row(child_l, cz, cx);
                            for (std::uint64_t i = b; i < e; ++i)
                                ys.push_back(static_cast<std::uint16_t>(apr_access.y_idx[i] / 2));
                        }
                        if (child_l <= t_l_max) {
                            const auto& crow =
                                level_rows[child_l][static_cast<std::size_t>(cz) * cxd + cx];
                            for (std::uint16_t y : crow)
                                ys.push_back(static_cast<std::uint16_t>(y / 2));
                        }
                    }
                }
                std::sort(ys.begin(), ys.end());
                ys.erase(std::unique(ys.begin(), ys.end()), ys.end());
            }
        }
    }

    std::vector<std::vector<std::uint16_t>> rows;
    for (int lt = t_l_min; lt <= t_l_max; ++lt)
        for (auto& r : level_rows[lt]) rows.push_back(std::move(r));
    return assemble_access(t_l_min, t_l_max, source_dims, rows);
}

// Single forward pass aligning each child particle in row (l, z, x) with its
// parent in row (l - 1, z/2, x/2) of the parent structure. The parent iterator
// only moves forward; a child whose parent index cannot be aligned raises an
// integrity error.
template <typename Visitor>
void synchronized_parent_pass(const LinearAccess& child, const LinearAccess& parent, int l, int z,
                              int x, Visitor&& visit) {
    auto [r_begin, r_end] = child.get_row(l, z, x);
    if (r_begin == r_end) return;
    auto [p_begin, p_end] = parent.get_row(l - 1, z / 2, x / 2);
    std::uint64_t j = p_begin;
    for (std::uint64_t i = r_begin; i < r_end; ++i) {
        const int target = child.y_idx[i] / 2;
        while (j < p_end && parent.y_idx[j] < target) ++j;
        if (j == p_end || parent.y_idx[j] != target)
            throw IntegrityError("synchronized_parent_pass: missing parent for child y=" +
                                 std::to_string(child.y_idx[i]));
        visit(i, j);
    }
}

// Fills interior-node values by recursive footprint-weighted average reduction
// of the leaves, level by level from the finest resolution. Boundary cells use
// clipped footprint volumes as weights so the mean identity holds for
// non-power-of-two dims. Each parent row is written by exactly one worker;
// output is independent of the thread count.
inline ParticleValues fill_tree(const APR& apr, const ParticleValues& leaf_values, int threads = 0) {
    const LinearAccess& tree = apr.tree_access;
    const int geom_l_max = apr.access.l_max;
    std::vector<double> vsum(tree.particle_count(), 0.0);
    std::vector<double> wsum(tree.particle_count(), 0.0);

    for (int lt = tree.l_max; lt >= tree.l_min; --lt) {
        const int child_l = lt + 1;
        const int pzd = tree.z_dim[lt];
        parallel_for_dynamic(pzd, threads, [&](std::size_t pz_idx) {
            const int pz = static_cast<int>(pz_idx);
            for (int px = 0; px < tree.x_dim[lt]; ++px) {
                for (int cz = 2 * pz; cz < std::min(2 * pz + 2, grid_dim(apr.source_dims[0], geom_l_max, child_l)); ++cz) {
                    for (int cx = 2 * px; cx < std::min(2 * px + 2, grid_dim(apr.source_dims[1], geom_l_max, child_l)); ++cx) {
                        if (child_l >= apr.access.l_min && child_l <= apr.access.l_max) {
                            synchronized_parent_pass(apr.access, tree, child_l, cz, cx,
                                                     [&](std::uint64_t i, std::uint64_t j) {
                                const double w = cell_footprint_volume(
                                    child_l, cz, cx, apr.access.y_idx[i], geom_l_max, apr.source_dims);
                                vsum[j] += w * leaf_values[i];
                                wsum[j] += w;
                            });
                        }
                        if (child_l <= tree.l_max) {
                            synchronized_parent_pass(tree, tree, child_l, cz, cx,
                                                     [&](std::uint64_t i, std::uint64_t j) {
                                vsum[j] += vsum[i];
                                wsum[j] += wsum[i];
                            });
                        }
                    }
                }
            }
        });
    }

    ParticleValues out(tree.particle_count(), 0.0f);
    for (std::size_t i = 0; i < out.size(); ++i)
        out[i] = wsum[i] > 0.0 ? static_cast<float>(vsum[i] / wsum[i]) : 0.0f;
    return out;
}

} // namespace aprkit
