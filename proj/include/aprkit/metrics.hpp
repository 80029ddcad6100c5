#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>

#include "aprkit/apr.hpp"
#include "aprkit/pixel_volume.hpp"

namespace aprkit {

// Pixel-equivalent speed of an operation: original pixel bytes per second.
inline double effective_throughput(const std::array<int, 3>& pixel_dims, int bytes_per_element,
                                   double wall_time_s) {
    if (wall_time_s <= 0.0) throw RangeError("effective_throughput: wall time must be positive");
    const double bytes = static_cast<double>(pixel_dims[0]) * pixel_dims[1] * pixel_dims[2] *
                         bytes_per_element;
    return bytes / wall_time_s;
}

struct MemoryEstimate {
    std::uint64_t pixel_bytes = 0;       // N * (s_in + s_out)
    std::uint64_t apr_bytes = 0;         // everything below
    std::uint64_t leaf_value_bytes = 0;  // input + output particle buffers
    std::uint64_t tree_value_bytes = 0;
    std::uint64_t access_bytes = 0;      // y_idx + xz_end + level_offset, serialized widths
    std::uint64_t tree_access_bytes = 0;
};

// Serialized widths of the access arrays: u16 y indices, u64 row ends and
// level offsets (see docs/FORMATS.md).
inline std::uint64_t access_array_bytes(const LinearAccess& a) {
    return 2 * a.particle_count() + 8 * a.row_count() + 8 * static_cast<std::uint64_t>(a.level_count());
}

// Memory needed for one convolution pass: input and output buffers on the
// pixel side; particle in/out buffers plus both access structures and the
// interior-node values on the APR side.
inline MemoryEstimate memory_estimate(const APR& apr, int bytes_in, int bytes_out) {
    MemoryEstimate m;
    m.pixel_bytes = apr.pixel_count() * static_cast<std::uint64_t>(bytes_in + bytes_out);
    m.leaf_value_bytes = apr.access.particle_count() * static_cast<std::uint64_t>(bytes_in + bytes_out);
    m.tree_value_bytes = apr.tree_access.particle_count() * 4;
    m.access_bytes = access_array_bytes(apr.access);
    m.tree_access_bytes = access_array_bytes(apr.tree_access);
    m.apr_bytes = m.leaf_value_bytes + m.tree_value_bytes + m.access_bytes + m.tree_access_bytes;
    return m;
}

// Closed-form estimate at declared dims and computational ratio, without
// building anything. Interior-node counts are modeled by the geometric series
// of eightfold reductions; row counts follow exactly from the level grids.
inline MemoryEstimate memory_estimate_analytic(const std::array<int, 3>& dims, double cr,
                                               int bytes_in, int bytes_out) {
    const int l_max = compute_l_max(dims[0], dims[1], dims[2]);
    const int l_min = compute_l_min(l_max);
    const std::uint64_t n_pixels =
        static_cast<std::uint64_t>(dims[0]) * dims[1] * dims[2];
    const double n_leaves = static_cast<double>(n_pixels) / cr;
    double n_tree = 0.0, f = 1.0;
    const int t_l_min = std::max(l_min - 1, 0);
    for (int l = l_max - 1; l >= t_l_min; --l) {
        f /= 8.0;
        n_tree += n_leaves * f;
    }
    std::uint64_t rows = 0, tree_rows = 0;
    for (int l = l_min; l <= l_max; ++l)
        rows += static_cast<std::uint64_t>(grid_dim(dims[0], l_max, l)) * grid_dim(dims[1], l_max, l);
    for (int l = t_l_min; l <= l_max - 1; ++l)
        tree_rows +=
            static_cast<std::uint64_t>(grid_dim(dims[0], l_max, l)) * grid_dim(dims[1], l_max, l);

    MemoryEstimate m;
    m.pixel_bytes = n_pixels * static_cast<std::uint64_t>(bytes_in + bytes_out);
    m.leaf_value_bytes = static_cast<std::uint64_t>(n_leaves * (bytes_in + bytes_out));
    m.tree_value_bytes = static_cast<std::uint64_t>(n_tree * 4);
    m.access_bytes = static_cast<std::uint64_t>(n_leaves * 2) + 8 * rows +
                     8 * static_cast<std::uint64_t>(l_max - l_min + 1);
    m.tree_access_bytes = static_cast<std::uint64_t>(n_tree * 2) + 8 * tree_rows +
                          8 * static_cast<std::uint64_t>(l_max - t_l_min);
    m.apr_bytes = m.leaf_value_bytes + m.tree_value_bytes + m.access_bytes + m.tree_access_bytes;
    return m;
}

struct QualityMetrics {
    double psnr = 0.0; // +infinity when the volumes are identical
    double ssim = 0.0;
    double nrmse = 0.0;
};

// PSNR, SSIM and NRMSE of b against reference a. Range normalization uses
// max(a) - min(a); SSIM uses k1 = 0.01, k2 = 0.03 with a uniform 7^3 window.
inline QualityMetrics quality_metrics(const PixelVolume& a, const PixelVolume& b) {
    if (!a.same_dims(b)) throw RangeError("quality_metrics: dimension mismatch");
    const double range = static_cast<double>(volume_max(a)) - volume_min(a);
    double mse = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = static_cast<double>(a.values[i]) - b.values[i];
        mse += d * d;
    }
    mse /= std::max<std::size_t>(a.size(), 1);

    QualityMetrics q;
    q.nrmse = range > 0.0 ? std::sqrt(mse) / range : std::sqrt(mse);
    q.psnr = mse > 0.0 ? 10.0 * std::log10(range * range / mse)
                       : std::numeric_limits<double>::infinity();

    const double c1 = (0.01 * range) * (0.01 * range);
    const double c2 = (0.03 * range) * (0.03 * range);
    const int r = 3; // 7^3 window
    double ssim_sum = 0.0;
    std::uint64_t windows = 0;
    for (int z = r; z < a.nz - r; ++z)
        for (int x = r; x < a.nx - r; ++x)
            for (int y = r; y < a.ny - r; ++y) {
                double ma = 0, mb = 0;
                for (int dz = -r; dz <= r; ++dz)
                    for (int dx = -r; dx <= r; ++dx)
                        for (int dy = -r; dy <= r; ++dy) {
                            ma += a.at(z + dz, x + dx, y + dy);
                            mb += b.at(z + dz, x + dx, y + dy);
                        }
                const double n = (2 * r + 1) * (2 * r + 1) * (2 * r + 1);
                ma /= n;
                mb /= n;
                double va = 0, vb = 0, cov = 0;
                for (int dz = -r; dz <= r; ++dz)
                    for (int dx = -r; dx <= r; ++dx)
                        for (int dy = -r; dy <= r; ++dy) {
                            const double da = a.at(z + dz, x + dx, y + dy) - ma;
                            const double db = b.at(z + dz, x + dx, y + dy) - mb;
                            va += da * da;
                            vb += db * db;
                            cov += da * db;
                        }
                va /= n - 1;
                vb /= n - 1;
                cov /= n - 1;
                ssim_sum += ((2 * ma * mb + c1) * (2 * cov + c2)) /
                            ((ma * ma + mb * mb + c1) * (va + vb + c2));
                ++windows;
            }
    q.ssim = windows > 0 ? ssim_sum / windows : 1.0;
    return q;
}

} // namespace aprkit
