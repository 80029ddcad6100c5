#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "aprkit/errors.hpp"

namespace aprkit {

// Dense 3D scalar field. Dimensions are ordered (z, x, y) with y contiguous
// in memory: element (z, x, y) lives at (z*nx + x)*ny + y.
struct PixelVolume {
    int nz = 0, nx = 0, ny = 0;
    std::vector<float> values;

    PixelVolume() = default;

    PixelVolume(int z_dim, int x_dim, int y_dim, float fill = 0.0f)
        : nz(z_dim), nx(x_dim), ny(y_dim),
          values(static_cast<std::size_t>(z_dim) * x_dim * y_dim, fill) {}

    std::size_t size() const { return values.size(); }

    std::size_t index(int z, int x, int y) const {
        return (static_cast<std::size_t>(z) * nx + x) * ny + y;
    }

    float& at(int z, int x, int y) { return values[index(z, x, y)]; }
    float at(int z, int x, int y) const { return values[index(z, x, y)]; }

    bool same_dims(const PixelVolume& o) const {
        return nz == o.nz && nx == o.nx && ny == o.ny;
    }
};

inline PixelVolume volume_from_u16(int nz, int nx, int ny, const std::vector<std::uint16_t>& raw) {
    PixelVolume v(nz, nx, ny);
    if (raw.size() != v.size()) throw RangeError("u16 buffer size does not match dims");
    for (std::size_t i = 0; i < raw.size(); ++i) v.values[i] = static_cast<float>(raw[i]);
    return v;
}

inline float volume_min(const PixelVolume& v) {
    float m = v.values.empty() ? 0.0f : v.values[0];
    for (float x : v.values)
        if (x < m) m = x;
    return m;
}

inline float volume_max(const PixelVolume& v) {
    float m = v.values.empty() ? 0.0f : v.values[0];
    for (float x : v.values)
        if (x > m) m = x;
    return m;
}

inline float intensity_range(const PixelVolume& v) { return volume_max(v) - volume_min(v); }

} // namespace aprkit
