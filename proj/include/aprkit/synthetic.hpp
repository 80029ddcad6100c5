#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "aprkit/pixel_volume.hpp"
#include "aprkit/rng.hpp"
#include "aprkit/stencil.hpp"

namespace aprkit {

struct SphereSpec {
    double cz = 0, cx = 0, cy = 0;
    double radius = 1;
    double intensity = 1;
};

struct SphereSceneParams {
    int count = 8;
    double min_radius = 3.0;
    double max_radius = 10.0;
    double background = 100.0;
    double min_intensity = 500.0;
    double max_intensity = 2000.0;
    double blur_sigma = 0.0;   // separable Gaussian applied after drawing
    double noise_sigma = 0.0;  // additive Gaussian noise, applied last
};

namespace detail {

// Separable in-place Gaussian blur with reflect boundaries, used to soften
// synthetic object edges.
inline void separable_gaussian(PixelVolume& v, double sigma) {
    if (sigma <= 0.0) return;
    int size = 2 * static_cast<int>(std::ceil(3.0 * sigma)) + 1;
    const int h = size / 2;
    std::vector<double> g(size);
    double norm = 0.0;
    for (int i = -h; i <= h; ++i) {
        g[i + h] = std::exp(-0.5 * i * i / (sigma * sigma));
        norm += g[i + h];
    }
    for (double& w : g) w /= norm;

    auto reflect = [](int i, int n) {
        while (i < 0 || i >= n) i = i < 0 ? -i - 1 : 2 * n - 1 - i;
        return i;
    };
    const int dims[3] = {v.nz, v.nx, v.ny};
    for (int axis = 0; axis < 3; ++axis) {
        PixelVolume tmp = v;
        for (int z = 0; z < v.nz; ++z)
            for (int x = 0; x < v.nx; ++x)
                for (int y = 0; y < v.ny; ++y) {
                    double acc = 0.0;
                    for (int i = -h; i <= h; ++i) {
                        int zz = z, xx = x, yy = y;
                        if (axis == 0) zz = reflect(z + i, dims[0]);
                        if (axis == 1) xx = reflect(x + i, dims[1]);
                        if (axis == 2) yy = reflect(y + i, dims[2]);
                        acc += g[i + h] * tmp.at(zz, xx, yy);
                    }
                    v.at(z, x, y) = static_cast<float>(acc);
                }
    }
}

} // namespace detail

// Deterministic blob phantom: solid spheres on a constant background, with
// optional blur and noise. Identical (dims, params, seed) reproduce the exact
// same volume.
inline PixelVolume generate_spheres(int nz, int nx, int ny, const SphereSceneParams& p,
                                    std::uint64_t seed,
                                    std::vector<SphereSpec>* out_specs = nullptr) {
    CounterRng rng(seed);
    std::vector<SphereSpec> spheres(p.count);
    for (SphereSpec& s : spheres) {
        s.radius = rng.uniform(p.min_radius, p.max_radius);
        s.cz = rng.uniform(s.radius, std::max<double>(nz - s.radius, s.radius));
        s.cx = rng.uniform(s.radius, std::max<double>(nx - s.radius, s.radius));
        s.cy = rng.uniform(s.radius, std::max<double>(ny - s.radius, s.radius));
        s.intensity = rng.uniform(p.min_intensity, p.max_intensity);
    }

    PixelVolume v(nz, nx, ny, static_cast<float>(p.background));
    for (const SphereSpec& s : spheres) {
        const int z0 = std::max(0, static_cast<int>(std::floor(s.cz - s.radius)));
        const int z1 = std::min(nz - 1, static_cast<int>(std::ceil(s.cz + s.radius)));
        const int x0 = std::max(0, static_cast<int>(std::floor(s.cx - s.radius)));
        const int x1 = std::min(nx - 1, static_cast<int>(std::ceil(s.cx + s.radius)));
        const int y0 = std::max(0, static_cast<int>(std::floor(s.cy - s.radius)));
        const int y1 = std::min(ny - 1, static_cast<int>(std::ceil(s.cy + s.radius)));
        const double r2 = s.radius * s.radius;
        for (int z = z0; z <= z1; ++z)
            for (int x = x0; x <= x1; ++x)
                for (int y = y0; y <= y1; ++y) {
                    const double dz = z - s.cz, dx = x - s.cx, dy = y - s.cy;
                    if (dz * dz + dx * dx + dy * dy <= r2)
                        v.at(z, x, y) = static_cast<float>(s.intensity);
                }
    }

    detail::separable_gaussian(v, p.blur_sigma);
    if (p.noise_sigma > 0.0)
        for (float& x : v.values)
            x = static_cast<float>(std::max(0.0, x + p.noise_sigma * rng.normal()));
    if (out_specs) *out_specs = std::move(spheres);
    return v;
}

struct CylinderSceneParams {
    int count = 4;
    double min_radius = 4.0;
    double max_radius = 12.0;
    double shell_thickness = 2.0;
    double background = 100.0;
    double min_intensity = 500.0;
    double max_intensity = 2000.0;
};

// Hollow cylindrical shells with axes along z, spanning the full z extent.
inline PixelVolume generate_cylinders(int nz, int nx, int ny, const CylinderSceneParams& p,
                                      std::uint64_t seed) {
    CounterRng rng(seed);
    PixelVolume v(nz, nx, ny, static_cast<float>(p.background));
    for (int c = 0; c < p.count; ++c) {
        const double r = rng.uniform(p.min_radius, p.max_radius);
        const double cx = rng.uniform(r, std::max<double>(nx - r, r));
        const double cy = rng.uniform(r, std::max<double>(ny - r, r));
        const double intensity = rng.uniform(p.min_intensity, p.max_intensity);
        const double r_in = std::max(r - p.shell_thickness, 0.0);
        for (int x = 0; x < nx; ++x)
            for (int y = 0; y < ny; ++y) {
                const double dx = x - cx, dy = y - cy;
                const double d2 = dx * dx + dy * dy;
                if (d2 <= r * r && d2 >= r_in * r_in)
                    for (int z = 0; z < nz; ++z) v.at(z, x, y) = static_cast<float>(intensity);
            }
    }
    return v;
}

// Additive Gaussian noise, deterministic in (seed), clamped at zero.
inline PixelVolume add_noise(const PixelVolume& v, double sigma, std::uint64_t seed) {
    CounterRng rng(seed);
    PixelVolume out = v;
    for (float& x : out.values)
        x = static_cast<float>(std::max(0.0, x + sigma * rng.normal()));
    return out;
}

} // namespace aprkit
