#include <doctest.h>

#include "helpers.hpp"

using namespace aprkit;
using namespace testutil;

TEST_CASE("gradient magnitude is exact on a linear ramp") {
    PixelVolume v(8, 9, 10);
    for (int z = 0; z < v.nz; ++z)
        for (int x = 0; x < v.nx; ++x)
            for (int y = 0; y < v.ny; ++y)
                v.at(z, x, y) = static_cast<float>(2.0 * z - 3.0 * x + 0.5 * y);
    const double expected = std::sqrt(2.0 * 2.0 + 3.0 * 3.0 + 0.5 * 0.5);
    for (GradientMode mode : {GradientMode::CentralDiff, GradientMode::Sobel}) {
        PixelVolume g = gradient_magnitude(v, mode);
        // interior only: replicate padding halves the boundary derivative
        for (int z = 1; z < v.nz - 1; ++z)
            for (int x = 1; x < v.nx - 1; ++x)
                for (int y = 1; y < v.ny - 1; ++y)
                    CHECK(g.at(z, x, y) == doctest::Approx(expected).epsilon(1e-5));
    }
}

TEST_CASE("local scale policies") {
    PixelVolume v(6, 6, 6, 10.0f);
    v.at(3, 3, 3) = 110.0f;

    PixelVolume c = local_scale(v, SigmaPolicy::constant(42.0));
    for (float s : c.values) CHECK(s == doctest::Approx(42.0));

    // local range: window max - min, smoothed; must peak near the spike and
    // respect the floor far away
    PixelVolume r = local_scale(v, SigmaPolicy::local_range(1, 0.5));
    CHECK(r.at(3, 3, 3) > 10.0f);
    CHECK(r.at(0, 0, 0) == doctest::Approx(0.5));
}

TEST_CASE("level function follows the local length scale") {
    const int l_min = 1, l_max = 6; // |Omega| = 64
    PixelVolume grad(1, 1, 5), sigma(1, 1, 5, 1.0f);
    grad.values = {0.0f, 0.1f, 1.0f, 16.0f, 1e6f};
    const double E = 0.1;
    std::vector<int> l = level_function(grad, sigma, E, l_min, l_max);
    CHECK(l[0] == l_min); // zero gradient: infinite length scale
    // L = E/g; l = ceil(log2(64 / L)) clamped
    CHECK(l[1] == 6); // L = 1 -> ceil(log2 64) = 6
    CHECK(l[2] == 6); // clamped at l_max
    CHECK(l[3] == 6);
    CHECK(l[4] == 6);
    // g chosen so |Omega| / L sits safely inside (2^(l-1), 2^l]
    grad.values = {0.00078125f, 0.00234375f, 0.0046875f, 0.009375f, 0.01875f};
    l = level_function(grad, sigma, E, l_min, l_max);
    CHECK(l[0] == 1); // ratio 0.5 -> ceil(-1) -> clamp to 1
    CHECK(l[1] == 1); // ratio 1.5
    CHECK(l[2] == 2); // ratio 3
    CHECK(l[3] == 3); // ratio 6
    CHECK(l[4] == 4); // ratio 12
}

TEST_CASE("solve_levels produces a valid partition meeting every target") {
    CounterRng rng(1234);
    for (int trial = 0; trial < 20; ++trial) {
        const int nz = static_cast<int>(rng.uniform_int(3, 34));
        const int nx = static_cast<int>(rng.uniform_int(3, 34));
        const int ny = static_cast<int>(rng.uniform_int(3, 34));
        const int l_max = compute_l_max(nz, nx, ny);
        const int l_min = compute_l_min(l_max);
        std::vector<int> targets(static_cast<std::size_t>(nz) * nx * ny);
        for (int& t : targets) t = static_cast<int>(rng.uniform_int(l_min, l_max));

        LinearAccess a = solve_levels(targets, {nz, nx, ny}, l_min, l_max);
        REQUIRE(validate(a, {nz, nx, ny}).ok);

        // Resolution at every pixel at least its target level.
        for (int z = 0; z < nz; ++z)
            for (int x = 0; x < nx; ++x)
                for (int y = 0; y < ny; ++y) {
                    const int t = targets[(static_cast<std::size_t>(z) * nx + x) * ny + y];
                    CHECK(resolution_level_at(a, z, x, y) >= t);
                }
    }
}

TEST_CASE("solve_levels bounds the level difference of adjacent leaves") {
    CounterRng rng(4321);
    for (int trial = 0; trial < 10; ++trial) {
        const int nz = static_cast<int>(rng.uniform_int(4, 32));
        const int nx = static_cast<int>(rng.uniform_int(4, 32));
        const int ny = static_cast<int>(rng.uniform_int(4, 32));
        const int l_max = compute_l_max(nz, nx, ny);
        const int l_min = compute_l_min(l_max);
        std::vector<int> targets(static_cast<std::size_t>(nz) * nx * ny);
        for (int& t : targets) t = static_cast<int>(rng.uniform_int(l_min, l_max));
        LinearAccess a = solve_levels(targets, {nz, nx, ny}, l_min, l_max);

        // Face-adjacent pixels must live in leaves whose levels differ by <= 1.
        auto level_at = [&](int z, int x, int y) { return resolution_level_at(a, z, x, y); };
        int worst = 0;
        for (int z = 0; z < nz; ++z)
            for (int x = 0; x < nx; ++x)
                for (int y = 0; y < ny; ++y) {
                    const int l0 = level_at(z, x, y);
                    if (z + 1 < nz) worst = std::max(worst, std::abs(l0 - level_at(z + 1, x, y)));
                    if (x + 1 < nx) worst = std::max(worst, std::abs(l0 - level_at(z, x + 1, y)));
                    if (y + 1 < ny) worst = std::max(worst, std::abs(l0 - level_at(z, x, y + 1)));
                }
        CHECK(worst <= 1);
    }
}

TEST_CASE("sample_particles averages the cell footprint") {
    CounterRng rng(55);
    APR apr = random_apr(rng, 4, 24);
    PixelVolume v(apr.source_dims[0], apr.source_dims[1], apr.source_dims[2]);
    for (float& x : v.values) x = static_cast<float>(rng.uniform(0, 100));
    ParticleValues values = sample_particles(v, apr.access);

    apr.access.for_each_particle([&](int l, int z, int x, int y, std::uint64_t i) {
        const int s = cell_size(apr.access.l_max, l);
        double sum = 0.0;
        int n = 0;
        for (int zz = z * s; zz < std::min((z + 1) * s, v.nz); ++zz)
            for (int xx = x * s; xx < std::min((x + 1) * s, v.nx); ++xx)
                for (int yy = y * s; yy < std::min((y + 1) * s, v.ny); ++yy) {
                    sum += v.at(zz, xx, yy);
                    ++n;
                }
        REQUIRE(n > 0);
        CHECK(values[i] == doctest::Approx(sum / n).epsilon(1e-5));
    });
}

TEST_CASE("build_apr meets the reconstruction error bound") {
    SphereSceneParams scene;
    scene.count = 6;
    scene.blur_sigma = 1.5;
    const PixelVolume v = generate_spheres(48, 48, 48, scene, 77);

    for (double E : {0.05, 0.1, 0.2}) {
        BuildParams params;
        params.rel_error = E;
        const double sigma = intensity_range(v);
        params.sigma = SigmaPolicy::constant(sigma);
        auto [apr, values] = build_apr(v, params);
        REQUIRE(validate(apr).ok);

        const PixelVolume recon = reconstruct_full(apr, values);
        double worst = 0.0;
        for (std::size_t i = 0; i < v.size(); ++i)
            worst = std::max(worst, std::abs(static_cast<double>(v.values[i]) - recon.values[i]));
        CHECK(worst / sigma <= E);
    }
}

TEST_CASE("tighter error bounds never coarsen the sampling") {
    SphereSceneParams scene;
    scene.count = 4;
    scene.blur_sigma = 1.0;
    const PixelVolume v = generate_spheres(32, 32, 32, scene, 5);
    std::uint64_t prev = 0;
    for (double E : {0.4, 0.2, 0.1, 0.05}) {
        BuildParams params;
        params.rel_error = E;
        params.sigma = SigmaPolicy::constant(intensity_range(v));
        auto [apr, values] = build_apr(v, params);
        CHECK(apr.access.particle_count() >= prev);
        prev = apr.access.particle_count();
    }
}
