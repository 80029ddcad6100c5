#include <doctest.h>

#include "helpers.hpp"

using namespace aprkit;
using namespace testutil;

TEST_CASE("reflect_index") {
    CHECK(reflect_index(0, 5) == 0);
    CHECK(reflect_index(4, 5) == 4);
    CHECK(reflect_index(-1, 5) == 0);
    CHECK(reflect_index(-2, 5) == 1);
    CHECK(reflect_index(5, 5) == 4);
    CHECK(reflect_index(6, 5) == 3);
    CHECK(reflect_index(-7, 3) == 0); // multiple folds: -7 = -1 mod 6
    CHECK(reflect_index(9, 3) == 2);
}

TEST_CASE("full reconstruction matches the per-pixel reference") {
    CounterRng rng(100);
    for (int trial = 0; trial < 10; ++trial) {
        APR apr = random_apr(rng);
        ParticleValues values = random_values(rng, apr.access.particle_count());
        const PixelVolume fast = reconstruct_full(apr, values);
        const PixelVolume ref = reference_reconstruct(apr, values);
        CHECK(bit_identical(fast.values, ref.values));
    }
}

TEST_CASE("level reconstruction matches the reference level image") {
    CounterRng rng(200);
    for (int trial = 0; trial < 8; ++trial) {
        APR apr = random_apr(rng);
        ParticleValues values = random_values(rng, apr.access.particle_count());
        ParticleValues tree = fill_tree(apr, values);
        for (int l = apr.access.l_min; l <= apr.access.l_max; ++l) {
            const PixelVolume fast = reconstruct_level(apr, values, tree, l);
            const PixelVolume ref = reference_level_image(apr, values, tree, l);
            CHECK(bit_identical(fast.values, ref.values));
        }
    }
}

TEST_CASE("level reconstruction equals average downsampling") {
    CounterRng rng(300);
    APR apr = random_apr(rng, 8, 32);
    ParticleValues values = random_values(rng, apr.access.particle_count());
    ParticleValues tree = fill_tree(apr, values);
    const PixelVolume full = reconstruct_full(apr, values);

    for (int l = apr.access.l_min; l < apr.access.l_max; ++l) {
        const PixelVolume lvl = reconstruct_level(apr, values, tree, l);
        const int s = cell_size(apr.access.l_max, l);
        for (int z = 0; z < lvl.nz; ++z)
            for (int x = 0; x < lvl.nx; ++x)
                for (int y = 0; y < lvl.ny; ++y) {
                    double sum = 0.0;
                    int n = 0;
                    for (int zz = z * s; zz < std::min((z + 1) * s, full.nz); ++zz)
                        for (int xx = x * s; xx < std::min((x + 1) * s, full.nx); ++xx)
                            for (int yy = y * s; yy < std::min((y + 1) * s, full.ny); ++yy) {
                                sum += full.at(zz, xx, yy);
                                ++n;
                            }
                    CHECK(std::abs(lvl.at(z, x, y) - sum / n) <=
                          1e-4 * std::max(1.0, std::abs(sum / n)));
                }
    }
}

TEST_CASE("patch reconstruction equals a window of the level image") {
    CounterRng rng(400);
    for (int trial = 0; trial < 8; ++trial) {
        APR apr = random_apr(rng);
        ParticleValues values = random_values(rng, apr.access.particle_count());
        ParticleValues tree = fill_tree(apr, values);
        const LinearAccess& a = apr.access;
        const int l = static_cast<int>(rng.uniform_int(a.l_min, a.l_max));
        const PixelVolume lvl = reconstruct_level(apr, values, tree, l);

        PatchSpec spec;
        spec.level = l;
        spec.z_begin = static_cast<int>(rng.uniform_int(0, a.z_dim[l] - 1));
        spec.z_end = static_cast<int>(rng.uniform_int(spec.z_begin + 1, a.z_dim[l]));
        spec.x_begin = static_cast<int>(rng.uniform_int(0, a.x_dim[l] - 1));
        spec.x_end = static_cast<int>(rng.uniform_int(spec.x_begin + 1, a.x_dim[l]));
        spec.pad = static_cast<int>(rng.uniform_int(0, 3));
        spec.pad_mode = rng.next_double() < 0.5 ? PadMode::Reflect : PadMode::Zero;

        const PixelVolume patch = reconstruct_patch(apr, values, tree, spec);
        REQUIRE(patch.nz == spec.z_end - spec.z_begin + 2 * spec.pad);
        REQUIRE(patch.nx == spec.x_end - spec.x_begin + 2 * spec.pad);
        REQUIRE(patch.ny == a.y_dim[l] + 2 * spec.pad);

        for (int oz = 0; oz < patch.nz; ++oz)
            for (int ox = 0; ox < patch.nx; ++ox)
                for (int oy = 0; oy < patch.ny; ++oy) {
                    const int z = spec.z_begin - spec.pad + oz;
                    const int x = spec.x_begin - spec.pad + ox;
                    const int y = oy - spec.pad;
                    const bool outside = z < 0 || z >= lvl.nz || x < 0 || x >= lvl.nx || y < 0 ||
                                         y >= lvl.ny;
                    float expected;
                    if (outside && spec.pad_mode == PadMode::Zero)
                        expected = 0.0f;
                    else
                        expected = lvl.at(reflect_index(z, lvl.nz), reflect_index(x, lvl.nx),
                                          reflect_index(y, lvl.ny));
                    CHECK(patch.at(oz, ox, oy) == expected);
                }
    }
}

TEST_CASE("reconstruct rejects out-of-range requests") {
    CounterRng rng(500);
    APR apr = random_apr(rng);
    ParticleValues values = random_values(rng, apr.access.particle_count());
    ParticleValues tree = fill_tree(apr, values);
    CHECK_THROWS_AS(reconstruct_level(apr, values, tree, apr.access.l_max + 1), RangeError);
    PatchSpec bad;
    bad.level = apr.access.l_max;
    bad.z_begin = 0;
    bad.z_end = apr.access.z_dim[apr.access.l_max] + 1;
    bad.x_begin = 0;
    bad.x_end = 1;
    CHECK_THROWS_AS(reconstruct_patch(apr, values, tree, bad), RangeError);
}
