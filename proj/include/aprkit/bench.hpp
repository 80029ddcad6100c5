#pragma once

#include <algorithm>
#include <array>
#include <chrono>
#include <cstdint>
#include <functional>
#include <ostream>
#include <string>
#include <vector>

#include "aprkit/build.hpp"
#include "aprkit/convolve.hpp"
#include "aprkit/metrics.hpp"
#include "aprkit/synthetic.hpp"
#include "aprkit/tree.hpp"

namespace aprkit {

struct BenchRecord {
    std::string image_id;
    std::array<int, 3> dims{0, 0, 0};
    double cr = 0.0;
    std::string op; // build | conv_apr | conv_pixels
    int stencil_size = 0;
    double wall_time_s = 0.0;
    double throughput_Bps = 0.0;
    std::uint64_t memory_bytes_apr = 0;
    std::uint64_t memory_bytes_pixels = 0;
    int threads = 0;
};

inline void write_bench_csv(std::ostream& os, const std::vector<BenchRecord>& records) {
    os << "image_id,dims,cr,op,stencil_size,wall_time_s,effective_throughput_Bps,"
          "memory_bytes_apr,memory_bytes_pixels,threads\n";
    for (const BenchRecord& r : records) {
        os << r.image_id << ',' << r.dims[0] << 'x' << r.dims[1] << 'x' << r.dims[2] << ',' << r.cr
           << ',' << r.op << ',' << r.stencil_size << ',' << r.wall_time_s << ','
           << r.throughput_Bps << ',' << r.memory_bytes_apr << ',' << r.memory_bytes_pixels << ','
           << r.threads << '\n';
    }
}

struct BenchCase {
    std::string image_id;
    SphereSceneParams scene;
    double rel_error = 0.1;
    std::uint64_t seed = 1;
};

// Sphere scenes chosen so the resulting computational ratios at the default
// edge length span roughly 1 to several hundred.
inline std::vector<BenchCase> default_bench_cases() {
    std::vector<BenchCase> cases;
    {
        BenchCase c{"noise_dense", {}, 0.05, 11};
        c.scene.count = 24;
        c.scene.noise_sigma = 200.0;
        cases.push_back(c);
    }
    {
        BenchCase c{"spheres_many", {}, 0.1, 12};
        c.scene.count = 30;
        c.scene.blur_sigma = 1.0;
        cases.push_back(c);
    }
    {
        BenchCase c{"spheres_mid", {}, 0.1, 13};
        c.scene.count = 12;
        c.scene.blur_sigma = 2.0;
        cases.push_back(c);
    }
    {
        BenchCase c{"spheres_few", {}, 0.2, 14};
        c.scene.count = 6;
        c.scene.blur_sigma = 2.0;
        cases.push_back(c);
    }
    {
        BenchCase c{"spheres_sparse", {}, 0.3, 15};
        c.scene.count = 2;
        c.scene.blur_sigma = 3.0;
        cases.push_back(c);
    }
    {
        BenchCase c{"spheres_single", {}, 0.4, 16};
        c.scene.count = 1;
        c.scene.max_radius = 6.0;
        c.scene.blur_sigma = 3.0;
        cases.push_back(c);
    }
    return cases;
}

struct BenchConfig {
    int edge = 128; // cubic volumes of edge^3
    int repeats = 5;
    int threads = 0;
    std::vector<int> stencil_sizes{3, 5};
    std::vector<BenchCase> cases = default_bench_cases();
};

namespace detail {

// Median wall time over repeats, after one discarded warm-up run.
inline double time_median(int repeats, const std::function<void()>& fn) {
    fn();
    std::vector<double> times(repeats);
    for (int r = 0; r < repeats; ++r) {
        const auto t0 = std::chrono::steady_clock::now();
        fn();
        const auto t1 = std::chrono::steady_clock::now();
        times[r] = std::chrono::duration<double>(t1 - t0).count();
    }
    std::sort(times.begin(), times.end());
    return times[repeats / 2];
}

} // namespace detail

// Times APR construction plus APR-native and dense convolution on every case.
inline std::vector<BenchRecord> run_suite(const BenchConfig& cfg) {
    std::vector<BenchRecord> out;
    const int n = cfg.edge;
    const std::array<int, 3> dims{n, n, n};
    const int threads = resolve_threads(cfg.threads);

    for (const BenchCase& bc : cfg.cases) {
        const PixelVolume v = generate_spheres(n, n, n, bc.scene, bc.seed);
        BuildParams params;
        params.rel_error = bc.rel_error;
        params.sigma = SigmaPolicy::constant(intensity_range(v));

        APR apr;
        ParticleValues leaf;
        const double t_build = detail::time_median(cfg.repeats, [&] {
            auto built = build_apr(v, params);
            apr = std::move(built.first);
            leaf = std::move(built.second);
        });
        const double cr = computational_ratio(apr);
        const MemoryEstimate mem = memory_estimate(apr, 4, 4);

        BenchRecord base;
        base.image_id = bc.image_id;
        base.dims = dims;
        base.cr = cr;
        base.memory_bytes_apr = mem.apr_bytes;
        base.memory_bytes_pixels = mem.pixel_bytes;
        base.threads = threads;

        BenchRecord rb = base;
        rb.op = "build";
        rb.wall_time_s = t_build;
        rb.throughput_Bps = effective_throughput(dims, 4, t_build);
        out.push_back(rb);

        const ParticleValues tree = fill_tree(apr, leaf, cfg.threads);
        for (int k : cfg.stencil_sizes) {
            const Stencil w = box_stencil(k);
            const StencilPyramid pyr =
                make_pyramid(w, apr.access.l_min, apr.access.l_max, PyramidMode::Restricted);
            ConvolveOptions opt;
            opt.threads = cfg.threads;

            ParticleValues conv_out;
            const double t_apr = detail::time_median(cfg.repeats, [&] {
                conv_out = convolve_apr(apr, leaf, tree, pyr, PadMode::Reflect, opt);
            });
            BenchRecord ra = base;
            ra.op = "conv_apr";
            ra.stencil_size = k;
            ra.wall_time_s = t_apr;
            ra.throughput_Bps = effective_throughput(dims, 4, t_apr);
            out.push_back(ra);

            PixelVolume pix_out;
            const double t_pix = detail::time_median(cfg.repeats, [&] {
                pix_out = convolve_pixels(v, w, PadMode::Reflect, cfg.threads);
            });
            BenchRecord rp = base;
            rp.op = "conv_pixels";
            rp.stencil_size = k;
            rp.wall_time_s = t_pix;
            rp.throughput_Bps = effective_throughput(dims, 4, t_pix);
            out.push_back(rp);
        }
    }
    return out;
}

} // namespace aprkit
