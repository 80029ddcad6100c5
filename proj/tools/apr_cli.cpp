// Command-line front end for the aprkit library: conversion between pixel
// volumes and APR files, reconstruction, filtering, deconvolution, synthetic
// data generation and the benchmark suite.
//
// Exit codes: 0 success, 2 usage error, 3 I/O or format error, 4 capability
// limit exceeded, 1 any other failure.

#include <exception>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "aprkit/aprkit.hpp"

namespace {

using namespace aprkit;

// Accepted specs: identity, box:K, gaussian:SIGMA, sobel:AXIS (z|x|y),
// file:PATH. A stencil file is text: "extent KZ KX KY" followed by the
// KZ*KX*KY weights in (z, x, y) row-major order.
Stencil parse_stencil(const std::string& spec) {
    const auto colon = spec.find(':');
    const std::string kind = spec.substr(0, colon);
    const std::string arg = colon == std::string::npos ? "" : spec.substr(colon + 1);
    if (kind == "identity") return identity_stencil();
    if (kind == "box") return box_stencil(std::stoi(arg));
    if (kind == "gaussian") return gaussian_stencil(std::stod(arg));
    if (kind == "sobel") {
        if (arg == "z") return sobel_stencil(0);
        if (arg == "x") return sobel_stencil(1);
        if (arg == "y") return sobel_stencil(2);
        throw CLI::ValidationError("--stencil", "sobel axis must be z, x or y");
    }
    if (kind == "file") {
        std::ifstream is(arg);
        if (!is) throw IoError("cannot open stencil file: " + arg);
        std::string key;
        int kz, kx, ky;
        if (!(is >> key >> kz >> kx >> ky) || key != "extent")
            throw BadFormatError("stencil file must start with: extent KZ KX KY");
        Stencil w(kz, kx, ky);
        for (float& v : w.weights)
            if (!(is >> v)) throw BadFormatError("stencil file: not enough weights");
        return w;
    }
    throw CLI::ValidationError("--stencil", "unknown stencil spec: " + spec);
}

PyramidMode parse_pyramid_mode(const std::string& s) {
    if (s == "restricted") return PyramidMode::Restricted;
    if (s == "rescaled") return PyramidMode::Rescaled;
    if (s == "uniform") return PyramidMode::Uniform;
    throw CLI::ValidationError("--pyramid", "must be restricted, rescaled or uniform");
}

void print_info(const APR& apr) {
    std::cout << "dims: " << apr.source_dims[0] << " x " << apr.source_dims[1] << " x "
              << apr.source_dims[2] << "\n";
    std::cout << "levels: [" << apr.access.l_min << ", " << apr.access.l_max << "]\n";
    std::cout << "particles: " << apr.access.particle_count() << "\n";
    std::cout << "interior nodes: " << apr.tree_access.particle_count() << "\n";
    std::cout << "computational ratio: " << computational_ratio(apr) << "\n";
    const MemoryEstimate m = memory_estimate(apr, 4, 4);
    std::cout << "memory (APR / pixels, one filter pass): " << m.apr_bytes << " / "
              << m.pixel_bytes << " bytes\n";
    for (int l = apr.access.l_min; l <= apr.access.l_max; ++l) {
        std::uint64_t n = 0;
        const LinearAccess& a = apr.access;
        const std::uint64_t r0 = a.level_offset[l];
        const std::uint64_t r1 =
            r0 + static_cast<std::uint64_t>(a.z_dim[l]) * a.x_dim[l];
        const std::uint64_t begin = r0 == 0 ? 0 : a.xz_end[r0 - 1];
        n = (r1 == r0 ? begin : a.xz_end[r1 - 1]) - begin;
        std::cout << "  level " << l << ": " << n << " particles\n";
    }
}

int run(int argc, char** argv) {
    CLI::App app{"Adaptive particle representation toolkit"};
    app.require_subcommand(1);

    int threads = 0; // 0 defers to APRKIT_THREADS, then hardware concurrency
    app.add_option("-t,--threads", threads, "Worker thread count (overrides APRKIT_THREADS)");

    double rel_error = 0.1;
    int smoothing_passes = 0;
    std::string input, output;

    auto add_build_opts = [&](CLI::App* cmd) {
        cmd->add_option("-E,--rel-error", rel_error, "Relative error bound E");
        cmd->add_option("--smooth", smoothing_passes, "Gradient smoothing passes");
    };

    auto* convert = app.add_subcommand("convert", "Build an APR from a raw volume");
    convert->add_option("input", input, "Input raw volume")->required();
    convert->add_option("output", output, "Output APR file")->required();
    add_build_opts(convert);

    auto* reconstruct = app.add_subcommand("reconstruct", "Reconstruct a pixel volume from an APR");
    reconstruct->add_option("input", input, "Input APR file")->required();
    reconstruct->add_option("output", output, "Output raw volume")->required();
    int recon_level = -1;
    reconstruct->add_option("-l,--level", recon_level, "Reconstruction level (default finest)");

    std::string stencil_spec = "gaussian:1.0";
    std::string pyramid_spec = "restricted";

    auto* convolve = app.add_subcommand("convolve", "Filter an APR with a dense stencil");
    convolve->add_option("input", input, "Input APR file")->required();
    convolve->add_option("output", output, "Output APR file")->required();
    convolve->add_option("-s,--stencil", stencil_spec,
                         "identity | box:K | gaussian:SIGMA | sobel:AXIS | file:PATH");
    convolve->add_option("-p,--pyramid", pyramid_spec, "restricted | rescaled | uniform");

    auto* deconvolve = app.add_subcommand("deconvolve", "Richardson-Lucy deconvolution on an APR");
    deconvolve->add_option("input", input, "Input APR file")->required();
    deconvolve->add_option("output", output, "Output APR file")->required();
    int rl_iterations = 100;
    deconvolve->add_option("-s,--stencil", stencil_spec, "Point spread function");
    deconvolve->add_option("-n,--iterations", rl_iterations, "Iteration count");

    auto* bench = app.add_subcommand("bench", "Run the benchmark suite, emit CSV");
    bench->add_option("output", output, "Output CSV path (- for stdout)")->required();
    int bench_edge = 128, bench_repeats = 5;
    bench->add_option("--edge", bench_edge, "Cubic volume edge length");
    bench->add_option("--repeats", bench_repeats, "Timed repetitions per measurement");

    auto* info = app.add_subcommand("info", "Print APR file statistics");
    info->add_option("input", input, "Input APR file")->required();

    auto* generate = app.add_subcommand("generate", "Write a synthetic raw volume");
    generate->add_option("output", output, "Output raw volume")->required();
    int gen_edge = 128, gen_count = 8;
    double gen_blur = 0.0, gen_noise = 0.0;
    std::uint64_t gen_seed = 1;
    std::string gen_kind = "spheres";
    generate->add_option("--kind", gen_kind, "spheres | cylinders");
    generate->add_option("--edge", gen_edge, "Cubic volume edge length");
    generate->add_option("--count", gen_count, "Object count");
    generate->add_option("--blur", gen_blur, "Gaussian blur sigma");
    generate->add_option("--noise", gen_noise, "Additive noise sigma");
    generate->add_option("--seed", gen_seed, "Random seed");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    if (convert->parsed()) {
        PixelVolume v = load_raw_volume(input);
        BuildParams params;
        params.rel_error = rel_error;
        params.smoothing_passes = smoothing_passes;
        params.sigma = SigmaPolicy::constant(intensity_range(v));
        auto [apr, values] = build_apr(v, params, threads);
        save_apr(output, apr, values);
        std::cout << "particles: " << apr.access.particle_count()
                  << "  computational ratio: " << computational_ratio(apr) << "\n";
    } else if (reconstruct->parsed()) {
        ParticleValues values;
        APR apr = load_apr(input, values);
        if (recon_level < 0 || recon_level == apr.access.l_max) {
            save_raw_volume(output, reconstruct_full(apr, values));
        } else {
            ParticleValues tree = fill_tree(apr, values, threads);
            save_raw_volume(output, reconstruct_level(apr, values, tree, recon_level));
        }
    } else if (convolve->parsed()) {
        ParticleValues values;
        APR apr = load_apr(input, values);
        const Stencil w = parse_stencil(stencil_spec);
        const StencilPyramid pyr = make_pyramid(w, apr.access.l_min, apr.access.l_max,
                                                parse_pyramid_mode(pyramid_spec));
        ParticleValues tree = fill_tree(apr, values, threads);
        ConvolveOptions opt;
        opt.threads = threads;
        ParticleValues result = convolve_apr(apr, values, tree, pyr, PadMode::Reflect, opt);
        save_apr(output, apr, result);
    } else if (deconvolve->parsed()) {
        ParticleValues values;
        APR apr = load_apr(input, values);
        RLConfig cfg;
        cfg.iterations = rl_iterations;
        cfg.psf = parse_stencil(stencil_spec);
        cfg.threads = threads;
        ParticleValues result = rl_apr(apr, values, cfg);
        save_apr(output, apr, result);
    } else if (bench->parsed()) {
        BenchConfig cfg;
        cfg.edge = bench_edge;
        cfg.repeats = bench_repeats;
        cfg.threads = threads;
        const std::vector<BenchRecord> records = run_suite(cfg);
        if (output == "-") {
            write_bench_csv(std::cout, records);
        } else {
            std::ofstream os(output);
            if (!os) throw IoError("cannot open for writing: " + output);
            write_bench_csv(os, records);
        }
    } else if (info->parsed()) {
        ParticleValues values;
        APR apr = load_apr(input, values);
        print_info(apr);
    } else if (generate->parsed()) {
        PixelVolume v;
        if (gen_kind == "spheres") {
            SphereSceneParams p;
            p.count = gen_count;
            p.blur_sigma = gen_blur;
            p.noise_sigma = gen_noise;
            v = generate_spheres(gen_edge, gen_edge, gen_edge, p, gen_seed);
        } else if (gen_kind == "cylinders") {
            CylinderSceneParams p;
            p.count = gen_count;
            v = generate_cylinders(gen_edge, gen_edge, gen_edge, p, gen_seed);
            if (gen_blur > 0.0) detail::separable_gaussian(v, gen_blur);
            if (gen_noise > 0.0) v = add_noise(v, gen_noise, gen_seed + 1);
        } else {
            std::cerr << "unknown --kind: " << gen_kind << "\n";
            return 2;
        }
        save_raw_volume(output, v);
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const aprkit::CapabilityError& e) {
        std::cerr << "capability limit: " << e.what() << "\n";
        return 4;
    } catch (const aprkit::IoError& e) {
        std::cerr << "i/o error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
