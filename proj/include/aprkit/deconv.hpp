#pragma once

#include <algorithm>
#include <cstdint>
#include <functional>
#include <vector>

#include "aprkit/apr.hpp"
#include "aprkit/convolve.hpp"
#include "aprkit/pixel_volume.hpp"
#include "aprkit/stencil.hpp"
#include "aprkit/tree.hpp"

namespace aprkit {

struct RLConfig {
    int iterations = 100;
    Stencil psf;
    double epsilon = 0.0;         // 0 selects 1e-6 x mean of the observed image
    int record_metrics_every = 0; // 0 disables the observer
    int threads = 0;
};

namespace detail {

inline Stencil normalized_psf(const Stencil& psf) {
    for (float w : psf.weights)
        if (w < 0.0f) throw RangeError("RL psf weights must be non-negative");
    const double s = psf.sum();
    if (s <= 0.0) throw RangeError("RL psf must have positive sum");
    Stencil out = psf;
    for (float& w : out.weights) w = static_cast<float>(w / s);
    return out;
}

inline double rl_epsilon(const RLConfig& cfg, double mean_observed) {
    return cfg.epsilon > 0.0 ? cfg.epsilon : 1e-6 * std::max(mean_observed, 1e-30);
}

} // namespace detail

// Richardson-Lucy fixed-point iteration on pixels, starting from the observed
// image: i_{k+1} = i_k * ((u / (i_k conv w)) conv w_flipped). Division is
// guarded by epsilon; reflect boundaries.
inline PixelVolume rl_pixels(const PixelVolume& observed, const RLConfig& cfg,
                             const std::function<void(int, const PixelVolume&)>& observer = nullptr) {
    const Stencil w = detail::normalized_psf(cfg.psf);
    const Stencil wt = flip_stencil(w);
    PixelVolume u = observed;
    for (float& v : u.values) v = std::max(v, 0.0f);
    double mean = 0.0;
    for (float v : u.values) mean += v;
    mean /= std::max<std::size_t>(u.size(), 1);
    const double eps = detail::rl_epsilon(cfg, mean);

    PixelVolume estimate = u;
    for (int k = 1; k <= cfg.iterations; ++k) {
        PixelVolume blurred = convolve_pixels(estimate, w, PadMode::Reflect, cfg.threads);
        PixelVolume ratio(u.nz, u.nx, u.ny);
        for (std::size_t i = 0; i < u.size(); ++i)
            ratio.values[i] =
                static_cast<float>(u.values[i] / std::max<double>(blurred.values[i], eps));
        PixelVolume corr = convolve_pixels(ratio, wt, PadMode::Reflect, cfg.threads);
        for (std::size_t i = 0; i < u.size(); ++i) estimate.values[i] *= corr.values[i];
        if (observer && cfg.record_metrics_every > 0 && k % cfg.record_metrics_every == 0)
            observer(k, estimate);
    }
    return estimate;
}

// APR-native Richardson-Lucy: the same iteration with both convolutions
// replaced by their APR counterparts under restricted PSF pyramids. The
// per-level pyramids are built once; the tree values are refilled every
// iteration since the particle values change.
inline ParticleValues
rl_apr(const APR& apr, const ParticleValues& observed, const RLConfig& cfg,
       const std::function<void(int, const ParticleValues&)>& observer = nullptr) {
    const Stencil w = detail::normalized_psf(cfg.psf);
    const StencilPyramid pyr_w =
        make_pyramid(w, apr.access.l_min, apr.access.l_max, PyramidMode::Restricted);
    const StencilPyramid pyr_wt =
        make_pyramid(flip_stencil(w), apr.access.l_min, apr.access.l_max, PyramidMode::Restricted);

    ParticleValues u = observed;
    for (float& v : u) v = std::max(v, 0.0f);
    double mean = 0.0;
    for (float v : u) mean += v;
    mean /= std::max<std::size_t>(u.size(), 1);
    const double eps = detail::rl_epsilon(cfg, mean);

    ConvolveOptions opt;
    opt.threads = cfg.threads;
    ParticleValues estimate = u;
    ParticleValues ratio(u.size());
    for (int k = 1; k <= cfg.iterations; ++k) {
        ParticleValues tree_est = fill_tree(apr, estimate, cfg.threads);
        ParticleValues blurred = convolve_apr(apr, estimate, tree_est, pyr_w, PadMode::Reflect, opt);
        for (std::size_t i = 0; i < u.size(); ++i)
            ratio[i] = static_cast<float>(u[i] / std::max<double>(blurred[i], eps));
        ParticleValues tree_ratio = fill_tree(apr, ratio, cfg.threads);
        ParticleValues corr = convolve_apr(apr, ratio, tree_ratio, pyr_wt, PadMode::Reflect, opt);
        for (std::size_t i = 0; i < u.size(); ++i) estimate[i] *= corr[i];
        if (observer && cfg.record_metrics_every > 0 && k % cfg.record_metrics_every == 0)
            observer(k, estimate);
    }
    return estimate;
}

} // namespace aprkit
