#pragma once

#include <cmath>
#include <stdexcept>
#include <string>

#include "avatarkit/diffusion.hpp"
#include "avatarkit/image.hpp"
#include "avatarkit/landmarks.hpp"
#include "avatarkit/schedule.hpp"

namespace avatarkit {

/// Knobs of the hybrid guidance: hard injection strength, the conditioned
/// fraction of early steps, and the soft structural pull.
struct GuidanceConfig {
    double injection_weight = 0.6;   // blend weight of the landmark raster
    double window_fraction = 0.4;    // fraction of early reverse steps that blend
    double structural_weight = 1.0;  // gradient-step size of the structural pull
    double blur_std = 1.5;
    std::string landmark_id = "auto";

    void validate() const {
        if (!(injection_weight >= 0.0 && injection_weight <= 1.0)) {
            throw std::invalid_argument("GuidanceConfig: injection_weight must lie in [0,1]");
        }
        if (!(window_fraction >= 0.0 && window_fraction <= 1.0)) {
            throw std::invalid_argument("GuidanceConfig: window_fraction must lie in [0,1]");
        }
        if (!(structural_weight >= 0.0)) {
            throw std::invalid_argument("GuidanceConfig: structural_weight must be >= 0");
        }
        if (!(blur_std > 0.0)) throw std::invalid_argument("GuidanceConfig: blur_std must be > 0");
    }
};

/// Hard injection into the starting latent: forward-corrupts the scaled
/// raster to the terminal noise level, alpha[T]*w*raster + sigma[T]*noise.
/// weight 0 reduces to the unguided initializer, weight 1 is the exact
/// forward sample of the raster.
inline Image inject_initial(const Image& raster, const NoiseSchedule& sched, double weight,
                            const Image& noise) {
    if (!(weight >= 0.0 && weight <= 1.0)) {
        throw std::invalid_argument("inject_initial: weight must lie in [0,1]");
    }
    require_same_shape(raster, noise, "inject_initial");
    const int T = sched.num_steps;
    return linear_combine(sched.alpha[T] * weight, raster, sched.sigma[T], noise);
}

/// Number of reverse steps the conditioning window covers.
inline int window_steps(const NoiseSchedule& sched, double window_fraction) {
    return static_cast<int>(std::llround(window_fraction * sched.num_steps));
}

/// Replaces the prediction with (1-w)*prediction + w*raster during the early
/// (high-noise) steps, i.e. while t > T - window_steps; identity afterwards.
inline Image window_blend(const Image& prediction, const Image& raster, int t, const NoiseSchedule& sched,
                          const GuidanceConfig& cfg) {
    if (t < 1 || t > sched.num_steps) {
        throw std::out_of_range("window_blend: t must lie in [1, " + std::to_string(sched.num_steps) + "]");
    }
    require_same_shape(prediction, raster, "window_blend");
    if (t <= sched.num_steps - window_steps(sched, cfg.window_fraction)) return prediction;
    return linear_combine(1.0 - cfg.injection_weight, prediction, cfg.injection_weight, raster);
}

/// Soft structural pull: one gradient step on || B(prediction) - B(raster) ||^2
/// with B a fixed Gaussian blur, giving prediction - 2*w*B(B(prediction) - B(raster)).
/// Since ||B|| = 1, a single application strictly decreases the objective for
/// any w in (0, 1) whenever the blurred residual is nonzero.
inline Image structural_residual(const Image& prediction, const Image& raster, double weight,
                                 double blur_std) {
    if (!(weight >= 0.0)) throw std::invalid_argument("structural_residual: weight must be >= 0");
    require_same_shape(prediction, raster, "structural_residual");
    if (weight == 0.0) return prediction;
    Image diff = subtract(gaussian_blur(prediction, blur_std), gaussian_blur(raster, blur_std));
    Image grad = gaussian_blur(diff, blur_std);
    return linear_combine(1.0, prediction, -2.0 * weight, grad);
}

/// Composes the full hybrid guidance for the sampler: initializer = hard
/// injection, per-step transform = window blend followed by the structural
/// pull (order is fixed and tested; the two do not commute).
inline GuidanceHook make_hook(const GuidanceConfig& cfg, const LandmarkMemory& memory,
                              const NoiseSchedule& sched) {
    cfg.validate();
    const LandmarkTemplate& tpl = memory.by_id(cfg.landmark_id);
    Image raster = tpl.raster;

    GuidanceHook hook;
    hook.init = [raster, cfg, sched](const Image& unit_noise) {
        return inject_initial(raster, sched, cfg.injection_weight, unit_noise);
    };
    hook.transform = [raster, cfg, sched](Image prediction, int t) {
        Image blended = window_blend(std::move(prediction), raster, t, sched, cfg);
        return structural_residual(blended, raster, cfg.structural_weight, cfg.blur_std);
    };
    return hook;
}

}  // namespace avatarkit
