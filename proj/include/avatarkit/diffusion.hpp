#pragma once

#include <cmath>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "avatarkit/image.hpp"
#include "avatarkit/rng.hpp"
#include "avatarkit/schedule.hpp"

namespace avatarkit {

/// Predicts the clean image from a corrupted latent at step t.
using Denoiser = std::function<Image(const Image& noisy, int t)>;

/// Optional sampler hook. `init` builds the starting latent from a unit-normal
/// draw; `transform` adjusts the predicted clean image at every reverse step.
struct GuidanceHook {
    std::function<Image(const Image& unit_noise)> init;
    std::function<Image(Image prediction, int t)> transform;
};

enum class ReverseMode { deterministic, ancestral };

struct GmComponent {
    double weight = 1.0;
    Image mean;
    double pixel_std = 0.25;
};

/// Isotropic Gaussian mixture playing the role of the training distribution.
/// Its posterior mean is available in closed form, so sampler behaviour is
/// exactly checkable.
struct GaussianMixture {
    std::vector<GmComponent> components;

    void validate() const {
        if (components.empty()) throw std::invalid_argument("GaussianMixture: no components");
        double wsum = 0.0;
        for (const auto& c : components) {
            if (!(c.weight > 0.0) || c.weight > 1.0) {
                throw std::invalid_argument("GaussianMixture: weights must lie in (0, 1]");
            }
            if (!(c.pixel_std > 0.0)) {
                throw std::invalid_argument("GaussianMixture: pixel_std must be > 0");
            }
            require_same_shape(c.mean, components.front().mean, "GaussianMixture");
            wsum += c.weight;
        }
        if (std::abs(wsum - 1.0) > 1e-12) {
            throw std::invalid_argument("GaussianMixture: weights must sum to 1 within 1e-12");
        }
    }
};

/// Forward corruption: alpha[t]*x0 + sigma[t]*noise.
inline Image q_sample(const Image& x0, int t, const NoiseSchedule& sched, const Image& noise) {
    require_same_shape(x0, noise, "q_sample");
    sched.check_step(t);
    return linear_combine(sched.alpha[t], x0, sched.sigma[t], noise);
}

/// Per-component log evidence of the noisy image under the mixture pushed
/// through the forward process: log w_k + log N(xt; a*mu_k, (a^2 tau^2 + s^2) I),
/// taken jointly over all pixels.
inline std::vector<double> component_log_evidence(const Image& noisy, int t, const GaussianMixture& gm,
                                                  const NoiseSchedule& sched) {
    sched.check_step(t);
    gm.validate();
    require_same_shape(noisy, gm.components.front().mean, "component_log_evidence");

    const double a = sched.alpha[t];
    const double s = sched.sigma[t];
    const double dim = static_cast<double>(noisy.size());
    const double log_two_pi = 1.8378770664093454836;

    std::vector<double> log_ev(gm.components.size());
    for (size_t k = 0; k < gm.components.size(); ++k) {
        const auto& comp = gm.components[k];
        const double var = a * a * comp.pixel_std * comp.pixel_std + s * s;
        if (!(var > 0.0)) {
            throw std::domain_error("component_log_evidence: degenerate marginal variance at t=" +
                                    std::to_string(t));
        }
        double sq = 0.0;
        for (size_t i = 0; i < noisy.size(); ++i) {
            double r = noisy.values()[i] - a * comp.mean.values()[i];
            sq += r * r;
        }
        log_ev[k] = std::log(comp.weight) - 0.5 * dim * (log_two_pi + std::log(var)) - sq / (2.0 * var);
    }
    return log_ev;
}

/// Softmax in log space. Invariant to adding a constant to every entry.
inline std::vector<double> responsibilities_from_log(const std::vector<double>& log_ev) {
    if (log_ev.empty()) throw std::invalid_argument("responsibilities_from_log: empty input");
    double m = log_ev[0];
    for (double v : log_ev) m = std::max(m, v);
    std::vector<double> r(log_ev.size());
    double sum = 0.0;
    for (size_t k = 0; k < log_ev.size(); ++k) {
        r[k] = std::exp(log_ev[k] - m);
        sum += r[k];
    }
    for (double& v : r) v /= sum;
    return r;
}

/// Exact posterior mean E[x0 | xt] for Gaussian-mixture data under the forward
/// process. Responsibility-weighted per-component conditional means:
///   E[x0 | xt, k] = mu_k + (a tau^2 / (a^2 tau^2 + s^2)) (xt - a mu_k)
inline Image posterior_mean_denoise(const Image& noisy, int t, const GaussianMixture& gm,
                                    const NoiseSchedule& sched) {
    if (t < 1) throw std::out_of_range("posterior_mean_denoise: t must be >= 1");
    const std::vector<double> log_ev = component_log_evidence(noisy, t, gm, sched);
    const std::vector<double> resp = responsibilities_from_log(log_ev);

    const double a = sched.alpha[t];
    const double s = sched.sigma[t];
    Image out(noisy.width(), noisy.height(), 0.0);
    for (size_t k = 0; k < gm.components.size(); ++k) {
        const auto& comp = gm.components[k];
        const double tau2 = comp.pixel_std * comp.pixel_std;
        const double gain = a * tau2 / (a * a * tau2 + s * s);
        for (size_t i = 0; i < out.size(); ++i) {
            double mu = comp.mean.values()[i];
            out.values()[i] += resp[k] * (mu + gain * (noisy.values()[i] - a * mu));
        }
    }
    return out;
}

inline Denoiser make_posterior_denoiser(GaussianMixture gm, NoiseSchedule sched) {
    gm.validate();
    return [gm = std::move(gm), sched = std::move(sched)](const Image& noisy, int t) {
        return posterior_mean_denoise(noisy, t, gm, sched);
    };
}

/// One reverse transition from step t to t-1.
///
/// deterministic: x_{t-1} = a_{t-1} x0 + (s_{t-1}/s_t) (x_t - a_t x0)
/// ancestral:     direction coefficient shrinks to sqrt(s_{t-1}^2 - v) / s_t
///                and sqrt(v) * noise is added, with the posterior variance
///                v = (s_{t-1}/s_t)^2 * (1 - (a_t/a_{t-1})^2), i.e. the
///                standard full-noise ancestral choice (eta = 1).
inline Image reverse_step(const Image& noisy, const Image& x0_hat, int t, const NoiseSchedule& sched,
                          ReverseMode mode = ReverseMode::deterministic, const Image* noise = nullptr) {
    require_same_shape(noisy, x0_hat, "reverse_step");
    if (t < 1 || t > sched.num_steps) {
        throw std::out_of_range("reverse_step: t must lie in [1, " + std::to_string(sched.num_steps) + "]");
    }
    const double a_prev = sched.alpha[t - 1];
    const double a = sched.alpha[t];
    const double s_prev = sched.sigma[t - 1];
    const double s = sched.sigma[t];

    if (mode == ReverseMode::deterministic) {
        Image out(noisy.width(), noisy.height());
        const double ratio = s_prev / s;
        for (size_t i = 0; i < out.size(); ++i) {
            out.values()[i] = a_prev * x0_hat.values()[i] +
                              ratio * (noisy.values()[i] - a * x0_hat.values()[i]);
        }
        return out;
    }

    if (noise == nullptr) {
        throw std::invalid_argument("reverse_step: ancestral mode requires a noise image");
    }
    require_same_shape(noisy, *noise, "reverse_step noise");
    const double step_ratio = a / a_prev;
    const double post_std = (s_prev / s) * std::sqrt(std::max(0.0, 1.0 - step_ratio * step_ratio));
    const double dir = std::sqrt(std::max(0.0, s_prev * s_prev - post_std * post_std)) / s;
    Image out(noisy.width(), noisy.height());
    for (size_t i = 0; i < out.size(); ++i) {
        out.values()[i] = a_prev * x0_hat.values()[i] +
                          dir * (noisy.values()[i] - a * x0_hat.values()[i]) +
                          post_std * noise->values()[i];
    }
    return out;
}

struct SampleOptions {
    int width = 32;
    int height = 32;
    ReverseMode mode = ReverseMode::deterministic;
};

/// Full reverse trajectory. All randomness flows from the seed, so equal
/// seed + schedule + denoiser + hook configuration gives identical bytes.
inline Image sample(const Denoiser& denoiser, const NoiseSchedule& sched, uint64_t seed,
                    const SampleOptions& opts = {}, const GuidanceHook* hook = nullptr) {
    sched.validate();
    GaussianRng rng(seed);
    const int T = sched.num_steps;

    Image unit = rng.image(opts.width, opts.height);
    Image xt = (hook && hook->init) ? hook->init(unit) : scaled(unit, sched.sigma[T]);
    if (xt.width() != opts.width || xt.height() != opts.height) {
        throw std::invalid_argument("sample: hook initializer changed the latent shape");
    }

    for (int t = T; t >= 1; --t) {
        Image x0_hat = denoiser(xt, t);
        require_same_shape(x0_hat, xt, "sample denoiser output");
        if (hook && hook->transform) {
            x0_hat = hook->transform(std::move(x0_hat), t);
            require_same_shape(x0_hat, xt, "sample hook transform output");
        }
        if (opts.mode == ReverseMode::ancestral) {
            Image noise = rng.image(opts.width, opts.height);
            xt = reverse_step(xt, x0_hat, t, sched, ReverseMode::ancestral, &noise);
        } else {
            xt = reverse_step(xt, x0_hat, t, sched, ReverseMode::deterministic);
        }
    }
    return xt;
}

}  // namespace avatarkit
