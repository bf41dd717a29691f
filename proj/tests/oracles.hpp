#pragma once

// Test-only oracles, written independently of the library code paths they
// check. The quadrature route integrates the posterior definition directly
// instead of using the closed-form mixture algebra.

#include <cmath>
#include <vector>

#include "avatarkit/diffusion.hpp"
#include "avatarkit/image.hpp"
#include "avatarkit/schedule.hpp"

namespace oracles {

inline double normal_pdf(double x, double mean, double var) {
    const double d = x - mean;
    return std::exp(-d * d / (2.0 * var)) / std::sqrt(6.283185307179586 * var);
}

/// Simpson integration of f over [lo, hi] with an even number of intervals.
template <typename F>
double simpson(F f, double lo, double hi, int points) {
    if (points % 2 == 0) ++points;  // need an odd point count
    const int n = points - 1;
    const double h = (hi - lo) / n;
    double sum = f(lo) + f(hi);
    for (int i = 1; i < n; ++i) {
        sum += f(lo + i * h) * ((i % 2) ? 4.0 : 2.0);
    }
    return sum * h / 3.0;
}

/// Brute-force posterior mean E[x0 | xt] for Gaussian-mixture data:
///   E[x0 | xt] = ( sum_k w_k Int x0 q(xt|x0) p_k(x0) dx0 ) / ( sum_k w_k Int q(xt|x0) p_k(x0) dx0 )
/// evaluated with per-pixel separable quadrature on a grid spanning +-8 tau
/// around each component mean (log-space across pixels).
inline avatarkit::Image quadrature_posterior_mean(const avatarkit::Image& xt, int t,
                                                  const avatarkit::GaussianMixture& gm,
                                                  const avatarkit::NoiseSchedule& sched,
                                                  int grid_points = 4001) {
    const double a = sched.alpha[t];
    const double s2 = sched.sigma[t] * sched.sigma[t];
    const size_t npix = xt.size();

    std::vector<double> log_evidence(gm.components.size());
    std::vector<std::vector<double>> cond_mean(gm.components.size());

    for (size_t k = 0; k < gm.components.size(); ++k) {
        const auto& comp = gm.components[k];
        const double tau = comp.pixel_std;
        const double tau2 = tau * tau;
        double log_ev = std::log(comp.weight);
        cond_mean[k].resize(npix);
        for (size_t i = 0; i < npix; ++i) {
            const double mu = comp.mean.values()[i];
            const double obs = xt.values()[i];
            auto joint = [&](double u) { return normal_pdf(obs, a * u, s2) * normal_pdf(u, mu, tau2); };
            auto weighted = [&](double u) { return u * joint(u); };
            const double lo = mu - 8.0 * tau;
            const double hi = mu + 8.0 * tau;
            const double z = simpson(joint, lo, hi, grid_points);
            const double m = simpson(weighted, lo, hi, grid_points);
            log_ev += std::log(z);
            cond_mean[k][i] = m / z;
        }
        log_evidence[k] = log_ev;
    }

    double peak = log_evidence[0];
    for (double v : log_evidence) peak = std::max(peak, v);
    double norm = 0.0;
    std::vector<double> resp(gm.components.size());
    for (size_t k = 0; k < resp.size(); ++k) {
        resp[k] = std::exp(log_evidence[k] - peak);
        norm += resp[k];
    }

    avatarkit::Image out(xt.width(), xt.height(), 0.0);
    for (size_t k = 0; k < resp.size(); ++k) {
        const double r = resp[k] / norm;
        for (size_t i = 0; i < npix; ++i) out.values()[i] += r * cond_mean[k][i];
    }
    return out;
}

}  // namespace oracles
