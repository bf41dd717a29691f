#pragma once

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

namespace avatarkit {

/// Variance-preserving noise schedule: alpha[t]^2 + sigma[t]^2 = 1 for
/// t = 0..num_steps, with alpha[0] = 1 (clean) and alpha[T] near zero.
struct NoiseSchedule {
    int num_steps = 0;           // T
    std::vector<double> alpha;   // size T+1, strictly decreasing
    std::vector<double> sigma;   // size T+1, strictly increasing

    /// alpha[t] = cos((t/T) * (pi/2) * 0.98), sigma from the VP identity.
    /// The 0.98 keeps alpha[T] positive while staying below 0.05.
    static NoiseSchedule cosine(int num_steps = 50) {
        if (num_steps < 1) throw std::invalid_argument("NoiseSchedule::cosine: num_steps must be >= 1");
        NoiseSchedule s;
        s.num_steps = num_steps;
        s.alpha.resize(num_steps + 1);
        s.sigma.resize(num_steps + 1);
        const double half_pi = 1.5707963267948966;
        for (int t = 0; t <= num_steps; ++t) {
            double a = std::cos((static_cast<double>(t) / num_steps) * half_pi * 0.98);
            s.alpha[t] = a;
            s.sigma[t] = std::sqrt(std::max(0.0, 1.0 - a * a));
        }
        s.alpha[0] = 1.0;
        s.sigma[0] = 0.0;
        s.validate();
        return s;
    }

    void check_step(int t) const {
        if (t < 0 || t > num_steps) {
            throw std::out_of_range("schedule step " + std::to_string(t) + " outside [0, " +
                                    std::to_string(num_steps) + "]");
        }
    }

    void validate() const {
        if (num_steps < 1) throw std::invalid_argument("NoiseSchedule: num_steps must be >= 1");
        if (alpha.size() != static_cast<size_t>(num_steps) + 1 || sigma.size() != alpha.size()) {
            throw std::invalid_argument("NoiseSchedule: alpha/sigma must have num_steps+1 entries");
        }
        if (alpha[0] != 1.0 || sigma[0] != 0.0) {
            throw std::invalid_argument("NoiseSchedule: requires alpha[0] = 1 and sigma[0] = 0 exactly");
        }
        for (int t = 0; t <= num_steps; ++t) {
            if (!(alpha[t] > 0.0) || alpha[t] > 1.0) {
                throw std::invalid_argument("NoiseSchedule: alpha[" + std::to_string(t) + "] outside (0, 1]");
            }
            if (sigma[t] < 0.0 || !(sigma[t] < 1.0)) {
                throw std::invalid_argument("NoiseSchedule: sigma[" + std::to_string(t) + "] outside [0, 1)");
            }
            double vp = alpha[t] * alpha[t] + sigma[t] * sigma[t];
            if (std::abs(vp - 1.0) > 1e-12) {
                throw std::invalid_argument("NoiseSchedule: variance-preserving identity broken at t=" +
                                            std::to_string(t));
            }
            if (t > 0) {
                if (!(alpha[t] < alpha[t - 1])) {
                    throw std::invalid_argument("NoiseSchedule: alpha not strictly decreasing at t=" +
                                                std::to_string(t));
                }
                if (!(sigma[t] > sigma[t - 1])) {
                    throw std::invalid_argument("NoiseSchedule: sigma not strictly increasing at t=" +
                                                std::to_string(t));
                }
            }
        }
        if (alpha[num_steps] > 0.05) {
            throw std::invalid_argument("NoiseSchedule: terminal alpha must be <= 0.05");
        }
    }
};

}  // namespace avatarkit
