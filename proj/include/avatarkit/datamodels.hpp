#pragma once

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "avatarkit/diffusion.hpp"
#include "avatarkit/image.hpp"
#include "avatarkit/rng.hpp"

namespace avatarkit {

/// Deterministic procedural texture seeded by a text key. A smooth low-pass
/// field plus a band-pass component a few pixels in wavelength; the band-pass
/// part is what keeps heavily abstract data models from collapsing onto the
/// face manifold under structural guidance alone.
inline Image procedural_texture(const std::string& seed_text, int width, int height,
                                double low_amp = 1.0, double band_amp = 3.0) {
    GaussianRng rng(fnv1a64(seed_text));

    Image low = gaussian_blur(rng.uniform_image(width, height), 2.0);
    double lo = low.min_value();
    double hi = low.max_value();
    double span = std::max(hi - lo, 1e-12);
    for (double& v : low.values()) v = (v - lo) / span;

    Image field = rng.image(width, height);
    Image band = subtract(gaussian_blur(field, 0.9), gaussian_blur(field, 2.2));
    double peak = 1e-12;
    for (double v : band.values()) peak = std::max(peak, std::abs(v));
    for (double& v : band.values()) v /= peak;

    return linear_combine(low_amp, low, band_amp, band);
}

/// Synthetic stand-in for a styled generative backend: component means are
/// convex moves from the face raster toward per-component textures,
///   mean_k = (1 - abstractness) * face + abstractness * texture_k,
/// with a fixed per-pixel std of 0.25. Component textures get a mild
/// amplitude lottery so samples within one model vary in difficulty.
inline GaussianMixture face_blend_model(const Image& face_raster, const std::string& seed_text,
                                        double abstractness, int components = 3,
                                        double pixel_std = 0.25) {
    if (!(abstractness >= 0.0 && abstractness <= 1.0)) {
        throw std::invalid_argument("face_blend_model: abstractness must lie in [0,1]");
    }
    if (components < 1) throw std::invalid_argument("face_blend_model: need at least one component");

    GaussianMixture gm;
    for (int k = 0; k < components; ++k) {
        const double lottery = 1.0 + 0.3 * (k - (components - 1) * 0.5);
        Image tex = procedural_texture(seed_text + "/" + std::to_string(k), face_raster.width(),
                                       face_raster.height(), 1.0 * lottery, 3.0 * lottery);
        GmComponent comp;
        comp.weight = 1.0 / components;
        comp.mean = linear_combine(1.0 - abstractness, face_raster, abstractness, tex);
        comp.pixel_std = pixel_std;
        gm.components.push_back(std::move(comp));
    }
    gm.validate();
    return gm;
}

struct DataModelPreset {
    const char* id;
    double abstractness;
};

inline const std::vector<DataModelPreset>& data_model_presets() {
    static const std::vector<DataModelPreset> presets = {
        {"photoreal", 0.12}, {"anime", 0.30}, {"dream", 0.26}, {"icon", 0.34}, {"render3d", 0.28},
    };
    return presets;
}

/// Named data-model specs referenced by diffuser registry payloads.
inline GaussianMixture named_data_model(const std::string& id, const Image& face_raster) {
    for (const auto& p : data_model_presets()) {
        if (id == p.id) return face_blend_model(face_raster, id, p.abstractness);
    }
    std::string available;
    for (const auto& p : data_model_presets()) {
        if (!available.empty()) available += ", ";
        available += p.id;
    }
    throw std::out_of_range("unknown data model '" + id + "' (available: " + available + ")");
}

}  // namespace avatarkit
