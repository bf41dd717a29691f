#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "avatarkit/image.hpp"
#include "avatarkit/landmarks.hpp"

namespace avatarkit {

struct DetectorConfig {
    double threshold = 0.6;                    // confidence needed for found=true
    int search_radius = 4;                     // translation search in pixels
    std::vector<double> scales = {0.9, 1.0, 1.1};
    double blur_std = 1.5;

    void validate() const {
        if (!(threshold > 0.0 && threshold < 1.0)) {
            throw std::invalid_argument("DetectorConfig: threshold must lie in (0,1)");
        }
        if (search_radius < 0) throw std::invalid_argument("DetectorConfig: search_radius must be >= 0");
        if (scales.empty()) throw std::invalid_argument("DetectorConfig: scales must not be empty");
        for (double s : scales) {
            if (!(s > 0.0)) throw std::invalid_argument("DetectorConfig: scales must be positive");
        }
        if (!(blur_std > 0.0)) throw std::invalid_argument("DetectorConfig: blur_std must be > 0");
    }
};

struct Detection {
    bool found = false;
    double confidence = -1.0;      // peak normalized cross-correlation in [-1, 1]
    LandmarkSet landmarks;         // meaningful iff found
    std::string template_id;       // winning bank template
};

/// Zero-mean normalized cross-correlation of two equally shaped windows.
/// Returns 0 when either window is constant.
inline double normalized_cross_correlation(const Image& a, const Image& b) {
    require_same_shape(a, b, "normalized_cross_correlation");
    const double ma = a.mean();
    const double mb = b.mean();
    double sab = 0.0, saa = 0.0, sbb = 0.0;
    for (size_t i = 0; i < a.size(); ++i) {
        const double da = a.values()[i] - ma;
        const double db = b.values()[i] - mb;
        sab += da * db;
        saa += da * da;
        sbb += db * db;
    }
    // constant windows carry no signal; the threshold absorbs the rounding
    // noise a mean subtraction leaves behind on exactly-constant data
    const double floor_a = a.size() * 1e-20 * std::max(1.0, ma * ma);
    const double floor_b = b.size() * 1e-20 * std::max(1.0, mb * mb);
    if (saa <= floor_a || sbb <= floor_b) return 0.0;
    return sab / std::sqrt(saa * sbb);
}

namespace detail {

inline Image crop(const Image& img, int x0, int y0, int w, int h) {
    Image out(w, h);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) out.at(x, y) = img.at(x0 + x, y0 + y);
    }
    return out;
}

}  // namespace detail

/// Template-bank landmark detector. Blurs the image, then scans every bank
/// raster (blurred at the same std) over integer translations within the
/// search radius and the configured scales. Placements may hang over the
/// image border; their correlation is computed on the overlap, and placements
/// whose overlap falls below 70% of what the geometry allows are skipped so
/// thin border slivers cannot win. found = true iff the peak correlation
/// reaches the threshold.
inline Detection detect(const Image& img, const LandmarkMemory& bank, const DetectorConfig& cfg = {}) {
    cfg.validate();
    bank.validate();

    const int iw = img.width();
    const int ih = img.height();
    {
        int min_tw = 1 << 30, min_th = 1 << 30;
        for (const auto& tpl : bank.templates) {
            for (double s : cfg.scales) {
                min_tw = std::min(min_tw, std::max(1, static_cast<int>(std::lround(tpl.raster.width() * s))));
                min_th = std::min(min_th, std::max(1, static_cast<int>(std::lround(tpl.raster.height() * s))));
            }
        }
        if (iw < min_tw || ih < min_th) {
            throw std::invalid_argument("detect: image smaller than the smallest scaled template");
        }
    }

    const Image blurred = gaussian_blur(img, cfg.blur_std);
    constexpr double min_overlap_share = 0.7;  // of the best overlap this placement geometry allows

    Detection best;
    best.confidence = -1.0;

    for (const auto& tpl : bank.templates) {
        for (double scale : cfg.scales) {
            const int tw = std::max(1, static_cast<int>(std::lround(tpl.raster.width() * scale)));
            const int th = std::max(1, static_cast<int>(std::lround(tpl.raster.height() * scale)));
            const Image scaled_tpl = gaussian_blur(resize_bilinear(tpl.raster, tw, th), cfg.blur_std);

            const int base_x = (iw - tw) / 2;
            const int base_y = (ih - th) / 2;
            const double tpl_area = static_cast<double>(tw) * th;
            const double max_overlap = static_cast<double>(std::min(iw, tw)) * std::min(ih, th) / tpl_area;

            for (int dy = -cfg.search_radius; dy <= cfg.search_radius; ++dy) {
                for (int dx = -cfg.search_radius; dx <= cfg.search_radius; ++dx) {
                    const int x0 = base_x + dx;
                    const int y0 = base_y + dy;
                    const int ix0 = std::max(0, x0);
                    const int iy0 = std::max(0, y0);
                    const int ix1 = std::min(iw, x0 + tw);
                    const int iy1 = std::min(ih, y0 + th);
                    const int ow = ix1 - ix0;
                    const int oh = iy1 - iy0;
                    if (ow <= 1 || oh <= 1) continue;
                    const double frac = static_cast<double>(ow) * oh / tpl_area;
                    if (frac < min_overlap_share * max_overlap) continue;

                    const Image win_img = detail::crop(blurred, ix0, iy0, ow, oh);
                    const Image win_tpl = detail::crop(scaled_tpl, ix0 - x0, iy0 - y0, ow, oh);
                    const double conf = normalized_cross_correlation(win_img, win_tpl);
                    if (conf > best.confidence) {
                        best.confidence = conf;
                        best.template_id = tpl.id;
                        auto map_point = [&](Point p) {
                            double txp = p.x * (tw - 1);
                            double typ = p.y * (th - 1);
                            double gx = (x0 + txp) / std::max(1, iw - 1);
                            double gy = (y0 + typ) / std::max(1, ih - 1);
                            return Point{std::clamp(gx, 0.0, 1.0), std::clamp(gy, 0.0, 1.0)};
                        };
                        best.landmarks.left_eye = map_point(tpl.keypoints.left_eye);
                        best.landmarks.right_eye = map_point(tpl.keypoints.right_eye);
                        best.landmarks.nose_tip = map_point(tpl.keypoints.nose_tip);
                        best.landmarks.mouth_left = map_point(tpl.keypoints.mouth_left);
                        best.landmarks.mouth_right = map_point(tpl.keypoints.mouth_right);
                    }
                }
            }
        }
    }

    best.found = best.confidence >= cfg.threshold;
    return best;
}

/// Fraction of images in which the detector finds a face.
inline double detection_rate(const std::vector<Image>& images, const LandmarkMemory& bank,
                             const DetectorConfig& cfg = {}) {
    if (images.empty()) throw std::invalid_argument("detection_rate: empty image list");
    int found = 0;
    for (const Image& img : images) {
        if (detect(img, bank, cfg).found) ++found;
    }
    return static_cast<double>(found) / images.size();
}

}  // namespace avatarkit
