#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

namespace avatarkit {

/// Single-channel raster of doubles, row-major. Stands in for latents,
/// landmark renderings and detector inputs alike.
class Image {
public:
    Image() = default;

    Image(int width, int height, double fill = 0.0) : width_(width), height_(height) {
        if (width < 1 || height < 1) {
            throw std::invalid_argument("Image: width and height must be >= 1, got " +
                                        std::to_string(width) + "x" + std::to_string(height));
        }
        values_.assign(static_cast<size_t>(width) * height, fill);
    }

    static Image from_values(int width, int height, std::vector<double> values) {
        Image img(width, height);
        if (values.size() != img.values_.size()) {
            throw std::invalid_argument("Image::from_values: value count does not match shape");
        }
        img.values_ = std::move(values);
        return img;
    }

    int width() const { return width_; }
    int height() const { return height_; }
    size_t size() const { return values_.size(); }
    bool empty() const { return values_.empty(); }

    double& at(int x, int y) { return values_[static_cast<size_t>(y) * width_ + x]; }
    double at(int x, int y) const { return values_[static_cast<size_t>(y) * width_ + x]; }

    std::vector<double>& values() { return values_; }
    const std::vector<double>& values() const { return values_; }

    bool same_shape(const Image& other) const {
        return width_ == other.width_ && height_ == other.height_;
    }

    bool all_finite() const {
        for (double v : values_) {
            if (!std::isfinite(v)) return false;
        }
        return true;
    }

    double min_value() const { return *std::min_element(values_.begin(), values_.end()); }
    double max_value() const { return *std::max_element(values_.begin(), values_.end()); }

    double mean() const {
        double s = 0.0;
        for (double v : values_) s += v;
        return values_.empty() ? 0.0 : s / values_.size();
    }

    double rms() const {
        double s = 0.0;
        for (double v : values_) s += v * v;
        return values_.empty() ? 0.0 : std::sqrt(s / values_.size());
    }

private:
    int width_ = 0;
    int height_ = 0;
    std::vector<double> values_;
};

inline void require_same_shape(const Image& a, const Image& b, const char* what) {
    if (!a.same_shape(b)) {
        throw std::invalid_argument(std::string(what) + ": shape mismatch " +
                                    std::to_string(a.width()) + "x" + std::to_string(a.height()) + " vs " +
                                    std::to_string(b.width()) + "x" + std::to_string(b.height()));
    }
}

/// out = ca*a + cb*b, elementwise.
inline Image linear_combine(double ca, const Image& a, double cb, const Image& b) {
    require_same_shape(a, b, "linear_combine");
    Image out(a.width(), a.height());
    const auto& av = a.values();
    const auto& bv = b.values();
    auto& ov = out.values();
    for (size_t i = 0; i < ov.size(); ++i) ov[i] = ca * av[i] + cb * bv[i];
    return out;
}

inline Image scaled(const Image& a, double c) {
    Image out = a;
    for (double& v : out.values()) v *= c;
    return out;
}

inline Image subtract(const Image& a, const Image& b) { return linear_combine(1.0, a, -1.0, b); }

inline double max_abs_difference(const Image& a, const Image& b) {
    require_same_shape(a, b, "max_abs_difference");
    double m = 0.0;
    for (size_t i = 0; i < a.values().size(); ++i) {
        m = std::max(m, std::abs(a.values()[i] - b.values()[i]));
    }
    return m;
}

inline double squared_l2(const Image& a) {
    double s = 0.0;
    for (double v : a.values()) s += v * v;
    return s;
}

// Half-sample symmetric boundary: -1 -> 0, -2 -> 1, n -> n-1, ...
// Keeps the blur operator symmetric (diagonal in the DCT-II basis).
inline int reflect_index(int i, int n) {
    while (i < 0 || i >= n) {
        if (i < 0) i = -i - 1;
        else i = 2 * n - 1 - i;
    }
    return i;
}

inline std::vector<double> gaussian_kernel(double std_px) {
    if (!(std_px > 0.0)) throw std::invalid_argument("gaussian_kernel: std must be > 0");
    int radius = std::max(1, static_cast<int>(std::ceil(3.0 * std_px)));
    std::vector<double> k(2 * radius + 1);
    double sum = 0.0;
    for (int j = -radius; j <= radius; ++j) {
        k[j + radius] = std::exp(-0.5 * (j / std_px) * (j / std_px));
        sum += k[j + radius];
    }
    for (double& v : k) v /= sum;
    return k;
}

/// Separable Gaussian blur with reflective boundary handling. The kernel sums
/// to one, so constants are fixed points and the operator norm is 1.
inline Image gaussian_blur(const Image& img, double std_px) {
    const std::vector<double> k = gaussian_kernel(std_px);
    const int radius = static_cast<int>(k.size() / 2);
    const int w = img.width();
    const int h = img.height();

    Image tmp(w, h);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            double s = 0.0;
            for (int j = -radius; j <= radius; ++j) {
                s += k[j + radius] * img.at(reflect_index(x + j, w), y);
            }
            tmp.at(x, y) = s;
        }
    }
    Image out(w, h);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            double s = 0.0;
            for (int j = -radius; j <= radius; ++j) {
                s += k[j + radius] * tmp.at(x, reflect_index(y + j, h));
            }
            out.at(x, y) = s;
        }
    }
    return out;
}

/// Corner-aligned bilinear resize (normalized coordinates are preserved).
inline Image resize_bilinear(const Image& img, int new_width, int new_height) {
    if (new_width < 1 || new_height < 1) {
        throw std::invalid_argument("resize_bilinear: target shape must be >= 1x1");
    }
    const int w = img.width();
    const int h = img.height();
    Image out(new_width, new_height);
    for (int y = 0; y < new_height; ++y) {
        for (int x = 0; x < new_width; ++x) {
            double fx = (new_width > 1) ? x * static_cast<double>(w - 1) / (new_width - 1) : 0.0;
            double fy = (new_height > 1) ? y * static_cast<double>(h - 1) / (new_height - 1) : 0.0;
            int x0 = static_cast<int>(fx);
            int y0 = static_cast<int>(fy);
            int x1 = std::min(x0 + 1, w - 1);
            int y1 = std::min(y0 + 1, h - 1);
            double ax = fx - x0;
            double ay = fy - y0;
            out.at(x, y) = img.at(x0, y0) * (1 - ax) * (1 - ay) + img.at(x1, y0) * ax * (1 - ay) +
                           img.at(x0, y1) * (1 - ax) * ay + img.at(x1, y1) * ax * ay;
        }
    }
    return out;
}

}  // namespace avatarkit
