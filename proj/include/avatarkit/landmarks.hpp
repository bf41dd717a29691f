#pragma once

#include <array>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "avatarkit/image.hpp"

namespace avatarkit {

struct Point {
    double x = 0.0;
    double y = 0.0;
};

/// Five named keypoints in normalized [0,1]^2 coordinates, y growing downward:
/// the usual eyes / nose tip / mouth corners convention.
struct LandmarkSet {
    Point left_eye;
    Point right_eye;
    Point nose_tip;
    Point mouth_left;
    Point mouth_right;

    std::array<Point, 5> points() const { return {left_eye, right_eye, nose_tip, mouth_left, mouth_right}; }

    static const std::array<const char*, 5>& point_names() {
        static const std::array<const char*, 5> names = {"left_eye", "right_eye", "nose_tip",
                                                         "mouth_left", "mouth_right"};
        return names;
    }

    void validate() const {
        for (const Point& p : points()) {
            if (!(p.x >= 0.0 && p.x <= 1.0 && p.y >= 0.0 && p.y <= 1.0)) {
                throw std::invalid_argument("LandmarkSet: coordinates must lie in [0,1]^2");
            }
        }
        const double eye_y = std::max(left_eye.y, right_eye.y);
        const double mouth_y = std::min(mouth_left.y, mouth_right.y);
        if (!(eye_y < nose_tip.y && nose_tip.y < mouth_y)) {
            throw std::invalid_argument("LandmarkSet: requires eyes above nose above mouth");
        }
        if (!(left_eye.x < right_eye.x)) {
            throw std::invalid_argument("LandmarkSet: left eye must lie left of right eye");
        }
    }
};

/// Frontal reference layout used throughout the default template pool.
inline LandmarkSet canonical_landmarks() {
    LandmarkSet lm;
    lm.left_eye = {0.35, 0.40};
    lm.right_eye = {0.65, 0.40};
    lm.nose_tip = {0.50, 0.55};
    lm.mouth_left = {0.38, 0.70};
    lm.mouth_right = {0.62, 0.70};
    return lm;
}

/// Canonical layout scaled about (0.5, 0.55).
inline LandmarkSet spread_landmarks(double spread) {
    LandmarkSet base = canonical_landmarks();
    LandmarkSet out;
    auto move = [&](Point p) { return Point{0.5 + (p.x - 0.5) * spread, 0.55 + (p.y - 0.55) * spread}; };
    out.left_eye = move(base.left_eye);
    out.right_eye = move(base.right_eye);
    out.nose_tip = move(base.nose_tip);
    out.mouth_left = move(base.mouth_left);
    out.mouth_right = move(base.mouth_right);
    out.validate();
    return out;
}

/// Deterministic face-like rendering: an anti-aliased oval around the keypoint
/// bounding region plus a Gaussian blob (std 1 px) at each keypoint. Values in
/// [0,1], background exactly 0; every contribution is truncated at 3 units of
/// its own width so the support stays local.
inline Image rasterize(const LandmarkSet& lm, int width, int height) {
    if (width < 16 || height < 16) {
        throw std::invalid_argument("rasterize: width and height must be >= 16");
    }
    lm.validate();
    const auto pts = lm.points();
    const double eye_dist = std::hypot(lm.right_eye.x - lm.left_eye.x, lm.right_eye.y - lm.left_eye.y);
    if (eye_dist < 1e-9) throw std::invalid_argument("rasterize: degenerate landmark set (coincident eyes)");

    std::array<double, 5> px, py;
    double min_x = 1e300, max_x = -1e300, min_y = 1e300, max_y = -1e300;
    for (size_t i = 0; i < pts.size(); ++i) {
        px[i] = pts[i].x * (width - 1);
        py[i] = pts[i].y * (height - 1);
        min_x = std::min(min_x, px[i]);
        max_x = std::max(max_x, px[i]);
        min_y = std::min(min_y, py[i]);
        max_y = std::max(max_y, py[i]);
    }

    const double cx = 0.5 * (min_x + max_x);
    const double cy = 0.5 * (min_y + max_y);
    const double semi_a = 0.5 * (max_x - min_x) * 1.55 + 1.0;
    const double semi_b = 0.5 * (max_y - min_y) * 1.45 + 1.0;

    constexpr double ring_amp = 0.6;
    constexpr double ring_aa = 0.7;   // anti-aliasing width of the oval outline
    constexpr double blob_std = 1.0;
    constexpr double cutoff = 3.0;

    Image img(width, height, 0.0);
    for (int y = 0; y < height; ++y) {
        for (int x = 0; x < width; ++x) {
            double v = 0.0;
            const double nx = (x - cx) / semi_a;
            const double ny = (y - cy) / semi_b;
            const double ring_dist = std::abs(std::sqrt(nx * nx + ny * ny) - 1.0) * std::min(semi_a, semi_b);
            if (ring_dist < cutoff * ring_aa) {
                v += ring_amp * std::exp(-0.5 * (ring_dist / ring_aa) * (ring_dist / ring_aa));
            }
            for (size_t i = 0; i < pts.size(); ++i) {
                const double d2 = (x - px[i]) * (x - px[i]) + (y - py[i]) * (y - py[i]);
                if (d2 < cutoff * cutoff * blob_std * blob_std) {
                    v += std::exp(-0.5 * d2 / (blob_std * blob_std));
                }
            }
            img.at(x, y) = std::min(1.0, v);
        }
    }
    return img;
}

struct LandmarkTemplate {
    std::string id;
    LandmarkSet keypoints;
    Image raster;
    std::vector<std::string> tags;
};

/// Pool of landmark templates an injection target is retrieved from.
struct LandmarkMemory {
    std::vector<LandmarkTemplate> templates;

    void validate() const {
        if (templates.empty()) throw std::invalid_argument("LandmarkMemory: must not be empty");
        for (size_t i = 0; i < templates.size(); ++i) {
            templates[i].keypoints.validate();
            for (size_t j = i + 1; j < templates.size(); ++j) {
                if (templates[i].id == templates[j].id) {
                    throw std::invalid_argument("LandmarkMemory: duplicate template id '" + templates[i].id + "'");
                }
            }
        }
    }

    /// "auto" resolves to the first template. Unknown ids list what exists.
    const LandmarkTemplate& by_id(const std::string& id) const {
        if (templates.empty()) throw std::invalid_argument("LandmarkMemory: must not be empty");
        if (id == "auto") return templates.front();
        for (const auto& t : templates) {
            if (t.id == id) return t;
        }
        std::string available;
        for (const auto& t : templates) {
            if (!available.empty()) available += ", ";
            available += t.id;
        }
        throw std::out_of_range("unknown landmark template '" + id + "' (available: " + available + ")");
    }

    static LandmarkMemory builtin(int width = 32, int height = 32) {
        LandmarkMemory mem;
        auto add = [&](std::string id, const LandmarkSet& lm, std::vector<std::string> tags) {
            mem.templates.push_back({std::move(id), lm, rasterize(lm, width, height), std::move(tags)});
        };
        add("canonical", canonical_landmarks(), {"frontal", "neutral"});
        add("wide", spread_landmarks(1.15), {"frontal", "broad"});
        add("compact", spread_landmarks(0.88), {"frontal", "narrow"});
        mem.validate();
        return mem;
    }

    /// Loads every *.csv in a directory. Rows are `name,x,y` using the five
    /// canonical point names; lines starting with `tag,` add a tag; the file
    /// stem becomes the id. Rasters are regenerated at the requested size.
    static LandmarkMemory load_dir(const std::filesystem::path& dir, int width = 32, int height = 32) {
        namespace fs = std::filesystem;
        if (!fs::is_directory(dir)) {
            throw std::runtime_error("LandmarkMemory::load_dir: not a directory: " + dir.string());
        }
        std::vector<fs::path> files;
        for (const auto& entry : fs::directory_iterator(dir)) {
            if (entry.path().extension() == ".csv") files.push_back(entry.path());
        }
        std::sort(files.begin(), files.end());
        LandmarkMemory mem;
        for (const auto& file : files) {
            std::ifstream in(file);
            if (!in) throw std::runtime_error("LandmarkMemory::load_dir: cannot open " + file.string());
            LandmarkTemplate tpl;
            tpl.id = file.stem().string();
            std::array<bool, 5> seen{};
            std::string line;
            while (std::getline(in, line)) {
                if (line.empty() || line[0] == '#') continue;
                std::istringstream row(line);
                std::string name, xs, ys;
                if (!std::getline(row, name, ',')) continue;
                if (name == "tag") {
                    std::string tag;
                    std::getline(row, tag);
                    tpl.tags.push_back(tag);
                    continue;
                }
                if (!std::getline(row, xs, ',') || !std::getline(row, ys)) {
                    throw std::runtime_error("LandmarkMemory::load_dir: malformed row '" + line + "' in " +
                                             file.string());
                }
                Point p{std::stod(xs), std::stod(ys)};
                const auto& names = LandmarkSet::point_names();
                bool matched = false;
                for (size_t i = 0; i < names.size(); ++i) {
                    if (name == names[i]) {
                        std::array<Point*, 5> slots = {&tpl.keypoints.left_eye, &tpl.keypoints.right_eye,
                                                       &tpl.keypoints.nose_tip, &tpl.keypoints.mouth_left,
                                                       &tpl.keypoints.mouth_right};
                        *slots[i] = p;
                        seen[i] = true;
                        matched = true;
                        break;
                    }
                }
                if (!matched) {
                    throw std::runtime_error("LandmarkMemory::load_dir: unknown point '" + name + "' in " +
                                             file.string());
                }
            }
            for (size_t i = 0; i < seen.size(); ++i) {
                if (!seen[i]) {
                    throw std::runtime_error("LandmarkMemory::load_dir: missing point '" +
                                             std::string(LandmarkSet::point_names()[i]) + "' in " + file.string());
                }
            }
            tpl.raster = rasterize(tpl.keypoints, width, height);
            mem.templates.push_back(std::move(tpl));
        }
        mem.validate();
        return mem;
    }
};

}  // namespace avatarkit
