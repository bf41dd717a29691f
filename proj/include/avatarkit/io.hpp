#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "avatarkit/image.hpp"
#include "avatarkit/schedule.hpp"

namespace avatarkit {

struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

inline std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open for reading: " + path.string());
    std::ostringstream out;
    out << in.rdbuf();
    return out.str();
}

inline void write_file(const std::filesystem::path& path, std::string_view content) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open for writing: " + path.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw IoError("write failed: " + path.string());
}

inline std::string format_double(double v, const char* fmt = "%.9g") {
    char buf[64];
    std::snprintf(buf, sizeof(buf), fmt, v);
    return buf;
}

// ---------------------------------------------------------------------------
// PGM: binary 8-bit, values affinely mapped from [min,max] to [0,255]. The
// header comment records the map so decoding can invert it.
// ---------------------------------------------------------------------------

inline std::string pgm_encode(const Image& img) {
    double lo = img.min_value();
    double hi = img.max_value();
    if (!(hi > lo)) hi = lo + 1.0;  // constant image: map everything to 0
    std::string out = "P5\n# affine min=" + format_double(lo) + " max=" + format_double(hi) + "\n" +
                      std::to_string(img.width()) + " " + std::to_string(img.height()) + "\n255\n";
    out.reserve(out.size() + img.size());
    for (double v : img.values()) {
        double u = (v - lo) / (hi - lo) * 255.0;
        long b = std::lround(std::min(255.0, std::max(0.0, u)));
        out.push_back(static_cast<char>(static_cast<unsigned char>(b)));
    }
    return out;
}

inline Image pgm_decode(const std::string& bytes) {
    std::istringstream in(bytes);
    std::string magic;
    in >> magic;
    if (magic != "P5") throw IoError("pgm_decode: not a binary PGM (P5)");
    in.ignore();

    double lo = 0.0, hi = 255.0;
    // header comments; the affine one carries the value range
    while (in.peek() == '#') {
        std::string comment;
        std::getline(in, comment);
        size_t mn = comment.find("min=");
        size_t mx = comment.find("max=");
        if (mn != std::string::npos && mx != std::string::npos) {
            lo = std::stod(comment.substr(mn + 4));
            hi = std::stod(comment.substr(mx + 4));
        }
    }
    int w = 0, h = 0, maxval = 0;
    in >> w >> h >> maxval;
    if (!in || w < 1 || h < 1 || maxval != 255) throw IoError("pgm_decode: malformed header");
    in.ignore();

    Image img(w, h);
    std::streampos pos = in.tellg();
    size_t offset = static_cast<size_t>(pos);
    if (bytes.size() - offset < img.size()) throw IoError("pgm_decode: truncated pixel data");
    for (size_t i = 0; i < img.size(); ++i) {
        unsigned char b = static_cast<unsigned char>(bytes[offset + i]);
        img.values()[i] = lo + (hi - lo) * (b / 255.0);
    }
    return img;
}

// ---------------------------------------------------------------------------
// CSV image format: `width,height` header line, then one row of 9-significant-
// digit values per image row.
// ---------------------------------------------------------------------------

inline std::string image_csv_encode(const Image& img) {
    std::string out = std::to_string(img.width()) + "," + std::to_string(img.height()) + "\n";
    for (int y = 0; y < img.height(); ++y) {
        for (int x = 0; x < img.width(); ++x) {
            if (x) out += ",";
            out += format_double(img.at(x, y));
        }
        out += "\n";
    }
    return out;
}

inline Image image_csv_decode(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line)) throw IoError("image_csv_decode: empty input");
    std::istringstream header(line);
    int w = 0, h = 0;
    char sep = 0;
    header >> w >> sep >> h;
    if (w < 1 || h < 1 || sep != ',') throw IoError("image_csv_decode: malformed size header");
    Image img(w, h);
    for (int y = 0; y < h; ++y) {
        if (!std::getline(in, line)) throw IoError("image_csv_decode: missing row " + std::to_string(y));
        std::istringstream row(line);
        std::string cell;
        for (int x = 0; x < w; ++x) {
            if (!std::getline(row, cell, ',')) {
                throw IoError("image_csv_decode: short row " + std::to_string(y));
            }
            img.at(x, y) = std::stod(cell);
        }
    }
    return img;
}

/// Loads an image by extension: .pgm or .csv.
inline Image load_image(const std::filesystem::path& path) {
    std::string bytes = read_file(path);
    if (path.extension() == ".pgm") return pgm_decode(bytes);
    if (path.extension() == ".csv") return image_csv_decode(bytes);
    throw IoError("load_image: unsupported extension on " + path.string() + " (expected .pgm or .csv)");
}

// ---------------------------------------------------------------------------
// Schedule CSV: t,alpha,sigma with full-precision values.
// ---------------------------------------------------------------------------

inline std::string schedule_csv_encode(const NoiseSchedule& sched) {
    std::string out = "t,alpha,sigma\n";
    for (int t = 0; t <= sched.num_steps; ++t) {
        out += std::to_string(t) + "," + format_double(sched.alpha[t], "%.17g") + "," +
               format_double(sched.sigma[t], "%.17g") + "\n";
    }
    return out;
}

inline NoiseSchedule schedule_csv_decode(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line) || line != "t,alpha,sigma") {
        throw IoError("schedule_csv_decode: missing t,alpha,sigma header");
    }
    NoiseSchedule sched;
    while (std::getline(in, line)) {
        if (line.empty() || line == "\r") continue;
        std::istringstream row(line);
        std::string ts, as, ss;
        if (!std::getline(row, ts, ',') || !std::getline(row, as, ',') || !std::getline(row, ss)) {
            throw IoError("schedule_csv_decode: malformed row '" + line + "'");
        }
        sched.alpha.push_back(std::stod(as));
        sched.sigma.push_back(std::stod(ss));
    }
    sched.num_steps = static_cast<int>(sched.alpha.size()) - 1;
    sched.validate();
    return sched;
}

// ---------------------------------------------------------------------------
// WAV: 16-bit mono PCM, little-endian RIFF.
// ---------------------------------------------------------------------------

inline std::string wav_encode_16bit_mono(const std::vector<double>& samples, int sample_rate) {
    auto le16 = [](std::string& s, uint16_t v) {
        s.push_back(static_cast<char>(v & 0xFF));
        s.push_back(static_cast<char>((v >> 8) & 0xFF));
    };
    auto le32 = [](std::string& s, uint32_t v) {
        for (int i = 0; i < 4; ++i) s.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
    };
    const uint32_t data_bytes = static_cast<uint32_t>(samples.size() * 2);
    std::string out;
    out.reserve(44 + data_bytes);
    out += "RIFF";
    le32(out, 36 + data_bytes);
    out += "WAVEfmt ";
    le32(out, 16);
    le16(out, 1);  // PCM
    le16(out, 1);  // mono
    le32(out, static_cast<uint32_t>(sample_rate));
    le32(out, static_cast<uint32_t>(sample_rate * 2));
    le16(out, 2);   // block align
    le16(out, 16);  // bits per sample
    out += "data";
    le32(out, data_bytes);
    for (double v : samples) {
        double c = std::min(1.0, std::max(-1.0, v));
        int16_t q = static_cast<int16_t>(std::lround(c * 32767.0));
        le16(out, static_cast<uint16_t>(q));
    }
    return out;
}

}  // namespace avatarkit
