#pragma once

#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace avatarkit {

// Line-oriented `key = value` files with `[section]` headers and full-line
// `#` comments. Registries, persona specs and suite configs all use it.

inline std::string trim(std::string_view s) {
    size_t b = s.find_first_not_of(" \t\r\n");
    if (b == std::string_view::npos) return "";
    size_t e = s.find_last_not_of(" \t\r\n");
    return std::string(s.substr(b, e - b + 1));
}

inline std::vector<std::string> split_list(std::string_view s, char sep = ',') {
    std::vector<std::string> out;
    std::string cur;
    for (char c : s) {
        if (c == sep) {
            std::string item = trim(cur);
            if (!item.empty()) out.push_back(item);
            cur.clear();
        } else {
            cur += c;
        }
    }
    std::string item = trim(cur);
    if (!item.empty()) out.push_back(item);
    return out;
}

struct KvSection {
    std::string name;
    std::vector<std::pair<std::string, std::string>> entries;

    const std::string* find(std::string_view key) const {
        for (const auto& [k, v] : entries) {
            if (k == key) return &v;
        }
        return nullptr;
    }

    std::string get(std::string_view key) const {
        const std::string* v = find(key);
        if (!v) {
            throw std::invalid_argument("config section [" + name + "] is missing key '" +
                                        std::string(key) + "'");
        }
        return *v;
    }

    std::string get_or(std::string_view key, std::string fallback) const {
        const std::string* v = find(key);
        return v ? *v : std::move(fallback);
    }

    double get_double(std::string_view key) const { return std::stod(get(key)); }

    double get_double_or(std::string_view key, double fallback) const {
        const std::string* v = find(key);
        return v ? std::stod(*v) : fallback;
    }

    long long get_int_or(std::string_view key, long long fallback) const {
        const std::string* v = find(key);
        return v ? std::stoll(*v) : fallback;
    }
};

struct KvDoc {
    std::vector<KvSection> sections;

    static KvDoc parse(std::string_view text) {
        KvDoc doc;
        doc.sections.push_back({"", {}});  // implicit root for sectionless keys
        std::istringstream in{std::string(text)};
        std::string line;
        int lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            std::string t = trim(line);
            if (t.empty() || t[0] == '#') continue;
            if (t.front() == '[') {
                if (t.back() != ']') {
                    throw std::invalid_argument("config line " + std::to_string(lineno) +
                                                ": unterminated section header");
                }
                doc.sections.push_back({trim(t.substr(1, t.size() - 2)), {}});
                continue;
            }
            size_t eq = t.find('=');
            if (eq == std::string::npos) {
                throw std::invalid_argument("config line " + std::to_string(lineno) +
                                            ": expected 'key = value', got '" + t + "'");
            }
            doc.sections.back().entries.emplace_back(trim(t.substr(0, eq)), trim(t.substr(eq + 1)));
        }
        if (doc.sections.front().name.empty() && doc.sections.front().entries.empty()) {
            doc.sections.erase(doc.sections.begin());
        }
        return doc;
    }

    std::string to_string() const {
        std::string out;
        for (const auto& sec : sections) {
            if (!sec.name.empty()) {
                if (!out.empty()) out += "\n";
                out += "[" + sec.name + "]\n";
            }
            for (const auto& [k, v] : sec.entries) out += k + " = " + v + "\n";
        }
        return out;
    }

    const KvSection* find(std::string_view name) const {
        for (const auto& sec : sections) {
            if (sec.name == name) return &sec;
        }
        return nullptr;
    }

    std::vector<const KvSection*> all(std::string_view name) const {
        std::vector<const KvSection*> out;
        for (const auto& sec : sections) {
            if (sec.name == name) out.push_back(&sec);
        }
        return out;
    }
};

}  // namespace avatarkit
