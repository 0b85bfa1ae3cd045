#pragma once

// CSV round-trip for sampled paths: header "t,X,sigma", one row per grid
// point, numbers in shortest round-trip decimal form so a write/read cycle
// is lossless.

#include <charconv>
#include <fstream>
#include <sstream>
#include <string>

#include "bss/common.hpp"
#include "bss/simulation.hpp"

namespace bss {

inline std::string shortest_double(double d) {
    char buf[32];
    auto [p, ec] = std::to_chars(buf, buf + sizeof buf, d);
    return std::string(buf, p);
}

inline std::string path_to_csv(const PathSample& path) {
    std::string out = "t,X,sigma\n";
    for (std::size_t i = 0; i < path.values.size(); ++i) {
        out += shortest_double(double(i) * path.grid.delta_n);
        out += ',';
        out += shortest_double(path.values[i]);
        out += ',';
        if (path.sigma_values && i < path.sigma_values->size())
            out += shortest_double((*path.sigma_values)[i]);
        out += '\n';
    }
    return out;
}

inline void save_path_csv(const PathSample& path, const std::string& file) {
    std::ofstream out(file, std::ios::binary);
    if (!out) throw ValidationError("cannot open '" + file + "' for writing");
    out << path_to_csv(path);
}

// Reads the X (and optional sigma) columns; grid metadata comes from the
// caller since CSV carries only the sampled times.
inline PathSample path_from_csv_text(const std::string& text, double delta_n) {
    if (!(delta_n > 0.0)) throw ValidationError("delta_n must be positive");
    PathSample out;
    out.grid.delta_n = delta_n;
    out.kind = PathKind::Bss;
    std::istringstream in(text);
    std::string line;
    bool header = true;
    bool any_sigma = false;
    std::vector<double> sigma;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (header) {
            header = false;
            if (line.find("t,") != 0 && line.find("t ,") != 0)
                throw ValidationError("path CSV must start with a 't,X,sigma' header row");
            continue;
        }
        const auto c1 = line.find(',');
        if (c1 == std::string::npos) throw ValidationError("path CSV row missing columns");
        auto c2 = line.find(',', c1 + 1);
        if (c2 == std::string::npos) c2 = line.size();
        double x = 0.0;
        const char* b = line.data() + c1 + 1;
        const char* e = line.data() + c2;
        auto [p, ec] = std::from_chars(b, e, x);
        if (ec != std::errc{} || p != e)
            throw ValidationError("path CSV has an unparsable X value: '" + line + "'");
        out.values.push_back(x);
        if (c2 < line.size()) {
            double s = 0.0;
            const char* sb = line.data() + c2 + 1;
            const char* se = line.data() + line.size();
            if (sb < se) {
                auto [sp, sec] = std::from_chars(sb, se, s);
                if (sec == std::errc{} && sp == se) {
                    sigma.push_back(s);
                    any_sigma = true;
                }
            }
        }
    }
    if (out.values.size() < 2) throw ValidationError("path CSV needs at least two rows");
    out.grid.horizon = double(out.values.size() - 1) * delta_n;
    if (any_sigma && sigma.size() == out.values.size()) out.sigma_values = std::move(sigma);
    return out;
}

inline PathSample load_path_csv(const std::string& file, double delta_n) {
    std::ifstream in(file, std::ios::binary);
    if (!in) throw ValidationError("cannot open path CSV '" + file + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return path_from_csv_text(ss.str(), delta_n);
}

} // namespace bss
