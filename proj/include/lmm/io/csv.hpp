#pragma once

// CSV codecs. Files use a single header row, comma separators, LF line
// endings and shortest round-trip decimals.

#include <cstddef>
#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <sstream>
#include <string>
#include <vector>

#include "lmm/dynamics.hpp"
#include "lmm/io/format.hpp"
#include "lmm/kv_fit.hpp"
#include "lmm/zfm.hpp"

namespace lmm::io {

/// Column-major table with named columns.
struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<double>> columns;

    std::size_t rows() const { return columns.empty() ? 0 : columns.front().size(); }
};

inline std::string to_csv(const Table& table) {
    std::string out;
    for (std::size_t c = 0; c < table.header.size(); ++c) {
        if (c) out += ',';
        out += table.header[c];
    }
    out += '\n';
    const auto n = table.rows();
    for (std::size_t r = 0; r < n; ++r) {
        for (std::size_t c = 0; c < table.columns.size(); ++c) {
            if (c) out += ',';
            out += format_double(table.columns[c][r]);
        }
        out += '\n';
    }
    return out;
}

inline void write_text(const std::filesystem::path& path, const std::string& text) {
    if (path.has_parent_path()) {
        std::error_code ec;
        std::filesystem::create_directories(path.parent_path(), ec);
    }
    std::ofstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot open '" + path.string() + "' for writing");
    f.write(text.data(), static_cast<std::streamsize>(text.size()));
    if (!f) throw IoError("write failed for '" + path.string() + "'");
}

inline std::string read_text(const std::filesystem::path& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot open '" + path.string() + "'");
    std::ostringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

inline void write_csv(const std::filesystem::path& path, const Table& table) {
    write_text(path, to_csv(table));
}

inline Table parse_csv(const std::string& text, const std::vector<std::string>& expected = {}) {
    Table t;
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line)) throw IoError("empty CSV");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    {
        std::istringstream hs(line);
        std::string cell;
        while (std::getline(hs, cell, ',')) t.header.push_back(cell);
    }
    if (!expected.empty() && t.header != expected) throw IoError("unexpected CSV header '" + line + "'");
    t.columns.resize(t.header.size());
    while (std::getline(in, line)) {
        if (line.empty() || line == "\r") continue;
        std::size_t c = 0, pos = 0;
        while (true) {
            const auto comma = line.find(',', pos);
            const auto cell = std::string_view(line).substr(pos, comma == std::string::npos ? std::string::npos : comma - pos);
            if (c >= t.columns.size()) throw IoError("too many CSV fields");
            t.columns[c++].push_back(parse_double(cell));
            if (comma == std::string::npos) break;
            pos = comma + 1;
        }
        if (c != t.columns.size()) throw IoError("too few CSV fields");
    }
    return t;
}

inline const std::vector<std::string>& motion_header() {
    static const std::vector<std::string> h{"t_s", "v_mps", "x_m", "a_mps2", "F_N"};
    return h;
}

inline Table motion_table(const MotionTrace& m) {
    return {motion_header(), {m.t, m.v, m.x, m.a, m.F}};
}

inline void write_motion_csv(const std::filesystem::path& path, const MotionTrace& m) {
    write_csv(path, motion_table(m));
}

inline MotionTrace parse_motion_csv(const std::string& text) {
    auto t = parse_csv(text, motion_header());
    MotionTrace m;
    m.t = std::move(t.columns[0]);
    m.v = std::move(t.columns[1]);
    m.x = std::move(t.columns[2]);
    m.a = std::move(t.columns[3]);
    m.F = std::move(t.columns[4]);
    return m;
}

inline MotionTrace read_motion_csv(const std::filesystem::path& path) {
    return parse_motion_csv(read_text(path));
}

inline void write_frequency_csv(const std::filesystem::path& path, const FrequencySeries& f) {
    write_csv(path, {{"t_mid_s", "f_hz"}, {f.t_mid, f.f}});
}

inline FrequencySeries read_frequency_csv(const std::filesystem::path& path, int periods) {
    auto t = parse_csv(read_text(path), {"t_mid_s", "f_hz"});
    FrequencySeries f;
    f.t_mid = std::move(t.columns[0]);
    f.f = std::move(t.columns[1]);
    f.window_periods = periods;
    f.window_stride = periods;
    return f;
}

inline void write_residual_csv(const std::filesystem::path& path, const RunDiagnostics& d) {
    Table t{{"t_s", "sigma_mea_pa", "sigma_cal_pa", "residual_pa"}, std::vector<std::vector<double>>(4)};
    for (const auto& r : d.rows) {
        t.columns[0].push_back(r.t);
        t.columns[1].push_back(r.sigma_mea);
        t.columns[2].push_back(r.sigma_cal);
        t.columns[3].push_back(r.residual);
    }
    write_csv(path, t);
}

} // namespace lmm::io
