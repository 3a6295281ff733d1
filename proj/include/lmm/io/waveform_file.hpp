#pragma once

// Raw digitizer records: signed 8-bit bytes (16-bit little-endian words for
// converters wider than 8 bits) plus a JSON sidecar.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "lmm/io/csv.hpp"
#include "lmm/signal_synth.hpp"

namespace lmm::io {

inline std::filesystem::path sidecar_path(const std::filesystem::path& raw) {
    auto p = raw;
    p.replace_extension(".json");
    return p;
}

inline std::vector<std::uint8_t> encode_codes(const Waveform& w) {
    std::vector<std::uint8_t> bytes;
    if (w.adc_bits <= 8) {
        bytes.resize(w.codes.size());
        for (std::size_t i = 0; i < w.codes.size(); ++i)
            bytes[i] = static_cast<std::uint8_t>(static_cast<std::int8_t>(w.codes[i]));
    } else {
        bytes.resize(2 * w.codes.size());
        for (std::size_t i = 0; i < w.codes.size(); ++i) {
            const auto u = static_cast<std::uint16_t>(w.codes[i]);
            bytes[2 * i] = static_cast<std::uint8_t>(u & 0xff);
            bytes[2 * i + 1] = static_cast<std::uint8_t>(u >> 8);
        }
    }
    return bytes;
}

inline std::vector<std::int16_t> decode_codes(const std::vector<std::uint8_t>& bytes, int adc_bits) {
    std::vector<std::int16_t> codes;
    if (adc_bits <= 8) {
        codes.resize(bytes.size());
        for (std::size_t i = 0; i < bytes.size(); ++i)
            codes[i] = static_cast<std::int8_t>(bytes[i]);
    } else {
        if (bytes.size() % 2) throw IoError("16-bit raw file has odd length");
        codes.resize(bytes.size() / 2);
        for (std::size_t i = 0; i < codes.size(); ++i)
            codes[i] = static_cast<std::int16_t>(
                static_cast<std::uint16_t>(bytes[2 * i] | (bytes[2 * i + 1] << 8)));
    }
    return codes;
}

inline nlohmann::json sidecar_json(const Waveform& w, const std::string& config_hash) {
    nlohmann::json j;
    j["sample_rate"] = w.sample_rate;
    j["channel"] = to_string(w.channel);
    j["trigger_index"] = w.trigger_index;
    const auto seed = w.meta.find("seed");
    j["seed"] = seed == w.meta.end() ? std::uint64_t{0} : std::stoull(seed->second);
    j["config_hash"] = config_hash;
    j["adc_bits"] = w.adc_bits;
    j["sample_format"] = w.adc_bits <= 8 ? "int8" : "int16le";
    j["n_samples"] = w.codes.size();
    return j;
}

inline void write_waveform(const std::filesystem::path& raw, const Waveform& w,
                           const std::string& config_hash) {
    if (raw.has_parent_path()) {
        std::error_code ec;
        std::filesystem::create_directories(raw.parent_path(), ec);
    }
    const auto bytes = encode_codes(w);
    std::ofstream f(raw, std::ios::binary);
    if (!f) throw IoError("cannot open '" + raw.string() + "' for writing");
    f.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!f) throw IoError("write failed for '" + raw.string() + "'");
    write_text(sidecar_path(raw), sidecar_json(w, config_hash).dump(2) + "\n");
}

inline Waveform read_waveform(const std::filesystem::path& raw) {
    Waveform w;
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(read_text(sidecar_path(raw)));
        w.sample_rate = j.at("sample_rate").get<double>();
        w.channel = channel_from_string(j.at("channel").get<std::string>());
        w.trigger_index = j.at("trigger_index").get<std::size_t>();
        w.adc_bits = j.value("adc_bits", 8);
        w.meta["seed"] = std::to_string(j.value("seed", std::uint64_t{0}));
        w.meta["config_hash"] = j.value("config_hash", std::string{});
    } catch (const nlohmann::json::exception& e) {
        throw IoError(std::string("bad waveform sidecar: ") + e.what());
    }
    const auto text = read_text(raw);
    const std::vector<std::uint8_t> bytes(text.begin(), text.end());
    w.codes = decode_codes(bytes, w.adc_bits);
    if (!w.codes.empty() && w.trigger_index >= w.codes.size())
        throw IoError("trigger_index outside the record");
    return w;
}

} // namespace lmm::io
