#pragma once

#include <array>
#include <bit>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "tabsynth/mlp.hpp"

namespace tabsynth {

// Versioned parameter container: text manifest followed by a little-endian
// float32 blob holding every tensor in declaration order (w row-major, then b).

struct ParamFormatError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ParamVersionError : ParamFormatError {
    using ParamFormatError::ParamFormatError;
};

struct ParamFile {
    std::vector<std::pair<std::string, std::string>> meta;
    ParamSet params;
};

namespace detail {

inline constexpr const char* kParamMagic = "tabsynth-params";
inline constexpr const char* kParamVersion = "v1";

inline void append_f32_le(std::string& out, double x) {
    const auto bits = std::bit_cast<std::uint32_t>(static_cast<float>(x));
    out.push_back(static_cast<char>(bits & 0xFF));
    out.push_back(static_cast<char>((bits >> 8) & 0xFF));
    out.push_back(static_cast<char>((bits >> 16) & 0xFF));
    out.push_back(static_cast<char>((bits >> 24) & 0xFF));
}

inline double read_f32_le(const unsigned char* p) {
    std::uint32_t bits = static_cast<std::uint32_t>(p[0]) |
                         (static_cast<std::uint32_t>(p[1]) << 8) |
                         (static_cast<std::uint32_t>(p[2]) << 16) |
                         (static_cast<std::uint32_t>(p[3]) << 24);
    return static_cast<double>(std::bit_cast<float>(bits));
}

}  // namespace detail

inline void save_params(const std::string& path, const ParamSet& params,
                        const std::vector<std::pair<std::string, std::string>>& meta = {}) {
    std::string text;
    text += detail::kParamMagic;
    text += ' ';
    text += detail::kParamVersion;
    text += '\n';
    for (const auto& [key, value] : meta) {
        if (key.empty() || key.find_first_of(" \n") != std::string::npos)
            throw std::invalid_argument("save_params: bad meta key '" + key + "'");
        if (value.find('\n') != std::string::npos)
            throw std::invalid_argument("save_params: meta value must be single-line");
        text += "meta " + key + " " + value + "\n";
    }
    std::size_t total = 0;
    for (const auto& d : params) {
        // bias length is explicit: batchnorm tensors keep gamma in one row
        // with a full-width beta
        text += "tensor " + std::to_string(d.w.rows) + " " + std::to_string(d.w.cols) + " " +
                std::to_string(d.b.size()) + "\n";
        total += d.w.data.size() + d.b.size();
    }
    text += "blob f32 " + std::to_string(total) + "\n";

    std::string blob;
    blob.reserve(total * 4);
    for (const auto& d : params) {
        for (double x : d.w.data) detail::append_f32_le(blob, x);
        for (double x : d.b) detail::append_f32_le(blob, x);
    }

    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("save_params: cannot open " + path);
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    out.write(blob.data(), static_cast<std::streamsize>(blob.size()));
    if (!out) throw std::runtime_error("save_params: write failed for " + path);
}

inline ParamFile load_params(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("load_params: cannot open " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    const std::string raw = buf.str();

    ParamFile out;
    std::vector<std::array<std::size_t, 3>> shapes;
    std::size_t declared = 0;
    std::size_t pos = 0;
    bool saw_blob = false;
    bool first = true;
    while (pos < raw.size()) {
        const std::size_t eol = raw.find('\n', pos);
        if (eol == std::string::npos)
            throw ParamFormatError("load_params: " + path + ": truncated manifest");
        const std::string line = raw.substr(pos, eol - pos);
        pos = eol + 1;
        std::istringstream ls(line);
        std::string word;
        ls >> word;
        if (first) {
            if (word != detail::kParamMagic)
                throw ParamFormatError("load_params: " + path + ": not a params file");
            std::string ver;
            ls >> ver;
            if (ver != detail::kParamVersion)
                throw ParamVersionError("load_params: " + path + ": incompatible format version '" +
                                        ver + "', expected " + detail::kParamVersion);
            first = false;
            continue;
        }
        if (word == "meta") {
            std::string key;
            ls >> key;
            std::string value;
            std::getline(ls, value);
            if (!value.empty() && value.front() == ' ') value.erase(0, 1);
            if (key.empty())
                throw ParamFormatError("load_params: " + path + ": meta line without key");
            out.meta.emplace_back(key, value);
        } else if (word == "tensor") {
            std::size_t r = 0, c = 0, blen = 0;
            if (!(ls >> r >> c >> blen) || r == 0 || c == 0)
                throw ParamFormatError("load_params: " + path + ": bad tensor line '" + line + "'");
            shapes.push_back({r, c, blen});
        } else if (word == "blob") {
            std::string kind;
            if (!(ls >> kind >> declared) || kind != "f32")
                throw ParamFormatError("load_params: " + path + ": bad blob line '" + line + "'");
            saw_blob = true;
            break;
        } else {
            throw ParamFormatError("load_params: " + path + ": unknown manifest line '" + line + "'");
        }
    }
    if (first || !saw_blob)
        throw ParamFormatError("load_params: " + path + ": missing blob declaration");

    std::size_t total = 0;
    for (const auto& [r, c, blen] : shapes) total += r * c + blen;
    if (declared != total)
        throw ParamFormatError("load_params: " + path + ": blob count " + std::to_string(declared) +
                               " does not match declared tensors (" + std::to_string(total) + ")");
    if (raw.size() - pos != total * 4)
        throw ParamFormatError("load_params: " + path + ": blob length mismatch, expected " +
                               std::to_string(total * 4) + " bytes, got " +
                               std::to_string(raw.size() - pos));

    const auto* bytes = reinterpret_cast<const unsigned char*>(raw.data()) + pos;
    for (const auto& [r, c, blen] : shapes) {
        Dense d;
        d.w = Matrix(r, c);
        d.b.assign(blen, 0.0);
        for (std::size_t i = 0; i < r * c; ++i, bytes += 4) d.w.data[i] = detail::read_f32_le(bytes);
        for (std::size_t i = 0; i < blen; ++i, bytes += 4) d.b[i] = detail::read_f32_le(bytes);
        out.params.push_back(std::move(d));
    }
    return out;
}

// Snaps every parameter to its float32 value so in-memory inference matches a
// saved model bit for bit.
inline void quantize_params_f32(ParamSet& params) {
    for_each_param(params, [](double& x) { x = static_cast<double>(static_cast<float>(x)); });
}

}  // namespace tabsynth
