// SPDX-FileCopyrightText: 2026 The mdrnet Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef MDRNET_BINVOX_HPP
#define MDRNET_BINVOX_HPP

#include <charconv>
#include <cstdint>
#include <fstream>
#include <iterator>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "mdrnet/error.hpp"
#include "mdrnet/voxel_grid.hpp"

namespace mdrnet {

using Bytes = std::vector<std::uint8_t>;

namespace detail {

inline std::string_view next_line(std::span<const std::uint8_t> bytes, std::size_t& pos) {
    const std::size_t start = pos;
    while (pos < bytes.size() && bytes[pos] != '\n') {
        ++pos;
    }
    if (pos == bytes.size()) {
        throw FormatError("binvox: unexpected end of header");
    }
    std::string_view line(reinterpret_cast<const char*>(bytes.data()) + start, pos - start);
    ++pos;
    if (!line.empty() && line.back() == '\r') {
        line.remove_suffix(1);
    }
    return line;
}

inline std::size_t parse_dim(std::string_view token) {
    std::size_t value = 0;
    const auto* end = token.data() + token.size();
    const auto [ptr, ec] = std::from_chars(token.data(), end, value);
    if (ec != std::errc{} || ptr != end || value == 0) {
        throw FormatError("binvox: bad dimension '" + std::string(token) + "'");
    }
    return value;
}

} // namespace detail

// Decodes a binvox stream. translate/scale lines are accepted and ignored.
inline VoxelGrid load_binvox(std::span<const std::uint8_t> bytes) {
    std::size_t pos = 0;
    if (detail::next_line(bytes, pos) != "#binvox 1") {
        throw FormatError("binvox: header must start with '#binvox 1'");
    }

    GridDims dims{};
    bool have_dims = false;
    for (;;) {
        const std::string_view line = detail::next_line(bytes, pos);
        if (line == "data") {
            break;
        }
        std::istringstream fields{std::string(line)};
        std::string key;
        fields >> key;
        if (key == "dim") {
            std::string a, b, c, extra;
            if (!(fields >> a >> b >> c) || (fields >> extra)) {
                throw FormatError("binvox: malformed dim line");
            }
            dims = {detail::parse_dim(a), detail::parse_dim(b), detail::parse_dim(c)};
            have_dims = true;
        } else if (key == "translate" || key == "scale") {
            continue;
        } else {
            throw FormatError("binvox: unrecognized header line '" + std::string(line) + "'");
        }
    }
    if (!have_dims) {
        throw FormatError("binvox: missing dim line");
    }

    const std::size_t total = dims.cells();
    std::vector<std::uint8_t> cells;
    cells.reserve(total);
    while (pos < bytes.size()) {
        if (pos + 1 >= bytes.size()) {
            throw FormatError("binvox: truncated run-length pair");
        }
        const std::uint8_t value = bytes[pos];
        const std::uint8_t count = bytes[pos + 1];
        pos += 2;
        if (value > 1) {
            throw FormatError("binvox: run value " + std::to_string(value) + " is not 0 or 1");
        }
        if (count == 0) {
            throw FormatError("binvox: zero-length run");
        }
        if (cells.size() + count > total) {
            throw FormatError("binvox: runs decode to more than " + std::to_string(total) + " cells");
        }
        cells.insert(cells.end(), count, value);
    }
    if (cells.size() != total) {
        throw FormatError("binvox: runs decode to " + std::to_string(cells.size()) + " cells, expected " +
                          std::to_string(total));
    }
    return VoxelGrid(dims, std::move(cells));
}

// Canonical encoding: fixed header, maximal runs capped at 255.
inline Bytes save_binvox(const VoxelGrid& grid) {
    const auto& d = grid.dims();
    const std::string header = "#binvox 1\ndim " + std::to_string(d.x) + " " + std::to_string(d.y) + " " +
                               std::to_string(d.z) + "\ntranslate 0 0 0\nscale 1\ndata\n";
    Bytes out(header.begin(), header.end());

    const auto cells = grid.cells();
    std::size_t i = 0;
    while (i < cells.size()) {
        const std::uint8_t value = cells[i];
        std::size_t run = 1;
        while (i + run < cells.size() && cells[i + run] == value && run < 255) {
            ++run;
        }
        out.push_back(value);
        out.push_back(static_cast<std::uint8_t>(run));
        i += run;
    }
    return out;
}

inline VoxelGrid read_binvox_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError("cannot open " + path);
    }
    Bytes bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return load_binvox(bytes);
}

} // namespace mdrnet

#endif // MDRNET_BINVOX_HPP
