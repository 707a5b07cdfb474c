// SPDX-FileCopyrightText: 2026 The mdrnet Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef MDRNET_DESCRIPTOR_IO_HPP
#define MDRNET_DESCRIPTOR_IO_HPP

#include <charconv>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "mdrnet/error.hpp"

// Descriptor file: header "DDSD n=<count> dim=<dim>", then one line per
// shape "<id>\t<dim space-separated reals, 17 significant digits>".

namespace mdrnet {

struct DescriptorEntry {
    std::string id;
    std::vector<double> values;
};

inline std::string format_descriptor_file(const std::vector<DescriptorEntry>& entries) {
    const std::size_t dim = entries.empty() ? 0 : entries.front().values.size();
    std::string out = "DDSD n=" + std::to_string(entries.size()) + " dim=" + std::to_string(dim) + "\n";
    char buf[40];
    for (const auto& e : entries) {
        if (e.values.size() != dim) throw ShapeError("descriptor " + e.id + " has inconsistent dimension");
        out += e.id;
        out += '\t';
        for (std::size_t i = 0; i < e.values.size(); ++i) {
            if (i) out += ' ';
            std::snprintf(buf, sizeof buf, "%.17g", e.values[i]);
            out += buf;
        }
        out += '\n';
    }
    return out;
}

inline std::vector<DescriptorEntry> parse_descriptor_file(std::string_view text) {
    std::istringstream in{std::string(text)};
    std::string header;
    if (!std::getline(in, header)) throw FormatError("descriptor file: empty");
    std::size_t count = 0, dim = 0;
    {
        std::istringstream h(header);
        std::string magic, nfield, dfield;
        if (!(h >> magic >> nfield >> dfield) || magic != "DDSD" || nfield.rfind("n=", 0) != 0 ||
            dfield.rfind("dim=", 0) != 0) {
            throw FormatError("descriptor file: bad header");
        }
        try {
            count = std::stoul(nfield.substr(2));
            dim = std::stoul(dfield.substr(4));
        } catch (const std::exception&) {
            throw FormatError("descriptor file: bad header values");
        }
    }
    std::vector<DescriptorEntry> entries;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto tab = line.find('\t');
        if (tab == std::string::npos) throw FormatError("descriptor file: missing tab on line " + std::to_string(entries.size() + 2));
        DescriptorEntry e;
        e.id = line.substr(0, tab);
        const char* p = line.data() + tab + 1;
        const char* end = line.data() + line.size();
        while (p < end) {
            while (p < end && *p == ' ') ++p;
            if (p == end) break;
            double v = 0.0;
            const auto [next, ec] = std::from_chars(p, end, v);
            if (ec != std::errc{}) throw FormatError("descriptor file: bad number for " + e.id);
            e.values.push_back(v);
            p = next;
        }
        if (e.values.size() != dim) {
            throw ShapeError("descriptor " + e.id + " has " + std::to_string(e.values.size()) +
                             " values, header says " + std::to_string(dim));
        }
        entries.push_back(std::move(e));
    }
    if (entries.size() != count) throw FormatError("descriptor file: header count does not match line count");
    return entries;
}

} // namespace mdrnet

#endif // MDRNET_DESCRIPTOR_IO_HPP
