// SPDX-FileCopyrightText: 2026 The mdrnet Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef MDRNET_MDR_HPP
#define MDRNET_MDR_HPP

#include <cmath>
#include <cstdint>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "mdrnet/error.hpp"
#include "mdrnet/voxel_grid.hpp"

namespace mdrnet {

// Slicing axes in sequence order.
enum class SliceAxis { z = 0, x = 1, y = 2 };

inline char axis_char(SliceAxis a) { return "zxy"[static_cast<int>(a)]; }

// Multilayer dense representation: 3k slices (k per axis, axes in z, x, y
// order). Each slice cell holds the number of occupied voxels in a column
// segment of thickness n = dim / k.
//
// Slice coordinates (row, col):
//   z-slices: (x, y)    x-slices: (y, z)    y-slices: (x, z)
class MdrSequence {
public:
    MdrSequence() = default;

    MdrSequence(std::size_t k, std::size_t dim, std::vector<std::int32_t> cells)
        : k_(k), dim_(dim), cells_(std::move(cells)) {
        if (k == 0 || dim == 0 || dim % k != 0) {
            throw ShapeError("MDR: k must be a positive divisor of the grid size");
        }
        if (cells_.size() != 3 * k * dim * dim) {
            throw ShapeError("MDR: expected " + std::to_string(3 * k * dim * dim) + " cells");
        }
        const auto n = static_cast<std::int32_t>(dim / k);
        for (auto v : cells_) {
            if (v < 0 || v > n) throw ShapeError("MDR: cell value outside [0, n]");
        }
    }

    std::size_t k() const noexcept { return k_; }
    std::size_t n() const noexcept { return dim_ / k_; }
    std::size_t dim() const noexcept { return dim_; }
    std::size_t slice_count() const noexcept { return 3 * k_; }
    std::size_t slice_cells() const noexcept { return dim_ * dim_; }

    std::size_t sequence_index(SliceAxis axis, std::size_t i) const noexcept {
        return static_cast<std::size_t>(axis) * k_ + i;
    }

    std::span<const std::int32_t> slice(std::size_t index) const {
        if (index >= slice_count()) throw ShapeError("MDR: slice index out of range");
        return std::span<const std::int32_t>(cells_).subspan(index * slice_cells(), slice_cells());
    }

    std::int32_t at(std::size_t index, std::size_t row, std::size_t col) const {
        return slice(index)[row * dim_ + col];
    }

    std::span<const std::int32_t> cells() const noexcept { return cells_; }

    friend bool operator==(const MdrSequence&, const MdrSequence&) = default;

private:
    std::size_t k_ = 0;
    std::size_t dim_ = 0;
    std::vector<std::int32_t> cells_;
};

// Cells divided by n, so values lie in [0, 1].
struct NormalizedMdr {
    std::size_t k = 0;
    std::size_t dim = 0;
    std::vector<double> values;  // same layout as MdrSequence::cells()

    std::size_t slice_count() const noexcept { return 3 * k; }
};

inline void check_mdr_k(std::size_t dim, long long k) {
    if (k <= 0 || dim % static_cast<std::size_t>(k) != 0) {
        std::string divisors;
        for (std::size_t d = 1; d <= dim; ++d) {
            if (dim % d == 0) divisors += (divisors.empty() ? "" : ", ") + std::to_string(d);
        }
        throw ConfigError("k=" + std::to_string(k) + " does not divide grid size " + std::to_string(dim) +
                          "; valid values: " + divisors);
    }
}

// Segment i along an axis covers the half-open range [i*n, (i+1)*n).
inline MdrSequence compute_mdr(const VoxelGrid& grid, long long k) {
    const GridDims& d = grid.dims();
    if (!d.is_cube()) throw ShapeError("MDR: grid must be cubic");
    const std::size_t dim = d.x;
    check_mdr_k(dim, k);
    const auto kk = static_cast<std::size_t>(k);
    const std::size_t n = dim / kk;
    const std::size_t plane = dim * dim;

    std::vector<std::int32_t> cells(3 * kk * plane, 0);
    auto bump = [&](SliceAxis axis, std::size_t segment, std::size_t row, std::size_t col) {
        cells[(static_cast<std::size_t>(axis) * kk + segment) * plane + row * dim + col] += 1;
    };
    for (std::size_t x = 0; x < dim; ++x)
        for (std::size_t z = 0; z < dim; ++z)
            for (std::size_t y = 0; y < dim; ++y) {
                if (!grid.at(x, y, z)) continue;
                bump(SliceAxis::z, z / n, x, y);
                bump(SliceAxis::x, x / n, y, z);
                bump(SliceAxis::y, y / n, x, z);
            }
    return MdrSequence(kk, dim, std::move(cells));
}

inline NormalizedMdr normalize_mdr(const MdrSequence& seq) {
    NormalizedMdr out;
    out.k = seq.k();
    out.dim = seq.dim();
    const double n = static_cast<double>(seq.n());
    out.values.reserve(seq.cells().size());
    for (auto v : seq.cells()) out.values.push_back(static_cast<double>(v) / n);
    return out;
}

// Binary PGM (P5), maxval 255, pixel = round(255 * cell / n).
inline std::vector<std::uint8_t> export_slice_pgm(const MdrSequence& seq, std::size_t index) {
    const auto slice = seq.slice(index);
    const std::string header = "P5\n" + std::to_string(seq.dim()) + " " + std::to_string(seq.dim()) + "\n255\n";
    std::vector<std::uint8_t> out(header.begin(), header.end());
    const double n = static_cast<double>(seq.n());
    for (auto v : slice) out.push_back(static_cast<std::uint8_t>(std::lround(255.0 * v / n)));
    return out;
}

// "<id>_<axis><i>.pgm", e.g. chair_003_x2.pgm.
inline std::string slice_image_name(std::string_view id, const MdrSequence& seq, std::size_t index) {
    const auto axis = static_cast<SliceAxis>(index / seq.k());
    return std::string(id) + "_" + axis_char(axis) + std::to_string(index % seq.k()) + ".pgm";
}

// Flat text form: "MDR k=<k> dim=<dim>" then one line of dim*dim integers per slice.
inline std::string format_mdr(const MdrSequence& seq) {
    std::string out = "MDR k=" + std::to_string(seq.k()) + " dim=" + std::to_string(seq.dim()) + "\n";
    for (std::size_t s = 0; s < seq.slice_count(); ++s) {
        const auto slice = seq.slice(s);
        for (std::size_t i = 0; i < slice.size(); ++i) {
            if (i) out += ' ';
            out += std::to_string(slice[i]);
        }
        out += '\n';
    }
    return out;
}

inline MdrSequence parse_mdr(std::string_view text) {
    std::istringstream in{std::string(text)};
    std::string magic, kfield, dfield;
    if (!(in >> magic >> kfield >> dfield) || magic != "MDR" || kfield.rfind("k=", 0) != 0 ||
        dfield.rfind("dim=", 0) != 0) {
        throw FormatError("MDR file: bad header");
    }
    std::size_t k = 0, dim = 0;
    try {
        k = std::stoul(kfield.substr(2));
        dim = std::stoul(dfield.substr(4));
    } catch (const std::exception&) {
        throw FormatError("MDR file: bad header values");
    }
    if (k == 0 || dim == 0 || dim % k != 0) throw FormatError("MDR file: invalid k/dim");
    std::vector<std::int32_t> cells(3 * k * dim * dim);
    for (auto& c : cells) {
        if (!(in >> c)) throw FormatError("MDR file: truncated cell data");
    }
    std::string extra;
    if (in >> extra) throw FormatError("MDR file: trailing data");
    try {
        return MdrSequence(k, dim, std::move(cells));
    } catch (const ShapeError& e) {
        throw FormatError(std::string("MDR file: ") + e.what());
    }
}

} // namespace mdrnet

#endif // MDRNET_MDR_HPP
