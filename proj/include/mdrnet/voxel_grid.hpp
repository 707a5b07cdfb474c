// SPDX-FileCopyrightText: 2026 The mdrnet Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef MDRNET_VOXEL_GRID_HPP
#define MDRNET_VOXEL_GRID_HPP

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "mdrnet/error.hpp"

namespace mdrnet {

struct GridDims {
    std::size_t x = 0;
    std::size_t y = 0;
    std::size_t z = 0;

    std::size_t cells() const noexcept { return x * y * z; }
    bool is_cube() const noexcept { return x == y && y == z; }
    friend bool operator==(const GridDims&, const GridDims&) = default;
};

// Binary occupancy over a regular lattice.
//
// Cells are stored in binvox order: x-major with y varying fastest,
// index = x*dy*dz + z*dy + y. Code outside the codecs addresses cells
// through at()/set() only.
class VoxelGrid {
public:
    VoxelGrid() = default;

    explicit VoxelGrid(GridDims dims) : dims_(dims), cells_(dims.cells(), 0) {
        if (dims.x == 0 || dims.y == 0 || dims.z == 0) {
            throw ShapeError("voxel grid dimensions must be positive");
        }
    }

    VoxelGrid(GridDims dims, std::vector<std::uint8_t> cells) : dims_(dims), cells_(std::move(cells)) {
        if (dims.x == 0 || dims.y == 0 || dims.z == 0) {
            throw ShapeError("voxel grid dimensions must be positive");
        }
        if (cells_.size() != dims.cells()) {
            throw ShapeError("occupancy length " + std::to_string(cells_.size()) + " does not match " +
                             std::to_string(dims.cells()) + " cells");
        }
        if (std::any_of(cells_.begin(), cells_.end(), [](std::uint8_t c) { return c > 1; })) {
            throw ShapeError("occupancy cells must be 0 or 1");
        }
    }

    static VoxelGrid cube(std::size_t n) { return VoxelGrid(GridDims{n, n, n}); }

    const GridDims& dims() const noexcept { return dims_; }

    std::size_t index(std::size_t x, std::size_t y, std::size_t z) const noexcept {
        return x * dims_.y * dims_.z + z * dims_.y + y;
    }

    bool at(std::size_t x, std::size_t y, std::size_t z) const noexcept { return cells_[index(x, y, z)] != 0; }

    void set(std::size_t x, std::size_t y, std::size_t z, bool occupied = true) noexcept {
        cells_[index(x, y, z)] = occupied ? 1 : 0;
    }

    // Raw cells in storage order; used by the binvox codec.
    std::span<const std::uint8_t> cells() const noexcept { return cells_; }

    friend bool operator==(const VoxelGrid&, const VoxelGrid&) = default;

private:
    GridDims dims_{};
    std::vector<std::uint8_t> cells_;
};

inline std::size_t count_occupied(const VoxelGrid& grid) {
    const auto cells = grid.cells();
    return static_cast<std::size_t>(std::count(cells.begin(), cells.end(), std::uint8_t{1}));
}

} // namespace mdrnet

#endif // MDRNET_VOXEL_GRID_HPP
