// SPDX-FileCopyrightText: 2026 The mdrnet Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef MDRNET_SYNTHETIC_HPP
#define MDRNET_SYNTHETIC_HPP

#include <algorithm>
#include <array>
#include <cstdint>
#include <random>
#include <string>
#include <string_view>
#include <variant>

#include "mdrnet/error.hpp"
#include "mdrnet/voxel_grid.hpp"

namespace mdrnet {

// Primitive shape classes used as a small stand-in for a CAD model collection.
// Grids are always 30^3.
inline constexpr std::size_t kSyntheticSize = 30;

enum class SyntheticClass { sphere, box, cross, pyramid };

inline SyntheticClass parse_synthetic_class(std::string_view name) {
    if (name == "sphere") return SyntheticClass::sphere;
    if (name == "box") return SyntheticClass::box;
    if (name == "cross") return SyntheticClass::cross;
    if (name == "pyramid") return SyntheticClass::pyramid;
    throw ConfigError("unknown synthetic class '" + std::string(name) + "' (expected sphere, box, cross, pyramid)");
}

inline std::string_view to_string(SyntheticClass c) {
    switch (c) {
    case SyntheticClass::sphere: return "sphere";
    case SyntheticClass::box: return "box";
    case SyntheticClass::cross: return "cross";
    case SyntheticClass::pyramid: return "pyramid";
    }
    return "?";
}

// Solid ball; a cell is inside when its center lies within radius.
struct SphereParams {
    std::array<double, 3> center{};
    double radius = 0.0;
};

// Solid axis-aligned cuboid occupying [origin, origin + edges) per axis.
struct BoxParams {
    std::array<std::size_t, 3> origin{};
    std::array<std::size_t, 3> edges{};
};

// Three orthogonal bars with a (2*half_width)^2 section, each spanning
// [center - half_length, center + half_length) along its own axis.
struct CrossParams {
    std::array<long, 3> center{};
    long half_length = 0;
    long half_width = 3;
};

// Stacked squares: layer j sits at z_base + j with width base_width - 2j.
struct PyramidParams {
    long center_x = 0;
    long center_y = 0;
    long z_base = 0;
    long base_width = 0;

    long height() const noexcept { return (base_width + 1) / 2; }
};

using SyntheticParams = std::variant<SphereParams, BoxParams, CrossParams, PyramidParams>;

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline bool in_range(long v) noexcept { return v >= 0 && v < static_cast<long>(kSyntheticSize); }

} // namespace detail

inline SyntheticParams sample_synthetic(SyntheticClass cls, std::uint64_t seed) {
    std::mt19937_64 rng(detail::splitmix64(seed ^ (static_cast<std::uint64_t>(cls) << 56)));
    std::uniform_int_distribution<long> jitter(-3, 3);
    const long mid = static_cast<long>(kSyntheticSize) / 2;

    switch (cls) {
    case SyntheticClass::sphere: {
        std::uniform_real_distribution<double> offset(-3.0, 3.0);
        std::uniform_real_distribution<double> radius(6.0, 11.0);
        SphereParams p;
        for (auto& c : p.center) c = static_cast<double>(mid) + offset(rng);
        p.radius = radius(rng);
        return p;
    }
    case SyntheticClass::box: {
        std::uniform_int_distribution<std::size_t> edge(10, 22);
        BoxParams p;
        for (int a = 0; a < 3; ++a) {
            p.edges[a] = edge(rng);
            const long slack = static_cast<long>(kSyntheticSize - p.edges[a]);
            p.origin[a] = static_cast<std::size_t>(std::clamp(slack / 2 + jitter(rng), 0L, slack));
        }
        return p;
    }
    case SyntheticClass::cross: {
        std::uniform_int_distribution<long> half_length(9, 14);
        CrossParams p;
        for (auto& c : p.center) c = mid + jitter(rng);
        p.half_length = half_length(rng);
        return p;
    }
    case SyntheticClass::pyramid: {
        std::uniform_int_distribution<long> base(14, 24);
        PyramidParams p;
        p.base_width = base(rng);
        p.center_x = mid + jitter(rng);
        p.center_y = mid + jitter(rng);
        p.z_base = mid - p.height() / 2 + jitter(rng);
        return p;
    }
    }
    throw ConfigError("unknown synthetic class");
}

inline VoxelGrid rasterize(const SyntheticParams& params) {
    VoxelGrid grid = VoxelGrid::cube(kSyntheticSize);
    const long n = static_cast<long>(kSyntheticSize);

    if (const auto* s = std::get_if<SphereParams>(&params)) {
        const double r2 = s->radius * s->radius;
        for (long x = 0; x < n; ++x)
            for (long y = 0; y < n; ++y)
                for (long z = 0; z < n; ++z) {
                    const double dx = x + 0.5 - s->center[0];
                    const double dy = y + 0.5 - s->center[1];
                    const double dz = z + 0.5 - s->center[2];
                    if (dx * dx + dy * dy + dz * dz <= r2) grid.set(x, y, z);
                }
    } else if (const auto* b = std::get_if<BoxParams>(&params)) {
        for (std::size_t x = b->origin[0]; x < std::min(b->origin[0] + b->edges[0], kSyntheticSize); ++x)
            for (std::size_t y = b->origin[1]; y < std::min(b->origin[1] + b->edges[1], kSyntheticSize); ++y)
                for (std::size_t z = b->origin[2]; z < std::min(b->origin[2] + b->edges[2], kSyntheticSize); ++z)
                    grid.set(x, y, z);
    } else if (const auto* c = std::get_if<CrossParams>(&params)) {
        // Bar a runs along axis a; the other two axes are limited to the section.
        for (int a = 0; a < 3; ++a) {
            std::array<long, 3> lo{}, hi{};
            for (int b2 = 0; b2 < 3; ++b2) {
                const long half = (b2 == a) ? c->half_length : c->half_width;
                lo[b2] = std::max(0L, c->center[b2] - half);
                hi[b2] = std::min(n, c->center[b2] + half);
            }
            for (long x = lo[0]; x < hi[0]; ++x)
                for (long y = lo[1]; y < hi[1]; ++y)
                    for (long z = lo[2]; z < hi[2]; ++z) grid.set(x, y, z);
        }
    } else if (const auto* p = std::get_if<PyramidParams>(&params)) {
        for (long j = 0; j < p->height(); ++j) {
            const long z = p->z_base + j;
            if (!detail::in_range(z)) continue;
            const long width = p->base_width - 2 * j;
            const long x0 = p->center_x - width / 2;
            const long y0 = p->center_y - width / 2;
            for (long x = std::max(0L, x0); x < std::min(n, x0 + width); ++x)
                for (long y = std::max(0L, y0); y < std::min(n, y0 + width); ++y) grid.set(x, y, z);
        }
    }
    return grid;
}

// Deterministic in (class_name, seed).
inline VoxelGrid generate_synthetic(std::string_view class_name, std::uint64_t seed) {
    return rasterize(sample_synthetic(parse_synthetic_class(class_name), seed));
}

} // namespace mdrnet

#endif // MDRNET_SYNTHETIC_HPP
