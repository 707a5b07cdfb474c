// SPDX-FileCopyrightText: 2026 The mdrnet Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef MDRNET_CHECKPOINT_HPP
#define MDRNET_CHECKPOINT_HPP

#include <bit>
#include <cstdint>
#include <cstring>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "mdrnet/error.hpp"
#include "mdrnet/tensor.hpp"

// Checkpoint container: the 7-byte magic "MDRNET1" followed by records
//   u32 name_length, name (UTF-8), u32 rank, u64 dims[rank], f64 values[]
// with every integer and real little-endian. Records run to end of stream.

namespace mdrnet {

inline constexpr std::string_view kCheckpointMagic = "MDRNET1";

struct NamedTensor {
    std::string name;
    Tensor value;

    friend bool operator==(const NamedTensor&, const NamedTensor&) = default;
};

namespace detail {

template <class T>
void put_le(std::vector<std::uint8_t>& out, T v) {
    for (std::size_t i = 0; i < sizeof(T); ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

template <class T>
T get_le(std::span<const std::uint8_t> in, std::size_t& pos) {
    if (pos + sizeof(T) > in.size()) throw FormatError("checkpoint: truncated record");
    T v = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i) v |= static_cast<T>(in[pos + i]) << (8 * i);
    pos += sizeof(T);
    return v;
}

} // namespace detail

inline std::vector<std::uint8_t> encode_checkpoint(std::span<const NamedTensor> records) {
    std::vector<std::uint8_t> out(kCheckpointMagic.begin(), kCheckpointMagic.end());
    for (const auto& r : records) {
        detail::put_le<std::uint32_t>(out, static_cast<std::uint32_t>(r.name.size()));
        out.insert(out.end(), r.name.begin(), r.name.end());
        detail::put_le<std::uint32_t>(out, static_cast<std::uint32_t>(r.value.rank()));
        for (std::size_t d : r.value.shape()) detail::put_le<std::uint64_t>(out, d);
        for (double v : r.value.values()) detail::put_le<std::uint64_t>(out, std::bit_cast<std::uint64_t>(v));
    }
    return out;
}

inline std::vector<NamedTensor> decode_checkpoint(std::span<const std::uint8_t> bytes) {
    if (bytes.size() < kCheckpointMagic.size() ||
        std::memcmp(bytes.data(), kCheckpointMagic.data(), kCheckpointMagic.size()) != 0) {
        throw FormatError("checkpoint: bad magic");
    }
    std::size_t pos = kCheckpointMagic.size();
    std::vector<NamedTensor> records;
    while (pos < bytes.size()) {
        NamedTensor r;
        const auto name_len = detail::get_le<std::uint32_t>(bytes, pos);
        if (pos + name_len > bytes.size()) throw FormatError("checkpoint: truncated name");
        r.name.assign(reinterpret_cast<const char*>(bytes.data() + pos), name_len);
        pos += name_len;
        const auto rank = detail::get_le<std::uint32_t>(bytes, pos);
        if (rank == 0 || rank > 8) throw FormatError("checkpoint: bad rank for " + r.name);
        Shape shape;
        std::size_t count = 1;
        for (std::uint32_t i = 0; i < rank; ++i) {
            const auto d = detail::get_le<std::uint64_t>(bytes, pos);
            if (d == 0 || d > (bytes.size() - pos) / 8 + 1) throw FormatError("checkpoint: bad dimension for " + r.name);
            shape.push_back(static_cast<std::size_t>(d));
            count *= static_cast<std::size_t>(d);
        }
        if (count > (bytes.size() - pos) / 8) throw FormatError("checkpoint: truncated values for " + r.name);
        std::vector<double> values(count);
        for (auto& v : values) v = std::bit_cast<double>(detail::get_le<std::uint64_t>(bytes, pos));
        r.value = Tensor(std::move(shape), std::move(values));
        records.push_back(std::move(r));
    }
    return records;
}

} // namespace mdrnet

#endif // MDRNET_CHECKPOINT_HPP
