#pragma once

#include <array>
#include <cstdint>
#include <vector>

namespace gldp {

/// Philox4x32-10 counter-based generator. Every (key, counter) pair maps to
/// an independent 128-bit block, so streams can be generated in any order.
class Philox4x32 {
public:
    using Block = std::array<std::uint32_t, 4>;

    explicit Philox4x32(std::uint64_t key) noexcept
        : key_{static_cast<std::uint32_t>(key), static_cast<std::uint32_t>(key >> 32)} {}

    Block operator()(Block counter) const noexcept;

private:
    std::array<std::uint32_t, 2> key_;
};

/// Stream identifiers that keep unrelated consumers of one seed apart.
enum class StreamDomain : std::uint16_t {
    gaussian_driver = 1,
    scenario_values = 2,
    coefficient_probes = 3,
    test_samples = 4,
};

/// Sequential reader over one Philox stream addressed by (seed, domain, stream).
class CounterStream {
public:
    CounterStream(std::uint64_t seed, StreamDomain domain, std::uint64_t stream) noexcept;

    /// Uniform double in the open interval (0, 1), 53 random bits.
    double uniform() noexcept;

    /// Standard normal via Box-Muller; deterministic across platforms.
    double normal() noexcept;

private:
    void refill() noexcept;

    Philox4x32 gen_;
    std::uint32_t domain_;
    std::uint64_t stream_;
    std::uint64_t block_ = 0;
    Philox4x32::Block buf_{};
    int used_ = 4;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

/// n standard normals for the shared driver of path `path_index`.
std::vector<double> gaussian_driver(std::uint64_t seed, std::uint64_t path_index, std::size_t n);

}  // namespace gldp
