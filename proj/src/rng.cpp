#include "gldp/rng.hpp"

#include <cmath>
#include <numbers>

namespace gldp {

namespace {

constexpr std::uint32_t kMulA = 0xD2511F53;
constexpr std::uint32_t kMulB = 0xCD9E8D57;
constexpr std::uint32_t kWeylA = 0x9E3779B9;
constexpr std::uint32_t kWeylB = 0xBB67AE85;

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& lo, std::uint32_t& hi) {
    const std::uint64_t p = static_cast<std::uint64_t>(a) * b;
    lo = static_cast<std::uint32_t>(p);
    hi = static_cast<std::uint32_t>(p >> 32);
}

}  // namespace

Philox4x32::Block Philox4x32::operator()(Block ctr) const noexcept {
    std::array<std::uint32_t, 2> key = key_;
    for (int round = 0; round < 10; ++round) {
        std::uint32_t lo0, hi0, lo1, hi1;
        mulhilo(kMulA, ctr[0], lo0, hi0);
        mulhilo(kMulB, ctr[2], lo1, hi1);
        ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
        key[0] += kWeylA;
        key[1] += kWeylB;
    }
    return ctr;
}

CounterStream::CounterStream(std::uint64_t seed, StreamDomain domain, std::uint64_t stream) noexcept
    : gen_(seed), domain_(static_cast<std::uint32_t>(domain)), stream_(stream) {}

void CounterStream::refill() noexcept {
    // counter layout: [block lo | block hi (16 bits) + domain << 16 | stream lo | stream hi]
    const Philox4x32::Block ctr{
        static_cast<std::uint32_t>(block_),
        static_cast<std::uint32_t>((block_ >> 32) & 0xFFFFu) | (domain_ << 16),
        static_cast<std::uint32_t>(stream_),
        static_cast<std::uint32_t>(stream_ >> 32)};
    buf_ = gen_(ctr);
    ++block_;
    used_ = 0;
}

double CounterStream::uniform() noexcept {
    if (used_ > 2) refill();
    const std::uint64_t bits =
        (static_cast<std::uint64_t>(buf_[used_]) << 32) | buf_[used_ + 1];
    used_ += 2;
    return (static_cast<double>(bits >> 11) + 0.5) * 0x1.0p-53;
}

double CounterStream::normal() noexcept {
    if (have_spare_) {
        have_spare_ = false;
        return spare_;
    }
    const double u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * std::numbers::pi * u2;
    spare_ = r * std::sin(theta);
    have_spare_ = true;
    return r * std::cos(theta);
}

std::vector<double> gaussian_driver(std::uint64_t seed, std::uint64_t path_index, std::size_t n) {
    CounterStream rs(seed, StreamDomain::gaussian_driver, path_index);
    std::vector<double> out(n);
    for (auto& z : out) z = rs.normal();
    return out;
}

}  // namespace gldp
