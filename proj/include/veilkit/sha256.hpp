#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>

namespace veilkit {

// FIPS 180-4 SHA-256. Self-contained so the anonymization engine has no
// crypto-library dependency; verified against the standard test vectors.
class Sha256 {
public:
    Sha256();

    Sha256& update(const void* data, std::size_t len);
    Sha256& update(std::string_view s) { return update(s.data(), s.size()); }

    std::array<std::uint8_t, 32> digest();

    static std::string hex_digest(std::string_view data);

private:
    void process_block(const std::uint8_t* block);

    std::array<std::uint32_t, 8> state_;
    std::array<std::uint8_t, 64> buffer_;
    std::size_t buffered_ = 0;
    std::uint64_t total_bits_ = 0;
    bool finished_ = false;
};

std::string to_hex(const std::uint8_t* data, std::size_t len);

} // namespace veilkit
