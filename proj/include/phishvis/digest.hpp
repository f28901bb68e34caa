#pragma once

#include <array>
#include <string>

#include <openssl/evp.h>

#include "phishvis/bytevis.hpp"
#include "phishvis/error.hpp"

namespace phishvis {

/// SHA-256 of `bytes` as 64 lowercase hex characters.
inline std::string content_digest(ByteView bytes) {
    std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
    unsigned int md_len = 0;
    if (EVP_Digest(bytes.data(), bytes.size(), md.data(), &md_len, EVP_sha256(), nullptr) != 1) {
        throw Error(ErrorKind::InvalidInput, "SHA-256 computation failed");
    }
    static constexpr char hex[] = "0123456789abcdef";
    std::string out;
    out.reserve(2 * md_len);
    for (unsigned i = 0; i < md_len; ++i) {
        out.push_back(hex[md[i] >> 4]);
        out.push_back(hex[md[i] & 0x0F]);
    }
    return out;
}

inline std::string content_digest(std::string_view text) {
    return content_digest(ByteView(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

inline bool is_digest(std::string_view s) noexcept {
    if (s.size() != 64) return false;
    for (char c : s) {
        if (!((c >= '0' && c <= '9') || (c >= 'a' && c <= 'f'))) return false;
    }
    return true;
}

} // namespace phishvis
