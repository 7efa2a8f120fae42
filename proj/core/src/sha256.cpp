#include "pourl/sha256.hpp"

#include <openssl/evp.h>

#include <stdexcept>

namespace pourl {

Digest sha256(std::span<const std::uint8_t> bytes) {
  Digest digest{};
  unsigned int written = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest.data(), &written, EVP_sha256(), nullptr) != 1 ||
      written != digest.size()) {
    throw std::runtime_error("SHA-256 computation failed");
  }
  return digest;
}

std::string to_hex(const Digest& digest) {
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  out.reserve(digest.size() * 2);
  for (std::uint8_t byte : digest) {
    out.push_back(kHex[byte >> 4]);
    out.push_back(kHex[byte & 0xF]);
  }
  return out;
}

}  // namespace pourl
