#pragma once

#include <cstdint>
#include <cstdio>
#include <string>
#include <string_view>

namespace repro {

// 64-bit FNV-1a. Used for data fingerprints, not for security.
class Fnv1a {
 public:
  void Update(std::string_view bytes) {
    for (unsigned char c : bytes) {
      state_ ^= c;
      state_ *= 0x100000001b3ULL;
    }
  }

  std::uint64_t Digest() const { return state_; }

  std::string HexDigest() const {
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx",
                  static_cast<unsigned long long>(state_));
    return buf;
  }

 private:
  std::uint64_t state_ = 0xcbf29ce484222325ULL;
};

inline std::string Fnv1aHex(std::string_view bytes) {
  Fnv1a h;
  h.Update(bytes);
  return h.HexDigest();
}

}  // namespace repro
