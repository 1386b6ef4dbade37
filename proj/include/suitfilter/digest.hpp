#ifndef SUITFILTER_DIGEST_HPP
#define SUITFILTER_DIGEST_HPP

#include <cstdint>
#include <cstring>
#include <string>
#include <vector>

namespace suitfilter {

/// Incremental FNV-1a (64-bit) hasher for audit digests.  Not cryptographic;
/// used only to tag estimators and configs so reports can name their inputs.
class Fnv1a {
 public:
  void update(const void* data, std::size_t len) {
    const auto* bytes = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < len; ++i) {
      state_ ^= bytes[i];
      state_ *= 0x100000001b3ull;
    }
  }

  void update(const std::string& s) {
    update(s.data(), s.size());
    update_separator();
  }

  void update(double v) {
    std::uint64_t bits = 0;
    std::memcpy(&bits, &v, sizeof bits);
    update(&bits, sizeof bits);
  }

  void update(const std::vector<double>& v) {
    for (double x : v) update(x);
    update_separator();
  }

  void update(std::uint64_t v) { update(&v, sizeof v); }

  std::string hex() const {
    static const char* digits = "0123456789abcdef";
    std::string out(16, '0');
    std::uint64_t v = state_;
    for (int i = 15; i >= 0; --i) {
      out[static_cast<std::size_t>(i)] = digits[v & 0xF];
      v >>= 4;
    }
    return out;
  }

 private:
  void update_separator() {
    const unsigned char sep = 0xFF;
    update(&sep, 1);
  }

  std::uint64_t state_ = 0xcbf29ce484222325ull;
};

}  // namespace suitfilter

#endif  // SUITFILTER_DIGEST_HPP
