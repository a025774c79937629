#ifndef PESVLAB_FORMAT_HPP
#define PESVLAB_FORMAT_HPP

#include <array>
#include <charconv>
#include <cstdint>
#include <string>
#include <string_view>

namespace pesvlab {

/// Shortest decimal text that parses back to the same binary64 value.
[[nodiscard]] inline std::string format_double(double v)
{
    std::array<char, 64> buf{};
    auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
    return {buf.data(), res.ptr};
}

/// 64-bit FNV-1a, used to fingerprint serialized models.
[[nodiscard]] inline std::uint64_t fnv1a(std::string_view bytes) noexcept
{
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

[[nodiscard]] inline std::string hex64(std::uint64_t v)
{
    static constexpr char digits[] = "0123456789abcdef";
    std::string s(16, '0');
    for (int i = 15; i >= 0; --i) {
        s[static_cast<std::size_t>(i)] = digits[v & 0xF];
        v >>= 4;
    }
    return s;
}

} // namespace pesvlab

#endif // PESVLAB_FORMAT_HPP
