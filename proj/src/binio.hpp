#pragma once

#include <cstdint>
#include <cstring>
#include <istream>
#include <ostream>
#include <string>
#include <string_view>
#include <type_traits>

#include "neardup/error.hpp"

namespace neardup::binio {

template <typename T>
void put(std::ostream& out, T value) {
  unsigned char buf[sizeof(T)];
  std::uint64_t bits = 0;
  if constexpr (sizeof(T) == 4 && std::is_floating_point_v<T>) {
    std::uint32_t b32;
    std::memcpy(&b32, &value, 4);
    bits = b32;
  } else {
    bits = static_cast<std::uint64_t>(value);
  }
  for (std::size_t i = 0; i < sizeof(T); ++i) buf[i] = static_cast<unsigned char>(bits >> (8 * i));
  out.write(reinterpret_cast<const char*>(buf), sizeof(T));
}

template <typename T>
T get(std::istream& in, const char* what) {
  unsigned char buf[sizeof(T)];
  if (!in.read(reinterpret_cast<char*>(buf), sizeof(T))) {
    throw_data(std::string("truncated file while reading ") + what);
  }
  std::uint64_t bits = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i) bits |= static_cast<std::uint64_t>(buf[i]) << (8 * i);
  if constexpr (sizeof(T) == 4 && std::is_floating_point_v<T>) {
    const auto b32 = static_cast<std::uint32_t>(bits);
    T value;
    std::memcpy(&value, &b32, 4);
    return value;
  } else {
    return static_cast<T>(bits);
  }
}

inline void put_string16(std::ostream& out, std::string_view s) {
  if (s.size() > 0xFFFF) throw_data("string longer than 65535 bytes: " + std::string(s.substr(0, 32)));
  put<std::uint16_t>(out, static_cast<std::uint16_t>(s.size()));
  out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

inline std::string get_string16(std::istream& in, const char* what) {
  const auto len = get<std::uint16_t>(in, what);
  std::string s(len, '\0');
  if (len != 0 && !in.read(s.data(), len)) throw_data(std::string("truncated file while reading ") + what);
  return s;
}

inline void expect_magic(std::istream& in, std::string_view magic) {
  char buf[4];
  if (!in.read(buf, 4) || std::string_view(buf, 4) != magic) {
    throw_data("bad magic, expected '" + std::string(magic) + "'");
  }
}

}  // namespace neardup::binio
