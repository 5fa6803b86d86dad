#include "glassbox/canonical.hpp"

#include <array>
#include <cmath>
#include <cstdio>

#include <openssl/evp.h>

#include "glassbox/error.hpp"

namespace glassbox {

namespace {

void write_string(std::string& out, const std::string& s) {
  // nlohmann's dump escapes per RFC 8259 and passes UTF-8 through.
  out += nlohmann::json(s).dump();
}

void write_value(std::string& out, const nlohmann::json& v) {
  switch (v.type()) {
    case nlohmann::json::value_t::object: {
      // object_t is a std::map, so iteration is already key-sorted.
      out += '{';
      bool first = true;
      for (const auto& [key, item] : v.items()) {
        if (!first) out += ',';
        first = false;
        write_string(out, key);
        out += ':';
        write_value(out, item);
      }
      out += '}';
      break;
    }
    case nlohmann::json::value_t::array: {
      out += '[';
      bool first = true;
      for (const auto& item : v) {
        if (!first) out += ',';
        first = false;
        write_value(out, item);
      }
      out += ']';
      break;
    }
    case nlohmann::json::value_t::number_float: {
      const double d = v.get<double>();
      if (!std::isfinite(d)) {
        out += "null";
        break;
      }
      std::array<char, 40> buf{};
      const int len = std::snprintf(buf.data(), buf.size(), "%.17g", d == 0.0 ? 0.0 : d);
      out.append(buf.data(), static_cast<std::size_t>(len));
      break;
    }
    case nlohmann::json::value_t::string:
      write_string(out, v.get_ref<const std::string&>());
      break;
    case nlohmann::json::value_t::discarded:
      out += "null";
      break;
    default:
      out += v.dump();
      break;
  }
}

}  // namespace

std::string canonical_json(const nlohmann::json& value) {
  std::string out;
  write_value(out, value);
  return out;
}

std::string sha256_hex(std::string_view bytes) {
  std::array<unsigned char, EVP_MAX_MD_SIZE> digest{};
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest.data(), &len, EVP_sha256(), nullptr) != 1) {
    throw Error(ErrorCode::kIo, "sha256 digest failed");
  }
  static constexpr char kHex[] = "0123456789abcdef";
  std::string hex;
  hex.reserve(2 * len);
  for (unsigned int i = 0; i < len; ++i) {
    hex += kHex[digest[i] >> 4];
    hex += kHex[digest[i] & 0xF];
  }
  return hex;
}

}  // namespace glassbox
