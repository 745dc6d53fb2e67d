#ifndef RJFIT_FAMILY_HPP_
#define RJFIT_FAMILY_HPP_

#include <array>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

namespace rjfit {

/// Candidate distribution families, numbered as in the model index k.
enum class Family : std::uint8_t { sas = 1, gg = 2, t = 3 };

inline constexpr std::array<Family, 3> all_families = {Family::sas, Family::gg,
                                                       Family::t};

inline constexpr int family_code(Family f) { return static_cast<int>(f); }

/// Zero-based slot for per-family arrays.
inline constexpr std::size_t family_index(Family f) {
  return static_cast<std::size_t>(f) - 1;
}

inline Family family_from_code(int code) {
  switch (code) {
    case 1:
      return Family::sas;
    case 2:
      return Family::gg;
    case 3:
      return Family::t;
    default:
      throw std::invalid_argument("family code must be 1, 2 or 3, got " +
                                  std::to_string(code));
  }
}

inline constexpr std::string_view family_name(Family f) {
  switch (f) {
    case Family::sas:
      return "sas";
    case Family::gg:
      return "gg";
    case Family::t:
      return "t";
  }
  return "?";
}

/// Accepts the short names ("sas", "gg", "t") or the numeric codes.
inline Family parse_family(std::string_view s) {
  if (s == "sas" || s == "SaS" || s == "stable" || s == "1") return Family::sas;
  if (s == "gg" || s == "GG" || s == "2") return Family::gg;
  if (s == "t" || s == "student" || s == "3") return Family::t;
  throw std::invalid_argument("unknown family '" + std::string(s) + "'");
}

}  // namespace rjfit

#endif  // RJFIT_FAMILY_HPP_
