#pragma once

#include <chrono>
#include <compare>
#include <cstdint>
#include <string>

namespace toxmarket {

/// Integer euro cents. All ledger arithmetic is exact in this type.
struct Cents {
  std::int64_t value = 0;

  constexpr Cents() = default;
  constexpr explicit Cents(std::int64_t v) : value(v) {}

  constexpr double euros() const { return static_cast<double>(value) / 100.0; }

  constexpr auto operator<=>(const Cents&) const = default;

  constexpr Cents& operator+=(Cents o) {
    value += o.value;
    return *this;
  }
  constexpr Cents& operator-=(Cents o) {
    value -= o.value;
    return *this;
  }
  friend constexpr Cents operator+(Cents a, Cents b) { return Cents{a.value + b.value}; }
  friend constexpr Cents operator-(Cents a, Cents b) { return Cents{a.value - b.value}; }
};

constexpr Cents euros(std::int64_t whole) { return Cents{whole * 100}; }

/// Rounds a real euro amount up to the next cent. Amounts within 1e-7 cent
/// of a whole cent snap to it so float noise never adds a spurious cent.
Cents ceil_to_cents(double euro_amount);

/// Round-half-even conversion of a real euro amount to cents.
Cents round_half_even_cents(double euro_amount);

/// "1234.56" style rendering, sign-aware.
std::string format_euros(Cents c);

using Timestamp = std::chrono::sys_seconds;

inline std::int64_t to_epoch_seconds(Timestamp t) { return t.time_since_epoch().count(); }
inline Timestamp from_epoch_seconds(std::int64_t s) { return Timestamp{std::chrono::seconds{s}}; }

}  // namespace toxmarket
