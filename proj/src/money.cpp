#include "toxmarket/money.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>

namespace toxmarket {

Cents ceil_to_cents(double euro_amount) {
  const double cents = euro_amount * 100.0;
  const double nearest = std::round(cents);
  if (std::abs(cents - nearest) < 1e-7) return Cents{static_cast<std::int64_t>(nearest)};
  return Cents{static_cast<std::int64_t>(std::ceil(cents))};
}

Cents round_half_even_cents(double euro_amount) {
  // nearbyint honours the default FE_TONEAREST mode, which is half-even.
  return Cents{static_cast<std::int64_t>(std::nearbyint(euro_amount * 100.0))};
}

std::string format_euros(Cents c) {
  const std::int64_t abs_value = std::llabs(c.value);
  char buf[48];
  std::snprintf(buf, sizeof buf, "%s%lld.%02lld", c.value < 0 ? "-" : "",
                static_cast<long long>(abs_value / 100), static_cast<long long>(abs_value % 100));
  return buf;
}

}  // namespace toxmarket
