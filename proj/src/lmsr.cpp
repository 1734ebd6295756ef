#include "toxmarket/lmsr.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "toxmarket/error.hpp"

namespace toxmarket::lmsr {

namespace {

void check_inputs(std::span<const double> q, double b) {
  if (q.empty()) fail(ErrorKind::invalid_argument, "market has no outcomes");
  if (!(b > 0.0) || !std::isfinite(b)) {
    fail(ErrorKind::invalid_argument, "liquidity b must be positive and finite");
  }
}

void check_outcome(std::span<const double> q, std::size_t outcome) {
  if (outcome >= q.size()) {
    fail(ErrorKind::invalid_argument, "outcome index " + std::to_string(outcome) + " out of range");
  }
}

// Above this exponent the expm1 form risks overflow; switch to log space.
constexpr double kLogSpaceCutover = 1.0;

}  // namespace

double log_sum_exp(std::span<const double> q, double b) {
  check_inputs(q, b);
  const double m = *std::max_element(q.begin(), q.end()) / b;
  double sum = 0.0;
  for (double qi : q) sum += std::exp(qi / b - m);
  return m + std::log(sum);
}

double cost(std::span<const double> q, double b) { return b * log_sum_exp(q, b); }

std::vector<double> prices(std::span<const double> q, double b) {
  check_inputs(q, b);
  const double m = *std::max_element(q.begin(), q.end()) / b;
  std::vector<double> p(q.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < q.size(); ++i) {
    p[i] = std::exp(q[i] / b - m);
    sum += p[i];
  }
  for (double& pi : p) pi /= sum;
  return p;
}

OutcomePrice outcome_price(std::span<const double> q, double b, std::size_t outcome) {
  check_inputs(q, b);
  check_outcome(q, outcome);
  const double lse = log_sum_exp(q, b);
  OutcomePrice out;
  out.log_p = q[outcome] / b - lse;
  out.p = std::exp(out.log_p);
  for (std::size_t j = 0; j < q.size(); ++j) {
    if (j != outcome) out.one_minus_p += std::exp(q[j] / b - lse);
  }
  return out;
}

double quote_buy(std::span<const double> q, double b, std::size_t outcome, double shares) {
  if (!(shares > 0.0) || !std::isfinite(shares)) {
    fail(ErrorKind::invalid_argument, "shares must be positive and finite");
  }
  const OutcomePrice price = outcome_price(q, b, outcome);
  const double x = shares / b;
  if (x <= kLogSpaceCutover) {
    return b * std::log1p(price.p * std::expm1(x));
  }
  // ln(p e^x + 1 - p) as a log-sum of its two terms: p itself may underflow
  // to zero while log p is still finite.
  const double a = price.log_p + x;
  const double c = std::log(price.one_minus_p);
  const double hi = std::max(a, c);
  return b * (hi + std::log1p(std::exp(std::min(a, c) - hi)));
}

double shares_for_spend(std::span<const double> q, double b, std::size_t outcome, double spend) {
  if (!(spend > 0.0) || !std::isfinite(spend)) {
    fail(ErrorKind::invalid_argument, "spend must be positive and finite");
  }
  const OutcomePrice price = outcome_price(q, b, outcome);
  const double y = spend / b;
  if (y <= kLogSpaceCutover && price.p > 0.0) {
    return b * std::log1p(std::expm1(y) / price.p);
  }
  // ln((e^y - 1 + p) / p) = y + ln(1 - (1 - p) e^-y) - ln p.
  return b * (y + std::log1p(-price.one_minus_p * std::exp(-y)) - price.log_p);
}

double max_loss(double b, std::size_t outcomes) {
  return b * std::log(static_cast<double>(outcomes));
}

}  // namespace toxmarket::lmsr
