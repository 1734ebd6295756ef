#pragma once

#include <cstddef>
#include <span>
#include <vector>

/// Logarithmic market scoring rule over k mutually exclusive outcomes.
///
/// With outstanding quantities q and liquidity b (euro), the maker's cost
/// function is C(q) = b * ln(sum_j exp(q_j / b)) and the instantaneous price
/// of outcome i is the softmax p_i = exp(q_i / b) / sum_j exp(q_j / b).
/// Buying d shares of i costs C(q + d e_i) - C(q), which rearranges to
/// b * ln(1 + p_i (exp(d/b) - 1)); evaluating that form directly avoids the
/// cancellation of subtracting two large log-sum-exps.
///
/// All functions are pure; they validate only what they need to stay
/// finite and leave market-state checks to the exchange.
namespace toxmarket::lmsr {

/// log(sum_j exp(q_j / b)) with max-subtraction.
double log_sum_exp(std::span<const double> q, double b);

/// C(q) in euro.
double cost(std::span<const double> q, double b);

std::vector<double> prices(std::span<const double> q, double b);

/// Price of one outcome together with its complement 1 - p_i, the latter
/// computed as a sum of the other terms so it keeps full precision when p_i
/// is close to 1.
struct OutcomePrice {
  double log_p = 0.0;
  double p = 0.0;
  double one_minus_p = 0.0;
};

OutcomePrice outcome_price(std::span<const double> q, double b, std::size_t outcome);

/// Euro cost of buying `shares` (> 0, finite) of `outcome` at state q.
double quote_buy(std::span<const double> q, double b, std::size_t outcome, double shares);

/// Inverse of quote_buy: shares of `outcome` purchasable for `spend` euro.
double shares_for_spend(std::span<const double> q, double b, std::size_t outcome, double spend);

/// Worst-case subsidy of a k-outcome maker starting from uniform q: b ln k.
double max_loss(double b, std::size_t outcomes);

}  // namespace toxmarket::lmsr
