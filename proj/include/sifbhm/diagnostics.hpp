#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace sifbhm {

inline constexpr std::size_t kMinimumRetainedDraws = 10;

struct DrawSummary
{
    std::size_t count = 0;
    double mean = 0.0;
    double sd = 0.0;  ///< n - 1 denominator
    double q2_5 = 0.0;
    double q97_5 = 0.0;
};

/// Type-7 (linear interpolation) quantile of already sorted values.
double quantile_type7(std::span<const double> sorted, double p);

/// Mean, sd and 2.5/97.5% quantiles. Throws std::invalid_argument below 10 draws.
/// Draws are sorted before any reduction, so the result does not depend on their order.
DrawSummary summarize_draws(std::span<const double> draws);

/// One scalar quantity traced across chains; every chain must have the same length.
using ChainSeries = std::vector<std::span<const double>>;

/// Rank-normalised split R-hat: the larger of the bulk and folded-tail statistics.
/// Returns exactly 1 when every draw is identical.
double split_rhat(const ChainSeries& chains);

/// Rank-normalised bulk effective sample size over split chains.
double effective_sample_size(const ChainSeries& chains);

} // namespace sifbhm
