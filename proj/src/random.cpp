#include "sifbhm/random.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <vector>

#include <boost/math/special_functions/erf.hpp>

namespace sifbhm {

Rng::Rng(std::uint64_t seed)
  : engine_(seed)
{
}

Rng Rng::for_stream(std::uint64_t seed, std::span<const std::int64_t> stream_ids)
{
    std::vector<std::uint32_t> words;
    words.reserve(2 + 2 * stream_ids.size());
    words.push_back(static_cast<std::uint32_t>(seed));
    words.push_back(static_cast<std::uint32_t>(seed >> 32));
    for (auto id : stream_ids) {
        const auto u = static_cast<std::uint64_t>(id);
        words.push_back(static_cast<std::uint32_t>(u));
        words.push_back(static_cast<std::uint32_t>(u >> 32));
    }
    std::seed_seq seq(words.begin(), words.end());
    Rng rng;
    rng.engine_.seed(seq);
    return rng;
}

double Rng::uniform()
{
    // 53 random bits mapped to the centre of each of 2^53 equal bins: never 0 or 1.
    const std::uint64_t bits = engine_() >> 11;
    return (static_cast<double>(bits) + 0.5) * 0x1.0p-53;
}

double Rng::standard_normal()
{
    return normal_(engine_);
}

double Rng::gamma(double shape, double rate)
{
    if (!(shape > 0.0) || !(rate > 0.0)) {
        throw std::invalid_argument("gamma draw requires positive shape and rate");
    }
    std::gamma_distribution<double> dist(shape, 1.0 / rate);
    return dist(engine_);
}

bool Rng::operator==(const Rng& other) const
{
    return engine_ == other.engine_ && normal_ == other.normal_;
}

double normal_cdf(double z)
{
    return 0.5 * boost::math::erfc(-z / std::numbers::sqrt2);
}

double normal_upper_tail(double z)
{
    return 0.5 * boost::math::erfc(z / std::numbers::sqrt2);
}

double normal_quantile(double p)
{
    if (!(p > 0.0 && p < 1.0)) {
        throw std::domain_error("normal quantile requires p in (0, 1)");
    }
    return -std::numbers::sqrt2 * boost::math::erfc_inv(2.0 * p);
}

namespace {

double clamp_open(double x, double lower, double upper)
{
    const double lo = std::nextafter(lower, upper);
    const double hi = std::nextafter(upper, lower);
    return std::clamp(x, lo, hi);
}

// Standardised draw on (alpha, beta) with alpha >= 0, where the upper-tail probabilities
// are used directly.
double upper_tail_draw(Rng& rng, double alpha, double beta)
{
    const double q_alpha = normal_upper_tail(alpha);
    const double q_beta = normal_upper_tail(beta);
    if (q_alpha > 0.0 && q_alpha > q_beta) {
        const double u = q_beta + rng.uniform() * (q_alpha - q_beta);
        if (u > 0.0 && u < 1.0) {
            return -normal_quantile(u);
        }
    }
    // Far tail: N(0,1) restricted to z > alpha is close to alpha + Exp(alpha).
    for (int attempt = 0; attempt < 64; ++attempt) {
        const double z = alpha - std::log(rng.uniform()) / alpha;
        if (z < beta) {
            return z;
        }
    }
    return alpha;
}

} // namespace

double truncated_normal(Rng& rng, double mean, double sd, double lower, double upper)
{
    if (!(lower < upper)) {
        throw std::invalid_argument("truncated normal requires lower < upper");
    }
    if (!std::isfinite(mean)) {
        throw std::invalid_argument("truncated normal requires a finite mean");
    }
    if (!(sd >= 0.0)) {
        throw std::invalid_argument("truncated normal requires sd >= 0");
    }
    if (sd == 0.0) {
        return clamp_open(mean, lower, upper);
    }
    if (!std::isfinite(sd)) {
        if (!std::isfinite(lower) || !std::isfinite(upper)) {
            throw std::invalid_argument("improper truncated normal");
        }
        return clamp_open(lower + rng.uniform() * (upper - lower), lower, upper);
    }

    const double alpha = (lower - mean) / sd;
    const double beta = (upper - mean) / sd;

    double z = 0.0;
    if (alpha >= 0.0) {
        z = upper_tail_draw(rng, alpha, beta);
    } else if (beta <= 0.0) {
        z = -upper_tail_draw(rng, -beta, -alpha);
    } else {
        const double p_alpha = normal_cdf(alpha);
        const double p_beta = normal_cdf(beta);
        const double u = p_alpha + rng.uniform() * (p_beta - p_alpha);
        z = normal_quantile(std::clamp(u, std::numeric_limits<double>::min(), std::nextafter(1.0, 0.0)));
    }
    return clamp_open(mean + sd * z, lower, upper);
}

} // namespace sifbhm
