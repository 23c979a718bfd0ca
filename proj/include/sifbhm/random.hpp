#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>
#include <span>

namespace sifbhm {

/// Seeded generator carried by each chain. Copying a Rng copies its full state.
class Rng
{
public:
    explicit Rng(std::uint64_t seed = 0);

    /// Independent stream keyed by a base seed plus identifiers (cell, year, chain...).
    static Rng for_stream(std::uint64_t seed, std::span<const std::int64_t> stream_ids);
    static Rng for_stream(std::uint64_t seed, std::initializer_list<std::int64_t> stream_ids)
    {
        return for_stream(seed, std::span<const std::int64_t>(stream_ids.begin(), stream_ids.size()));
    }

    /// Uniform on the open interval (0, 1).
    double uniform();
    double standard_normal();
    double normal(double mean, double sd) { return mean + sd * standard_normal(); }
    double gamma(double shape, double rate);

    std::mt19937_64& engine() { return engine_; }

    bool operator==(const Rng& other) const;

private:
    std::mt19937_64 engine_;
    std::normal_distribution<double> normal_;
};

double normal_cdf(double z);
double normal_upper_tail(double z);
double normal_quantile(double p);

/// Draw from N(mean, sd^2) restricted to the open interval (lower, upper) by inverse CDF.
/// Works in whichever tail keeps the probabilities representable and falls back to an
/// exponential tail approximation once both bound probabilities underflow.
double truncated_normal(Rng& rng, double mean, double sd, double lower, double upper);

} // namespace sifbhm
