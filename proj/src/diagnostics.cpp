#include "sifbhm/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "sifbhm/random.hpp"

namespace sifbhm {

namespace {

using Matrix = std::vector<std::vector<double>>;

void check_chains(const ChainSeries& chains)
{
    if (chains.empty()) {
        throw std::invalid_argument("diagnostics need at least one chain");
    }
    const std::size_t n = chains.front().size();
    for (const auto& c : chains) {
        if (c.size() != n) {
            throw std::invalid_argument("chains must have equal length");
        }
    }
    if (n < 4) {
        throw std::invalid_argument("diagnostics need at least 4 draws per chain");
    }
}

// Each chain becomes two half-chains; an odd middle draw is dropped.
Matrix split(const ChainSeries& chains)
{
    const std::size_t half = chains.front().size() / 2;
    const std::size_t n = chains.front().size();
    Matrix out;
    for (const auto& c : chains) {
        out.emplace_back(c.begin(), c.begin() + static_cast<std::ptrdiff_t>(half));
        out.emplace_back(c.begin() + static_cast<std::ptrdiff_t>(n - half), c.end());
    }
    return out;
}

Matrix rank_normalize(const Matrix& chains)
{
    std::vector<std::pair<double, std::size_t>> pooled;
    for (std::size_t c = 0; c < chains.size(); ++c) {
        for (std::size_t i = 0; i < chains[c].size(); ++i) {
            pooled.emplace_back(chains[c][i], c * chains[c].size() + i);
        }
    }
    std::sort(pooled.begin(), pooled.end());

    const double total = static_cast<double>(pooled.size());
    std::vector<double> ranks(pooled.size());
    for (std::size_t i = 0; i < pooled.size();) {
        std::size_t j = i;
        while (j + 1 < pooled.size() && pooled[j + 1].first == pooled[i].first) {
            ++j;
        }
        const double avg_rank = 0.5 * static_cast<double>(i + j) + 1.0;
        for (std::size_t k = i; k <= j; ++k) {
            ranks[pooled[k].second] = avg_rank;
        }
        i = j + 1;
    }

    Matrix out = chains;
    for (std::size_t c = 0; c < chains.size(); ++c) {
        for (std::size_t i = 0; i < chains[c].size(); ++i) {
            const double r = ranks[c * chains[c].size() + i];
            out[c][i] = normal_quantile((r - 0.375) / (total + 0.25));
        }
    }
    return out;
}

double mean_of(const std::vector<double>& v)
{
    return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

struct VarianceParts
{
    double within = 0.0;    // W
    double var_plus = 0.0;  // (n-1)/n W + B/n
};

VarianceParts variance_parts(const Matrix& chains)
{
    const std::size_t m = chains.size();
    const auto n = static_cast<double>(chains.front().size());
    std::vector<double> means(m);
    double within = 0.0;
    for (std::size_t c = 0; c < m; ++c) {
        means[c] = mean_of(chains[c]);
        double ss = 0.0;
        for (double x : chains[c]) {
            ss += (x - means[c]) * (x - means[c]);
        }
        within += ss / (n - 1.0);
    }
    within /= static_cast<double>(m);

    double between_over_n = 0.0;
    if (m > 1) {
        const double grand = mean_of(means);
        for (double mu : means) {
            between_over_n += (mu - grand) * (mu - grand);
        }
        between_over_n /= static_cast<double>(m - 1);
    }
    return {within, (n - 1.0) / n * within + between_over_n};
}

double basic_rhat(const Matrix& chains)
{
    const auto parts = variance_parts(chains);
    if (parts.within <= 0.0) {
        return parts.var_plus <= 0.0 ? 1.0 : std::numeric_limits<double>::infinity();
    }
    return std::sqrt(parts.var_plus / parts.within);
}

bool all_identical(const ChainSeries& chains)
{
    const double first = chains.front().front();
    for (const auto& c : chains) {
        for (double x : c) {
            if (x != first) {
                return false;
            }
        }
    }
    return true;
}

double autocovariance(const std::vector<double>& x, double mean, std::size_t lag)
{
    double acc = 0.0;
    for (std::size_t i = 0; i + lag < x.size(); ++i) {
        acc += (x[i] - mean) * (x[i + lag] - mean);
    }
    return acc / static_cast<double>(x.size());
}

double ess_of(const Matrix& chains)
{
    const std::size_t m = chains.size();
    const std::size_t n = chains.front().size();
    const double total = static_cast<double>(m * n);
    const auto parts = variance_parts(chains);
    if (parts.var_plus <= 0.0) {
        return total;
    }

    std::vector<double> means(m);
    for (std::size_t c = 0; c < m; ++c) {
        means[c] = mean_of(chains[c]);
    }
    auto mean_acov = [&](std::size_t lag) {
        double acc = 0.0;
        for (std::size_t c = 0; c < m; ++c) {
            acc += autocovariance(chains[c], means[c], lag);
        }
        return acc / static_cast<double>(m);
    };
    auto rho = [&](std::size_t lag) { return 1.0 - (parts.within - mean_acov(lag)) / parts.var_plus; };

    // Geyer's initial positive sequence.
    std::vector<double> rho_hat(n + 1, 0.0);
    rho_hat[0] = 1.0;
    double rho_even = 1.0;
    double rho_odd = rho(1);
    rho_hat[1] = rho_odd;
    std::size_t t = 1;
    while (t + 3 < n && rho_even + rho_odd > 0.0) {
        rho_even = rho(t + 1);
        rho_odd = rho(t + 2);
        if (rho_even + rho_odd >= 0.0) {
            rho_hat[t + 1] = rho_even;
            rho_hat[t + 2] = rho_odd;
        }
        t += 2;
    }
    const std::size_t max_t = t >= 2 ? t - 2 : 0;
    if (rho_even > 0.0 && max_t + 1 <= n) {
        rho_hat[max_t + 1] = rho_even;
    }

    // Monotone sequence.
    for (std::size_t k = 1; k + 2 <= max_t; k += 2) {
        const double prev = rho_hat[k - 1] + rho_hat[k];
        if (rho_hat[k + 1] + rho_hat[k + 2] > prev) {
            rho_hat[k + 1] = prev / 2.0;
            rho_hat[k + 2] = prev / 2.0;
        }
    }

    double tau = -1.0 + rho_hat[max_t + 1];
    for (std::size_t k = 0; k <= max_t; ++k) {
        tau += 2.0 * rho_hat[k];
    }
    tau = std::max(tau, 1.0 / std::log10(total));
    return total / tau;
}

} // namespace

double quantile_type7(std::span<const double> sorted, double p)
{
    if (sorted.empty()) {
        throw std::invalid_argument("quantile of an empty sample");
    }
    if (!(p >= 0.0 && p <= 1.0)) {
        throw std::invalid_argument("quantile probability outside [0, 1]");
    }
    const double h = static_cast<double>(sorted.size() - 1) * p;
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
    const double frac = h - static_cast<double>(lo);
    if (frac == 0.0) {
        return sorted[lo];
    }
    return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

DrawSummary summarize_draws(std::span<const double> draws)
{
    if (draws.size() < kMinimumRetainedDraws) {
        throw std::invalid_argument("posterior summary needs at least 10 retained draws");
    }
    std::vector<double> sorted(draws.begin(), draws.end());
    std::sort(sorted.begin(), sorted.end());

    DrawSummary s;
    s.count = sorted.size();
    const auto n = static_cast<double>(sorted.size());
    s.mean = std::accumulate(sorted.begin(), sorted.end(), 0.0) / n;
    double ss = 0.0;
    for (double x : sorted) {
        ss += (x - s.mean) * (x - s.mean);
    }
    s.sd = std::sqrt(ss / (n - 1.0));
    s.q2_5 = quantile_type7(sorted, 0.025);
    s.q97_5 = quantile_type7(sorted, 0.975);
    return s;
}

double split_rhat(const ChainSeries& chains)
{
    check_chains(chains);
    if (all_identical(chains)) {
        return 1.0;
    }
    const Matrix halves = split(chains);
    const double bulk = basic_rhat(rank_normalize(halves));

    std::vector<double> pooled;
    for (const auto& c : halves) {
        pooled.insert(pooled.end(), c.begin(), c.end());
    }
    std::sort(pooled.begin(), pooled.end());
    const double median = quantile_type7(pooled, 0.5);
    Matrix folded = halves;
    for (auto& c : folded) {
        for (double& x : c) {
            x = std::abs(x - median);
        }
    }
    const double tail = basic_rhat(rank_normalize(folded));
    return std::max(bulk, tail);
}

double effective_sample_size(const ChainSeries& chains)
{
    check_chains(chains);
    const double total = static_cast<double>(chains.size() * chains.front().size());
    if (all_identical(chains)) {
        return total;
    }
    return ess_of(rank_normalize(split(chains)));
}

} // namespace sifbhm
