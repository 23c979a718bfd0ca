#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "oracles.hpp"
#include "sifbhm/diagnostics.hpp"

using namespace sifbhm;

namespace {

ChainSeries view(const std::vector<std::vector<double>>& chains)
{
    ChainSeries out;
    for (const auto& c : chains) {
        out.emplace_back(c);
    }
    return out;
}

// Same deterministic series as tests/reference/diagnostics_reference.py.
std::vector<std::vector<double>> reference_series(int chains, int draws)
{
    std::vector<std::vector<double>> out(static_cast<std::size_t>(chains));
    for (int c = 0; c < chains; ++c) {
        for (int i = 0; i < draws; ++i) {
            out[c].push_back(std::sin(1.3 * i + 0.7 * c) + 0.3 * std::cos(0.11 * i * (c + 1)) + 0.1 * c);
        }
    }
    return out;
}

std::vector<std::vector<double>> ar1_chains(int chains, int draws, double phi, std::uint64_t seed)
{
    std::mt19937_64 gen(seed);
    std::normal_distribution<double> n01;
    std::vector<std::vector<double>> out(static_cast<std::size_t>(chains));
    for (auto& c : out) {
        double x = n01(gen) / std::sqrt(1.0 - phi * phi);
        for (int i = 0; i < draws; ++i) {
            x = phi * x + n01(gen);
            c.push_back(x);
        }
    }
    return out;
}

} // namespace

TEST_CASE("constant draws")
{
    const std::vector<double> ones(10, 1.0);
    const auto s = summarize_draws(ones);
    CHECK(s.mean == 1.0);
    CHECK(s.sd == 0.0);
    CHECK(s.q2_5 == 1.0);
    CHECK(s.q97_5 == 1.0);
    CHECK(s.count == 10);
}

TEST_CASE("fewer than ten draws are rejected")
{
    const std::vector<double> four{1, 1, 1, 1};
    CHECK_THROWS_AS(summarize_draws(four), std::invalid_argument);
    CHECK_THROWS_AS(summarize_draws(std::vector<double>(9, 0.0)), std::invalid_argument);
    CHECK_NOTHROW(summarize_draws(std::vector<double>(10, 0.0)));
}

TEST_CASE("type-7 quantiles on the 1..10000 grid")
{
    std::vector<double> grid(10000);
    for (int i = 0; i < 10000; ++i) {
        grid[i] = i + 1;
    }
    // h = (n - 1) p; value = x[floor h] + frac(h) (x[floor h + 1] - x[floor h]) with 0-based x.
    auto by_hand = [&](double p) {
        const double h = 9999.0 * p;
        const auto lo = static_cast<std::size_t>(std::floor(h));
        return grid[lo] + (h - std::floor(h)) * (grid[lo + 1] - grid[lo]);
    };
    CHECK(by_hand(0.025) == doctest::Approx(250.975).epsilon(1e-12));
    CHECK(quantile_type7(grid, 0.025) == doctest::Approx(250.975).epsilon(1e-12));
    CHECK(quantile_type7(grid, 0.975) == doctest::Approx(by_hand(0.975)).epsilon(1e-12));
    CHECK(quantile_type7(grid, 0.0) == 1.0);
    CHECK(quantile_type7(grid, 1.0) == 10000.0);

    std::vector<double> shuffled = grid;
    std::shuffle(shuffled.begin(), shuffled.end(), std::mt19937_64(3));
    const auto s = summarize_draws(shuffled);
    CHECK(s.q2_5 == doctest::Approx(250.975).epsilon(1e-12));
    CHECK(s.mean == doctest::Approx(5000.5).epsilon(1e-12));
    // Sample sd of 1..n with n - 1 denominator: sqrt(n (n + 1) / 12).
    CHECK(s.sd == doctest::Approx(std::sqrt(10000.0 * 10001.0 / 12.0)).epsilon(1e-12));
}

TEST_CASE("quantile argument checks")
{
    const std::vector<double> v{1, 2, 3};
    CHECK_THROWS_AS(quantile_type7(std::vector<double>{}, 0.5), std::invalid_argument);
    CHECK_THROWS_AS(quantile_type7(v, -0.1), std::invalid_argument);
    CHECK_THROWS_AS(quantile_type7(v, 1.1), std::invalid_argument);
}

TEST_CASE("identical chains give R-hat of exactly one")
{
    const std::vector<std::vector<double>> chains(2, std::vector<double>(50, 0.7));
    CHECK(split_rhat(view(chains)) == 1.0);
    CHECK(effective_sample_size(view(chains)) == 100.0);
}

TEST_CASE("R-hat and ESS match the numpy reference")
{
    struct Case
    {
        int chains;
        int draws;
        double rhat;
        double ess;
    };
    // Output of tests/reference/diagnostics_reference.py.
    const Case cases[] = {
        {2, 100, 0.998765950294185, 123.752119595643},
        {3, 501, 1.0111547830374, 898.460729775677},
        {4, 1000, 1.01954626131447, 2366.9991995699},
    };
    for (const auto& c : cases) {
        const auto chains = reference_series(c.chains, c.draws);
        CHECK(split_rhat(view(chains)) == doctest::Approx(c.rhat).epsilon(1e-9));
        CHECK(effective_sample_size(view(chains)) == doctest::Approx(c.ess).epsilon(1e-9));
    }
}

TEST_CASE("independent draws are well mixed")
{
    const auto chains = ar1_chains(4, 2000, 0.0, 1);
    CHECK(split_rhat(view(chains)) < 1.01);
    const double ess = effective_sample_size(view(chains));
    CHECK(ess > 0.85 * 8000);
    CHECK(ess < 1.15 * 8000);
}

TEST_CASE("AR(1) chains recover the integrated autocorrelation time")
{
    const double phi = 0.9;
    const auto chains = ar1_chains(4, 20000, phi, 2);
    const double expected = 80000.0 * (1.0 - phi) / (1.0 + phi);
    const double ess = effective_sample_size(view(chains));
    CHECK(ess > 0.8 * expected);
    CHECK(ess < 1.2 * expected);
}

TEST_CASE("a displaced chain inflates R-hat")
{
    auto chains = ar1_chains(3, 1000, 0.5, 3);
    for (double& x : chains[2]) {
        x += 3.0;
    }
    CHECK(split_rhat(view(chains)) > 1.1);
}

TEST_CASE("a chain with different spread is caught by the folded statistic")
{
    auto chains = ar1_chains(4, 2000, 0.0, 4);
    for (double& x : chains[3]) {
        x *= 4.0;
    }
    CHECK(split_rhat(view(chains)) > 1.05);
}

TEST_CASE("a trending chain is caught by splitting")
{
    std::vector<std::vector<double>> chains = ar1_chains(1, 2000, 0.0, 5);
    for (std::size_t i = 0; i < chains[0].size(); ++i) {
        chains[0][i] += 0.005 * static_cast<double>(i);
    }
    CHECK(split_rhat(view(chains)) > 1.1);
}

TEST_CASE("chain shape errors")
{
    CHECK_THROWS_AS(split_rhat({}), std::invalid_argument);
    const std::vector<std::vector<double>> ragged{{1, 2, 3, 4, 5}, {1, 2, 3, 4}};
    CHECK_THROWS_AS(split_rhat(view(ragged)), std::invalid_argument);
    const std::vector<std::vector<double>> short_chain{{1, 2, 3}};
    CHECK_THROWS_AS(effective_sample_size(view(short_chain)), std::invalid_argument);
}

TEST_CASE("diagnostics are invariant to chain ordering")
{
    auto chains = ar1_chains(4, 500, 0.6, 6);
    const double r = split_rhat(view(chains));
    const double e = effective_sample_size(view(chains));
    std::reverse(chains.begin(), chains.end());
    CHECK(split_rhat(view(chains)) == doctest::Approx(r).epsilon(1e-12));
    CHECK(effective_sample_size(view(chains)) == doctest::Approx(e).epsilon(1e-12));
}
