#pragma once

#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "sifbhm/diagnostics.hpp"
#include "sifbhm/model.hpp"
#include "sifbhm/random.hpp"

namespace sifbhm {

struct SamplerConfig
{
    std::size_t n_chains = 3;
    std::size_t n_iterations = 5000;
    std::size_t n_burnin = 2000;
    std::size_t thin = 1;
    std::uint64_t seed = 0;
    double rhat_threshold = 1.05;
    double ess_threshold = 400.0;

    void validate() const;
    std::size_t retained_per_chain() const { return (n_iterations - n_burnin + thin - 1) / thin; }
    /// Canonical `key=value;...` text, used for digests and resume checks.
    std::string canonical() const;
};

/// Raised when the beta full-conditional precision cannot be factorised.
class IllConditionedDesign : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

struct ChainState
{
    LatentState latent;
    SeasonalCoefficients coeffs;
    VarianceState vars;
    std::size_t iteration = 0;
    Rng rng;
};

/// beta at prior means (0 under flat priors), a = 0, all precisions 1, X_t at the
/// 1/tau-weighted mean of the day's retrievals, Y_it = Z_it.
ChainState initial_state(const ModelData& data, const SeasonalPriorSpec& prior, Rng rng);

// Full-conditional updates. Each redraws one block in place given the rest of `state`.
void update_latent_y(ChainState& state, const ModelData& data);
void update_x(ChainState& state, const ModelData& data);
void update_betas(ChainState& state, const ModelData& data, const SeasonalPriorSpec& prior);
void update_a(ChainState& state, const ModelData& data, const SeasonalPriorSpec& prior);
void update_nu(ChainState& state, const ModelData& data, const SeasonalPriorSpec& prior);
void update_delta(ChainState& state, const ModelData& data, const SeasonalPriorSpec& prior);

/// Blocks refreshed by a sweep. Freezing blocks is how the oracle tests pin variances and a.
struct UpdateMask
{
    bool latent_y = true;
    bool x = true;
    bool betas = true;
    bool a = true;
    bool nu = true;
    bool delta = true;
};

/// update_latent_y -> update_x -> update_betas -> update_a -> update_nu -> update_delta.
void gibbs_sweep(ChainState& state, const ModelData& data, const SeasonalPriorSpec& prior,
                 const UpdateMask& mask = {});

/// Index layout of traced scalars: X_t per day, then a, the betas, then delta.
struct TraceLayout
{
    std::size_t days = 0;
    int harmonics = kDefaultHarmonics;

    std::size_t x(std::size_t day) const { return day; }
    std::size_t a() const { return days; }
    std::size_t beta(std::size_t j) const { return days + 1 + j; }
    std::size_t delta() const { return days + 1 + beta_count(harmonics); }
    std::size_t size() const { return delta() + 1; }
    std::string name(std::size_t q) const;
};

/// Retained draws. `draws[chain][quantity]` holds one series per scalar.
struct PosteriorDraws
{
    TraceLayout layout;
    std::vector<std::vector<std::vector<double>>> draws;

    std::size_t chain_count() const { return draws.size(); }
    std::size_t draws_per_chain() const { return draws.empty() ? 0 : draws.front().front().size(); }
    ChainSeries series(std::size_t quantity) const;
    std::vector<double> pooled(std::size_t quantity) const;
};

struct SamplingOptions
{
    UpdateMask mask;
    /// Overrides the default initialisation of every chain (the rng is replaced per chain).
    const ChainState* initial = nullptr;
};

/// Runs `config.n_chains` chains; chain c draws from Rng::for_stream(seed, {stream..., c}).
PosteriorDraws sample_posterior(const ModelData& data, const SeasonalPriorSpec& prior, const SamplerConfig& config,
                                std::initializer_list<std::int64_t> stream, const SamplingOptions& options = {});

struct DayPosterior
{
    double t = 0.0;
    double x_mean = 0.0;
    double x_sd = 0.0;
    double x_q2_5 = 0.0;
    double x_q97_5 = 0.0;
    double rhat = 1.0;
    double ess = 0.0;
};

struct ScalarPosterior
{
    std::string name;
    double mean = 0.0;
    double variance = 0.0;
    double rhat = 1.0;
    double ess = 0.0;
};

struct PosteriorSummary
{
    std::vector<DayPosterior> days;
    /// a, beta0, beta1, beta2_1, beta3_1, ..., then delta.
    std::vector<ScalarPosterior> coefficients;
    std::size_t retained_draws = 0;
    double max_rhat = 1.0;
    double min_ess = 0.0;
    bool converged = false;

    SeasonalCoefficients coefficient_means() const;
    Eigen::VectorXd beta_variances() const;
};

PosteriorSummary summarize(const PosteriorDraws& draws, const ModelData& data, const SamplerConfig& config);

/// Full per-cell fit. Streams are keyed by (seed, cell, year, chain).
PosteriorSummary run_chain(const CellYearDataset& data, const SeasonalPriorSpec& prior, const SamplerConfig& config);

} // namespace sifbhm
