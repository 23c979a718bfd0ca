#include "sifbhm/gibbs.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace sifbhm {

void SamplerConfig::validate() const
{
    if (n_chains < 1) {
        throw std::invalid_argument("sampler needs at least one chain");
    }
    if (!(n_burnin < n_iterations)) {
        throw std::invalid_argument("burn-in must be shorter than the chain");
    }
    if (thin < 1) {
        throw std::invalid_argument("thin must be >= 1");
    }
    if (!(rhat_threshold > 0.0) || !(ess_threshold > 0.0)) {
        throw std::invalid_argument("convergence thresholds must be positive");
    }
}

std::string SamplerConfig::canonical() const
{
    std::ostringstream os;
    os.precision(17);
    os << "n_chains=" << n_chains << ";n_iterations=" << n_iterations << ";n_burnin=" << n_burnin
       << ";thin=" << thin << ";seed=" << seed << ";rhat_threshold=" << rhat_threshold
       << ";ess_threshold=" << ess_threshold;
    return os.str();
}

namespace {

Eigen::VectorXd current_mu(const ChainState& state, const ModelData& data)
{
    Eigen::VectorXd mu = data.design() * state.coeffs.beta_vector();
    mu.array() += state.coeffs.a;
    return mu;
}

void check_dimensions(const ChainState& state, const ModelData& data)
{
    if (state.latent.x.size() != data.day_count() || state.latent.y.size() != data.sounding_count() ||
        state.vars.nu.size() != data.day_count()) {
        throw std::invalid_argument("chain state does not match the data dimensions");
    }
    if (state.coeffs.harmonics() != data.harmonics()) {
        throw std::invalid_argument("chain state harmonic count does not match the data");
    }
}

void update_betas_normal(ChainState& state, const ModelData& data, const SeasonalPriorSpec& prior)
{
    const double inv_delta = 1.0 / state.vars.delta;
    const Eigen::VectorXd b = prior.mean_vector();
    const Eigen::VectorXd s_inv = prior.variance_vector().cwiseInverse();

    Eigen::MatrixXd precision = data.gram() * inv_delta;
    precision.diagonal() += s_inv;

    Eigen::VectorXd rhs = s_inv.cwiseProduct(b);
    if (data.day_count() > 0) {
        Eigen::VectorXd shifted = Eigen::Map<const Eigen::VectorXd>(state.latent.x.data(),
                                                                    static_cast<Eigen::Index>(data.day_count()));
        shifted.array() -= state.coeffs.a;
        rhs += data.design().transpose() * shifted * inv_delta;
    }

    const Eigen::LLT<Eigen::MatrixXd> llt(precision);
    if (llt.info() != Eigen::Success || !precision.allFinite()) {
        throw IllConditionedDesign("beta full-conditional precision is not positive definite");
    }
    const Eigen::VectorXd mean = llt.solve(rhs);

    Eigen::VectorXd noise(mean.size());
    for (Eigen::Index j = 0; j < noise.size(); ++j) {
        noise[j] = state.rng.standard_normal();
    }
    // Precision = L L^T, so L^-T z has covariance precision^-1.
    const Eigen::VectorXd offset = llt.matrixU().solve(noise);
    const Eigen::VectorXd draw = mean + offset;
    if (!draw.allFinite()) {
        throw IllConditionedDesign("beta full-conditional draw is not finite");
    }
    state.coeffs.set_beta_vector(draw);
}

// Flat (lower, upper) priors: one truncated-normal update per coefficient.
void update_betas_uniform(ChainState& state, const ModelData& data, const SeasonalPriorSpec& prior)
{
    Eigen::VectorXd beta = state.coeffs.beta_vector();
    const auto& design = data.design();
    Eigen::VectorXd residual(static_cast<Eigen::Index>(data.day_count()));
    for (std::size_t d = 0; d < data.day_count(); ++d) {
        residual[static_cast<Eigen::Index>(d)] = state.latent.x[d] - state.coeffs.a;
    }
    residual -= design * beta;

    for (Eigen::Index j = 0; j < beta.size(); ++j) {
        const double norm2 = data.gram()(j, j);
        if (norm2 <= 0.0) {
            beta[j] = prior.beta_lower + state.rng.uniform() * (prior.beta_upper - prior.beta_lower);
            continue;
        }
        const auto column = design.col(j);
        residual += column * beta[j];
        const double mean = column.dot(residual) / norm2;
        const double sd = std::sqrt(state.vars.delta / norm2);
        beta[j] = truncated_normal(state.rng, mean, sd, prior.beta_lower, prior.beta_upper);
        residual -= column * beta[j];
    }
    state.coeffs.set_beta_vector(beta);
}

} // namespace

ChainState initial_state(const ModelData& data, const SeasonalPriorSpec& prior, Rng rng)
{
    ChainState s{.latent = {},
                 .coeffs = SeasonalCoefficients::zero(prior.harmonics()),
                 .vars = {},
                 .iteration = 0,
                 .rng = std::move(rng)};
    if (prior.beta_family == BetaPriorFamily::normal) {
        s.coeffs.set_beta_vector(prior.mean_vector());
    }
    s.coeffs.a = std::clamp(0.0, std::nextafter(prior.a_lower, prior.a_upper),
                            std::nextafter(prior.a_upper, prior.a_lower));
    s.vars.nu.assign(data.day_count(), 1.0);
    s.vars.delta = 1.0;

    s.latent.y.assign(data.z().begin(), data.z().end());
    s.latent.x.resize(data.day_count());
    for (std::size_t d = 0; d < data.day_count(); ++d) {
        double wsum = 0.0;
        double wz = 0.0;
        for (std::size_t i = data.begin(d); i < data.end(d); ++i) {
            wsum += 1.0 / data.tau(i);
            wz += data.z(i) / data.tau(i);
        }
        s.latent.x[d] = wsum > 0.0 ? wz / wsum : 0.0;
    }
    return s;
}

void update_latent_y(ChainState& state, const ModelData& data)
{
    check_dimensions(state, data);
    for (std::size_t d = 0; d < data.day_count(); ++d) {
        const double inv_nu = 1.0 / state.vars.nu[d];
        const double x_over_nu = state.latent.x[d] * inv_nu;
        for (std::size_t i = data.begin(d); i < data.end(d); ++i) {
            const double inv_tau = 1.0 / data.tau(i);
            const double var = 1.0 / (inv_tau + inv_nu);
            const double mean = var * (data.z(i) * inv_tau + x_over_nu);
            state.latent.y[i] = mean + std::sqrt(var) * state.rng.standard_normal();
        }
    }
}

void update_x(ChainState& state, const ModelData& data)
{
    check_dimensions(state, data);
    const Eigen::VectorXd mu = current_mu(state, data);
    const double inv_delta = 1.0 / state.vars.delta;
    for (std::size_t d = 0; d < data.day_count(); ++d) {
        const double inv_nu = 1.0 / state.vars.nu[d];
        double ysum = 0.0;
        for (std::size_t i = data.begin(d); i < data.end(d); ++i) {
            ysum += state.latent.y[i];
        }
        const double var = 1.0 / (static_cast<double>(data.count(d)) * inv_nu + inv_delta);
        const double mean = var * (ysum * inv_nu + mu[static_cast<Eigen::Index>(d)] * inv_delta);
        state.latent.x[d] = mean + std::sqrt(var) * state.rng.standard_normal();
    }
}

void update_betas(ChainState& state, const ModelData& data, const SeasonalPriorSpec& prior)
{
    check_dimensions(state, data);
    if (prior.beta_family == BetaPriorFamily::uniform) {
        update_betas_uniform(state, data, prior);
    } else {
        update_betas_normal(state, data, prior);
    }
}

void update_a(ChainState& state, const ModelData& data, const SeasonalPriorSpec& prior)
{
    check_dimensions(state, data);
    const std::size_t n_days = data.day_count();
    if (n_days == 0) {
        state.coeffs.a = truncated_normal(state.rng, 0.0, std::numeric_limits<double>::infinity(), prior.a_lower,
                                          prior.a_upper);
        return;
    }
    const Eigen::VectorXd seasonal = data.design() * state.coeffs.beta_vector();
    double residual_sum = 0.0;
    for (std::size_t d = 0; d < n_days; ++d) {
        residual_sum += state.latent.x[d] - seasonal[static_cast<Eigen::Index>(d)];
    }
    const double days = static_cast<double>(n_days);
    const double mean = residual_sum / days;
    const double sd = std::sqrt(state.vars.delta / days);
    state.coeffs.a = truncated_normal(state.rng, mean, sd, prior.a_lower, prior.a_upper);
}

void update_nu(ChainState& state, const ModelData& data, const SeasonalPriorSpec& prior)
{
    check_dimensions(state, data);
    for (std::size_t d = 0; d < data.day_count(); ++d) {
        double ss = 0.0;
        for (std::size_t i = data.begin(d); i < data.end(d); ++i) {
            const double r = state.latent.y[i] - state.latent.x[d];
            ss += r * r;
        }
        const double shape = 1.0 + 0.5 * static_cast<double>(data.count(d));
        const double rate = prior.precision_rate + 0.5 * ss;
        state.vars.nu[d] = 1.0 / state.rng.gamma(shape, rate);
    }
}

void update_delta(ChainState& state, const ModelData& data, const SeasonalPriorSpec& prior)
{
    check_dimensions(state, data);
    const Eigen::VectorXd mu = current_mu(state, data);
    double ss = 0.0;
    for (std::size_t d = 0; d < data.day_count(); ++d) {
        const double r = state.latent.x[d] - mu[static_cast<Eigen::Index>(d)];
        ss += r * r;
    }
    const double shape = 1.0 + 0.5 * static_cast<double>(data.day_count());
    const double rate = prior.precision_rate + 0.5 * ss;
    state.vars.delta = 1.0 / state.rng.gamma(shape, rate);
}

void gibbs_sweep(ChainState& state, const ModelData& data, const SeasonalPriorSpec& prior, const UpdateMask& mask)
{
    if (mask.latent_y) {
        update_latent_y(state, data);
    }
    if (mask.x) {
        update_x(state, data);
    }
    if (mask.betas) {
        update_betas(state, data, prior);
    }
    if (mask.a) {
        update_a(state, data, prior);
    }
    if (mask.nu) {
        update_nu(state, data, prior);
    }
    if (mask.delta) {
        update_delta(state, data, prior);
    }
    ++state.iteration;
}

std::string TraceLayout::name(std::size_t q) const
{
    if (q < days) {
        return "x[" + std::to_string(q) + "]";
    }
    if (q == a()) {
        return "a";
    }
    if (q == delta()) {
        return "delta";
    }
    return beta_names(harmonics).at(q - days - 1);
}

ChainSeries PosteriorDraws::series(std::size_t quantity) const
{
    ChainSeries out;
    for (const auto& chain : draws) {
        out.emplace_back(chain.at(quantity));
    }
    return out;
}

std::vector<double> PosteriorDraws::pooled(std::size_t quantity) const
{
    std::vector<double> out;
    for (const auto& chain : draws) {
        const auto& s = chain.at(quantity);
        out.insert(out.end(), s.begin(), s.end());
    }
    return out;
}

PosteriorDraws sample_posterior(const ModelData& data, const SeasonalPriorSpec& prior, const SamplerConfig& config,
                                std::initializer_list<std::int64_t> stream, const SamplingOptions& options)
{
    config.validate();
    prior.validate();
    if (prior.harmonics() != data.harmonics()) {
        throw std::invalid_argument("prior harmonic count does not match the data");
    }

    PosteriorDraws out;
    out.layout = TraceLayout{data.day_count(), data.harmonics()};
    const std::size_t n_quantities = out.layout.size();
    const std::size_t retained = config.retained_per_chain();

    std::vector<std::int64_t> ids(stream);
    ids.push_back(0);
    for (std::size_t c = 0; c < config.n_chains; ++c) {
        ids.back() = static_cast<std::int64_t>(c);
        const Rng rng = Rng::for_stream(config.seed, ids);

        ChainState state = options.initial ? *options.initial : initial_state(data, prior, rng);
        state.rng = rng;
        state.iteration = 0;

        std::vector<std::vector<double>> trace(n_quantities);
        for (auto& series : trace) {
            series.reserve(retained);
        }
        for (std::size_t it = 0; it < config.n_iterations; ++it) {
            gibbs_sweep(state, data, prior, options.mask);
            if (it < config.n_burnin || (it - config.n_burnin) % config.thin != 0) {
                continue;
            }
            for (std::size_t d = 0; d < data.day_count(); ++d) {
                trace[out.layout.x(d)].push_back(state.latent.x[d]);
            }
            trace[out.layout.a()].push_back(state.coeffs.a);
            const auto beta = state.coeffs.beta_vector();
            for (Eigen::Index j = 0; j < beta.size(); ++j) {
                trace[out.layout.beta(static_cast<std::size_t>(j))].push_back(beta[j]);
            }
            trace[out.layout.delta()].push_back(state.vars.delta);
        }
        out.draws.push_back(std::move(trace));
    }
    return out;
}

SeasonalCoefficients PosteriorSummary::coefficient_means() const
{
    if (coefficients.size() < 6) {
        throw std::logic_error("summary has no coefficient entries");
    }
    const auto n_beta = static_cast<Eigen::Index>(coefficients.size() - 2);
    Eigen::VectorXd beta(n_beta);
    for (Eigen::Index j = 0; j < n_beta; ++j) {
        beta[j] = coefficients[static_cast<std::size_t>(j) + 1].mean;
    }
    return SeasonalCoefficients::from_beta_vector(coefficients.front().mean, beta);
}

Eigen::VectorXd PosteriorSummary::beta_variances() const
{
    const auto n_beta = static_cast<Eigen::Index>(coefficients.size() - 2);
    Eigen::VectorXd v(n_beta);
    for (Eigen::Index j = 0; j < n_beta; ++j) {
        v[j] = coefficients[static_cast<std::size_t>(j) + 1].variance;
    }
    return v;
}

PosteriorSummary summarize(const PosteriorDraws& draws, const ModelData& data, const SamplerConfig& config)
{
    const auto& layout = draws.layout;
    if (layout.days != data.day_count()) {
        throw std::invalid_argument("draws do not match the data");
    }
    PosteriorSummary out;
    out.retained_draws = draws.chain_count() * draws.draws_per_chain();
    out.max_rhat = 0.0;
    out.min_ess = std::numeric_limits<double>::infinity();

    auto diagnose = [&](std::size_t q, double& rhat, double& ess) {
        const auto series = draws.series(q);
        rhat = split_rhat(series);
        ess = effective_sample_size(series);
        out.max_rhat = std::max(out.max_rhat, rhat);
        out.min_ess = std::min(out.min_ess, ess);
    };

    for (std::size_t d = 0; d < layout.days; ++d) {
        const auto s = summarize_draws(draws.pooled(layout.x(d)));
        DayPosterior day{.t = data.t(d), .x_mean = s.mean, .x_sd = s.sd, .x_q2_5 = s.q2_5, .x_q97_5 = s.q97_5};
        diagnose(layout.x(d), day.rhat, day.ess);
        out.days.push_back(day);
    }
    for (std::size_t q = layout.a(); q < layout.size(); ++q) {
        const auto s = summarize_draws(draws.pooled(q));
        ScalarPosterior p{.name = layout.name(q), .mean = s.mean, .variance = s.sd * s.sd};
        diagnose(q, p.rhat, p.ess);
        out.coefficients.push_back(p);
    }
    out.converged = out.max_rhat <= config.rhat_threshold && out.min_ess >= config.ess_threshold;
    return out;
}

PosteriorSummary run_chain(const CellYearDataset& data, const SeasonalPriorSpec& prior, const SamplerConfig& config)
{
    if (data.days.empty()) {
        throw std::invalid_argument("run_chain needs at least one overpass day");
    }
    data.validate();
    const ModelData model(data.days, prior.harmonics());
    const auto draws = sample_posterior(model, prior, config,
                                        {data.cell.lat_index, data.cell.lon_index, data.year});
    return summarize(draws, model, config);
}

} // namespace sifbhm
