#include "sifbhm/model.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

#include "sifbhm/calendar.hpp"
#include "sifbhm/random.hpp"

namespace sifbhm {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
const double kLogTwoPi = std::log(2.0 * std::numbers::pi);

double normal_logpdf(double x, double mean, double variance)
{
    const double r = x - mean;
    return -0.5 * (kLogTwoPi + std::log(variance) + r * r / variance);
}

// Gamma(shape 1, rate) density of a precision, i.e. Exp(rate).
double exponential_logpdf(double precision, double rate)
{
    return std::log(rate) - rate * precision;
}

} // namespace

SoundingRecord SoundingRecord::at(double latitude, double longitude, double epoch_s, double sif, double variance,
                                  int quality_flag)
{
    SoundingRecord r;
    r.latitude = latitude;
    r.longitude = longitude;
    r.time = epoch_s;
    r.day_of_year = fractional_day_of_year(epoch_s);
    r.sif = sif;
    r.retrieval_variance = variance;
    r.quality_flag = quality_flag;
    return r;
}

void SoundingRecord::validate() const
{
    if (!std::isfinite(latitude) || !std::isfinite(longitude) || !std::isfinite(time) || !std::isfinite(sif)) {
        throw std::invalid_argument("sounding has non-finite fields");
    }
    if (!(retrieval_variance > 0.0) || !std::isfinite(retrieval_variance)) {
        throw std::invalid_argument("sounding retrieval variance must be positive");
    }
    if (quality_flag < 0 || quality_flag > 2) {
        throw std::invalid_argument("sounding quality flag must be 0, 1 or 2");
    }
    if (!(day_of_year >= 0.0 && day_of_year < 366.0)) {
        throw std::invalid_argument("sounding day_of_year outside [0, 366)");
    }
    if (std::abs(day_of_year - fractional_day_of_year(time)) > 1e-6) {
        throw std::invalid_argument("sounding day_of_year inconsistent with time");
    }
}

bool CellId::in_bounds(double latitude, double longitude)
{
    return latitude >= -90.0 && latitude < 90.0 && longitude >= -180.0 && longitude < 180.0;
}

CellId CellId::containing(double latitude, double longitude)
{
    if (!in_bounds(latitude, longitude)) {
        throw std::out_of_range("coordinate outside the global grid");
    }
    CellId c{static_cast<int>(std::floor(latitude + 90.0)), static_cast<int>(std::floor(longitude + 180.0))};
    // floor(x + 90) can round up to 180 for latitudes a hair below 90.
    c.lat_index = std::min(c.lat_index, kRows - 1);
    c.lon_index = std::min(c.lon_index, kCols - 1);
    return c;
}

bool CellId::contains(double latitude, double longitude) const
{
    return in_bounds(latitude, longitude) && containing(latitude, longitude) == *this;
}

std::string to_string(const CellId& cell)
{
    return "(" + std::to_string(cell.lat_index) + ", " + std::to_string(cell.lon_index) + ")";
}

std::size_t CellYearDataset::sounding_count() const
{
    std::size_t n = 0;
    for (const auto& d : days) {
        n += d.soundings.size();
    }
    return n;
}

void CellYearDataset::validate() const
{
    if (!cell.valid()) {
        throw std::invalid_argument("cell index outside the global grid");
    }
    if (land_cover == 15 || land_cover == 16 || land_cover == 17) {
        throw std::invalid_argument("excluded land-cover class reached modelling");
    }
    for (std::size_t d = 0; d < days.size(); ++d) {
        const auto& day = days[d];
        if (day.soundings.empty()) {
            throw std::invalid_argument("overpass day without soundings");
        }
        if (d > 0 && !(day.t > days[d - 1].t)) {
            throw std::invalid_argument("overpass days must be strictly increasing");
        }
        const auto date = utc_day_number(day.soundings.front().time);
        for (const auto& s : day.soundings) {
            s.validate();
            if (!cell.contains(s.latitude, s.longitude)) {
                throw std::invalid_argument("sounding outside cell " + to_string(cell));
            }
            if (utc_day_number(s.time) != date) {
                throw std::invalid_argument("overpass day mixes calendar dates");
            }
        }
    }
}

std::size_t beta_count(int harmonics)
{
    return static_cast<std::size_t>(2 + 2 * harmonics);
}

std::vector<std::string> beta_names(int harmonics)
{
    std::vector<std::string> names{"beta0", "beta1"};
    for (int k = 1; k <= harmonics; ++k) {
        names.push_back("beta2_" + std::to_string(k));
        names.push_back("beta3_" + std::to_string(k));
    }
    return names;
}

SeasonalCoefficients SeasonalCoefficients::zero(int harmonics)
{
    if (harmonics < 1) {
        throw std::invalid_argument("harmonic count must be >= 1");
    }
    SeasonalCoefficients c;
    c.beta2.assign(harmonics, 0.0);
    c.beta3.assign(harmonics, 0.0);
    return c;
}

SeasonalCoefficients SeasonalCoefficients::from_beta_vector(double a, const Eigen::VectorXd& beta)
{
    if (beta.size() < 4 || beta.size() % 2 != 0) {
        throw std::invalid_argument("beta vector must have 2 + 2K entries");
    }
    auto c = zero(static_cast<int>((beta.size() - 2) / 2));
    c.a = a;
    c.set_beta_vector(beta);
    return c;
}

Eigen::VectorXd SeasonalCoefficients::beta_vector() const
{
    const int k_max = harmonics();
    Eigen::VectorXd v(beta_count(k_max));
    v[0] = beta0;
    v[1] = beta1;
    for (int k = 0; k < k_max; ++k) {
        v[2 + 2 * k] = beta2[k];
        v[3 + 2 * k] = beta3[k];
    }
    return v;
}

void SeasonalCoefficients::set_beta_vector(const Eigen::VectorXd& beta)
{
    if (static_cast<std::size_t>(beta.size()) != beta_count(harmonics())) {
        throw std::invalid_argument("beta vector length does not match harmonic count");
    }
    beta0 = beta[0];
    beta1 = beta[1];
    for (int k = 0; k < harmonics(); ++k) {
        beta2[k] = beta[2 + 2 * k];
        beta3[k] = beta[3 + 2 * k];
    }
}

void SeasonalCoefficients::validate() const
{
    if (beta2.empty() || beta2.size() != beta3.size()) {
        throw std::invalid_argument("seasonal coefficients need K >= 1 sine and cosine terms");
    }
    if (!(a > -1.0 && a < 1.0)) {
        throw std::invalid_argument("vertical shift a must lie in (-1, 1)");
    }
}

void VarianceState::validate() const
{
    for (double v : nu) {
        if (!(v > 0.0)) {
            throw std::invalid_argument("nu must be positive");
        }
    }
    if (!(delta > 0.0)) {
        throw std::invalid_argument("delta must be positive");
    }
}

SeasonalPriorSpec SeasonalPriorSpec::normal(const Eigen::VectorXd& means, const Eigen::VectorXd& variances)
{
    if (means.size() != variances.size() || means.size() < 4 || means.size() % 2 != 0) {
        throw std::invalid_argument("prior mean/variance vectors must both have 2 + 2K entries");
    }
    const int k_max = static_cast<int>((means.size() - 2) / 2);
    SeasonalPriorSpec p;
    p.beta0 = {means[0], variances[0]};
    p.beta1 = {means[1], variances[1]};
    for (int k = 0; k < k_max; ++k) {
        p.beta2.push_back({means[2 + 2 * k], variances[2 + 2 * k]});
        p.beta3.push_back({means[3 + 2 * k], variances[3 + 2 * k]});
    }
    p.validate();
    return p;
}

SeasonalPriorSpec SeasonalPriorSpec::uniform_betas(int harmonics)
{
    auto p = global_default(harmonics);
    p.beta_family = BetaPriorFamily::uniform;
    return p;
}

SeasonalPriorSpec SeasonalPriorSpec::global_default(int harmonics)
{
    const auto n = static_cast<Eigen::Index>(beta_count(harmonics));
    return normal(Eigen::VectorXd::Zero(n), Eigen::VectorXd::Constant(n, 0.25));
}

Eigen::VectorXd SeasonalPriorSpec::mean_vector() const
{
    Eigen::VectorXd v(beta_count(harmonics()));
    v[0] = beta0.mean;
    v[1] = beta1.mean;
    for (int k = 0; k < harmonics(); ++k) {
        v[2 + 2 * k] = beta2[k].mean;
        v[3 + 2 * k] = beta3[k].mean;
    }
    return v;
}

Eigen::VectorXd SeasonalPriorSpec::variance_vector() const
{
    Eigen::VectorXd v(beta_count(harmonics()));
    v[0] = beta0.variance;
    v[1] = beta1.variance;
    for (int k = 0; k < harmonics(); ++k) {
        v[2 + 2 * k] = beta2[k].variance;
        v[3 + 2 * k] = beta3[k].variance;
    }
    return v;
}

void SeasonalPriorSpec::validate() const
{
    if (beta2.empty() || beta2.size() != beta3.size()) {
        throw std::invalid_argument("prior needs K >= 1 sine and cosine entries");
    }
    const auto s = variance_vector();
    const auto b = mean_vector();
    for (Eigen::Index i = 0; i < s.size(); ++i) {
        if (!(s[i] > 0.0) || !std::isfinite(s[i]) || !std::isfinite(b[i])) {
            throw std::invalid_argument("prior variances must be positive and finite");
        }
    }
    if (!(precision_rate > 0.0)) {
        throw std::invalid_argument("precision prior rate must be positive");
    }
    if (!(a_lower < a_upper)) {
        throw std::invalid_argument("a bounds must satisfy lower < upper");
    }
    if (beta_family == BetaPriorFamily::uniform && !(beta_lower < beta_upper)) {
        throw std::invalid_argument("beta bounds must satisfy lower < upper");
    }
}

std::vector<double> fourier_basis(double t, int harmonics)
{
    if (harmonics < 1) {
        throw std::invalid_argument("fourier_basis requires K >= 1");
    }
    if (!std::isfinite(t)) {
        throw std::invalid_argument("fourier_basis requires finite t");
    }
    std::vector<double> row;
    row.reserve(beta_count(harmonics));
    row.push_back(1.0);
    row.push_back(t);
    for (int k = 1; k <= harmonics; ++k) {
        const double angle = 2.0 * k * std::numbers::pi * t / kSeasonalPeriodDays;
        row.push_back(std::sin(angle));
        row.push_back(std::cos(angle));
    }
    return row;
}

double seasonal_mean(const SeasonalCoefficients& coeffs, double t)
{
    const auto basis = fourier_basis(t, coeffs.harmonics());
    const auto beta = coeffs.beta_vector();
    double mu = coeffs.a;
    for (std::size_t j = 0; j < basis.size(); ++j) {
        mu += beta[static_cast<Eigen::Index>(j)] * basis[j];
    }
    return mu;
}

ModelData::ModelData(std::span<const OverpassDay> days, int harmonics)
  : harmonics_(harmonics)
{
    for (const auto& day : days) {
        t_.push_back(day.t);
        for (const auto& s : day.soundings) {
            z_.push_back(s.sif);
            tau_.push_back(s.retrieval_variance);
        }
        offsets_.push_back(z_.size());
    }
    finalize();
}

ModelData ModelData::from_arrays(std::vector<double> t, const std::vector<std::size_t>& counts,
                                 std::vector<double> z, std::vector<double> tau, int harmonics)
{
    if (t.size() != counts.size() || z.size() != tau.size()) {
        throw std::invalid_argument("model data arrays have mismatched lengths");
    }
    ModelData m;
    m.harmonics_ = harmonics;
    m.t_ = std::move(t);
    for (auto c : counts) {
        m.offsets_.push_back(m.offsets_.back() + c);
    }
    if (m.offsets_.back() != z.size()) {
        throw std::invalid_argument("per-day counts do not sum to the sounding count");
    }
    m.z_ = std::move(z);
    m.tau_ = std::move(tau);
    m.finalize();
    return m;
}

void ModelData::finalize()
{
    for (double tau : tau_) {
        if (!(tau > 0.0)) {
            throw std::invalid_argument("retrieval variance must be positive");
        }
    }
    const auto p = static_cast<Eigen::Index>(beta_count(harmonics_));
    design_.resize(static_cast<Eigen::Index>(t_.size()), p);
    for (std::size_t d = 0; d < t_.size(); ++d) {
        const auto row = fourier_basis(t_[d], harmonics_);
        for (Eigen::Index j = 0; j < p; ++j) {
            design_(static_cast<Eigen::Index>(d), j) = row[static_cast<std::size_t>(j)];
        }
    }
    gram_ = design_.transpose() * design_;
}

double log_joint(const ModelData& data, const LatentState& latent, const SeasonalCoefficients& coeffs,
                 const VarianceState& vars, const SeasonalPriorSpec& prior)
{
    const std::size_t n_days = data.day_count();
    if (latent.x.size() != n_days || vars.nu.size() != n_days || latent.y.size() != data.sounding_count()) {
        throw std::invalid_argument("state dimensions do not match the data");
    }
    if (!(coeffs.a > prior.a_lower && coeffs.a < prior.a_upper)) {
        return kNegInf;
    }
    if (!(vars.delta > 0.0)) {
        return kNegInf;
    }
    for (double nu : vars.nu) {
        if (!(nu > 0.0)) {
            return kNegInf;
        }
    }

    double lp = 0.0;
    for (std::size_t d = 0; d < n_days; ++d) {
        const double x = latent.x[d];
        for (std::size_t i = data.begin(d); i < data.end(d); ++i) {
            lp += normal_logpdf(data.z(i), latent.y[i], data.tau(i));
            lp += normal_logpdf(latent.y[i], x, vars.nu[d]);
        }
        lp += normal_logpdf(x, seasonal_mean(coeffs, data.t(d)), vars.delta);
        lp += exponential_logpdf(1.0 / vars.nu[d], prior.precision_rate);
    }
    lp += exponential_logpdf(1.0 / vars.delta, prior.precision_rate);
    lp -= std::log(prior.a_upper - prior.a_lower);

    const auto beta = coeffs.beta_vector();
    if (prior.beta_family == BetaPriorFamily::uniform) {
        for (Eigen::Index j = 0; j < beta.size(); ++j) {
            if (!(beta[j] > prior.beta_lower && beta[j] < prior.beta_upper)) {
                return kNegInf;
            }
            lp -= std::log(prior.beta_upper - prior.beta_lower);
        }
    } else {
        const auto b = prior.mean_vector();
        const auto s = prior.variance_vector();
        for (Eigen::Index j = 0; j < beta.size(); ++j) {
            lp += normal_logpdf(beta[j], b[j], s[j]);
        }
    }
    return lp;
}

double log_joint(const CellYearDataset& data, const LatentState& latent, const SeasonalCoefficients& coeffs,
                 const VarianceState& vars, const SeasonalPriorSpec& prior)
{
    return log_joint(ModelData(data.days, coeffs.harmonics()), latent, coeffs, vars, prior);
}

SimulatedCellYear simulate_cell_year(const SeasonalCoefficients& coeffs, const VarianceState& vars,
                                     std::span<const DesignDay> design, std::uint64_t seed, CellId cell, int year)
{
    if (design.empty()) {
        throw std::invalid_argument("simulation design is empty");
    }
    if (vars.nu.size() != design.size()) {
        throw std::invalid_argument("nu must have one entry per design day");
    }
    if (!cell.valid()) {
        throw std::invalid_argument("simulation cell outside the global grid");
    }

    Rng rng(seed);
    SimulatedCellYear out;
    out.data.cell = cell;
    out.data.year = year;
    out.data.land_cover = 12;

    const double year_start = year_start_epoch(year);
    for (std::size_t d = 0; d < design.size(); ++d) {
        const auto& spec = design[d];
        if (spec.tau.empty()) {
            throw std::invalid_argument("simulation design day without soundings");
        }
        const double mu = seasonal_mean(coeffs, spec.t);
        const double x = mu + std::sqrt(vars.delta) * rng.standard_normal();
        out.latent.x.push_back(x);

        OverpassDay day;
        day.t = spec.t;
        const double epoch = year_start + spec.t * 86400.0;
        for (std::size_t i = 0; i < spec.tau.size(); ++i) {
            if (!(spec.tau[i] > 0.0)) {
                throw std::invalid_argument("simulation retrieval variance must be positive");
            }
            const double y = x + std::sqrt(vars.nu[d]) * rng.standard_normal();
            const double z = y + std::sqrt(spec.tau[i]) * rng.standard_normal();
            out.latent.y.push_back(y);

            // Spread footprints over the cell interior on a fixed lattice.
            const double frac_lat = 0.05 + 0.9 * static_cast<double>(i % 10) / 10.0;
            const double frac_lon = 0.05 + 0.9 * static_cast<double>((i / 10) % 10) / 10.0;
            day.soundings.push_back(SoundingRecord::at(cell.south() + frac_lat, cell.west() + frac_lon, epoch, z,
                                                       spec.tau[i], 0));
        }
        out.data.days.push_back(std::move(day));
    }
    return out;
}

} // namespace sifbhm
