#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace sifbhm {

inline constexpr double kSeasonalPeriodDays = 365.25;
inline constexpr int kDefaultHarmonics = 2;

/// One sounding-level retrieval.
struct SoundingRecord
{
    double latitude = 0.0;            ///< degrees north
    double longitude = 0.0;           ///< degrees east
    double time = 0.0;                ///< seconds since 1970-01-01T00:00:00 UTC
    double day_of_year = 0.0;         ///< fractional UTC day-of-year in [0, 366)
    double sif = 0.0;                 ///< W m-2 sr-1 um-1, may be negative
    double retrieval_variance = 1.0;  ///< tau, strictly positive
    int quality_flag = 0;             ///< 0 best, 1 good, 2 failed

    /// Fills `day_of_year` from `time`.
    static SoundingRecord at(double latitude, double longitude, double epoch_s, double sif, double variance,
                             int quality_flag = 0);

    void validate() const;

    bool operator==(const SoundingRecord&) const = default;
};

/// 1-degree grid cell. Cell (i, j) covers latitudes [i-90, i-89) and longitudes [j-180, j-179).
struct CellId
{
    int lat_index = 0;
    int lon_index = 0;

    static constexpr int kRows = 180;
    static constexpr int kCols = 360;

    /// Throws std::out_of_range outside [-90, 90) x [-180, 180).
    static CellId containing(double latitude, double longitude);
    static bool in_bounds(double latitude, double longitude);

    double south() const { return lat_index - 90.0; }
    double west() const { return lon_index - 180.0; }
    double center_latitude() const { return south() + 0.5; }
    double center_longitude() const { return west() + 0.5; }
    bool contains(double latitude, double longitude) const;
    bool valid() const { return lat_index >= 0 && lat_index < kRows && lon_index >= 0 && lon_index < kCols; }
    std::size_t linear_index() const { return static_cast<std::size_t>(lat_index) * kCols + lon_index; }

    auto operator<=>(const CellId&) const = default;
};

std::string to_string(const CellId& cell);

struct OverpassDay
{
    double t = 0.0;  ///< fractional day-of-year of the overpass
    std::vector<SoundingRecord> soundings;
};

struct CellYearDataset
{
    CellId cell;
    int year = 1970;
    std::vector<OverpassDay> days;
    int land_cover = 255;

    std::size_t sounding_count() const;
    void validate() const;
};

/// Seasonal cycle coefficients. The beta vector is ordered like `fourier_basis`:
/// [beta0, beta1, sin_1, cos_1, ..., sin_K, cos_K].
struct SeasonalCoefficients
{
    double a = 0.0;
    double beta0 = 0.0;
    double beta1 = 0.0;
    std::vector<double> beta2;  ///< sine coefficients, k = 1..K
    std::vector<double> beta3;  ///< cosine coefficients, k = 1..K

    static SeasonalCoefficients zero(int harmonics = kDefaultHarmonics);
    static SeasonalCoefficients from_beta_vector(double a, const Eigen::VectorXd& beta);

    int harmonics() const { return static_cast<int>(beta2.size()); }
    Eigen::VectorXd beta_vector() const;
    void set_beta_vector(const Eigen::VectorXd& beta);
    void validate() const;

    bool operator==(const SeasonalCoefficients&) const = default;
};

std::size_t beta_count(int harmonics);
std::vector<std::string> beta_names(int harmonics);

struct VarianceState
{
    std::vector<double> nu;  ///< within-cell variance per overpass day
    double delta = 1.0;      ///< intraseasonal variance

    void validate() const;
};

/// Latent process values. `y` is flat, in the sounding order of `ModelData`.
struct LatentState
{
    std::vector<double> x;
    std::vector<double> y;
};

struct NormalPrior
{
    double mean = 0.0;
    double variance = 1.0;

    bool operator==(const NormalPrior&) const = default;
};

enum class BetaPriorFamily
{
    normal,
    uniform,
};

struct SeasonalPriorSpec
{
    NormalPrior beta0;
    NormalPrior beta1;
    std::vector<NormalPrior> beta2;
    std::vector<NormalPrior> beta3;
    double a_lower = -1.0;
    double a_upper = 1.0;
    double precision_rate = 1.0;

    // Flat priors on every beta, used when fitting hyperparameters from dense data.
    BetaPriorFamily beta_family = BetaPriorFamily::normal;
    double beta_lower = -1.0;
    double beta_upper = 1.0;

    static SeasonalPriorSpec normal(const Eigen::VectorXd& means, const Eigen::VectorXd& variances);
    static SeasonalPriorSpec uniform_betas(int harmonics = kDefaultHarmonics);
    /// Fallback for cells without dense data: b = 0, s = 0.25 for every coefficient.
    static SeasonalPriorSpec global_default(int harmonics = kDefaultHarmonics);

    int harmonics() const { return static_cast<int>(beta2.size()); }
    Eigen::VectorXd mean_vector() const;
    Eigen::VectorXd variance_vector() const;
    void validate() const;

    bool operator==(const SeasonalPriorSpec&) const = default;
};

/// Flattened, read-only view of one cell's observations used by the sampler.
/// Days may be empty here; `CellYearDataset::validate` enforces n_t >= 1 upstream.
class ModelData
{
public:
    ModelData(std::span<const OverpassDay> days, int harmonics = kDefaultHarmonics);

    static ModelData from_arrays(std::vector<double> t, const std::vector<std::size_t>& counts,
                                 std::vector<double> z, std::vector<double> tau,
                                 int harmonics = kDefaultHarmonics);

    std::size_t day_count() const { return t_.size(); }
    std::size_t sounding_count() const { return z_.size(); }
    int harmonics() const { return harmonics_; }

    double t(std::size_t day) const { return t_[day]; }
    std::size_t begin(std::size_t day) const { return offsets_[day]; }
    std::size_t end(std::size_t day) const { return offsets_[day + 1]; }
    std::size_t count(std::size_t day) const { return offsets_[day + 1] - offsets_[day]; }

    double z(std::size_t i) const { return z_[i]; }
    double tau(std::size_t i) const { return tau_[i]; }
    std::span<const double> z() const { return z_; }
    std::span<const double> tau() const { return tau_; }

    /// T x (2+2K) matrix whose rows are fourier_basis(t).
    const Eigen::MatrixXd& design() const { return design_; }
    const Eigen::MatrixXd& gram() const { return gram_; }

private:
    ModelData() = default;
    void finalize();

    int harmonics_ = kDefaultHarmonics;
    std::vector<double> t_;
    std::vector<std::size_t> offsets_{0};
    std::vector<double> z_;
    std::vector<double> tau_;
    Eigen::MatrixXd design_;
    Eigen::MatrixXd gram_;
};

/// [1, t, sin(2 pi t / P), cos(2 pi t / P), ..., sin(2 K pi t / P), cos(2 K pi t / P)], P = 365.25.
std::vector<double> fourier_basis(double t, int harmonics = kDefaultHarmonics);

double seasonal_mean(const SeasonalCoefficients& coeffs, double t);

double log_joint(const ModelData& data, const LatentState& latent, const SeasonalCoefficients& coeffs,
                 const VarianceState& vars, const SeasonalPriorSpec& prior);

double log_joint(const CellYearDataset& data, const LatentState& latent, const SeasonalCoefficients& coeffs,
                 const VarianceState& vars, const SeasonalPriorSpec& prior);

/// One day of a simulation design: n_t = tau.size().
struct DesignDay
{
    double t = 0.0;
    std::vector<double> tau;
};

struct SimulatedCellYear
{
    CellYearDataset data;
    LatentState latent;
};

/// Runs the hierarchical model forward. `vars.nu` is aligned with `design`.
SimulatedCellYear simulate_cell_year(const SeasonalCoefficients& coeffs, const VarianceState& vars,
                                     std::span<const DesignDay> design, std::uint64_t seed,
                                     CellId cell = CellId{90, 180}, int year = 2019);

} // namespace sifbhm
