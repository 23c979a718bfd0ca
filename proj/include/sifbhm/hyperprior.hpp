#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "sifbhm/gibbs.hpp"
#include "sifbhm/ingest.hpp"
#include "sifbhm/model.hpp"

namespace sifbhm {

/// Dense retrievals for one cell, possibly spanning several years.
struct DenseCellDataset
{
    CellId cell;
    std::vector<SoundingRecord> records;
    std::string source = "dense";

    /// Throws unless non-empty and every record lies inside `cell`.
    void validate() const;
    std::size_t distinct_days() const;
};

/// Partitions dense records by cell, skipping excluded cells; output ordered by cell.
std::vector<DenseCellDataset> group_dense(std::span<const SoundingRecord> records, const CellMask& mask);

/// Days keyed by UTC date, t = mean day-of-year of the day's records, years pooled.
ModelData dense_model_data(const DenseCellDataset& data, int harmonics = kDefaultHarmonics);

enum class PriorFlag
{
    ok,
    boundary,  ///< some beta has posterior mass piled against the +-1 bounds
};

std::string to_string(PriorFlag flag);

struct HyperpriorOptions
{
    std::size_t min_distinct_days = 60;
    /// A coefficient is flagged when more than `boundary_fraction` of its draws fall within
    /// `boundary_margin` of either bound.
    double boundary_margin = 0.02;
    double boundary_fraction = 0.05;
    int harmonics = kDefaultHarmonics;
};

class InsufficientDenseData : public std::invalid_argument
{
public:
    using std::invalid_argument::invalid_argument;
};

struct FittedPrior
{
    SeasonalPriorSpec spec;  ///< normal family, b = posterior means, s = posterior variances
    PriorFlag flag = PriorFlag::ok;
    std::vector<bool> boundary;  ///< per beta, in beta_vector order
    PosteriorSummary summary;
};

/// Fits the model with flat Unif(-1, 1) priors on every beta and returns the posterior
/// moments of the betas as the normal hyperprior for sparse fits.
FittedPrior fit_seasonal_prior(const DenseCellDataset& data, const SamplerConfig& config,
                               const HyperpriorOptions& options = {});

struct PriorTableEntry
{
    SeasonalPriorSpec spec;
    PriorFlag flag = PriorFlag::ok;

    bool operator==(const PriorTableEntry&) const = default;
};

using PriorTable = std::map<CellId, PriorTableEntry>;

/// Columns cell_lat_index, cell_lon_index, then b and s for each beta, then flag.
/// Rows in lat-major cell order; 17 significant digits.
void export_prior_table(const std::filesystem::path& path, const PriorTable& table, bool overwrite = false);
std::string serialize_prior_table(const PriorTable& table);
PriorTable read_prior_table(const std::filesystem::path& path);

/// The cell's table entry, or the global default when absent (`used_default` reports which).
SeasonalPriorSpec prior_for(const PriorTable& table, CellId cell, bool* used_default = nullptr,
                            int harmonics = kDefaultHarmonics);

} // namespace sifbhm
