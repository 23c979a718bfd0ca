#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "sifbhm/gibbs.hpp"
#include "sifbhm/hyperprior.hpp"
#include "sifbhm/ingest.hpp"
#include "sifbhm/product.hpp"

namespace sifbhm {

/// Everything one run needs. Paths left empty are optional inputs.
struct PipelineConfig
{
    std::string soundings_pattern;  ///< per-year sounding table; `{year}` is substituted
    std::filesystem::path dense_soundings;
    std::filesystem::path prior_table;
    std::filesystem::path land_cover_fine;
    std::filesystem::path land_cover_1deg;  ///< upscaled from the fine map when empty
    std::filesystem::path biome_map;
    std::filesystem::path coincident_times;
    std::filesystem::path output_dir = "out";
    std::vector<int> years;
    SamplerConfig sampler;
    HyperpriorOptions hyperprior;
    std::size_t workers = 1;
    bool resume = false;
    bool force = false;

    std::filesystem::path soundings_path(int year) const;
    std::filesystem::path product_path(int year) const;
    std::filesystem::path cache_dir(int year) const;
    /// Where fit-prior writes and run reads the table when `prior_table` is empty.
    std::filesystem::path effective_prior_table() const;

    /// Throws std::invalid_argument on missing inputs, empty years or a bad sampler config.
    void validate() const;
};

/// Parses a `key = value` file (`#` starts a comment). Relative paths resolve against the
/// file's directory.
PipelineConfig load_config(const std::filesystem::path& path);

/// Applies one `key = value` setting; throws std::invalid_argument for unknown keys.
void apply_setting(PipelineConfig& config, const std::string& key, const std::string& value,
                   const std::filesystem::path& base_dir = {});

std::vector<int> parse_years(const std::string& text);

/// Fit result for one cell-year.
struct CellOutcome
{
    CellId cell;
    int year = 0;
    std::vector<ProductRecord> records;
    bool converged = false;
    bool used_default_prior = false;
    double max_rhat = 1.0;
    double min_ess = 0.0;
    bool from_cache = false;
    std::string error;  ///< non-empty when the cell failed and was skipped

    bool operator==(const CellOutcome&) const = default;
};

/// Fits one cell-year end to end: prior lookup, sampling, time aggregation and context.
CellOutcome fit_cell(const CellYearDataset& data, const PriorTable& priors, const SamplerConfig& sampler,
                     const CoincidentTimes* coincident = nullptr);

/// Key written into every cache file; a cache entry is reused only under the same key.
std::string cache_key(const SamplerConfig& sampler, const std::string& prior_table_digest, int year);

void write_cell_cache(const std::filesystem::path& dir, const CellOutcome& outcome, const std::string& key);
std::optional<CellOutcome> read_cell_cache(const std::filesystem::path& dir, CellId cell, int year,
                                           const std::string& key);

struct CellFailure
{
    CellId cell;
    std::string error;
};

struct YearReport
{
    int year = 0;
    std::size_t input_records = 0;
    RejectionCounters rejected;
    std::size_t grouped_records = 0;
    std::size_t cells = 0;
    std::size_t cells_resumed = 0;
    std::vector<CellFailure> failures;
    std::vector<CellId> nonconverged;
    std::vector<CellId> default_prior;
    std::size_t product_rows = 0;
    std::filesystem::path product;
    std::string product_sha256;
};

struct RunReport
{
    std::vector<YearReport> years;
    std::size_t included_cells = 0;
    std::size_t unclassified_cells = 0;
    std::size_t prior_cells = 0;
    std::string sampler_config_digest;
    std::string prior_table_digest;
    std::vector<std::string> warnings;

    std::string to_text() const;
    std::string to_json() const;
};

/// Runs every year in the config and writes one product per year plus run_report.{txt,json}.
RunReport run_pipeline(const PipelineConfig& config);

struct PriorFitReport
{
    std::size_t cells = 0;
    std::size_t fitted = 0;
    std::size_t boundary = 0;
    std::vector<CellFailure> skipped;
    std::filesystem::path table;
};

/// Fits hyperpriors for every included cell with dense data and exports the table.
PriorFitReport run_prior_fit(const PipelineConfig& config);

/// Writes the sifbhm-format inputs for a self-contained synthetic run into `dir`.
struct SyntheticOptions
{
    int year = 2019;
    std::size_t cells = 50;
    int revisit_days = 16;
    std::size_t soundings_per_day = 6;
    bool dense = true;
    std::uint64_t seed = 1;
};

/// Returns a config pointing at the generated files.
PipelineConfig write_synthetic_inputs(const std::filesystem::path& dir, const SyntheticOptions& options);

} // namespace sifbhm
