#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "sifbhm/ingest.hpp"
#include "sifbhm/product.hpp"

namespace sifbhm {

/// Cells whose center latitude is >= 0 are northern.
enum class Hemisphere { north, south };

Hemisphere hemisphere_of(CellId cell);
std::string to_string(Hemisphere h);

/// Box-plot summary. Quartiles interpolate linearly between order statistics; whiskers
/// reach the most extreme values within 1.5 IQR of the box.
struct BoxStats
{
    std::size_t n = 0;
    double min = 0.0;
    double whisker_low = 0.0;
    double q1 = 0.0;
    double median = 0.0;
    double q3 = 0.0;
    double whisker_high = 0.0;
    double max = 0.0;
    double mean = 0.0;
};

/// Throws std::invalid_argument on an empty input.
BoxStats box_stats(std::vector<double> values);

/// One cell's records within one calendar month.
struct CellMonth
{
    CellId cell;
    int month = 0;
    std::size_t records = 0;
    double mean = 0.0;    ///< mean of sif_740nm
    double rms_sd = 0.0;  ///< root-mean-square of sif_uncertainty
};

/// Every (cell, month) present, ordered by cell then month. Months from different years
/// are pooled.
std::vector<CellMonth> cell_month_means(std::span<const ProductRecord> records);

struct BiomeMonthDistribution
{
    int biome = 0;
    int month = 0;
    std::vector<CellId> cells;
    std::vector<double> values;  ///< cell-month means, aligned with `cells`
    BoxStats stats;
};

struct BiomeAggregate
{
    Hemisphere hemisphere = Hemisphere::north;
    std::vector<BiomeMonthDistribution> rows;  ///< ordered by (biome, month)
    std::size_t cell_months = 0;               ///< cell-months in the hemisphere
    std::size_t unassigned = 0;                ///< of those, skipped for lack of a biome
};

/// `biomes` is a 1-degree map; code 0 means no assignment.
BiomeAggregate monthly_biome_aggregate(std::span<const ProductRecord> records, const Grid& biomes,
                                       Hemisphere hemisphere);

struct BiomeMonthSeries
{
    int biome = 0;
    int month = 0;
    std::size_t cells = 0;
    double mean = 0.0;  ///< mean of cell-month means
    double sd = 0.0;    ///< RMS of cell-month RMS uncertainties
    double lower = 0.0;
    double upper = 0.0;
};

struct UncertaintySeries
{
    Hemisphere hemisphere = Hemisphere::north;
    std::vector<BiomeMonthSeries> rows;
    std::size_t cell_months = 0;
    std::size_t unassigned = 0;
};

UncertaintySeries mean_uncertainty_series(std::span<const ProductRecord> records, const Grid& biomes,
                                          Hemisphere hemisphere);

struct MapCell
{
    CellId cell;
    std::size_t records = 0;
    double mean = 0.0;
};

struct MonthlyMap
{
    int month = 0;
    std::vector<MapCell> cells;  ///< cells with data only, lat-major
    std::optional<std::string> warning;
};

/// Throws std::invalid_argument unless 1 <= month <= 12.
MonthlyMap monthly_global_map(std::span<const ProductRecord> records, int month);

/// Long format: one row per cell-month value.
std::string serialize_biome_values(const BiomeAggregate& aggregate);
/// One row per (biome, month) with the box-plot statistics.
std::string serialize_biome_boxes(const BiomeAggregate& aggregate);
std::string serialize_series(const UncertaintySeries& series);
std::string serialize_map(const MonthlyMap& map);

} // namespace sifbhm
