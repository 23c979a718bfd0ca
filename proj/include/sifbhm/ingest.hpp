#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "sifbhm/model.hpp"

namespace sifbhm {

inline constexpr std::uint8_t kWaterBodies = 17;
inline constexpr std::uint8_t kPermanentSnowIce = 15;
inline constexpr std::uint8_t kBarren = 16;
inline constexpr std::uint8_t kUnclassified = 255;
inline constexpr std::uint8_t kBiomeMissing = 0;

/// Global lat/lon raster of one-byte codes. Row 0 is the southernmost row; pixels are
/// half-open [south + r*res, south + (r+1)*res) x [west + c*res, west + (c+1)*res).
struct Grid
{
    int pixels_per_degree = 1;  ///< 20 for 0.05 degree, 1 for 1 degree
    double south = -90.0;
    double west = -180.0;
    int rows = 180;
    int cols = 360;
    std::vector<std::uint8_t> codes;  ///< row-major, rows * cols

    static Grid filled(int pixels_per_degree, std::uint8_t code);

    double resolution() const { return 1.0 / pixels_per_degree; }
    std::uint8_t at(int row, int col) const { return codes[static_cast<std::size_t>(row) * cols + col]; }
    std::uint8_t& at(int row, int col) { return codes[static_cast<std::size_t>(row) * cols + col]; }
    /// Pixel holding (lat, lon), or nothing outside the raster.
    std::optional<std::pair<int, int>> pixel_containing(double latitude, double longitude) const;
    /// Throws unless the raster covers the globe exactly at its resolution.
    void validate_global() const;

    bool operator==(const Grid&) const = default;
};

/// Land-cover classes 1..17 or 255. Throws std::invalid_argument on any other code.
void validate_land_cover(const Grid& grid);
/// Biome classes 1..15, or 0 for missing.
void validate_biomes(const Grid& grid);

/// Grid file: text header lines `sifgrid 1`, `pixels_per_degree N`, `south S`, `west W`,
/// `rows R`, `cols C`, `data`, then exactly R*C raw bytes.
Grid read_grid(const std::filesystem::path& path);
void write_grid(const std::filesystem::path& path, const Grid& grid, bool overwrite = false);

/// Sounding table with header latitude,longitude,time_epoch_s,sif_740nm,sif_variance,quality_flag.
std::vector<SoundingRecord> read_soundings(const std::filesystem::path& path);
void write_soundings(const std::filesystem::path& path, std::span<const SoundingRecord> records,
                     bool overwrite = false);

/// Records dropped at each stage. Every input record lands in exactly one counter or in a dataset.
struct RejectionCounters
{
    std::size_t quality = 0;
    std::size_t out_of_bounds = 0;
    std::size_t ocean = 0;
    std::size_t masked_cell = 0;
    std::size_t wrong_year = 0;

    std::size_t total() const { return quality + out_of_bounds + ocean + masked_cell + wrong_year; }
    RejectionCounters& operator+=(const RejectionCounters& other);
    bool operator==(const RejectionCounters&) const = default;
};

/// Keeps quality flags 0 and 1, in input order.
std::vector<SoundingRecord> filter_quality(std::span<const SoundingRecord> records,
                                           RejectionCounters* counters = nullptr);

/// Drops records over class-17 pixels of the fine land-cover map and records outside it.
std::vector<SoundingRecord> mask_ocean(std::span<const SoundingRecord> records, const Grid& land_cover_fine,
                                       RejectionCounters* counters = nullptr);

/// 1-degree map: modal class among each cell's fine pixels ignoring water, ties to the lowest
/// code; a cell with only water pixels stays water.
Grid upscale_landcover(const Grid& land_cover_fine);

/// Cells modelled downstream, with their 1-degree land-cover code.
struct CellMask
{
    std::vector<std::uint8_t> land_cover;  ///< indexed by CellId::linear_index
    std::vector<bool> included;
    std::size_t unclassified = 0;  ///< advisory: included cells with class 255

    bool includes(CellId cell) const { return included[cell.linear_index()]; }
    std::size_t included_count() const;
};

/// Excludes permanent snow and ice, barren and water cells.
CellMask exclude_cells(const Grid& land_cover_1deg);

/// Partitions records by 1-degree cell and UTC date, keeping only `year` and included cells.
/// Output is ordered by cell, days ascending, soundings in input order.
std::vector<CellYearDataset> group_cell_year(std::span<const SoundingRecord> records, const CellMask& mask, int year,
                                             RejectionCounters* counters = nullptr);

/// Product time of an overpass: the coincident time when given, else the mean sounding
/// epoch second rounded half-up.
std::int64_t aggregate_time(const OverpassDay& day, std::optional<std::int64_t> coincident_time = std::nullopt);

/// Coincident product times keyed by (cell, UTC day number).
using CoincidentTimes = std::map<std::pair<CellId, std::int64_t>, std::int64_t>;

/// Table with header cell_lat_index,cell_lon_index,date,time_epoch_s and dates as YYYY-MM-DD.
CoincidentTimes read_coincident_times(const std::filesystem::path& path);

std::optional<std::int64_t> lookup_coincident(const CoincidentTimes& table, CellId cell, const OverpassDay& day);

struct IngestResult
{
    std::vector<CellYearDataset> datasets;
    RejectionCounters rejected;
    std::size_t input_count = 0;
};

/// filter_quality, mask_ocean and group_cell_year in sequence.
IngestResult ingest_year(std::span<const SoundingRecord> records, const Grid& land_cover_fine, const CellMask& mask,
                         int year);

} // namespace sifbhm
