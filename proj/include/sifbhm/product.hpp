#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "sifbhm/calendar.hpp"
#include "sifbhm/gibbs.hpp"
#include "sifbhm/model.hpp"

namespace sifbhm {

inline constexpr const char* kProductVersion = "1.0";

/// One gridded daily estimate.
struct ProductRecord
{
    double sif_740nm = 0.0;          ///< posterior mean of X_t
    double sif_uncertainty = 0.0;    ///< posterior sd of X_t
    double sif_quantile_2_5 = 0.0;
    double sif_quantile_97_5 = 0.0;
    int sif_land_cover = 255;
    double sif_latitude = 0.5;       ///< cell center
    double sif_longitude = 0.5;      ///< cell center
    std::int64_t sif_time = 0;       ///< seconds since 1970-01-01T00:00:00 UTC
    UtcDateTime sif_date;            ///< UTC breakdown of sif_time

    /// Throws std::invalid_argument naming the first violated invariant.
    void validate() const;

    bool operator==(const ProductRecord&) const = default;
};

/// Product-level provenance stored in the sidecar.
struct ProductMetadata
{
    std::string product_version = kProductVersion;
    int year = 1970;
    std::uint64_t seed = 0;
    std::string sampler_config_digest;
    std::string prior_table_digest;
    std::size_t row_count = 0;
    std::string data_sha256;  ///< digest of the product file bytes

    bool operator==(const ProductMetadata&) const = default;
};

struct Product
{
    ProductMetadata metadata;
    std::vector<ProductRecord> records;
};

/// Row-level invariant failure while loading. `row` counts data rows from 0.
class RecordError : public std::runtime_error
{
public:
    RecordError(std::size_t row, const std::string& what);

    std::size_t row() const { return row_; }

private:
    std::size_t row_;
};

/// Column names, in file order.
const std::vector<std::string>& product_columns();

/// Sidecar path for a product file: `<path>.meta.json`.
std::filesystem::path metadata_path(const std::filesystem::path& product);

/// Sorts by (time, latitude, longitude), validates, and writes the file plus its sidecar.
/// `metadata.row_count` and `metadata.data_sha256` are filled in; the completed metadata is returned.
ProductMetadata write_product(std::span<const ProductRecord> records, ProductMetadata metadata,
                              const std::filesystem::path& path, bool overwrite = false);

/// Bytes write_product would emit for the product file.
std::string serialize_product(std::span<const ProductRecord> records);

/// Loads and validates a product. Throws ParseError (byte offset) for malformed or truncated
/// files and for disagreement with the sidecar, and RecordError for invariant violations.
Product read_product(const std::filesystem::path& path);

/// One record per overpass day of `summary`, located at the center of `cell`.
std::vector<ProductRecord> attach_context(const PosteriorSummary& summary, CellId cell, int land_cover,
                                          std::span<const std::int64_t> times);

} // namespace sifbhm
