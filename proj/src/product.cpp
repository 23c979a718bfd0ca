#include "sifbhm/product.hpp"

#include <algorithm>
#include <cmath>
#include <tuple>

#include "json.hpp"

#include "sifbhm/digest.hpp"
#include "sifbhm/textio.hpp"

namespace sifbhm {

namespace {

struct VariableInfo
{
    const char* name;
    const char* units;
    const char* description;
};

constexpr const char* kSifUnits = "W m-2 sr-1 um-1";

const std::vector<VariableInfo>& variables()
{
    static const std::vector<VariableInfo> v{
        {"sif_740nm", kSifUnits, "Daily gridded SIF at 740 nm (posterior mean)"},
        {"sif_uncertainty", kSifUnits, "Standard error of sif_740nm (posterior standard deviation)"},
        {"sif_quantile_2.5", kSifUnits, "2.5th posterior quantile of the daily gridded SIF"},
        {"sif_quantile_97.5", kSifUnits, "97.5th posterior quantile of the daily gridded SIF"},
        {"sif_land_cover", "N/A", "Majority land cover class of the 1-degree cell"},
        {"sif_latitude", "degrees north", "Cell center latitude"},
        {"sif_longitude", "degrees east", "Cell center longitude"},
        {"sif_time", "seconds", "Seconds since 1970-01-01 00:00:00 UTC"},
        {"sif_date_year", "N/A", "UTC year of sif_time"},
        {"sif_date_month", "N/A", "UTC month of sif_time"},
        {"sif_date_day", "N/A", "UTC day of month of sif_time"},
        {"sif_date_hour", "N/A", "UTC hour of sif_time"},
        {"sif_date_minute", "N/A", "UTC minute of sif_time"},
        {"sif_date_second", "N/A", "UTC second of sif_time"},
        {"sif_date_ms", "N/A", "Milliseconds of sif_time"},
    };
    return v;
}

bool is_center(double coord, double origin, int count)
{
    const double k = coord - origin - 0.5;
    return std::isfinite(k) && k == std::floor(k) && k >= 0.0 && k < count;
}

bool record_less(const ProductRecord& a, const ProductRecord& b)
{
    return std::tie(a.sif_time, a.sif_latitude, a.sif_longitude) <
           std::tie(b.sif_time, b.sif_latitude, b.sif_longitude);
}

std::string format_row(const ProductRecord& r)
{
    const auto& d = r.sif_date;
    std::string s;
    for (double v : {r.sif_740nm, r.sif_uncertainty, r.sif_quantile_2_5, r.sif_quantile_97_5}) {
        s += format_double(v);
        s += ',';
    }
    s += std::to_string(r.sif_land_cover) + ',' + format_double(r.sif_latitude) + ',' + format_double(r.sif_longitude) +
         ',' + std::to_string(r.sif_time);
    for (int v : {d.year, d.month, d.day, d.hour, d.minute, d.second, d.millisecond}) {
        s += ',';
        s += std::to_string(v);
    }
    s += '\n';
    return s;
}

std::string header_line()
{
    std::string s;
    for (const auto& name : product_columns()) {
        s += (s.empty() ? "" : ",") + name;
    }
    return s;
}

nlohmann::json metadata_json(const ProductMetadata& m)
{
    nlohmann::json vars = nlohmann::json::array();
    for (const auto& v : variables()) {
        vars.push_back({{"name", v.name}, {"units", v.units}, {"description", v.description}});
    }
    return {
        {"product_version", m.product_version},
        {"year", m.year},
        {"seed", m.seed},
        {"sampler_config_digest", m.sampler_config_digest},
        {"prior_table_digest", m.prior_table_digest},
        {"row_count", m.row_count},
        {"data_sha256", m.data_sha256},
        {"variables", vars},
    };
}

} // namespace

void ProductRecord::validate() const
{
    for (double v : {sif_740nm, sif_uncertainty, sif_quantile_2_5, sif_quantile_97_5}) {
        if (!std::isfinite(v)) {
            throw std::invalid_argument("non-finite SIF field");
        }
    }
    if (!(sif_quantile_2_5 <= sif_quantile_97_5)) {
        throw std::invalid_argument("sif_quantile_2.5 exceeds sif_quantile_97.5");
    }
    if (sif_uncertainty < 0.0) {
        throw std::invalid_argument("negative sif_uncertainty");
    }
    if (!((sif_land_cover >= 1 && sif_land_cover <= 14) || sif_land_cover == 255)) {
        throw std::invalid_argument("sif_land_cover " + std::to_string(sif_land_cover) + " is not a modelled class");
    }
    if (!is_center(sif_latitude, -90.0, CellId::kRows) || !is_center(sif_longitude, -180.0, CellId::kCols)) {
        throw std::invalid_argument("coordinates are not a 1-degree cell center");
    }
    if (sif_date != to_utc(static_cast<double>(sif_time))) {
        throw std::invalid_argument("sif_date disagrees with sif_time");
    }
}

RecordError::RecordError(std::size_t row, const std::string& what)
    : std::runtime_error("row " + std::to_string(row) + ": " + what), row_(row)
{
}

const std::vector<std::string>& product_columns()
{
    static const std::vector<std::string> cols = [] {
        std::vector<std::string> c;
        for (const auto& v : variables()) {
            c.emplace_back(v.name);
        }
        return c;
    }();
    return cols;
}

std::filesystem::path metadata_path(const std::filesystem::path& product)
{
    auto p = product;
    p += ".meta.json";
    return p;
}

std::string serialize_product(std::span<const ProductRecord> records)
{
    std::vector<ProductRecord> sorted(records.begin(), records.end());
    std::stable_sort(sorted.begin(), sorted.end(), record_less);
    std::string out = header_line() + '\n';
    for (std::size_t i = 0; i < sorted.size(); ++i) {
        try {
            sorted[i].validate();
        } catch (const std::invalid_argument& e) {
            throw RecordError(i, e.what());
        }
        out += format_row(sorted[i]);
    }
    return out;
}

ProductMetadata write_product(std::span<const ProductRecord> records, ProductMetadata metadata,
                              const std::filesystem::path& path, bool overwrite)
{
    for (std::size_t i = 0; i < records.size(); ++i) {
        if (records[i].sif_date.year != metadata.year) {
            throw RecordError(i, "record outside product year " + std::to_string(metadata.year));
        }
    }
    const std::string body = serialize_product(records);
    if (!overwrite && (std::filesystem::exists(path) || std::filesystem::exists(metadata_path(path)))) {
        throw std::runtime_error(path.string() + " exists; pass the force flag to overwrite");
    }
    metadata.row_count = records.size();
    metadata.data_sha256 = sha256_hex(body);
    write_file_atomic(path, body, true);
    write_file_atomic(metadata_path(path), metadata_json(metadata).dump(2) + '\n', true);
    return metadata;
}

Product read_product(const std::filesystem::path& path)
{
    Product product;
    const std::string meta_path = metadata_path(path).string();
    const std::string meta_text = read_file(meta_path);
    try {
        const auto j = nlohmann::json::parse(meta_text);
        auto& m = product.metadata;
        m.product_version = j.at("product_version").get<std::string>();
        m.year = j.at("year").get<int>();
        m.seed = j.at("seed").get<std::uint64_t>();
        m.sampler_config_digest = j.at("sampler_config_digest").get<std::string>();
        m.prior_table_digest = j.at("prior_table_digest").get<std::string>();
        m.row_count = j.at("row_count").get<std::size_t>();
        m.data_sha256 = j.at("data_sha256").get<std::string>();
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(meta_path, e.byte, e.what());
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(meta_path, 0, e.what());
    }

    const std::string text = read_file(path);
    LineCursor cur(text, path.string());
    std::string_view line;
    if (!cur.next(line) || line != header_line()) {
        cur.fail("header does not match the product schema");
    }
    const std::size_t columns = product_columns().size();
    while (cur.next(line)) {
        const auto f = split_fields(line);
        if (f.size() != columns) {
            cur.fail("expected " + std::to_string(columns) + " fields, found " + std::to_string(f.size()));
        }
        ProductRecord r;
        try {
            r.sif_740nm = parse_double(f[0]);
            r.sif_uncertainty = parse_double(f[1]);
            r.sif_quantile_2_5 = parse_double(f[2]);
            r.sif_quantile_97_5 = parse_double(f[3]);
            r.sif_land_cover = static_cast<int>(parse_int(f[4]));
            r.sif_latitude = parse_double(f[5]);
            r.sif_longitude = parse_double(f[6]);
            r.sif_time = parse_int(f[7]);
            auto& d = r.sif_date;
            int* parts[] = {&d.year, &d.month, &d.day, &d.hour, &d.minute, &d.second, &d.millisecond};
            for (std::size_t k = 0; k < 7; ++k) {
                *parts[k] = static_cast<int>(parse_int(f[8 + k]));
            }
        } catch (const std::invalid_argument& e) {
            cur.fail(e.what());
        }
        const std::size_t row = product.records.size();
        try {
            r.validate();
        } catch (const std::invalid_argument& e) {
            throw RecordError(row, e.what());
        }
        if (!product.records.empty() && record_less(r, product.records.back())) {
            throw RecordError(row, "rows are not sorted by time, latitude, longitude");
        }
        product.records.push_back(r);
    }

    if (product.records.size() != product.metadata.row_count) {
        throw ParseError(path.string(), text.size(),
                         "file holds " + std::to_string(product.records.size()) + " rows, metadata expects " +
                             std::to_string(product.metadata.row_count));
    }
    if (sha256_hex(text) != product.metadata.data_sha256) {
        throw ParseError(path.string(), 0, "content digest does not match metadata");
    }
    return product;
}

std::vector<ProductRecord> attach_context(const PosteriorSummary& summary, CellId cell, int land_cover,
                                          std::span<const std::int64_t> times)
{
    if (summary.days.size() != times.size()) {
        throw std::invalid_argument("summary has " + std::to_string(summary.days.size()) + " days but " +
                                    std::to_string(times.size()) + " times were supplied");
    }
    std::vector<ProductRecord> out;
    out.reserve(times.size());
    for (std::size_t d = 0; d < times.size(); ++d) {
        const auto& day = summary.days[d];
        ProductRecord r;
        r.sif_740nm = day.x_mean;
        r.sif_uncertainty = day.x_sd;
        r.sif_quantile_2_5 = day.x_q2_5;
        r.sif_quantile_97_5 = day.x_q97_5;
        r.sif_land_cover = land_cover;
        r.sif_latitude = cell.center_latitude();
        r.sif_longitude = cell.center_longitude();
        r.sif_time = times[d];
        r.sif_date = to_utc(static_cast<double>(times[d]));
        out.push_back(r);
    }
    return out;
}

} // namespace sifbhm
