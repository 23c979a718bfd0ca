#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cstdlib>
#include <cstring>
#include <fstream>
#include <random>

#include "sifbhm/calendar.hpp"
#include "sifbhm/digest.hpp"
#include "sifbhm/product.hpp"
#include "sifbhm/textio.hpp"
#include "tempdir.hpp"

using namespace sifbhm;

namespace {

ProductRecord record(CellId cell, std::int64_t time, double mean, double sd, int land_cover = 12)
{
    ProductRecord r;
    r.sif_740nm = mean;
    r.sif_uncertainty = sd;
    r.sif_quantile_2_5 = mean - 1.96 * sd;
    r.sif_quantile_97_5 = mean + 1.96 * sd;
    r.sif_land_cover = land_cover;
    r.sif_latitude = cell.center_latitude();
    r.sif_longitude = cell.center_longitude();
    r.sif_time = time;
    r.sif_date = to_utc(static_cast<double>(time));
    return r;
}

std::vector<ProductRecord> random_year(std::size_t n, std::uint64_t seed, int year = 2019)
{
    std::mt19937_64 gen(seed);
    std::uniform_int_distribution<int> lat(0, 179), lon(0, 359), lc(1, 14);
    std::uniform_int_distribution<std::int64_t> t(static_cast<std::int64_t>(year_start_epoch(year)),
                                                  static_cast<std::int64_t>(year_start_epoch(year + 1)) - 1);
    std::normal_distribution<double> sif(0.4, 0.3);
    std::exponential_distribution<double> sd(10.0);
    std::vector<ProductRecord> out;
    for (std::size_t i = 0; i < n; ++i) {
        out.push_back(record({lat(gen), lon(gen)}, t(gen), sif(gen), sd(gen), lc(gen)));
    }
    return out;
}

ProductMetadata meta(int year = 2019)
{
    ProductMetadata m;
    m.year = year;
    m.seed = 42;
    m.sampler_config_digest = sha256_hex("cfg");
    m.prior_table_digest = sha256_hex("prior");
    return m;
}

bool bitwise_equal(double a, double b)
{
    return std::memcmp(&a, &b, sizeof a) == 0;
}

void replace_line(const std::filesystem::path& path, std::size_t line_index, const std::string& text)
{
    std::string content = read_file(path);
    std::size_t start = 0;
    for (std::size_t i = 0; i < line_index; ++i) {
        start = content.find('\n', start) + 1;
    }
    const std::size_t end = content.find('\n', start);
    content.replace(start, end - start, text);
    std::ofstream(path, std::ios::binary | std::ios::trunc) << content;
}

} // namespace

TEST_CASE("header names the published variables")
{
    const std::vector<std::string> expected{
        "sif_740nm",     "sif_uncertainty", "sif_quantile_2.5", "sif_quantile_97.5", "sif_land_cover",
        "sif_latitude",  "sif_longitude",   "sif_time",         "sif_date_year",     "sif_date_month",
        "sif_date_day",  "sif_date_hour",   "sif_date_minute",  "sif_date_second",   "sif_date_ms",
    };
    CHECK(product_columns() == expected);
}

TEST_CASE("round-trip is bitwise")
{
    TempDir dir;
    auto records = random_year(2000, 1);
    records.push_back(record({3, 4}, static_cast<std::int64_t>(year_start_epoch(2019)), 1e-300, 0.0));
    records.push_back(record({3, 5}, static_cast<std::int64_t>(year_start_epoch(2019)), -0.123456789012345678, 1e300));
    records.push_back(record({3, 6}, static_cast<std::int64_t>(year_start_epoch(2019)), 0.1 + 0.2, 5e-324));
    const auto written = write_product(records, meta(), dir / "p.csv");
    const auto product = read_product(dir / "p.csv");
    CHECK(product.metadata == written);
    CHECK(written.row_count == records.size());
    REQUIRE(product.records.size() == records.size());

    auto sorted = records;
    std::stable_sort(sorted.begin(), sorted.end(), [](const auto& a, const auto& b) {
        return std::tie(a.sif_time, a.sif_latitude, a.sif_longitude) <
               std::tie(b.sif_time, b.sif_latitude, b.sif_longitude);
    });
    for (std::size_t i = 0; i < sorted.size(); ++i) {
        const auto& a = sorted[i];
        const auto& b = product.records[i];
        REQUIRE(bitwise_equal(a.sif_740nm, b.sif_740nm));
        REQUIRE(bitwise_equal(a.sif_uncertainty, b.sif_uncertainty));
        REQUIRE(bitwise_equal(a.sif_quantile_2_5, b.sif_quantile_2_5));
        REQUIRE(bitwise_equal(a.sif_quantile_97_5, b.sif_quantile_97_5));
        REQUIRE(a == b);
    }
}

TEST_CASE("empty product is header-only")
{
    TempDir dir;
    write_product(std::vector<ProductRecord>{}, meta(), dir / "empty.csv");
    CHECK(read_file(dir / "empty.csv") ==
          "sif_740nm,sif_uncertainty,sif_quantile_2.5,sif_quantile_97.5,sif_land_cover,sif_latitude,sif_longitude,"
          "sif_time,sif_date_year,sif_date_month,sif_date_day,sif_date_hour,sif_date_minute,sif_date_second,"
          "sif_date_ms\n");
    CHECK(read_product(dir / "empty.csv").records.empty());
}

TEST_CASE("a hundred thousand records round-trip with a stable digest")
{
    TempDir dir;
    const auto records = random_year(100000, 2);
    const auto a = write_product(records, meta(), dir / "a.csv");
    const auto b = write_product(records, meta(), dir / "b.csv");
    CHECK(a.data_sha256 == b.data_sha256);
    CHECK(read_file(dir / "a.csv") == read_file(dir / "b.csv"));
    CHECK(sha256_file(dir / "a.csv") == a.data_sha256);
    CHECK(read_product(dir / "a.csv").records.size() == 100000);

    // Input order does not matter.
    auto shuffled = records;
    std::shuffle(shuffled.begin(), shuffled.end(), std::mt19937_64(9));
    CHECK(write_product(shuffled, meta(), dir / "c.csv").data_sha256 == a.data_sha256);
}

TEST_CASE("truncated files are errors, never partial data")
{
    TempDir dir;
    const auto records = random_year(50, 3);
    write_product(records, meta(), dir / "p.csv");
    const std::string full = read_file(dir / "p.csv");

    // Cut inside the last row.
    std::ofstream(dir / "p.csv", std::ios::binary | std::ios::trunc) << full.substr(0, full.size() - 7);
    try {
        read_product(dir / "p.csv");
        FAIL("partial row accepted");
    } catch (const ParseError& e) {
        CHECK(e.offset() == full.rfind('\n', full.size() - 2) + 1);
    }

    // Cut on a row boundary: the row count no longer matches.
    std::ofstream(dir / "p.csv", std::ios::binary | std::ios::trunc) << full.substr(0, full.rfind('\n', full.size() - 2) + 1);
    CHECK_THROWS_AS(read_product(dir / "p.csv"), ParseError);

    // Same length, altered byte.
    std::string altered = full;
    altered[altered.size() - 2] = altered[altered.size() - 2] == '0' ? '1' : '0';
    std::ofstream(dir / "p.csv", std::ios::binary | std::ios::trunc) << altered;
    CHECK_THROWS_AS(read_product(dir / "p.csv"), std::runtime_error);

    std::filesystem::remove(metadata_path(dir / "p.csv"));
    CHECK_THROWS_AS(read_product(dir / "p.csv"), std::runtime_error);
}

TEST_CASE("row-level invariant errors name the row")
{
    TempDir dir;
    std::vector<ProductRecord> records;
    for (int i = 0; i < 5; ++i) {
        records.push_back(record({100, 100 + i}, static_cast<std::int64_t>(year_start_epoch(2019)) + 86400 * i, 0.5, 0.1));
    }
    write_product(records, meta(), dir / "p.csv");
    // Row 2 (file line 3) gets its quantiles swapped.
    auto bad = records[2];
    std::swap(bad.sif_quantile_2_5, bad.sif_quantile_97_5);
    replace_line(dir / "p.csv", 3,
                 format_double(bad.sif_740nm) + ',' + format_double(bad.sif_uncertainty) + ',' +
                     format_double(bad.sif_quantile_2_5) + ',' + format_double(bad.sif_quantile_97_5) +
                     ",12,10.5,-77.5," + std::to_string(bad.sif_time) + ",2019,1,3,0,0,0,0");
    try {
        read_product(dir / "p.csv");
        FAIL("swapped quantiles accepted");
    } catch (const RecordError& e) {
        CHECK(e.row() == 2);
    }

    write_product(records, meta(), dir / "q.csv");
    replace_line(dir / "q.csv", 1, "0.5,0.1,0.3,0.7,12,10.5,-79.5,1546300800,2019,1,2,0,0,0,0");
    try {
        read_product(dir / "q.csv");
        FAIL("inconsistent date accepted");
    } catch (const RecordError& e) {
        CHECK(e.row() == 0);
    }
}

TEST_CASE("write_product refusals")
{
    TempDir dir;
    const auto records = random_year(10, 4);
    write_product(records, meta(), dir / "p.csv");
    CHECK_THROWS_AS(write_product(records, meta(), dir / "p.csv"), std::runtime_error);
    CHECK_NOTHROW(write_product(records, meta(), dir / "p.csv", true));

    auto water = records;
    water[3].sif_land_cover = 17;
    CHECK_THROWS_AS(write_product(water, meta(), dir / "w.csv"), RecordError);
    auto off_center = records;
    off_center[0].sif_latitude += 0.25;
    CHECK_THROWS_AS(write_product(off_center, meta(), dir / "o.csv"), RecordError);
    auto negative = records;
    negative[0].sif_uncertainty = -1e-9;
    CHECK_THROWS_AS(write_product(negative, meta(), dir / "n.csv"), RecordError);
    CHECK_THROWS_AS(write_product(records, meta(2020), dir / "y.csv"), RecordError);
    CHECK_FALSE(std::filesystem::exists(dir / "w.csv"));
}

TEST_CASE("golden fixture")
{
    const std::filesystem::path golden = "fixtures/product_2019.csv";
    std::vector<ProductRecord> records{
        record({135, 187}, 1547200000, 0.41234567890123456, 0.05),
        record({45, 300}, 1547200000, -0.02, 0.125, 255),
        record({135, 186}, 1560000000, 1.5, 0.2, 4),
    };
    records[1].sif_quantile_2_5 = -0.3;
    records[1].sif_quantile_97_5 = 0.21;
    auto m = meta();
    if (std::getenv("SIFBHM_UPDATE_GOLDEN") != nullptr) {
        write_product(records, m, golden, true);
    }
    CHECK(serialize_product(records) == read_file(golden));
    const auto product = read_product(golden);
    CHECK(product.records.size() == 3);
    CHECK(product.records[0].sif_latitude == -44.5);
    CHECK(product.records[1].sif_740nm == 0.41234567890123456);
    CHECK(product.metadata.seed == 42);
    CHECK(product.metadata.product_version == "1.0");
}

TEST_CASE("attach_context")
{
    PosteriorSummary summary;
    summary.days.push_back(DayPosterior{.t = 10.5, .x_mean = 0.1 + 0.2, .x_sd = 1.0 / 3.0, .x_q2_5 = -0.25,
                                        .x_q97_5 = 0.875, .rhat = 1.0, .ess = 500});
    const std::int64_t time = 1547200000;
    const auto out = attach_context(summary, CellId{135, 187}, 12, std::span(&time, 1));
    REQUIRE(out.size() == 1);
    CHECK(bitwise_equal(out[0].sif_740nm, 0.1 + 0.2));
    CHECK(bitwise_equal(out[0].sif_uncertainty, 1.0 / 3.0));
    CHECK(out[0].sif_quantile_2_5 == -0.25);
    CHECK(out[0].sif_quantile_97_5 == 0.875);
    CHECK(out[0].sif_latitude == 45.5);
    CHECK(out[0].sif_longitude == 7.5);
    CHECK(out[0].sif_land_cover == 12);
    CHECK(out[0].sif_date == UtcDateTime{2019, 1, 11, 9, 46, 40, 0});
    CHECK_NOTHROW(out[0].validate());

    const std::vector<std::int64_t> two{time, time + 86400};
    CHECK_THROWS_AS(attach_context(summary, CellId{135, 187}, 12, two), std::invalid_argument);
}
