#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <map>
#include <random>
#include <set>

#include "sifbhm/analysis.hpp"
#include "sifbhm/calendar.hpp"

using namespace sifbhm;

namespace {

ProductRecord record(CellId cell, int year, int month, int day, double sif, double sd)
{
    ProductRecord r;
    r.sif_740nm = sif;
    r.sif_uncertainty = sd;
    r.sif_quantile_2_5 = sif - 2.0 * sd;
    r.sif_quantile_97_5 = sif + 2.0 * sd;
    r.sif_land_cover = 12;
    r.sif_latitude = cell.center_latitude();
    r.sif_longitude = cell.center_longitude();
    r.sif_time = static_cast<std::int64_t>(from_utc(UtcDateTime{year, month, day, 13, 0, 0, 0}));
    r.sif_date = to_utc(static_cast<double>(r.sif_time));
    return r;
}

Grid biome_grid(std::initializer_list<std::pair<CellId, int>> assignments)
{
    Grid g = Grid::filled(1, kBiomeMissing);
    for (const auto& [cell, biome] : assignments) {
        g.at(cell.lat_index, cell.lon_index) = static_cast<std::uint8_t>(biome);
    }
    return g;
}

// A year of records on scattered cells with random gaps.
std::vector<ProductRecord> synthetic_year(std::uint64_t seed, std::vector<CellId>& cells)
{
    std::mt19937_64 gen(seed);
    std::uniform_int_distribution<int> lat(40, 140), lon(0, 359);
    std::uniform_real_distribution<double> sif(0.0, 1.5), sd(0.01, 0.3), keep(0.0, 1.0);
    while (cells.size() < 60) {
        const CellId c{lat(gen), lon(gen)};
        if (std::find(cells.begin(), cells.end(), c) == cells.end()) {
            cells.push_back(c);
        }
    }
    std::vector<ProductRecord> out;
    for (const auto& c : cells) {
        for (int month = 1; month <= 12; ++month) {
            for (int day = 1; day <= 28; day += 3) {
                if (keep(gen) < 0.3) {
                    out.push_back(record(c, 2019, month, day, sif(gen), sd(gen)));
                }
            }
        }
    }
    return out;
}

Grid random_biomes(std::uint64_t seed, const std::vector<CellId>& cells)
{
    std::mt19937_64 gen(seed);
    std::uniform_int_distribution<int> biome(0, 5);
    Grid g = Grid::filled(1, kBiomeMissing);
    for (const auto& c : cells) {
        g.at(c.lat_index, c.lon_index) = static_cast<std::uint8_t>(biome(gen));
    }
    return g;
}

} // namespace

TEST_CASE("hemisphere split at the equator")
{
    CHECK(hemisphere_of(CellId{90, 0}) == Hemisphere::north);
    CHECK(hemisphere_of(CellId{89, 0}) == Hemisphere::south);
    CHECK(to_string(Hemisphere::south) == "south");
}

TEST_CASE("box statistics")
{
    const auto s = box_stats({1, 2, 3, 4, 5, 6, 7, 8, 9, 100});
    CHECK(s.n == 10);
    CHECK(s.q1 == doctest::Approx(3.25));
    CHECK(s.median == doctest::Approx(5.5));
    CHECK(s.q3 == doctest::Approx(7.75));
    CHECK(s.whisker_low == 1);
    CHECK(s.whisker_high == 9);
    CHECK(s.max == 100);
    CHECK(s.mean == doctest::Approx(14.5));
    const auto one = box_stats({2.5});
    CHECK(one.q1 == 2.5);
    CHECK(one.whisker_high == 2.5);
    CHECK_THROWS_AS(box_stats({}), std::invalid_argument);
}

TEST_CASE("one cell with daily values 1, 2, 3 has monthly mean 2")
{
    const CellId c{120, 30};
    const std::vector<ProductRecord> rs{record(c, 2019, 5, 1, 1.0, 0.1), record(c, 2019, 5, 2, 2.0, 0.1),
                                        record(c, 2019, 5, 3, 3.0, 0.1)};
    const auto agg = monthly_biome_aggregate(rs, biome_grid({{c, 4}}), Hemisphere::north);
    REQUIRE(agg.rows.size() == 1);
    CHECK(agg.rows[0].biome == 4);
    CHECK(agg.rows[0].month == 5);
    CHECK(agg.rows[0].values == std::vector<double>{2.0});
    CHECK(agg.unassigned == 0);
    CHECK(monthly_biome_aggregate(rs, biome_grid({{c, 4}}), Hemisphere::south).rows.empty());
}

TEST_CASE("two cells in one biome give a distribution of two values")
{
    const CellId a{120, 30}, b{121, 30}, orphan{122, 30};
    const std::vector<ProductRecord> rs{record(a, 2019, 7, 1, 1.0, 0.1), record(b, 2019, 7, 9, 0.5, 0.1),
                                        record(orphan, 2019, 7, 9, 0.7, 0.1)};
    const auto agg = monthly_biome_aggregate(rs, biome_grid({{a, 2}, {b, 2}}), Hemisphere::north);
    REQUIRE(agg.rows.size() == 1);
    CHECK(agg.rows[0].values.size() == 2);
    CHECK(agg.rows[0].stats.median == doctest::Approx(0.75));
    CHECK(agg.unassigned == 1);
    CHECK(agg.cell_months == 3);
}

TEST_CASE("uncertainty series on one and two records")
{
    const CellId c{60, 10};
    const Grid biomes = biome_grid({{c, 7}});
    const std::vector<ProductRecord> one{record(c, 2019, 3, 4, 0.4, 0.05)};
    auto s = mean_uncertainty_series(one, biomes, Hemisphere::south);
    REQUIRE(s.rows.size() == 1);
    CHECK(s.rows[0].mean == doctest::Approx(0.4));
    CHECK(s.rows[0].sd == doctest::Approx(0.05));
    CHECK(s.rows[0].lower == doctest::Approx(0.35));
    CHECK(s.rows[0].upper == doctest::Approx(0.45));

    const std::vector<ProductRecord> two{record(c, 2019, 3, 4, 0.4, 0.05), record(c, 2019, 3, 8, 0.4, 0.05)};
    s = mean_uncertainty_series(two, biomes, Hemisphere::south);
    REQUIRE(s.rows.size() == 1);
    CHECK(s.rows[0].mean == doctest::Approx(0.4));
    CHECK(s.rows[0].sd == doctest::Approx(0.05));

    // RMS, not mean, of daily uncertainties.
    const std::vector<ProductRecord> mixed{record(c, 2019, 3, 4, 0.4, 0.1), record(c, 2019, 3, 8, 0.4, 0.2)};
    s = mean_uncertainty_series(mixed, biomes, Hemisphere::south);
    CHECK(s.rows[0].sd == doctest::Approx(std::sqrt(0.025)));
}

TEST_CASE("monthly map examples")
{
    const CellId c{100, 100}, other{101, 100};
    const std::vector<ProductRecord> rs{record(c, 2019, 6, 1, 0.5, 0.1), record(c, 2019, 6, 20, 1.5, 0.1),
                                        record(other, 2019, 7, 1, 9.0, 0.1)};
    const auto map = monthly_global_map(rs, 6);
    REQUIRE(map.cells.size() == 1);
    CHECK(map.cells[0].cell == c);
    CHECK(map.cells[0].mean == doctest::Approx(1.0));
    CHECK_FALSE(map.warning);
    const auto empty = monthly_global_map(rs, 1);
    CHECK(empty.cells.empty());
    CHECK(empty.warning);
    CHECK(serialize_map(empty) == "cell_lat_index,cell_lon_index,latitude,longitude,month,n_records,sif_740nm_mean\n");
    CHECK_THROWS_AS(monthly_global_map(rs, 13), std::invalid_argument);
}

TEST_CASE("aggregates match a brute-force group-by")
{
    std::vector<CellId> cells;
    const auto rs = synthetic_year(3, cells);
    const Grid biomes = random_biomes(4, cells);

    for (const auto hemi : {Hemisphere::north, Hemisphere::south}) {
        // Oracle: nested loops over cells and months, no shared grouping code.
        std::map<std::pair<int, int>, std::vector<double>> values;
        std::map<std::pair<int, int>, std::vector<double>> variances;
        std::size_t pairs = 0, unassigned = 0;
        for (const auto& c : cells) {
            if ((c.lat_index >= 90) != (hemi == Hemisphere::north)) {
                continue;
            }
            for (int m = 1; m <= 12; ++m) {
                double sum = 0.0, sum_var = 0.0;
                int n = 0;
                for (const auto& r : rs) {
                    if (r.sif_latitude == c.center_latitude() && r.sif_longitude == c.center_longitude() &&
                        r.sif_date.month == m) {
                        sum += r.sif_740nm;
                        sum_var += r.sif_uncertainty * r.sif_uncertainty;
                        ++n;
                    }
                }
                if (n == 0) {
                    continue;
                }
                ++pairs;
                const int b = biomes.at(c.lat_index, c.lon_index);
                if (b == 0) {
                    ++unassigned;
                    continue;
                }
                values[{b, m}].push_back(sum / n);
                variances[{b, m}].push_back(sum_var / n);
            }
        }

        const auto agg = monthly_biome_aggregate(rs, biomes, hemi);
        CHECK(agg.cell_months == pairs);
        CHECK(agg.unassigned == unassigned);
        REQUIRE(agg.rows.size() == values.size());
        std::size_t entries = 0;
        for (const auto& row : agg.rows) {
            auto expected = values.at({row.biome, row.month});
            auto got = row.values;
            std::sort(expected.begin(), expected.end());
            std::sort(got.begin(), got.end());
            REQUIRE(got.size() == expected.size());
            for (std::size_t i = 0; i < got.size(); ++i) {
                CHECK(got[i] == doctest::Approx(expected[i]).epsilon(1e-12));
            }
            entries += row.values.size();
        }
        // Conservation: entries = (cell, month) pairs present minus unassigned.
        CHECK(entries == pairs - unassigned);

        const auto series = mean_uncertainty_series(rs, biomes, hemi);
        REQUIRE(series.rows.size() == values.size());
        for (const auto& row : series.rows) {
            const auto& v = values.at({row.biome, row.month});
            const auto& var = variances.at({row.biome, row.month});
            double mean = 0.0, ms = 0.0;
            for (std::size_t i = 0; i < v.size(); ++i) {
                mean += v[i] / static_cast<double>(v.size());
                ms += var[i] / static_cast<double>(v.size());
            }
            CHECK(row.cells == v.size());
            CHECK(row.mean == doctest::Approx(mean).epsilon(1e-12));
            CHECK(row.sd == doctest::Approx(std::sqrt(ms)).epsilon(1e-12));
        }
    }

    for (int m = 1; m <= 12; ++m) {
        const auto map = monthly_global_map(rs, m);
        std::size_t present = 0;
        for (const auto& c : cells) {
            double sum = 0.0;
            int n = 0;
            for (const auto& r : rs) {
                if (CellId::containing(r.sif_latitude, r.sif_longitude) == c && r.sif_date.month == m) {
                    sum += r.sif_740nm;
                    ++n;
                }
            }
            if (n == 0) {
                continue;
            }
            ++present;
            const auto it = std::find_if(map.cells.begin(), map.cells.end(),
                                         [&](const MapCell& mc) { return mc.cell == c; });
            REQUIRE(it != map.cells.end());
            CHECK(it->records == static_cast<std::size_t>(n));
            CHECK(it->mean == doctest::Approx(sum / n).epsilon(1e-12));
        }
        CHECK(map.cells.size() == present);
    }
}

TEST_CASE("tables are deterministic and carry documented headers")
{
    std::vector<CellId> cells;
    const auto rs = synthetic_year(5, cells);
    const Grid biomes = random_biomes(6, cells);
    const auto a = monthly_biome_aggregate(rs, biomes, Hemisphere::north);
    CHECK(serialize_biome_boxes(a) == serialize_biome_boxes(monthly_biome_aggregate(rs, biomes, Hemisphere::north)));
    const auto boxes = serialize_biome_boxes(a);
    CHECK(boxes.substr(0, boxes.find('\n')) ==
          "biome,month,hemisphere,n_cells,min,whisker_low,q1,median,q3,whisker_high,max,mean");
    const auto values = serialize_biome_values(a);
    CHECK(static_cast<std::size_t>(std::count(values.begin(), values.end(), '\n')) ==
          1 + a.cell_months - a.unassigned);
    const auto series = serialize_series(mean_uncertainty_series(rs, biomes, Hemisphere::south));
    CHECK(series.substr(0, series.find('\n')) ==
          "biome,month,hemisphere,n_cells,sif_740nm_mean,sif_uncertainty_rms,lower,upper");

    // Input order does not matter.
    auto shuffled = rs;
    std::shuffle(shuffled.begin(), shuffled.end(), std::mt19937_64(7));
    CHECK(serialize_biome_values(monthly_biome_aggregate(shuffled, biomes, Hemisphere::north)) == values);
}
