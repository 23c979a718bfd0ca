#include "sifbhm/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>
#include <tuple>

#include "sifbhm/textio.hpp"

namespace sifbhm {

namespace {

CellId cell_of(const ProductRecord& r)
{
    return CellId::containing(r.sif_latitude, r.sif_longitude);
}

double quantile7(const std::vector<double>& sorted, double p)
{
    const double h = (static_cast<double>(sorted.size()) - 1.0) * p;
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
    return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

int biome_of(const Grid& biomes, CellId cell)
{
    return biomes.at(cell.lat_index, cell.lon_index);
}

// Cell-months in the hemisphere, grouped by (biome, month); unassigned ones are counted.
template <class Sink>
void for_each_assigned(std::span<const ProductRecord> records, const Grid& biomes, Hemisphere hemisphere,
                       std::size_t& cell_months, std::size_t& unassigned, Sink sink)
{
    validate_biomes(biomes);
    for (const auto& cm : cell_month_means(records)) {
        if (hemisphere_of(cm.cell) != hemisphere) {
            continue;
        }
        ++cell_months;
        const int biome = biome_of(biomes, cm.cell);
        if (biome == kBiomeMissing) {
            ++unassigned;
            continue;
        }
        sink(biome, cm);
    }
}

} // namespace

Hemisphere hemisphere_of(CellId cell)
{
    return cell.center_latitude() >= 0.0 ? Hemisphere::north : Hemisphere::south;
}

std::string to_string(Hemisphere h)
{
    return h == Hemisphere::north ? "north" : "south";
}

BoxStats box_stats(std::vector<double> values)
{
    if (values.empty()) {
        throw std::invalid_argument("box_stats of an empty sample");
    }
    std::sort(values.begin(), values.end());
    BoxStats s;
    s.n = values.size();
    s.min = values.front();
    s.max = values.back();
    s.q1 = quantile7(values, 0.25);
    s.median = quantile7(values, 0.5);
    s.q3 = quantile7(values, 0.75);
    const double reach = 1.5 * (s.q3 - s.q1);
    s.whisker_low = *std::lower_bound(values.begin(), values.end(), s.q1 - reach);
    s.whisker_high = *(std::upper_bound(values.begin(), values.end(), s.q3 + reach) - 1);
    double sum = 0.0;
    for (double v : values) {
        sum += v;
    }
    s.mean = sum / static_cast<double>(s.n);
    return s;
}

std::vector<CellMonth> cell_month_means(std::span<const ProductRecord> records)
{
    // Summed in (time, value) order so results do not depend on input order.
    std::map<std::pair<CellId, int>, std::vector<std::tuple<std::int64_t, double, double>>> groups;
    for (const auto& r : records) {
        groups[{cell_of(r), r.sif_date.month}].emplace_back(r.sif_time, r.sif_740nm, r.sif_uncertainty);
    }
    std::vector<CellMonth> out;
    out.reserve(groups.size());
    for (auto& [key, rows] : groups) {
        std::sort(rows.begin(), rows.end());
        double sum = 0.0;
        double sum_var = 0.0;
        for (const auto& [time, sif, sd] : rows) {
            sum += sif;
            sum_var += sd * sd;
        }
        const auto n = static_cast<double>(rows.size());
        out.push_back({key.first, key.second, rows.size(), sum / n, std::sqrt(sum_var / n)});
    }
    return out;
}

BiomeAggregate monthly_biome_aggregate(std::span<const ProductRecord> records, const Grid& biomes,
                                       Hemisphere hemisphere)
{
    BiomeAggregate agg;
    agg.hemisphere = hemisphere;
    std::map<std::pair<int, int>, BiomeMonthDistribution> groups;
    for_each_assigned(records, biomes, hemisphere, agg.cell_months, agg.unassigned,
                      [&](int biome, const CellMonth& cm) {
                          auto& g = groups[{biome, cm.month}];
                          g.biome = biome;
                          g.month = cm.month;
                          g.cells.push_back(cm.cell);
                          g.values.push_back(cm.mean);
                      });
    for (auto& [key, g] : groups) {
        g.stats = box_stats(g.values);
        agg.rows.push_back(std::move(g));
    }
    return agg;
}

UncertaintySeries mean_uncertainty_series(std::span<const ProductRecord> records, const Grid& biomes,
                                          Hemisphere hemisphere)
{
    UncertaintySeries series;
    series.hemisphere = hemisphere;
    struct Acc
    {
        std::size_t n = 0;
        double sum = 0.0;
        double sum_var = 0.0;
    };
    std::map<std::pair<int, int>, Acc> groups;
    for_each_assigned(records, biomes, hemisphere, series.cell_months, series.unassigned,
                      [&](int biome, const CellMonth& cm) {
                          auto& a = groups[{biome, cm.month}];
                          ++a.n;
                          a.sum += cm.mean;
                          a.sum_var += cm.rms_sd * cm.rms_sd;
                      });
    for (const auto& [key, a] : groups) {
        const auto n = static_cast<double>(a.n);
        BiomeMonthSeries row;
        row.biome = key.first;
        row.month = key.second;
        row.cells = a.n;
        row.mean = a.sum / n;
        row.sd = std::sqrt(a.sum_var / n);
        row.lower = row.mean - row.sd;
        row.upper = row.mean + row.sd;
        series.rows.push_back(row);
    }
    return series;
}

MonthlyMap monthly_global_map(std::span<const ProductRecord> records, int month)
{
    if (month < 1 || month > 12) {
        throw std::invalid_argument("month must be in 1..12, got " + std::to_string(month));
    }
    MonthlyMap map;
    map.month = month;
    for (const auto& cm : cell_month_means(records)) {
        if (cm.month == month) {
            map.cells.push_back({cm.cell, cm.records, cm.mean});
        }
    }
    if (map.cells.empty()) {
        map.warning = "no records in month " + std::to_string(month);
    }
    return map;
}

std::string serialize_biome_values(const BiomeAggregate& agg)
{
    std::string out = "biome,month,hemisphere,cell_lat_index,cell_lon_index,sif_740nm_monthly_mean\n";
    const std::string hemi = to_string(agg.hemisphere);
    for (const auto& row : agg.rows) {
        for (std::size_t i = 0; i < row.cells.size(); ++i) {
            out += std::to_string(row.biome) + ',' + std::to_string(row.month) + ',' + hemi + ',' +
                   std::to_string(row.cells[i].lat_index) + ',' + std::to_string(row.cells[i].lon_index) + ',' +
                   format_double(row.values[i]) + '\n';
        }
    }
    return out;
}

std::string serialize_biome_boxes(const BiomeAggregate& agg)
{
    std::string out = "biome,month,hemisphere,n_cells,min,whisker_low,q1,median,q3,whisker_high,max,mean\n";
    const std::string hemi = to_string(agg.hemisphere);
    for (const auto& row : agg.rows) {
        const auto& s = row.stats;
        out += std::to_string(row.biome) + ',' + std::to_string(row.month) + ',' + hemi + ',' + std::to_string(s.n);
        for (double v : {s.min, s.whisker_low, s.q1, s.median, s.q3, s.whisker_high, s.max, s.mean}) {
            out += ',' + format_double(v);
        }
        out += '\n';
    }
    return out;
}

std::string serialize_series(const UncertaintySeries& series)
{
    std::string out = "biome,month,hemisphere,n_cells,sif_740nm_mean,sif_uncertainty_rms,lower,upper\n";
    const std::string hemi = to_string(series.hemisphere);
    for (const auto& row : series.rows) {
        out += std::to_string(row.biome) + ',' + std::to_string(row.month) + ',' + hemi + ',' +
               std::to_string(row.cells);
        for (double v : {row.mean, row.sd, row.lower, row.upper}) {
            out += ',' + format_double(v);
        }
        out += '\n';
    }
    return out;
}

std::string serialize_map(const MonthlyMap& map)
{
    std::string out = "cell_lat_index,cell_lon_index,latitude,longitude,month,n_records,sif_740nm_mean\n";
    for (const auto& c : map.cells) {
        out += std::to_string(c.cell.lat_index) + ',' + std::to_string(c.cell.lon_index) + ',' +
               format_double(c.cell.center_latitude()) + ',' + format_double(c.cell.center_longitude()) + ',' +
               std::to_string(map.month) + ',' + std::to_string(c.records) + ',' + format_double(c.mean) + '\n';
    }
    return out;
}

} // namespace sifbhm
