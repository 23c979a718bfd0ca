#include "sifbhm/ingest.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <tuple>
#include <stdexcept>
#include <string>

#include "sifbhm/calendar.hpp"
#include "sifbhm/textio.hpp"

namespace sifbhm {

Grid Grid::filled(int pixels_per_degree, std::uint8_t code)
{
    Grid g;
    g.pixels_per_degree = pixels_per_degree;
    g.rows = 180 * pixels_per_degree;
    g.cols = 360 * pixels_per_degree;
    g.codes.assign(static_cast<std::size_t>(g.rows) * g.cols, code);
    return g;
}

std::optional<std::pair<int, int>> Grid::pixel_containing(double latitude, double longitude) const
{
    const double r = std::floor((latitude - south) * pixels_per_degree);
    const double c = std::floor((longitude - west) * pixels_per_degree);
    if (!(r >= 0.0 && r < rows && c >= 0.0 && c < cols)) {
        return std::nullopt;
    }
    return std::pair{static_cast<int>(r), static_cast<int>(c)};
}

void Grid::validate_global() const
{
    if (pixels_per_degree < 1) {
        throw std::invalid_argument("grid resolution must be 1/N degree for integer N >= 1");
    }
    if (south != -90.0 || west != -180.0 || rows != 180 * pixels_per_degree || cols != 360 * pixels_per_degree) {
        throw std::invalid_argument("grid does not cover the globe at its resolution");
    }
    if (codes.size() != static_cast<std::size_t>(rows) * cols) {
        throw std::invalid_argument("grid payload size does not match its dimensions");
    }
}

void validate_land_cover(const Grid& grid)
{
    grid.validate_global();
    for (std::size_t i = 0; i < grid.codes.size(); ++i) {
        const auto c = grid.codes[i];
        if (!((c >= 1 && c <= 17) || c == kUnclassified)) {
            throw std::invalid_argument("land-cover code " + std::to_string(c) + " at pixel " + std::to_string(i));
        }
    }
}

void validate_biomes(const Grid& grid)
{
    grid.validate_global();
    if (grid.pixels_per_degree != 1) {
        throw std::invalid_argument("biome map must be at 1 degree");
    }
    for (std::size_t i = 0; i < grid.codes.size(); ++i) {
        if (grid.codes[i] > 15) {
            throw std::invalid_argument("biome code " + std::to_string(grid.codes[i]) + " at cell " + std::to_string(i));
        }
    }
}

Grid read_grid(const std::filesystem::path& path)
{
    const std::string text = read_file(path);
    LineCursor cur(text, path.string());
    std::string_view line;
    auto expect = [&](std::string_view key) -> std::string_view {
        if (!cur.next(line)) {
            cur.fail("missing header line '" + std::string(key) + "'");
        }
        if (line.substr(0, key.size()) != key || (line.size() > key.size() && line[key.size()] != ' ')) {
            cur.fail("expected header '" + std::string(key) + "'");
        }
        return line.size() > key.size() ? line.substr(key.size() + 1) : std::string_view{};
    };
    Grid g;
    try {
        if (expect("sifgrid") != "1") {
            cur.fail("unsupported grid version");
        }
        g.pixels_per_degree = static_cast<int>(parse_int(expect("pixels_per_degree")));
        g.south = parse_double(expect("south"));
        g.west = parse_double(expect("west"));
        g.rows = static_cast<int>(parse_int(expect("rows")));
        g.cols = static_cast<int>(parse_int(expect("cols")));
        expect("data");
    } catch (const std::invalid_argument& e) {
        cur.fail(e.what());
    }
    const std::size_t start = cur.line_offset() + line.size() + 1;
    if (g.rows <= 0 || g.cols <= 0) {
        throw ParseError(path.string(), start, "non-positive grid dimensions");
    }
    const std::size_t n = static_cast<std::size_t>(g.rows) * static_cast<std::size_t>(g.cols);
    if (text.size() - start != n) {
        throw ParseError(path.string(), std::min(text.size(), start + n),
                         "payload holds " + std::to_string(text.size() - start) + " bytes, expected " +
                             std::to_string(n));
    }
    g.codes.assign(text.begin() + static_cast<std::ptrdiff_t>(start), text.end());
    return g;
}

void write_grid(const std::filesystem::path& path, const Grid& grid, bool overwrite)
{
    if (grid.codes.size() != static_cast<std::size_t>(grid.rows) * grid.cols) {
        throw std::invalid_argument("grid payload size does not match its dimensions");
    }
    std::string out = "sifgrid 1\npixels_per_degree " + std::to_string(grid.pixels_per_degree) + "\nsouth " +
                      format_double(grid.south) + "\nwest " + format_double(grid.west) + "\nrows " +
                      std::to_string(grid.rows) + "\ncols " + std::to_string(grid.cols) + "\ndata\n";
    out.append(grid.codes.begin(), grid.codes.end());
    write_file_atomic(path, out, overwrite);
}

namespace {

constexpr std::array<std::string_view, 6> kSoundingColumns{"latitude",    "longitude",    "time_epoch_s",
                                                            "sif_740nm",   "sif_variance", "quality_flag"};

} // namespace

std::vector<SoundingRecord> read_soundings(const std::filesystem::path& path)
{
    const std::string text = read_file(path);
    LineCursor cur(text, path.string());
    std::string_view line;
    if (!cur.next(line)) {
        cur.fail("empty file, expected a header");
    }
    const auto header = split_fields(line);
    if (!std::equal(header.begin(), header.end(), kSoundingColumns.begin(), kSoundingColumns.end())) {
        cur.fail("header must be latitude,longitude,time_epoch_s,sif_740nm,sif_variance,quality_flag");
    }
    std::vector<SoundingRecord> out;
    while (cur.next(line)) {
        if (line.empty() || line == "\r") {
            continue;
        }
        const auto f = split_fields(line);
        if (f.size() != kSoundingColumns.size()) {
            cur.fail("expected 6 fields, found " + std::to_string(f.size()));
        }
        try {
            auto rec = SoundingRecord::at(parse_double(f[0]), parse_double(f[1]), parse_double(f[2]),
                                          parse_double(f[3]), parse_double(f[4]), static_cast<int>(parse_int(f[5])));
            rec.validate();
            out.push_back(rec);
        } catch (const std::invalid_argument& e) {
            cur.fail(e.what());
        }
    }
    return out;
}

void write_soundings(const std::filesystem::path& path, std::span<const SoundingRecord> records, bool overwrite)
{
    std::string out = "latitude,longitude,time_epoch_s,sif_740nm,sif_variance,quality_flag\n";
    for (const auto& r : records) {
        out += format_double(r.latitude) + ',' + format_double(r.longitude) + ',' + format_double(r.time) + ',' +
               format_double(r.sif) + ',' + format_double(r.retrieval_variance) + ',' +
               std::to_string(r.quality_flag) + '\n';
    }
    write_file_atomic(path, out, overwrite);
}

RejectionCounters& RejectionCounters::operator+=(const RejectionCounters& other)
{
    quality += other.quality;
    out_of_bounds += other.out_of_bounds;
    ocean += other.ocean;
    masked_cell += other.masked_cell;
    wrong_year += other.wrong_year;
    return *this;
}

std::vector<SoundingRecord> filter_quality(std::span<const SoundingRecord> records, RejectionCounters* counters)
{
    std::vector<SoundingRecord> out;
    out.reserve(records.size());
    for (const auto& r : records) {
        if (r.quality_flag == 0 || r.quality_flag == 1) {
            out.push_back(r);
        }
    }
    if (counters != nullptr) {
        counters->quality += records.size() - out.size();
    }
    return out;
}

std::vector<SoundingRecord> mask_ocean(std::span<const SoundingRecord> records, const Grid& land_cover_fine,
                                       RejectionCounters* counters)
{
    std::vector<SoundingRecord> out;
    out.reserve(records.size());
    RejectionCounters local;
    for (const auto& r : records) {
        const auto px = land_cover_fine.pixel_containing(r.latitude, r.longitude);
        if (!px) {
            ++local.out_of_bounds;
        } else if (land_cover_fine.at(px->first, px->second) == kWaterBodies) {
            ++local.ocean;
        } else {
            out.push_back(r);
        }
    }
    if (counters != nullptr) {
        *counters += local;
    }
    return out;
}

Grid upscale_landcover(const Grid& fine)
{
    fine.validate_global();
    const int f = fine.pixels_per_degree;
    Grid coarse = Grid::filled(1, kWaterBodies);
    std::array<int, 256> counts{};
    for (int i = 0; i < coarse.rows; ++i) {
        for (int j = 0; j < coarse.cols; ++j) {
            counts.fill(0);
            for (int r = i * f; r < (i + 1) * f; ++r) {
                for (int c = j * f; c < (j + 1) * f; ++c) {
                    ++counts[fine.at(r, c)];
                }
            }
            int best = kWaterBodies;
            int best_count = 0;
            for (int code = 0; code < 256; ++code) {
                if (code != kWaterBodies && counts[code] > best_count) {
                    best = code;
                    best_count = counts[code];
                }
            }
            coarse.at(i, j) = static_cast<std::uint8_t>(best);
        }
    }
    return coarse;
}

std::size_t CellMask::included_count() const
{
    return static_cast<std::size_t>(std::count(included.begin(), included.end(), true));
}

CellMask exclude_cells(const Grid& land_cover_1deg)
{
    land_cover_1deg.validate_global();
    if (land_cover_1deg.pixels_per_degree != 1) {
        throw std::invalid_argument("cell mask needs a 1-degree land-cover map");
    }
    CellMask mask;
    mask.land_cover = land_cover_1deg.codes;
    mask.included.resize(mask.land_cover.size());
    for (std::size_t i = 0; i < mask.land_cover.size(); ++i) {
        const auto c = mask.land_cover[i];
        mask.included[i] = c != kPermanentSnowIce && c != kBarren && c != kWaterBodies;
        if (c == kUnclassified) {
            ++mask.unclassified;
        }
    }
    return mask;
}

std::vector<CellYearDataset> group_cell_year(std::span<const SoundingRecord> records, const CellMask& mask, int year,
                                             RejectionCounters* counters)
{
    // Key: (cell linear index, UTC day number), then input position for a stable order.
    struct Keyed
    {
        std::size_t cell;
        std::int64_t day;
        std::size_t pos;
    };
    std::vector<Keyed> keys;
    keys.reserve(records.size());
    RejectionCounters local;
    for (std::size_t i = 0; i < records.size(); ++i) {
        const auto& r = records[i];
        if (!CellId::in_bounds(r.latitude, r.longitude)) {
            ++local.out_of_bounds;
            continue;
        }
        if (utc_year(r.time) != year) {
            ++local.wrong_year;
            continue;
        }
        const CellId cell = CellId::containing(r.latitude, r.longitude);
        if (!mask.includes(cell)) {
            ++local.masked_cell;
            continue;
        }
        keys.push_back({cell.linear_index(), utc_day_number(r.time), i});
    }
    std::sort(keys.begin(), keys.end(), [](const Keyed& a, const Keyed& b) {
        return std::tie(a.cell, a.day, a.pos) < std::tie(b.cell, b.day, b.pos);
    });

    std::vector<CellYearDataset> out;
    for (std::size_t k = 0; k < keys.size();) {
        CellYearDataset ds;
        ds.cell = CellId{static_cast<int>(keys[k].cell / CellId::kCols), static_cast<int>(keys[k].cell % CellId::kCols)};
        ds.year = year;
        ds.land_cover = mask.land_cover[keys[k].cell];
        while (k < keys.size() && keys[k].cell == ds.cell.linear_index()) {
            OverpassDay day;
            const std::int64_t key = keys[k].day;
            double t_sum = 0.0;
            while (k < keys.size() && keys[k].cell == ds.cell.linear_index() && keys[k].day == key) {
                day.soundings.push_back(records[keys[k].pos]);
                t_sum += day.soundings.back().day_of_year;
                ++k;
            }
            day.t = t_sum / static_cast<double>(day.soundings.size());
            ds.days.push_back(std::move(day));
        }
        out.push_back(std::move(ds));
    }
    if (counters != nullptr) {
        *counters += local;
    }
    return out;
}

std::int64_t aggregate_time(const OverpassDay& day, std::optional<std::int64_t> coincident_time)
{
    if (coincident_time) {
        return *coincident_time;
    }
    if (day.soundings.empty()) {
        throw std::invalid_argument("aggregate_time needs at least one sounding");
    }
    long double sum = 0.0L;
    for (const auto& s : day.soundings) {
        sum += s.time;
    }
    const long double mean = sum / static_cast<long double>(day.soundings.size());
    return static_cast<std::int64_t>(std::floor(mean + 0.5L));
}

CoincidentTimes read_coincident_times(const std::filesystem::path& path)
{
    const std::string text = read_file(path);
    LineCursor cur(text, path.string());
    std::string_view line;
    if (!cur.next(line) || split_fields(line) != std::vector<std::string_view>{"cell_lat_index", "cell_lon_index",
                                                                               "date", "time_epoch_s"}) {
        cur.fail("header must be cell_lat_index,cell_lon_index,date,time_epoch_s");
    }
    CoincidentTimes out;
    while (cur.next(line)) {
        if (line.empty()) {
            continue;
        }
        const auto f = split_fields(line);
        if (f.size() != 4) {
            cur.fail("expected 4 fields");
        }
        try {
            const CellId cell{static_cast<int>(parse_int(f[0])), static_cast<int>(parse_int(f[1]))};
            if (!cell.valid()) {
                throw std::invalid_argument("cell index out of range");
            }
            int y = 0, m = 0, d = 0;
            char tail = 0;
            const std::string date(f[2]);
            if (std::sscanf(date.c_str(), "%d-%d-%d%c", &y, &m, &d, &tail) != 3) {
                throw std::invalid_argument("date must be YYYY-MM-DD: '" + date + "'");
            }
            const double day_start = from_utc(UtcDateTime{y, m, d});
            if (to_utc(day_start) != UtcDateTime{y, m, d}) {
                throw std::invalid_argument("invalid calendar date '" + date + "'");
            }
            const auto key = std::pair{cell, utc_day_number(day_start)};
            if (!out.emplace(key, parse_int(f[3])).second) {
                throw std::invalid_argument("duplicate entry for " + to_string(cell) + " on " + date);
            }
        } catch (const std::invalid_argument& e) {
            cur.fail(e.what());
        }
    }
    return out;
}

std::optional<std::int64_t> lookup_coincident(const CoincidentTimes& table, CellId cell, const OverpassDay& day)
{
    if (day.soundings.empty()) {
        return std::nullopt;
    }
    const auto it = table.find({cell, utc_day_number(day.soundings.front().time)});
    if (it == table.end()) {
        return std::nullopt;
    }
    return it->second;
}

IngestResult ingest_year(std::span<const SoundingRecord> records, const Grid& land_cover_fine, const CellMask& mask,
                         int year)
{
    IngestResult result;
    result.input_count = records.size();
    const auto good = filter_quality(records, &result.rejected);
    const auto land = mask_ocean(good, land_cover_fine, &result.rejected);
    result.datasets = group_cell_year(land, mask, year, &result.rejected);
    return result;
}

} // namespace sifbhm
