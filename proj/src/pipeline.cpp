#include "sifbhm/pipeline.hpp"

#include <algorithm>
#include <cctype>
#include <random>
#include <sstream>

#include "json.hpp"

#include "sifbhm/calendar.hpp"
#include "sifbhm/digest.hpp"
#include "sifbhm/textio.hpp"
#include "sifbhm/worker_pool.hpp"

namespace sifbhm {

namespace {

using nlohmann::json;

std::string trim(std::string s)
{
    const auto not_space = [](unsigned char c) { return !std::isspace(c); };
    s.erase(s.begin(), std::find_if(s.begin(), s.end(), not_space));
    s.erase(std::find_if(s.rbegin(), s.rend(), not_space).base(), s.end());
    return s;
}

bool parse_bool(const std::string& v)
{
    if (v == "true" || v == "1" || v == "yes") {
        return true;
    }
    if (v == "false" || v == "0" || v == "no") {
        return false;
    }
    throw std::invalid_argument("expected true or false, got '" + v + "'");
}

std::size_t parse_count(const std::string& v)
{
    const auto n = parse_int(v);
    if (n < 0) {
        throw std::invalid_argument("expected a non-negative integer, got '" + v + "'");
    }
    return static_cast<std::size_t>(n);
}

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& value)
{
    const std::filesystem::path p(value);
    return (p.is_relative() && !base.empty()) ? base / p : p;
}

std::string cell_file(CellId cell)
{
    return std::to_string(cell.lat_index) + "_" + std::to_string(cell.lon_index) + ".json";
}

json cell_json(CellId c)
{
    return json::array({c.lat_index, c.lon_index});
}

json record_json(const ProductRecord& r)
{
    // Doubles as 17-digit strings so the cache is exact regardless of the JSON number printer.
    return json::array({format_double(r.sif_740nm), format_double(r.sif_uncertainty),
                        format_double(r.sif_quantile_2_5), format_double(r.sif_quantile_97_5), r.sif_land_cover,
                        format_double(r.sif_latitude), format_double(r.sif_longitude), r.sif_time});
}

ProductRecord record_from_json(const json& j)
{
    ProductRecord r;
    r.sif_740nm = parse_double(j.at(0).get<std::string>());
    r.sif_uncertainty = parse_double(j.at(1).get<std::string>());
    r.sif_quantile_2_5 = parse_double(j.at(2).get<std::string>());
    r.sif_quantile_97_5 = parse_double(j.at(3).get<std::string>());
    r.sif_land_cover = j.at(4).get<int>();
    r.sif_latitude = parse_double(j.at(5).get<std::string>());
    r.sif_longitude = parse_double(j.at(6).get<std::string>());
    r.sif_time = j.at(7).get<std::int64_t>();
    r.sif_date = to_utc(static_cast<double>(r.sif_time));
    r.validate();
    return r;
}

json counters_json(const RejectionCounters& c)
{
    return {{"quality", c.quality},
            {"out_of_bounds", c.out_of_bounds},
            {"ocean", c.ocean},
            {"masked_cell", c.masked_cell},
            {"wrong_year", c.wrong_year}};
}

std::string cells_text(const std::vector<CellId>& cells)
{
    std::string s;
    for (const auto& c : cells) {
        s += (s.empty() ? "" : " ") + to_string(c);
    }
    return s;
}

Grid load_land_cover_1deg(const PipelineConfig& config, const Grid& fine)
{
    if (config.land_cover_1deg.empty()) {
        return upscale_landcover(fine);
    }
    Grid coarse = read_grid(config.land_cover_1deg);
    validate_land_cover(coarse);
    if (coarse.pixels_per_degree != 1) {
        throw std::invalid_argument(config.land_cover_1deg.string() + " is not a 1-degree map");
    }
    return coarse;
}

} // namespace

std::filesystem::path PipelineConfig::soundings_path(int year) const
{
    std::string p = soundings_pattern;
    for (std::size_t pos = p.find("{year}"); pos != std::string::npos; pos = p.find("{year}")) {
        p.replace(pos, 6, std::to_string(year));
    }
    return p;
}

std::filesystem::path PipelineConfig::product_path(int year) const
{
    return output_dir / ("sif_bhm_" + std::to_string(year) + ".csv");
}

std::filesystem::path PipelineConfig::cache_dir(int year) const
{
    return output_dir / "cache" / std::to_string(year);
}

std::filesystem::path PipelineConfig::effective_prior_table() const
{
    return prior_table.empty() ? output_dir / "prior_table.csv" : prior_table;
}

void PipelineConfig::validate() const
{
    if (years.empty()) {
        throw std::invalid_argument("no years configured");
    }
    if (soundings_pattern.empty()) {
        throw std::invalid_argument("soundings path is not configured");
    }
    for (int y : years) {
        if (!std::filesystem::exists(soundings_path(y))) {
            throw std::invalid_argument("missing sounding table " + soundings_path(y).string());
        }
    }
    if (land_cover_fine.empty() || !std::filesystem::exists(land_cover_fine)) {
        throw std::invalid_argument("missing fine land-cover map '" + land_cover_fine.string() + "'");
    }
    for (const auto* p : {&dense_soundings, &land_cover_1deg, &biome_map, &coincident_times}) {
        if (!p->empty() && !std::filesystem::exists(*p)) {
            throw std::invalid_argument("missing input " + p->string());
        }
    }
    if (workers < 1) {
        throw std::invalid_argument("workers must be >= 1");
    }
    sampler.validate();
}

std::vector<int> parse_years(const std::string& text)
{
    std::vector<int> years;
    for (auto f : split_fields(text)) {
        const auto dash = f.find('-', 1);
        if (dash != std::string_view::npos) {
            const int lo = static_cast<int>(parse_int(f.substr(0, dash)));
            const int hi = static_cast<int>(parse_int(f.substr(dash + 1)));
            if (hi < lo) {
                throw std::invalid_argument("empty year range '" + std::string(f) + "'");
            }
            for (int y = lo; y <= hi; ++y) {
                years.push_back(y);
            }
        } else if (!f.empty()) {
            years.push_back(static_cast<int>(parse_int(f)));
        }
    }
    std::sort(years.begin(), years.end());
    years.erase(std::unique(years.begin(), years.end()), years.end());
    return years;
}

void apply_setting(PipelineConfig& c, const std::string& key, const std::string& value,
                   const std::filesystem::path& base)
{
    if (key == "soundings") {
        c.soundings_pattern = resolve(base, value).string();
    } else if (key == "dense_soundings") {
        c.dense_soundings = resolve(base, value);
    } else if (key == "prior_table") {
        c.prior_table = resolve(base, value);
    } else if (key == "land_cover_fine") {
        c.land_cover_fine = resolve(base, value);
    } else if (key == "land_cover_1deg") {
        c.land_cover_1deg = resolve(base, value);
    } else if (key == "biome_map") {
        c.biome_map = resolve(base, value);
    } else if (key == "coincident_times") {
        c.coincident_times = resolve(base, value);
    } else if (key == "output_dir") {
        c.output_dir = resolve(base, value);
    } else if (key == "years") {
        c.years = parse_years(value);
    } else if (key == "workers") {
        c.workers = parse_count(value);
    } else if (key == "seed") {
        c.sampler.seed = static_cast<std::uint64_t>(parse_count(value));
    } else if (key == "chains") {
        c.sampler.n_chains = parse_count(value);
    } else if (key == "iterations") {
        c.sampler.n_iterations = parse_count(value);
    } else if (key == "burnin") {
        c.sampler.n_burnin = parse_count(value);
    } else if (key == "thin") {
        c.sampler.thin = parse_count(value);
    } else if (key == "rhat_threshold") {
        c.sampler.rhat_threshold = parse_double(value);
    } else if (key == "ess_threshold") {
        c.sampler.ess_threshold = parse_double(value);
    } else if (key == "min_dense_days") {
        c.hyperprior.min_distinct_days = parse_count(value);
    } else if (key == "resume") {
        c.resume = parse_bool(value);
    } else if (key == "force") {
        c.force = parse_bool(value);
    } else {
        throw std::invalid_argument("unknown setting '" + key + "'");
    }
}

PipelineConfig load_config(const std::filesystem::path& path)
{
    const std::string text = read_file(path);
    LineCursor cur(text, path.string());
    PipelineConfig config;
    const auto base = path.parent_path();
    std::string_view raw;
    while (cur.next(raw)) {
        std::string line(raw.substr(0, raw.find('#')));
        line = trim(line);
        if (line.empty()) {
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            cur.fail("expected key = value");
        }
        try {
            apply_setting(config, trim(line.substr(0, eq)), trim(line.substr(eq + 1)), base);
        } catch (const std::invalid_argument& e) {
            cur.fail(e.what());
        }
    }
    return config;
}

CellOutcome fit_cell(const CellYearDataset& data, const PriorTable& priors, const SamplerConfig& sampler,
                     const CoincidentTimes* coincident)
{
    CellOutcome out;
    out.cell = data.cell;
    out.year = data.year;
    try {
        const auto prior = prior_for(priors, data.cell, &out.used_default_prior);
        const auto summary = run_chain(data, prior, sampler);
        std::vector<std::int64_t> times;
        times.reserve(data.days.size());
        for (const auto& day : data.days) {
            const auto coincident_time =
                coincident != nullptr ? lookup_coincident(*coincident, data.cell, day) : std::nullopt;
            times.push_back(aggregate_time(day, coincident_time));
        }
        out.records = attach_context(summary, data.cell, data.land_cover, times);
        out.converged = summary.converged;
        out.max_rhat = summary.max_rhat;
        out.min_ess = summary.min_ess;
    } catch (const std::exception& e) {
        out.records.clear();
        out.error = e.what();
    }
    return out;
}

std::string cache_key(const SamplerConfig& sampler, const std::string& prior_table_digest, int year)
{
    return sha256_hex(sampler.canonical() + "|" + prior_table_digest + "|" + std::to_string(year) + "|" +
                      kProductVersion);
}

void write_cell_cache(const std::filesystem::path& dir, const CellOutcome& o, const std::string& key)
{
    json records = json::array();
    for (const auto& r : o.records) {
        records.push_back(record_json(r));
    }
    const json j{{"key", key},
                 {"cell", cell_json(o.cell)},
                 {"year", o.year},
                 {"converged", o.converged},
                 {"used_default_prior", o.used_default_prior},
                 {"max_rhat", format_double(o.max_rhat)},
                 {"min_ess", format_double(o.min_ess)},
                 {"records", records}};
    write_file_atomic(dir / cell_file(o.cell), j.dump() + '\n', true);
}

std::optional<CellOutcome> read_cell_cache(const std::filesystem::path& dir, CellId cell, int year,
                                           const std::string& key)
{
    const auto path = dir / cell_file(cell);
    if (!std::filesystem::exists(path)) {
        return std::nullopt;
    }
    try {
        const auto j = json::parse(read_file(path));
        if (j.at("key").get<std::string>() != key || j.at("year").get<int>() != year ||
            j.at("cell") != cell_json(cell)) {
            return std::nullopt;
        }
        CellOutcome o;
        o.cell = cell;
        o.year = year;
        o.converged = j.at("converged").get<bool>();
        o.used_default_prior = j.at("used_default_prior").get<bool>();
        o.max_rhat = parse_double(j.at("max_rhat").get<std::string>());
        o.min_ess = parse_double(j.at("min_ess").get<std::string>());
        o.from_cache = true;
        for (const auto& r : j.at("records")) {
            o.records.push_back(record_from_json(r));
        }
        return o;
    } catch (const std::exception&) {
        // Unreadable entries are refitted.
        return std::nullopt;
    }
}

std::string RunReport::to_json() const
{
    json years_json = json::array();
    for (const auto& y : years) {
        json failures = json::array();
        for (const auto& f : y.failures) {
            failures.push_back({{"cell", cell_json(f.cell)}, {"error", f.error}});
        }
        json nonconverged = json::array();
        for (const auto& c : y.nonconverged) {
            nonconverged.push_back(cell_json(c));
        }
        json defaults = json::array();
        for (const auto& c : y.default_prior) {
            defaults.push_back(cell_json(c));
        }
        years_json.push_back({{"year", y.year},
                              {"input_records", y.input_records},
                              {"rejected", counters_json(y.rejected)},
                              {"grouped_records", y.grouped_records},
                              {"cells", y.cells},
                              {"cells_resumed", y.cells_resumed},
                              {"failures", failures},
                              {"nonconverged", nonconverged},
                              {"default_prior", defaults},
                              {"product_rows", y.product_rows},
                              {"product", y.product.string()},
                              {"product_sha256", y.product_sha256}});
    }
    const json j{{"years", years_json},
                 {"included_cells", included_cells},
                 {"unclassified_cells", unclassified_cells},
                 {"prior_cells", prior_cells},
                 {"sampler_config_digest", sampler_config_digest},
                 {"prior_table_digest", prior_table_digest},
                 {"warnings", warnings}};
    return j.dump(2) + '\n';
}

std::string RunReport::to_text() const
{
    std::ostringstream os;
    os << "included cells: " << included_cells << " (unclassified: " << unclassified_cells << ")\n"
       << "cells with a fitted prior: " << prior_cells << "\n";
    for (const auto& y : years) {
        const auto& r = y.rejected;
        os << "\nyear " << y.year << "\n"
           << "  input records:     " << y.input_records << "\n"
           << "  rejected quality:  " << r.quality << "\n"
           << "  rejected bounds:   " << r.out_of_bounds << "\n"
           << "  rejected ocean:    " << r.ocean << "\n"
           << "  rejected masked:   " << r.masked_cell << "\n"
           << "  rejected year:     " << r.wrong_year << "\n"
           << "  grouped records:   " << y.grouped_records << "\n"
           << "  cells:             " << y.cells << " (resumed " << y.cells_resumed << ")\n"
           << "  failed cells:      " << y.failures.size() << "\n"
           << "  not converged:     " << y.nonconverged.size() << "\n"
           << "  default prior:     " << y.default_prior.size() << "\n"
           << "  product rows:      " << y.product_rows << "\n"
           << "  product:           " << y.product.string() << "\n";
        for (const auto& f : y.failures) {
            os << "  failure " << to_string(f.cell) << ": " << f.error << "\n";
        }
        if (!y.nonconverged.empty()) {
            os << "  not converged: " << cells_text(y.nonconverged) << "\n";
        }
        if (!y.default_prior.empty()) {
            os << "  default prior: " << cells_text(y.default_prior) << "\n";
        }
    }
    for (const auto& w : warnings) {
        os << "warning: " << w << "\n";
    }
    return os.str();
}

RunReport run_pipeline(const PipelineConfig& config)
{
    config.validate();
    if (!config.force && !config.resume) {
        for (int y : config.years) {
            if (std::filesystem::exists(config.product_path(y))) {
                throw std::invalid_argument(config.product_path(y).string() +
                                            " exists; use resume or force to replace it");
            }
        }
    }
    std::filesystem::create_directories(config.output_dir);

    RunReport report;
    const Grid fine = read_grid(config.land_cover_fine);
    validate_land_cover(fine);
    const CellMask mask = exclude_cells(load_land_cover_1deg(config, fine));
    report.included_cells = mask.included_count();
    report.unclassified_cells = mask.unclassified;

    PriorTable priors;
    std::string prior_digest = sha256_hex("global-default");
    const auto table_path = config.effective_prior_table();
    if (std::filesystem::exists(table_path)) {
        priors = read_prior_table(table_path);
        prior_digest = sha256_file(table_path);
    } else if (!config.dense_soundings.empty()) {
        run_prior_fit(config);
        priors = read_prior_table(table_path);
        prior_digest = sha256_file(table_path);
    } else {
        report.warnings.push_back("no prior table or dense data; every cell uses the global default prior");
    }
    report.prior_cells = priors.size();
    report.prior_table_digest = prior_digest;
    report.sampler_config_digest = sha256_hex(config.sampler.canonical());

    std::optional<CoincidentTimes> coincident;
    if (!config.coincident_times.empty()) {
        coincident = read_coincident_times(config.coincident_times);
    }

    for (int year : config.years) {
        YearReport yr;
        yr.year = year;
        const auto records = read_soundings(config.soundings_path(year));
        const auto ingest = ingest_year(records, fine, mask, year);
        yr.input_records = ingest.input_count;
        yr.rejected = ingest.rejected;
        yr.cells = ingest.datasets.size();
        for (const auto& ds : ingest.datasets) {
            yr.grouped_records += ds.sounding_count();
        }

        const auto key = cache_key(config.sampler, prior_digest, year);
        const auto cache = config.cache_dir(year);
        std::filesystem::create_directories(cache);
        std::vector<CellOutcome> outcomes(ingest.datasets.size());
        run_pool<CellOutcome>(
            ingest.datasets.size(), config.workers,
            [&](std::size_t i) {
                const auto& ds = ingest.datasets[i];
                if (config.resume) {
                    if (auto cached = read_cell_cache(cache, ds.cell, year, key)) {
                        return *cached;
                    }
                }
                return fit_cell(ds, priors, config.sampler, coincident ? &*coincident : nullptr);
            },
            [&](std::size_t i, CellOutcome&& o) {
                if (!o.from_cache && o.error.empty()) {
                    write_cell_cache(cache, o, key);
                }
                outcomes[i] = std::move(o);
            });

        std::vector<ProductRecord> rows;
        for (const auto& o : outcomes) {
            if (!o.error.empty()) {
                yr.failures.push_back({o.cell, o.error});
                continue;
            }
            yr.cells_resumed += o.from_cache ? 1 : 0;
            if (!o.converged) {
                yr.nonconverged.push_back(o.cell);
            }
            if (o.used_default_prior) {
                yr.default_prior.push_back(o.cell);
            }
            rows.insert(rows.end(), o.records.begin(), o.records.end());
        }
        if (rows.empty()) {
            report.warnings.push_back("year " + std::to_string(year) + " produced no estimates");
        }

        ProductMetadata meta;
        meta.year = year;
        meta.seed = config.sampler.seed;
        meta.sampler_config_digest = report.sampler_config_digest;
        meta.prior_table_digest = prior_digest;
        meta = write_product(rows, meta, config.product_path(year), true);
        yr.product_rows = meta.row_count;
        yr.product = config.product_path(year);
        yr.product_sha256 = meta.data_sha256;
        report.years.push_back(std::move(yr));
    }

    write_file_atomic(config.output_dir / "run_report.json", report.to_json(), true);
    write_file_atomic(config.output_dir / "run_report.txt", report.to_text(), true);
    return report;
}

PriorFitReport run_prior_fit(const PipelineConfig& config)
{
    if (config.dense_soundings.empty() || !std::filesystem::exists(config.dense_soundings)) {
        throw std::invalid_argument("fit-prior needs an existing dense_soundings table");
    }
    if (config.land_cover_fine.empty() || !std::filesystem::exists(config.land_cover_fine)) {
        throw std::invalid_argument("missing fine land-cover map '" + config.land_cover_fine.string() + "'");
    }
    config.sampler.validate();
    const auto table_path = config.effective_prior_table();
    if (!config.force && std::filesystem::exists(table_path)) {
        throw std::invalid_argument(table_path.string() + " exists; use force to replace it");
    }

    const Grid fine = read_grid(config.land_cover_fine);
    validate_land_cover(fine);
    const CellMask mask = exclude_cells(load_land_cover_1deg(config, fine));
    const auto records = read_soundings(config.dense_soundings);
    const auto usable = mask_ocean(filter_quality(records), fine);
    const auto cells = group_dense(usable, mask);

    PriorFitReport report;
    report.cells = cells.size();
    report.table = table_path;
    struct Fit
    {
        std::optional<PriorTableEntry> entry;
        std::string error;
    };
    std::vector<Fit> fits(cells.size());
    run_pool<Fit>(
        cells.size(), config.workers,
        [&](std::size_t i) {
            Fit f;
            try {
                const auto fitted = fit_seasonal_prior(cells[i], config.sampler, config.hyperprior);
                f.entry = PriorTableEntry{fitted.spec, fitted.flag};
            } catch (const std::exception& e) {
                f.error = e.what();
            }
            return f;
        },
        [&](std::size_t i, Fit&& f) { fits[i] = std::move(f); });

    PriorTable table;
    for (std::size_t i = 0; i < cells.size(); ++i) {
        if (fits[i].entry) {
            report.boundary += fits[i].entry->flag == PriorFlag::boundary ? 1 : 0;
            table.emplace(cells[i].cell, *fits[i].entry);
        } else {
            report.skipped.push_back({cells[i].cell, fits[i].error});
        }
    }
    report.fitted = table.size();
    if (table.empty()) {
        throw std::runtime_error("no cell had enough dense data for a prior fit");
    }
    export_prior_table(table_path, table, true);
    return report;
}

PipelineConfig write_synthetic_inputs(const std::filesystem::path& dir, const SyntheticOptions& options)
{
    std::filesystem::create_directories(dir);
    std::mt19937_64 gen(options.seed);
    std::normal_distribution<double> n01;
    std::uniform_int_distribution<int> land_class(1, 14);
    std::uniform_int_distribution<int> biome(1, 14);

    // Water everywhere except the chosen cells, each with one water pixel in its south-west corner.
    Grid fine = Grid::filled(20, kWaterBodies);
    Grid biomes = Grid::filled(1, kBiomeMissing);
    std::vector<CellId> cells;
    for (std::size_t k = 0; k < options.cells; ++k) {
        const int row = k % 2 == 0 ? 120 + static_cast<int>(k % 30) : 50 + static_cast<int>(k % 25);
        const int col = static_cast<int>((k * 7) % 360);
        const CellId cell{row, col};
        if (std::find(cells.begin(), cells.end(), cell) != cells.end()) {
            continue;
        }
        cells.push_back(cell);
        const auto code = static_cast<std::uint8_t>(land_class(gen));
        for (int r = row * 20; r < row * 20 + 20; ++r) {
            for (int c = col * 20; c < col * 20 + 20; ++c) {
                fine.at(r, c) = code;
            }
        }
        fine.at(row * 20, col * 20) = kWaterBodies;
        // Every tenth cell has no biome assignment.
        biomes.at(row, col) = k % 10 == 9 ? kBiomeMissing : static_cast<std::uint8_t>(biome(gen));
    }
    // One barren cell with data that must be excluded.
    const CellId barren{100, 100};
    for (int r = barren.lat_index * 20; r < barren.lat_index * 20 + 20; ++r) {
        for (int c = barren.lon_index * 20; c < barren.lon_index * 20 + 20; ++c) {
            fine.at(r, c) = kBarren;
        }
    }

    const double year_start = year_start_epoch(options.year);
    std::vector<SoundingRecord> sparse;
    std::vector<SoundingRecord> dense;
    std::size_t lattice_count = 0;
    for (std::size_t k = 0; k < cells.size(); ++k) {
        const CellId cell = cells[k];
        const bool north = cell.center_latitude() >= 0.0;
        auto c = SeasonalCoefficients::zero();
        c.a = 0.02 * n01(gen);
        c.beta0 = 0.35 + 0.1 * n01(gen);
        c.beta1 = 0.0001 * n01(gen);
        c.beta2 = {(north ? -0.2 : 0.2) + 0.05 * n01(gen), 0.03 * n01(gen)};
        c.beta3 = {(north ? -0.25 : 0.25) + 0.05 * n01(gen), 0.03 * n01(gen)};
        const int phase = static_cast<int>(k % static_cast<std::size_t>(options.revisit_days));

        std::vector<DesignDay> design;
        for (int d = phase; d < 365; d += options.revisit_days) {
            design.push_back({d + 0.5 + 0.01 * static_cast<double>(k % 7),
                              std::vector<double>(options.soundings_per_day, 0.04)});
        }
        const VarianceState vars{std::vector<double>(design.size(), 0.03), 0.01};
        const auto sim = simulate_cell_year(c, vars, design, options.seed * 1000003 + k, cell, options.year);
        for (const auto& day : sim.data.days) {
            for (std::size_t i = 0; i < day.soundings.size(); ++i) {
                auto s = day.soundings[i];
                // Every tenth lattice sounding overall fails quality control.
                s.quality_flag = ++lattice_count % 10 == 0 ? 2 : static_cast<int>(i % 2);
                sparse.push_back(s);
            }
            // An ocean footprint over the corner water pixel.
            sparse.push_back(SoundingRecord::at(cell.south() + 0.02, cell.west() + 0.02, day.soundings[0].time,
                                                0.1, 0.04, 0));
        }

        if (options.dense) {
            for (int y = options.year - 2; y < options.year; ++y) {
                std::vector<DesignDay> daily;
                for (int d = 0; d < 365; d += 2) {
                    daily.push_back({d + 0.5, std::vector<double>(2, 0.02)});
                }
                const VarianceState dv{std::vector<double>(daily.size(), 0.02), 0.01};
                const auto ds = simulate_cell_year(c, dv, daily, options.seed * 7919 + k * 31 + y, cell, y);
                for (const auto& day : ds.data.days) {
                    dense.insert(dense.end(), day.soundings.begin(), day.soundings.end());
                }
            }
        }
    }
    for (int d = 5; d < 365; d += 30) {
        sparse.push_back(SoundingRecord::at(barren.center_latitude(), barren.center_longitude(),
                                            year_start + d * 86400.0 + 3600.0, 0.05, 0.04, 0));
    }

    PipelineConfig config;
    config.soundings_pattern = (dir / "soundings_{year}.csv").string();
    config.land_cover_fine = dir / "land_cover_005.grid";
    config.biome_map = dir / "biomes.grid";
    config.output_dir = dir / "out";
    config.years = {options.year};
    write_soundings(config.soundings_path(options.year), sparse, true);
    write_grid(config.land_cover_fine, fine, true);
    write_grid(config.biome_map, biomes, true);
    if (options.dense) {
        config.dense_soundings = dir / "dense.csv";
        write_soundings(config.dense_soundings, dense, true);
    }

    std::string cfg = "# synthetic scenario\nsoundings = soundings_{year}.csv\nland_cover_fine = land_cover_005.grid\n"
                      "biome_map = biomes.grid\noutput_dir = out\nyears = " +
                      std::to_string(options.year) + "\n";
    if (options.dense) {
        cfg += "dense_soundings = dense.csv\n";
    }
    write_file_atomic(dir / "sifbhm.conf", cfg, true);
    return config;
}

} // namespace sifbhm
