#include "sifbhm/hyperprior.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include "sifbhm/calendar.hpp"
#include "sifbhm/textio.hpp"

namespace sifbhm {

namespace {

// Stream tag keeping dense fits apart from every product year of the same cell.
constexpr std::int64_t kDenseStream = -1;

std::vector<std::string> table_columns(int harmonics)
{
    std::vector<std::string> cols{"cell_lat_index", "cell_lon_index", "b0", "s0", "b1", "s1"};
    for (int k = 1; k <= harmonics; ++k) {
        for (const char* group : {"2", "3"}) {
            cols.push_back(std::string("b") + group + "_" + std::to_string(k));
            cols.push_back(std::string("s") + group + "_" + std::to_string(k));
        }
    }
    cols.emplace_back("flag");
    return cols;
}

} // namespace

void DenseCellDataset::validate() const
{
    if (records.empty()) {
        throw std::invalid_argument("dense dataset for " + to_string(cell) + " is empty");
    }
    for (const auto& r : records) {
        r.validate();
        if (!cell.contains(r.latitude, r.longitude)) {
            throw std::invalid_argument("dense record outside " + to_string(cell));
        }
    }
}

std::size_t DenseCellDataset::distinct_days() const
{
    std::set<std::int64_t> days;
    for (const auto& r : records) {
        days.insert(utc_day_number(r.time));
    }
    return days.size();
}

std::vector<DenseCellDataset> group_dense(std::span<const SoundingRecord> records, const CellMask& mask)
{
    std::map<CellId, DenseCellDataset> cells;
    for (const auto& r : records) {
        if (!CellId::in_bounds(r.latitude, r.longitude)) {
            continue;
        }
        const CellId cell = CellId::containing(r.latitude, r.longitude);
        if (!mask.includes(cell)) {
            continue;
        }
        auto& ds = cells[cell];
        ds.cell = cell;
        ds.records.push_back(r);
    }
    std::vector<DenseCellDataset> out;
    out.reserve(cells.size());
    for (auto& [cell, ds] : cells) {
        out.push_back(std::move(ds));
    }
    return out;
}

ModelData dense_model_data(const DenseCellDataset& data, int harmonics)
{
    std::map<std::int64_t, OverpassDay> by_day;
    for (const auto& r : data.records) {
        by_day[utc_day_number(r.time)].soundings.push_back(r);
    }
    std::vector<OverpassDay> days;
    days.reserve(by_day.size());
    for (auto& [key, day] : by_day) {
        double sum = 0.0;
        for (const auto& s : day.soundings) {
            sum += s.day_of_year;
        }
        day.t = sum / static_cast<double>(day.soundings.size());
        days.push_back(std::move(day));
    }
    return ModelData(days, harmonics);
}

std::string to_string(PriorFlag flag)
{
    return flag == PriorFlag::ok ? "ok" : "boundary";
}

FittedPrior fit_seasonal_prior(const DenseCellDataset& data, const SamplerConfig& config,
                               const HyperpriorOptions& options)
{
    data.validate();
    config.validate();
    const std::size_t days = data.distinct_days();
    if (days < options.min_distinct_days) {
        throw InsufficientDenseData(to_string(data.cell) + " has " + std::to_string(days) +
                                    " distinct days of dense data, need " +
                                    std::to_string(options.min_distinct_days));
    }
    const ModelData model = dense_model_data(data, options.harmonics);
    const auto flat = SeasonalPriorSpec::uniform_betas(options.harmonics);
    const auto draws = sample_posterior(model, flat, config, {data.cell.lat_index, data.cell.lon_index, kDenseStream});

    FittedPrior fit;
    fit.summary = summarize(draws, model, config);
    const std::size_t p = beta_count(options.harmonics);
    Eigen::VectorXd b(p), s(p);
    fit.boundary.assign(p, false);
    for (std::size_t j = 0; j < p; ++j) {
        const auto pooled = draws.pooled(draws.layout.beta(j));
        const auto& coeff = fit.summary.coefficients[1 + j];
        b[static_cast<Eigen::Index>(j)] = coeff.mean;
        s[static_cast<Eigen::Index>(j)] = std::max(coeff.variance, std::numeric_limits<double>::min());
        const auto near = std::count_if(pooled.begin(), pooled.end(), [&](double v) {
            return v < flat.beta_lower + options.boundary_margin || v > flat.beta_upper - options.boundary_margin;
        });
        if (static_cast<double>(near) > options.boundary_fraction * static_cast<double>(pooled.size())) {
            fit.boundary[j] = true;
            fit.flag = PriorFlag::boundary;
        }
    }
    fit.spec = SeasonalPriorSpec::normal(b, s);
    return fit;
}

std::string serialize_prior_table(const PriorTable& table)
{
    if (table.empty()) {
        throw std::invalid_argument("prior table is empty");
    }
    const int harmonics = table.begin()->second.spec.harmonics();
    std::string out;
    for (const auto& c : table_columns(harmonics)) {
        out += (out.empty() ? "" : ",") + c;
    }
    out += '\n';
    for (const auto& [cell, entry] : table) {
        if (!cell.valid()) {
            throw std::invalid_argument("prior table cell index out of range: " + to_string(cell));
        }
        if (entry.spec.harmonics() != harmonics || entry.spec.beta_family != BetaPriorFamily::normal) {
            throw std::invalid_argument("prior table rows must share one harmonic count and the normal family");
        }
        entry.spec.validate();
        out += std::to_string(cell.lat_index) + ',' + std::to_string(cell.lon_index);
        const auto b = entry.spec.mean_vector();
        const auto s = entry.spec.variance_vector();
        for (Eigen::Index j = 0; j < b.size(); ++j) {
            out += ',' + format_double(b[j]) + ',' + format_double(s[j]);
        }
        out += ',' + to_string(entry.flag) + '\n';
    }
    return out;
}

void export_prior_table(const std::filesystem::path& path, const PriorTable& table, bool overwrite)
{
    write_file_atomic(path, serialize_prior_table(table), overwrite);
}

PriorTable read_prior_table(const std::filesystem::path& path)
{
    const std::string text = read_file(path);
    LineCursor cur(text, path.string());
    std::string_view line;
    if (!cur.next(line)) {
        cur.fail("empty prior table");
    }
    const auto header = split_fields(line);
    if (header.size() < 11 || (header.size() - 7) % 4 != 0) {
        cur.fail("unrecognised prior table header");
    }
    const int harmonics = static_cast<int>((header.size() - 7) / 4);
    const auto expected = table_columns(harmonics);
    if (!std::equal(header.begin(), header.end(), expected.begin(), expected.end())) {
        cur.fail("unrecognised prior table header");
    }
    const std::size_t p = beta_count(harmonics);
    PriorTable table;
    while (cur.next(line)) {
        const auto f = split_fields(line);
        if (f.size() != header.size()) {
            cur.fail("expected " + std::to_string(header.size()) + " fields");
        }
        try {
            const CellId cell{static_cast<int>(parse_int(f[0])), static_cast<int>(parse_int(f[1]))};
            if (!cell.valid()) {
                throw std::invalid_argument("cell index out of range");
            }
            Eigen::VectorXd b(static_cast<Eigen::Index>(p)), s(static_cast<Eigen::Index>(p));
            for (std::size_t j = 0; j < p; ++j) {
                b[static_cast<Eigen::Index>(j)] = parse_double(f[2 + 2 * j]);
                s[static_cast<Eigen::Index>(j)] = parse_double(f[3 + 2 * j]);
            }
            PriorTableEntry entry{SeasonalPriorSpec::normal(b, s), PriorFlag::ok};
            entry.spec.validate();
            const auto flag = f.back();
            if (flag == "boundary") {
                entry.flag = PriorFlag::boundary;
            } else if (flag != "ok") {
                throw std::invalid_argument("unknown flag '" + std::string(flag) + "'");
            }
            if (!table.empty() && !(table.rbegin()->first < cell)) {
                throw std::invalid_argument("rows out of lat-major order at " + to_string(cell));
            }
            table.emplace(cell, std::move(entry));
        } catch (const std::invalid_argument& e) {
            cur.fail(e.what());
        }
    }
    if (table.empty()) {
        cur.fail("prior table has no rows");
    }
    return table;
}

SeasonalPriorSpec prior_for(const PriorTable& table, CellId cell, bool* used_default, int harmonics)
{
    const auto it = table.find(cell);
    if (used_default != nullptr) {
        *used_default = it == table.end();
    }
    return it == table.end() ? SeasonalPriorSpec::global_default(harmonics) : it->second.spec;
}

} // namespace sifbhm
