// Command-line front end: run, fit-prior, aggregate, map, simulate.

#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "sifbhm/analysis.hpp"
#include "sifbhm/pipeline.hpp"
#include "sifbhm/textio.hpp"

namespace fs = std::filesystem;
using namespace sifbhm;

namespace {

struct CommonFlags
{
    std::string config;
    std::string years;
    std::optional<std::size_t> workers;
    std::optional<std::uint64_t> seed;
    bool resume = false;
    bool force = false;
};

void add_common(CLI::App* cmd, CommonFlags& f, bool needs_config = true)
{
    auto* opt = cmd->add_option("--config", f.config, "key = value configuration file");
    if (needs_config) {
        opt->required()->check(CLI::ExistingFile);
    }
    cmd->add_option("--years", f.years, "years to process, e.g. 2015-2018,2020");
    cmd->add_option("--workers", f.workers, "worker threads")->check(CLI::PositiveNumber);
    cmd->add_option("--seed", f.seed, "sampler seed");
    cmd->add_flag("--resume", f.resume, "reuse cached cell results and replace existing products");
    cmd->add_flag("--force", f.force, "replace existing outputs");
}

PipelineConfig load(const CommonFlags& f)
{
    PipelineConfig c = f.config.empty() ? PipelineConfig{} : load_config(f.config);
    if (!f.years.empty()) {
        c.years = parse_years(f.years);
    }
    if (f.workers) {
        c.workers = *f.workers;
    }
    if (f.seed) {
        c.sampler.seed = *f.seed;
    }
    c.resume = c.resume || f.resume;
    c.force = c.force || f.force;
    return c;
}

std::vector<fs::path> products(const std::vector<std::string>& explicit_paths, const PipelineConfig& c)
{
    std::vector<fs::path> out(explicit_paths.begin(), explicit_paths.end());
    if (out.empty()) {
        for (int y : c.years) {
            out.push_back(c.product_path(y));
        }
    }
    if (out.empty()) {
        throw std::invalid_argument("no product given; pass --product or --config with years");
    }
    return out;
}

void write_table(const fs::path& path, const std::string& text, bool force)
{
    write_file_atomic(path, text, force);
    std::cout << "wrote " << path.string() << "\n";
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Bayesian hierarchical gridding of satellite SIF retrievals"};
    app.require_subcommand(1);

    CommonFlags run_flags;
    auto* run = app.add_subcommand("run", "grid every configured year into daily 1-degree products");
    add_common(run, run_flags);

    CommonFlags prior_flags;
    auto* prior = app.add_subcommand("fit-prior", "fit per-cell seasonal hyperpriors from dense data");
    add_common(prior, prior_flags);

    CommonFlags agg_flags;
    std::vector<std::string> agg_products;
    std::string agg_biomes;
    std::string hemisphere = "both";
    std::string agg_out;
    auto* aggregate = app.add_subcommand("aggregate", "biome-month distributions and uncertainty series");
    add_common(aggregate, agg_flags, false);
    aggregate->add_option("--product", agg_products, "product file(s); defaults to the configured years");
    aggregate->add_option("--biome-map", agg_biomes, "1-degree biome grid; defaults to the configured one");
    aggregate->add_option("--hemisphere", hemisphere)->check(CLI::IsMember({"north", "south", "both"}));
    aggregate->add_option("--out", agg_out, "output directory; defaults to the configured output directory");

    CommonFlags map_flags;
    std::vector<std::string> map_products;
    int month = 0;
    std::string map_out;
    auto* map = app.add_subcommand("map", "monthly mean SIF on the 1-degree grid");
    add_common(map, map_flags, false);
    map->add_option("--product", map_products, "product file(s); defaults to the configured years");
    map->add_option("--month", month, "calendar month")->required()->check(CLI::Range(1, 12));
    map->add_option("--out", map_out, "output directory; defaults to the configured output directory");

    std::string sim_dir;
    SyntheticOptions sim;
    auto* simulate = app.add_subcommand("simulate", "write a self-contained synthetic scenario");
    simulate->add_option("dir", sim_dir, "target directory")->required();
    simulate->add_option("--year", sim.year);
    simulate->add_option("--cells", sim.cells);
    simulate->add_option("--seed", sim.seed);
    simulate->add_flag("!--no-dense", sim.dense, "omit the dense prior dataset");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*run) {
            const auto report = run_pipeline(load(run_flags));
            std::cout << report.to_text();
        } else if (*prior) {
            const auto report = run_prior_fit(load(prior_flags));
            std::cout << "cells with dense data: " << report.cells << "\nfitted: " << report.fitted
                      << "\nboundary flagged: " << report.boundary << "\nskipped: " << report.skipped.size() << "\n";
            for (const auto& s : report.skipped) {
                std::cout << "  " << to_string(s.cell) << ": " << s.error << "\n";
            }
            std::cout << "wrote " << report.table.string() << "\n";
        } else if (*aggregate) {
            const auto config = load(agg_flags);
            const fs::path biome_path = agg_biomes.empty() ? config.biome_map : fs::path(agg_biomes);
            if (biome_path.empty()) {
                throw std::invalid_argument("no biome map; pass --biome-map or set biome_map");
            }
            const Grid biomes = read_grid(biome_path);
            const fs::path out = agg_out.empty() ? config.output_dir : fs::path(agg_out);
            std::vector<Hemisphere> hemis;
            if (hemisphere != "south") {
                hemis.push_back(Hemisphere::north);
            }
            if (hemisphere != "north") {
                hemis.push_back(Hemisphere::south);
            }
            for (const auto& path : products(agg_products, config)) {
                const auto product = read_product(path);
                const std::string stem = path.stem().string();
                for (const auto h : hemis) {
                    const std::string tag = stem + "_" + to_string(h);
                    const auto agg = monthly_biome_aggregate(product.records, biomes, h);
                    write_table(out / (tag + "_biome_values.csv"), serialize_biome_values(agg), config.force);
                    write_table(out / (tag + "_biome_boxes.csv"), serialize_biome_boxes(agg), config.force);
                    write_table(out / (tag + "_uncertainty.csv"),
                                serialize_series(mean_uncertainty_series(product.records, biomes, h)),
                                config.force);
                    std::cout << tag << ": " << agg.cell_months << " cell-months, " << agg.unassigned
                              << " without a biome\n";
                }
            }
        } else if (*map) {
            const auto config = load(map_flags);
            const fs::path out = map_out.empty() ? config.output_dir : fs::path(map_out);
            for (const auto& path : products(map_products, config)) {
                const auto product = read_product(path);
                const auto grid = monthly_global_map(product.records, month);
                if (grid.warning) {
                    std::cerr << "warning: " << path.string() << ": " << *grid.warning << "\n";
                }
                write_table(out / (path.stem().string() + "_map_" + std::to_string(month) + ".csv"),
                            serialize_map(grid), config.force);
            }
        } else if (*simulate) {
            write_synthetic_inputs(sim_dir, sim);
            std::cout << "wrote synthetic inputs and " << (fs::path(sim_dir) / "sifbhm.conf").string() << "\n";
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
