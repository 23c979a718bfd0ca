#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <fstream>
#include <random>

#include "sifbhm/calendar.hpp"
#include "sifbhm/hyperprior.hpp"
#include "sifbhm/textio.hpp"
#include "tempdir.hpp"

using namespace sifbhm;

namespace {

const CellId kCell{130, 200};

// Two years of daily dense retrievals from one seasonal cycle, three soundings a day.
DenseCellDataset dense_two_years(const SeasonalCoefficients& truth, std::uint64_t seed, int days_per_year = 365,
                                 double tau = 0.01, double nu = 0.01, double delta = 0.005)
{
    DenseCellDataset ds;
    ds.cell = kCell;
    for (int year : {2020, 2021}) {
        std::vector<DesignDay> design;
        for (int d = 0; d < days_per_year; ++d) {
            design.push_back({d + 0.55, std::vector<double>(3, tau)});
        }
        const VarianceState vars{std::vector<double>(design.size(), nu), delta};
        const auto sim = simulate_cell_year(truth, vars, design, seed + static_cast<std::uint64_t>(year), kCell, year);
        for (const auto& day : sim.data.days) {
            ds.records.insert(ds.records.end(), day.soundings.begin(), day.soundings.end());
        }
    }
    return ds;
}

SamplerConfig dense_config()
{
    return SamplerConfig{.n_chains = 3, .n_iterations = 3000, .n_burnin = 1000, .seed = 17};
}

SeasonalCoefficients truth()
{
    auto c = SeasonalCoefficients::zero();
    c.a = 0.1;
    c.beta0 = 0.3;
    c.beta1 = 0.0004;
    c.beta2 = {-0.35, 0.05};
    c.beta3 = {-0.25, 0.1};
    return c;
}

PriorTableEntry entry(std::mt19937_64& gen, PriorFlag flag = PriorFlag::ok)
{
    std::normal_distribution<double> b(0.0, 0.3);
    std::exponential_distribution<double> s(20.0);
    Eigen::VectorXd bv(6), sv(6);
    for (int j = 0; j < 6; ++j) {
        bv[j] = b(gen);
        sv[j] = s(gen) + 1e-12;
    }
    return {SeasonalPriorSpec::normal(bv, sv), flag};
}

} // namespace

TEST_CASE("dense fit recovers the simulated coefficients")
{
    const auto c = truth();
    const auto fit = fit_seasonal_prior(dense_two_years(c, 1), dense_config());
    const auto b = fit.spec.mean_vector();
    const auto s = fit.spec.variance_vector();
    const auto t = c.beta_vector();
    for (int j = 0; j < 6; ++j) {
        CAPTURE(j);
        CHECK(std::abs(b[j] - t[j]) < 3.0 * std::sqrt(s[j]));
        CHECK(s[j] > 0.0);
        CHECK(std::abs(b[j]) <= 1.0);
    }
    CHECK(fit.flag == PriorFlag::ok);
    CHECK(fit.spec.beta_family == BetaPriorFamily::normal);
    // Only a + beta0 is identified by the data.
    CHECK(std::abs(fit.summary.coefficients[0].mean + b[0] - (c.a + c.beta0)) < 0.05);
}

TEST_CASE("dense fit is deterministic")
{
    const auto data = dense_two_years(truth(), 2, 120);
    auto cfg = dense_config();
    cfg.n_iterations = 600;
    cfg.n_burnin = 200;
    const auto a = fit_seasonal_prior(data, cfg);
    const auto b = fit_seasonal_prior(data, cfg);
    CHECK(a.spec == b.spec);
    CHECK(a.flag == b.flag);
}

TEST_CASE("zero coefficients give hyperparameters centred near zero")
{
    auto zero = SeasonalCoefficients::zero();
    const auto fit = fit_seasonal_prior(dense_two_years(zero, 3), dense_config());
    const auto b = fit.spec.mean_vector();
    const auto s = fit.spec.variance_vector();
    for (int j = 0; j < 6; ++j) {
        CAPTURE(j);
        CHECK(std::abs(b[j]) < 3.0 * std::sqrt(s[j]));
    }
}

TEST_CASE("mass against a bound is flagged")
{
    auto c = truth();
    c.beta3[0] = 1.6;
    auto cfg = dense_config();
    cfg.n_iterations = 1500;
    cfg.n_burnin = 500;
    const auto fit = fit_seasonal_prior(dense_two_years(c, 4), cfg);
    CHECK(fit.flag == PriorFlag::boundary);
    CHECK(fit.boundary[3]);
    CHECK_FALSE(fit.boundary[2]);
}

TEST_CASE("too few dense days are rejected")
{
    const auto data = dense_two_years(truth(), 5, 29);
    CHECK(data.distinct_days() == 58);
    CHECK_THROWS_AS(fit_seasonal_prior(data, dense_config()), InsufficientDenseData);
    HyperpriorOptions relaxed;
    relaxed.min_distinct_days = 50;
    auto cfg = dense_config();
    cfg.n_iterations = 100;
    cfg.n_burnin = 50;
    CHECK_NOTHROW(fit_seasonal_prior(data, cfg, relaxed));

    DenseCellDataset empty;
    CHECK_THROWS_AS(fit_seasonal_prior(empty, cfg), std::invalid_argument);
    DenseCellDataset stray = data;
    stray.cell = CellId{0, 0};
    CHECK_THROWS_AS(fit_seasonal_prior(stray, cfg), std::invalid_argument);
}

TEST_CASE("pooled years share day-of-year")
{
    const auto data = dense_two_years(truth(), 6, 70);
    const ModelData model = dense_model_data(data);
    CHECK(model.day_count() == 140);
    CHECK(model.sounding_count() == 420);
    CHECK(model.t(0) == doctest::Approx(model.t(70)).epsilon(1e-9));
}

TEST_CASE("sparse refit under the exported prior is consistent with it")
{
    // Prior-posterior consistency: simulate sparse data from b itself and refit under (b, s).
    Eigen::VectorXd b(6), s(6);
    b << 0.3, 0.0004, -0.35, -0.25, 0.05, 0.1;
    s << 0.01, 1e-8, 0.004, 0.004, 0.002, 0.002;
    const auto prior = SeasonalPriorSpec::normal(b, s);
    const auto coeffs = SeasonalCoefficients::from_beta_vector(0.0, b);
    std::vector<DesignDay> design;
    for (int d = 0; d < 23; ++d) {
        design.push_back({3.0 + 16.0 * d, std::vector<double>(4, 0.05)});
    }
    const auto sim = simulate_cell_year(coeffs, VarianceState{std::vector<double>(23, 0.05), 0.02}, design, 7);
    const auto summary = run_chain(sim.data, prior, SamplerConfig{.n_iterations = 3000, .n_burnin = 1000, .seed = 8});
    for (std::size_t j = 0; j < 6; ++j) {
        const auto& coeff = summary.coefficients[1 + j];
        CAPTURE(coeff.name);
        CHECK(std::abs(coeff.mean - b[static_cast<Eigen::Index>(j)]) < 3.0 * std::sqrt(coeff.variance));
    }
}

TEST_CASE("prior table round-trip")
{
    TempDir dir;
    std::mt19937_64 gen(9);
    PriorTable table;
    table[CellId{10, 20}] = entry(gen);
    table[CellId{10, 19}] = entry(gen, PriorFlag::boundary);
    table[CellId{3, 300}] = entry(gen);
    export_prior_table(dir / "prior.csv", table);
    CHECK(read_prior_table(dir / "prior.csv") == table);
    CHECK_THROWS_AS(export_prior_table(dir / "prior.csv", table), std::runtime_error);
    CHECK_NOTHROW(export_prior_table(dir / "prior.csv", table, true));
    CHECK_THROWS_AS(export_prior_table(dir / "none.csv", PriorTable{}), std::invalid_argument);

    const std::string text = read_file(dir / "prior.csv");
    CHECK(text.substr(0, text.find('\n')) ==
          "cell_lat_index,cell_lon_index,b0,s0,b1,s1,b2_1,s2_1,b3_1,s3_1,b2_2,s2_2,b3_2,s3_2,flag");
    // Lat-major row order.
    CHECK(text.find("\n3,300,") < text.find("\n10,19,"));
    CHECK(text.find("\n10,19,") < text.find("\n10,20,"));
}

TEST_CASE("full-globe prior table round-trip")
{
    TempDir dir;
    std::mt19937_64 gen(10);
    PriorTable table;
    for (int i = 0; i < CellId::kRows; ++i) {
        for (int j = 0; j < CellId::kCols; ++j) {
            table.emplace(CellId{i, j}, entry(gen, (i + j) % 13 == 0 ? PriorFlag::boundary : PriorFlag::ok));
        }
    }
    REQUIRE(table.size() == 64800);
    export_prior_table(dir / "globe.csv", table);
    CHECK(read_prior_table(dir / "globe.csv") == table);
}

TEST_CASE("malformed prior tables")
{
    TempDir dir;
    const std::string header = "cell_lat_index,cell_lon_index,b0,s0,b1,s1,b2_1,s2_1,b3_1,s3_1,b2_2,s2_2,b3_2,s3_2,flag\n";
    auto check_bad = [&](const std::string& body) {
        std::ofstream(dir / "bad.csv", std::ios::trunc) << body;
        CHECK_THROWS_AS(read_prior_table(dir / "bad.csv"), ParseError);
    };
    check_bad(header);
    check_bad(header + "1,2,0,0.1,0,0.1,0,0.1,0,0.1,0,0.1,0,0.1,maybe\n");
    check_bad(header + "1,2,0,0,0,0.1,0,0.1,0,0.1,0,0.1,0,0.1,ok\n");
    check_bad(header + "1,2,0,0.1,0,0.1,0,0.1,0,0.1,0,0.1,0,0.1,ok\n1,1,0,0.1,0,0.1,0,0.1,0,0.1,0,0.1,0,0.1,ok\n");
    check_bad(header + "180,2,0,0.1,0,0.1,0,0.1,0,0.1,0,0.1,0,0.1,ok\n");
    check_bad("cell_lat_index,cell_lon_index,b0,s0\n");
    check_bad(header + "1,2,0,0.1,0,0.1,0,0.1,0,0.1,0,0.1,0,0.1,ok");
}

TEST_CASE("missing cells fall back to the global default")
{
    std::mt19937_64 gen(11);
    PriorTable table;
    table[CellId{1, 1}] = entry(gen);
    bool used_default = true;
    CHECK(prior_for(table, CellId{1, 1}, &used_default) == table[CellId{1, 1}].spec);
    CHECK_FALSE(used_default);
    const auto fallback = prior_for(table, CellId{1, 2}, &used_default);
    CHECK(used_default);
    CHECK(fallback == SeasonalPriorSpec::global_default());
    CHECK(fallback.mean_vector().isZero());
    CHECK((fallback.variance_vector().array() == 0.25).all());
}

TEST_CASE("group_dense partitions by cell")
{
    Grid coarse = Grid::filled(1, 12);
    coarse.at(kCell.lat_index, kCell.lon_index + 1) = kWaterBodies;
    const CellMask mask = exclude_cells(coarse);
    const double t0 = year_start_epoch(2020);
    const std::vector<SoundingRecord> records{
        SoundingRecord::at(kCell.center_latitude(), kCell.center_longitude(), t0, 0.3, 0.1),
        SoundingRecord::at(kCell.center_latitude(), kCell.center_longitude() + 1.0, t0, 0.3, 0.1),
        SoundingRecord::at(kCell.center_latitude() - 1.0, kCell.center_longitude(), t0, 0.3, 0.1),
        SoundingRecord::at(kCell.center_latitude(), kCell.center_longitude(), t0 + 86400, 0.3, 0.1),
    };
    const auto cells = group_dense(records, mask);
    REQUIRE(cells.size() == 2);
    CHECK(cells[0].cell == CellId{kCell.lat_index - 1, kCell.lon_index});
    CHECK(cells[1].cell == kCell);
    CHECK(cells[1].records.size() == 2);
    CHECK(cells[1].distinct_days() == 2);
}
