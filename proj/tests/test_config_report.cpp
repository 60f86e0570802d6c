#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "quva/config.hpp"
#include "quva/report.hpp"

using namespace quva;
using Catch::Approx;

namespace {

const char* kGoodConfig = R"(
# demo
[de]
kappa2 = 1
kappa1 = -1
kappa0 = 8
n_qubits = 3
depth = 2

[search]
p_c = 4
seed = 9
n_random_init = 12
n_guided = 8

[oracle]
f0 = -1

[output]
output_dir = out/demo
emit_plots = false
)";

}  // namespace

TEST_CASE("config happy path and defaults") {
    const ExperimentConfig cfg = parse_experiment_config_text(kGoodConfig, "demo.cfg");
    CHECK(cfg.de.kappa2 == 1.0);
    CHECK(cfg.de.kappa1 == -1.0);
    CHECK(cfg.de.kappa0 == 8.0);
    CHECK(cfg.de.kappa_n == 0.0);
    CHECK(cfg.de.n_qubits == 3);
    CHECK(cfg.de.depth == 2);
    CHECK(cfg.de.delta_l() == Approx(1.0 / 8.0));
    CHECK(cfg.ansatz.layout == AnsatzLayout::SixParam);
    CHECK(cfg.ansatz.depth == 2);
    CHECK(cfg.search.p_c == 4.0);
    CHECK(cfg.search.seed == 9);
    CHECK(cfg.search.n_random_init == 12);
    CHECK(cfg.search.candidate_pool_size == 256);
    CHECK(cfg.measurement.mode == MeasurementConfig::Mode::Exact);
    CHECK(cfg.oracle.enabled);
    CHECK(cfg.oracle.f0 == -1.0);
    CHECK(cfg.output_dir == "out/demo");
    CHECK_FALSE(cfg.emit_plots);
}

TEST_CASE("missing required field names the field") {
    try {
        parse_experiment_config_text("[de]\nkappa1 = 1\n[search]\np_c = 1\n");
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        CHECK(e.field() == "kappa0");
        CHECK(std::string(e.what()).find("kappa0") != std::string::npos);
    }
}

TEST_CASE("diagnostics carry line numbers") {
    try {
        parse_experiment_config_text("[de]\nkappa0 = 8\nbogus_key = 1\n[search]\np_c = 1\n");
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        CHECK(e.line() == 3);
        CHECK(e.field() == "bogus_key");
    }
    try {
        parse_experiment_config_text("[de]\nkappa0 = not_a_number\n[search]\np_c = 1\n");
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        CHECK(e.line() == 2);
        CHECK(e.field() == "kappa0");
    }
}

TEST_CASE("config rejections") {
    CHECK_THROWS_AS(parse_experiment_config_text("[bogus]\nx = 1\n"), ConfigError);
    CHECK_THROWS_AS(parse_experiment_config_text("[de]\nkappa0 = 1\n[search]\np_c = -1\n"), ConfigError);
    CHECK_THROWS_AS(parse_experiment_config_text("[de]\nkappa0 = 1\nn_qubits = 13\n[search]\np_c = 1\n"),
                    ConfigError);
    CHECK_THROWS_AS(
        parse_experiment_config_text("[de]\nkappa0 = 1\nv_max = 2\n[potential]\nv_max = 3\n[search]\np_c = 1\n"),
        ConfigError);
    CHECK_THROWS_AS(
        parse_experiment_config_text("[de]\nkappa0 = 1\n[potential]\nkind = custom\nvalues = 1 2 3\n[search]\np_c = 1\n"),
        ConfigError);
    CHECK_THROWS_AS(parse_experiment_config_text("[de]\nkappa0 = 1\n[measurement]\nmode = maybe\n[search]\np_c = 1\n"),
                    ConfigError);
    // duplicate key
    CHECK_THROWS_AS(parse_experiment_config_text("[de]\nkappa0 = 1\nkappa0 = 2\n[search]\np_c = 1\n"), ConfigError);
}

TEST_CASE("custom potential diagonal") {
    const ExperimentConfig cfg = parse_experiment_config_text(
        "[de]\nkappa0 = 1\nn_qubits = 2\n[potential]\nkind = custom\nvalues = 0.5 0 1.5 2\n[search]\np_c = 1\n");
    CHECK(cfg.potential.kind == PotentialKind::Custom);
    const Eigen::VectorXd d = cfg.potential.diag(2);
    CHECK(d(0) == 0.5);
    CHECK(d(3) == 2.0);
}

TEST_CASE("seventeen significant digits round-trip") {
    rng::Stream stream(3);
    for (int rep = 0; rep < 200; ++rep) {
        const double v = (stream.uniform() - 0.5) * std::pow(10.0, stream.uniform(-12, 12));
        const std::string s = format_g17(v);
        CHECK(std::stod(s) == v);
    }
    CHECK(format_g17(0.1) == "0.10000000000000001");
}

TEST_CASE("records csv round-trips and summary aggregates") {
    std::vector<CandidateRecord> records;
    rng::Stream stream(5);
    for (int i = 0; i < 10; ++i) {
        CandidateRecord r;
        r.eval_index = i;
        r.lambda = {stream.uniform(), stream.uniform(), stream.uniform(),
                    stream.uniform(), stream.uniform(), stream.uniform()};
        r.re_a_dagger = stream.uniform(-1, 1);
        r.total = stream.uniform(-10, 10);
        r.res_q = stream.uniform(0, 100);
        r.flagged = std::abs(r.total) <= 3.0;
        r.phase = i < 6 ? SearchPhase::Random : SearchPhase::Guided;
        if (i % 2 == 0) r.fidelity_vs_oracle = stream.uniform(0, 1);
        records.push_back(r);
    }

    const std::filesystem::path tmp = std::filesystem::temp_directory_path() / "quva_test_records.csv";
    write_records_csv(tmp.string(), records);

    std::ifstream in(tmp);
    std::string header;
    std::getline(in, header);
    CHECK(header == records_csv_header(6));
    int rows = 0;
    std::string line;
    while (std::getline(in, line)) {
        // spot-check the total column round-trips exactly
        std::vector<std::string> cells;
        std::istringstream ls(line);
        std::string cell;
        while (std::getline(ls, cell, ',')) cells.push_back(cell);
        REQUIRE(cells.size() == 15);
        CHECK(std::stod(cells[10]) == records[static_cast<size_t>(rows)].total);
        ++rows;
    }
    CHECK(rows == 10);
    std::filesystem::remove(tmp);

    const RunSummary s = summarize(records, 9);
    int expect_candidates = 0;
    for (const auto& r : records) expect_candidates += r.flagged ? 1 : 0;
    CHECK(s.candidate_count == expect_candidates);
    CHECK(s.n_records == 10);
    double best_abs = 1e300;
    for (const auto& r : records) best_abs = std::min(best_abs, std::abs(r.total));
    CHECK(std::abs(s.best_abs_total) == Approx(best_abs));
}
