#include "doctest.h"

#include "gmrfsim/chebyshev.hpp"
#include "test_util.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

namespace {

const std::string kCli = GMRFSIM_CLI_PATH;

std::string quiet(const std::string& args) { return kCli + " " + args + " >/dev/null 2>&1"; }

// rows of a comma-separated file, split into fields
std::vector<std::vector<std::string>> read_csv(const std::string& path) {
    std::ifstream in(path);
    REQUIRE(in.good());
    std::vector<std::vector<std::string>> rows;
    std::string line;
    while (std::getline(in, line)) {
        std::vector<std::string> fields;
        std::stringstream ss(line);
        std::string f;
        while (std::getline(ss, f, ',')) fields.push_back(f);
        if (!fields.empty()) rows.push_back(std::move(fields));
    }
    return rows;
}

std::string manifest_value(const std::string& path, const std::string& key) {
    std::ifstream in(path);
    REQUIRE(in.good());
    std::string line;
    while (std::getline(in, line)) {
        const auto eq = line.find(" = ");
        if (eq != std::string::npos && line.substr(0, eq) == key) return line.substr(eq + 3);
    }
    return {};
}

} // namespace

TEST_CASE("cli: threshold tables reproduce published cells at display precision") {
    const auto dir = testutil::scratch_dir("cli_tables");

    REQUIRE(testutil::run_cli(quiet("tables --out " + dir + "/t05.csv")) == 0);
    auto rows = read_csv(dir + "/t05.csv");
    REQUIRE(rows.size() == 1 + 42); // header + 7 gammas x 6 Ns
    CHECK(rows[0] == std::vector<std::string>{"gamma", "N", "epsilon", "epsilon_3sig"});
    int hits = 0;
    for (const auto& r : rows) {
        if (r[0] == "0.05" && r[1] == "500") {
            CHECK(r[3] == "8.06e-03");
            ++hits;
        }
        if (r[0] == "1" && r[1] == "50") {
            CHECK(r[3] == "1.10e-01");
            ++hits;
        }
        if (r[0] == "0.1" && r[1] == "1000") {
            CHECK(r[3] == "8.64e-03");
            ++hits;
        }
    }
    CHECK(hits == 3);

    REQUIRE(testutil::run_cli(quiet("tables --significance 0.01 --out " + dir + "/t01.csv")) == 0);
    rows = read_csv(dir + "/t01.csv");
    hits = 0;
    for (const auto& r : rows)
        if (r[0] == "0.2" && r[1] == "1000") {
            CHECK(r[3] == "9.54e-03");
            ++hits;
        }
    CHECK(hits == 1);

    std::filesystem::remove_all(dir);
}

TEST_CASE("cli: simulation output is deterministic and manifested") {
    const auto dir1 = testutil::scratch_dir("cli_sim1");
    const auto dir2 = testutil::scratch_dir("cli_sim2");
    const std::string args = "simulate --nx 20 --ny 20 --range 4 --seed 9 --n-sims 2 --out-dir ";
    REQUIRE(testutil::run_cli(quiet(args + dir1)) == 0);
    REQUIRE(testutil::run_cli(quiet(args + dir2)) == 0);

    CHECK(testutil::read_file(dir1 + "/sim_000.csv") == testutil::read_file(dir2 + "/sim_000.csv"));
    CHECK(testutil::read_file(dir1 + "/sim_001.csv") == testutil::read_file(dir2 + "/sim_001.csv"));
    CHECK(testutil::read_file(dir1 + "/sim_000.csv") != testutil::read_file(dir1 + "/sim_001.csv"));

    // the applied series round-trips through the text format
    const gmrfsim::ChebSeries series = gmrfsim::read_series_file(dir1 + "/series.txt");
    CHECK(series.order() >= 1);
    CHECK(series.interval.a == 0.0);
    CHECK(series.interval.b > 0.0);

    const std::string manifest = dir1 + "/run_manifest.txt";
    CHECK(manifest_value(manifest, "order_K_eff") == std::to_string(series.order()));
    CHECK(manifest_value(manifest, "matvec_count") ==
          std::to_string(2 * static_cast<long long>(series.order())));
    CHECK(!manifest_value(manifest, "epsilon").empty());
    CHECK(!manifest_value(manifest, "interval_b").empty());

    std::filesystem::remove_all(dir1);
    std::filesystem::remove_all(dir2);
}

TEST_CASE("cli: forcing different orders changes the field") {
    const auto dir1 = testutil::scratch_dir("cli_ord1");
    const auto dir2 = testutil::scratch_dir("cli_ord2");
    const std::string base = "simulate --nx 16 --ny 16 --range 4 --seed 5 --order ";
    REQUIRE(testutil::run_cli(quiet(base + "1 --out-dir " + dir1)) == 0);
    REQUIRE(testutil::run_cli(quiet(base + "100 --out-dir " + dir2)) == 0);
    CHECK(testutil::read_file(dir1 + "/sim_000.csv") != testutil::read_file(dir2 + "/sim_000.csv"));
    CHECK(manifest_value(dir1 + "/run_manifest.txt", "order_K_eff") == "1");
    CHECK(manifest_value(dir2 + "/run_manifest.txt", "order_K_eff") == "100");
    std::filesystem::remove_all(dir1);
    std::filesystem::remove_all(dir2);
}

TEST_CASE("cli: usage errors exit with code 2") {
    CHECK(testutil::run_cli(quiet("simulate --mesh /nonexistent_mesh_file.txt")) == 2);
    CHECK(testutil::run_cli(quiet("simulate --no-such-flag")) == 2);
    CHECK(testutil::run_cli(quiet("")) == 2); // a subcommand is required
    CHECK(testutil::run_cli(quiet("simulate --nx 8 --ny 8 --significance 1.5")) == 2);
    CHECK(testutil::run_cli(quiet("simulate --nx 8 --ny 8 --nu 2.5")) == 2);
}

TEST_CASE("cli: validation passes at the selected order and fails at order 1") {
    const auto dir = testutil::scratch_dir("cli_val");
    const std::string base = "validate --nx 16 --ny 16 --range 4 --seed 3 --n-sims 30 "
                             "--n-directions 300 --out-dir " +
                             dir;
    REQUIRE(testutil::run_cli(quiet(base)) == 0);
    const std::string report = testutil::read_file(dir + "/report.txt");
    CHECK(report.find("PASS") != std::string::npos);
    CHECK(report.find("FAIL") == std::string::npos);
    const auto v = read_csv(dir + "/variogram.csv");
    const auto vo = read_csv(dir + "/variogram_oracle.csv");
    REQUIRE(v.size() > 2);
    CHECK(v.size() == vo.size());
    CHECK(v[0] == std::vector<std::string>{"lag", "gamma_hat", "model_gamma", "count"});
    CHECK(!manifest_value(dir + "/run_manifest.txt", "variogram_dev").empty());

    const auto dir_bad = testutil::scratch_dir("cli_val_bad");
    const std::string bad = "validate --nx 16 --ny 16 --range 4 --seed 3 --n-sims 30 "
                            "--n-directions 300 --order 1 --out-dir " +
                            dir_bad;
    CHECK(testutil::run_cli(quiet(bad)) == 1);
    CHECK(testutil::read_file(dir_bad + "/report.txt").find("FAIL") != std::string::npos);

    std::filesystem::remove_all(dir);
    std::filesystem::remove_all(dir_bad);
}

TEST_CASE("cli: bench rows count matvecs exactly") {
    const auto dir = testutil::scratch_dir("cli_bench");
    const std::string out = dir + "/bench.csv";
    REQUIRE(testutil::run_cli(
                quiet("bench --orders 3,7 --grids 12 --n-sims 4 --seed 2 --out " + out)) == 0);
    const auto rows = read_csv(out);
    REQUIRE(rows.size() == 3); // header + 2 rows
    CHECK(rows[0][0] == "K");
    for (std::size_t r = 1; r < rows.size(); ++r) {
        const long long K = std::stoll(rows[r][0]);
        const long long n_nz = std::stoll(rows[r][2]);
        const long long k_nnz = std::stoll(rows[r][3]);
        const long long matvecs = std::stoll(rows[r][4]);
        CHECK(k_nnz == K * n_nz);
        CHECK(matvecs == 4 * K);
    }
    std::filesystem::remove_all(dir);
}
