// gmrfsim command-line driver: simulate | tables | validate | bench.
// Exit codes: 0 success, 1 validation/runtime failure, 2 input error.

#include "gmrfsim/fem.hpp"
#include "gmrfsim/order_select.hpp"
#include "gmrfsim/simulate.hpp"
#include "gmrfsim/validate.hpp"

#include "CLI11.hpp"

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace {

constexpr const char* kVersion = "0.1.0";

std::string num(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string sig3(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2e", v);
    return buf;
}

// All parameters a run needs; written to the manifest so a run can be
// reproduced bit-exactly from it.
struct RunConfig {
    int nx = 32, ny = 32;
    double h = 1.0;
    std::string mesh_file;
    std::string aniso_file;

    double sigma2 = 1.0;
    double range_phi = 10.0;
    double nu = 1.0;
    std::optional<int> alpha_spde;

    double significance = 0.05;
    double gamma = 0.10;
    std::optional<double> eta;
    std::optional<int> forced_order;

    std::uint64_t seed = 0;
    int n_sims = 1;
    std::string out_dir = ".";

    // validate-only knobs
    int buffer = -1; // <0: auto = ceil(2 * practical range / h)
    int n_directions = 2000;
    double max_lag = 0.0; // <=0: auto = practical range
    int n_bins = 0;       // <=0: auto = bin width h
};

gmrfsim::MaternParams matern_from(const RunConfig& rc) {
    gmrfsim::MaternParams p = gmrfsim::MaternParams::make(rc.sigma2, rc.range_phi, rc.nu);
    if (rc.alpha_spde) p.alpha_spde = *rc.alpha_spde;
    p.validate();
    return p;
}

struct BuiltOperator {
    gmrfsim::PrecisionOperator op;
    bool is_grid = false;
    gmrfsim::GridGeometry geom;
};

BuiltOperator build_operator(const RunConfig& rc, const gmrfsim::MaternParams& params) {
    BuiltOperator b;
    gmrfsim::TriMesh mesh;
    if (!rc.mesh_file.empty()) {
        mesh = gmrfsim::read_mesh_file(rc.mesh_file);
    } else {
        mesh = gmrfsim::grid_mesh(rc.nx, rc.ny, rc.h);
        b.is_grid = true;
        b.geom = {rc.nx, rc.ny, rc.h};
    }
    if (!rc.aniso_file.empty()) {
        const gmrfsim::AnisotropyField H =
            gmrfsim::read_anisotropy_file(rc.aniso_file, mesh.n_triangles());
        b.op = gmrfsim::matern_operator(mesh, params, &H);
    } else {
        b.op = gmrfsim::matern_operator(mesh, params);
    }
    return b;
}

void write_raster(const std::string& path, const gmrfsim::GridGeometry& g,
                  const std::vector<double>& z) {
    std::ofstream out(path);
    if (!out) throw std::invalid_argument("cannot open output file: " + path);
    out << g.nx << ' ' << g.ny << ' ' << num(g.h) << '\n';
    for (int iy = 0; iy < g.ny; ++iy) {
        for (int ix = 0; ix < g.nx; ++ix) {
            if (ix) out << ',';
            out << num(z[static_cast<std::size_t>(iy) * g.nx + ix]);
        }
        out << '\n';
    }
}

void write_vector(const std::string& path, const std::vector<double>& z) {
    std::ofstream out(path);
    if (!out) throw std::invalid_argument("cannot open output file: " + path);
    out << z.size() << '\n';
    for (double v : z) out << num(v) << '\n';
}

void write_variogram_csv(const std::string& path, const gmrfsim::VariogramEstimate& v,
                         const gmrfsim::MaternParams& params) {
    std::ofstream out(path);
    if (!out) throw std::invalid_argument("cannot open output file: " + path);
    out << "lag,gamma_hat,model_gamma,count\n";
    for (std::size_t i = 0; i < v.lags.size(); ++i)
        out << num(v.lags[i]) << ',' << num(v.gamma_hat[i]) << ','
            << num(gmrfsim::matern_variogram(v.lags[i], params)) << ',' << v.counts[i] << '\n';
}

class Manifest {
public:
    void add(const std::string& key, const std::string& value) {
        lines_ += key + " = " + value + "\n";
    }
    void add(const std::string& key, double value) { add(key, num(value)); }
    void add(const std::string& key, std::uint64_t value) { add(key, std::to_string(value)); }
    void add(const std::string& key, int value) { add(key, std::to_string(value)); }

    void add_run_config(const RunConfig& rc, const gmrfsim::MaternParams& p) {
        add("version", std::string(kVersion));
        if (rc.mesh_file.empty()) {
            add("grid_nx", rc.nx);
            add("grid_ny", rc.ny);
            add("grid_h", rc.h);
        } else {
            add("mesh_file", rc.mesh_file);
        }
        if (!rc.aniso_file.empty()) add("aniso_file", rc.aniso_file);
        add("sigma2", p.sigma2);
        add("range_phi", p.range_phi);
        add("nu", p.nu);
        add("alpha_spde", p.alpha_spde);
        add("significance", rc.significance);
        add("gamma", rc.gamma);
        if (rc.eta) add("eta", *rc.eta);
        if (rc.forced_order) add("forced_order", *rc.forced_order);
        add("seed", rc.seed);
        add("n_sims", rc.n_sims);
    }

    void add_decision(const gmrfsim::SimResult& r) {
        add("interval_a", r.interval.a);
        add("interval_b", r.interval.b);
        add("epsilon", r.decision.epsilon);
        add("order_L", r.decision.L);
        add("order_K_eff", r.decision.K_eff);
        add("tail_sum", r.decision.tail_sum);
        add("matvec_count", r.matvec_count);
        add("wall_time_s", r.wall_time_s);
    }

    void write(const std::string& path) const {
        std::ofstream out(path);
        if (!out) throw std::invalid_argument("cannot open output file: " + path);
        out << lines_;
    }

private:
    std::string lines_;
};

gmrfsim::TestConfig test_config_from(const RunConfig& rc) {
    gmrfsim::TestConfig cfg;
    cfg.alpha = rc.significance;
    cfg.gamma = rc.gamma;
    cfg.eta = rc.eta;
    return cfg;
}

int cmd_simulate(const RunConfig& rc) {
    const gmrfsim::MaternParams params = matern_from(rc);
    const BuiltOperator built = build_operator(rc, params);

    gmrfsim::SimRequest req;
    req.op = built.op;
    req.cfg = test_config_from(rc);
    req.seed = rc.seed;
    req.n_sims = rc.n_sims;
    req.forced_order = rc.forced_order;
    const gmrfsim::SimResult res = gmrfsim::simulate(req);

    std::filesystem::create_directories(rc.out_dir);
    Manifest m;
    m.add("command", std::string("simulate"));
    m.add_run_config(rc, params);
    m.add_decision(res);

    for (int s = 0; s < rc.n_sims; ++s) {
        char name[32];
        std::snprintf(name, sizeof name, "sim_%03d", s);
        const std::string base = rc.out_dir + "/" + name;
        if (built.is_grid) {
            write_raster(base + ".csv", built.geom, res.vectors[s]);
            m.add("output", std::string(name) + ".csv");
        } else {
            write_vector(base + ".txt", res.vectors[s]);
            m.add("output", std::string(name) + ".txt");
        }
    }
    gmrfsim::write_series(res.series, rc.out_dir + "/series.txt");
    m.add("output", std::string("series.txt"));
    m.write(rc.out_dir + "/run_manifest.txt");

    std::cout << "simulated " << rc.n_sims << " field(s), n = " << built.op.n()
              << ", K_eff = " << res.decision.K_eff << " (L = " << res.decision.L
              << ", epsilon = " << num(res.decision.epsilon) << ")\n"
              << "wrote " << rc.out_dir << "/run_manifest.txt\n";
    return 0;
}

int cmd_tables(double alpha, const std::string& out_path) {
    std::ofstream out(out_path);
    if (!out) {
        std::cerr << "error: cannot open output file: " << out_path << "\n";
        return 2;
    }
    out << "gamma,N,epsilon,epsilon_3sig\n";
    for (double gamma : gmrfsim::kTableGammas) {
        for (int N : gmrfsim::kTableNs) {
            gmrfsim::TestConfig cfg;
            cfg.N = N;
            cfg.alpha = alpha;
            cfg.gamma = gamma;
            const double eps = gmrfsim::epsilon_threshold(cfg);
            // gamma is a row label, printed at its natural precision
            char glabel[32];
            std::snprintf(glabel, sizeof glabel, "%g", gamma);
            out << glabel << ',' << N << ',' << num(eps) << ','
                << sig3(gmrfsim::quantize_table_epsilon(eps)) << '\n';
        }
    }
    Manifest m;
    m.add("command", std::string("tables"));
    m.add("version", std::string(kVersion));
    m.add("significance", alpha);
    m.add("output", out_path);
    m.write(out_path + ".manifest");
    std::cout << "wrote " << out_path << "\n";
    return 0;
}

int cmd_validate(const RunConfig& rc) {
    const gmrfsim::MaternParams params = matern_from(rc);
    const double practical_range = 4.0 * params.range_phi;
    const int buffer = rc.buffer >= 0
                           ? rc.buffer
                           : static_cast<int>(std::ceil(2.0 * practical_range / rc.h));
    const double max_lag = rc.max_lag > 0.0 ? rc.max_lag : practical_range;
    const int n_bins = rc.n_bins > 0 ? rc.n_bins
                                     : std::max(1, static_cast<int>(std::floor(max_lag / rc.h)));

    RunConfig wide = rc;
    wide.nx = rc.nx + 2 * buffer;
    wide.ny = rc.ny + 2 * buffer;
    const BuiltOperator built = build_operator(wide, params);

    gmrfsim::SimRequest req;
    req.op = built.op;
    req.cfg = test_config_from(rc);
    req.seed = rc.seed;
    req.n_sims = rc.n_sims;
    req.forced_order = rc.forced_order;
    const gmrfsim::SimResult res = gmrfsim::simulate(req);

    // reference sampler on the same operator, independent noise streams
    gmrfsim::BandedCholeskySampler oracle(built.op);
    std::vector<std::vector<double>> oracle_fields;
    oracle_fields.reserve(rc.n_sims);
    for (int s = 0; s < rc.n_sims; ++s) {
        const auto eps = gmrfsim::standard_normal_vector(
            rc.seed, static_cast<std::uint64_t>(rc.n_sims + s), built.op.n());
        oracle_fields.push_back(oracle.sample(eps));
    }

    gmrfsim::GridGeometry crop_geom;
    const auto cheb_crop = gmrfsim::crop_grid_vectors(res.vectors, built.geom, buffer, crop_geom);
    const auto chol_crop =
        gmrfsim::crop_grid_vectors(oracle_fields, built.geom, buffer, crop_geom);

    const auto v_cheb = gmrfsim::empirical_variogram(cheb_crop, crop_geom, max_lag, n_bins);
    const auto v_chol = gmrfsim::empirical_variogram(chol_crop, crop_geom, max_lag, n_bins);
    const double dev_cheb = gmrfsim::variogram_deviation(v_cheb, params);
    const double dev_chol = gmrfsim::variogram_deviation(v_chol, params);
    const double ratio = dev_cheb / std::max(dev_chol, 1e-300);
    const bool vario_pass = ratio <= 3.0;

    bool projection_ran = false, projection_pass = true;
    gmrfsim::ProjectionSummary proj;
    if (built.op.n() <= 512) {
        projection_ran = true;
        proj = gmrfsim::projection_test_suite(built.op, res.series, req.cfg, rc.n_directions,
                                              rc.seed + 0x9e3779b9ULL);
        projection_pass = proj.pass;
    }

    std::filesystem::create_directories(rc.out_dir);
    write_variogram_csv(rc.out_dir + "/variogram.csv", v_cheb, params);
    write_variogram_csv(rc.out_dir + "/variogram_oracle.csv", v_chol, params);

    std::ostringstream report;
    report << "variogram: dev = " << num(dev_cheb) << ", oracle_dev = " << num(dev_chol)
           << ", ratio = " << num(ratio) << ", bound = 3 -> " << (vario_pass ? "PASS" : "FAIL")
           << "\n";
    if (projection_ran) {
        report << "projection: max_R = " << num(proj.max_rejection)
               << ", bound = " << num(proj.bound) << ", max|X-1| = " << num(proj.max_ratio_gap)
               << ", directions = " << proj.n_directions << " -> "
               << (projection_pass ? "PASS" : "FAIL") << "\n";
    } else {
        report << "projection: SKIPPED (n = " << built.op.n() << " > 512)\n";
    }

    Manifest m;
    m.add("command", std::string("validate"));
    m.add_run_config(rc, params);
    m.add("buffer", buffer);
    m.add("max_lag", max_lag);
    m.add("n_bins", n_bins);
    m.add("n_directions", rc.n_directions);
    m.add_decision(res);
    m.add("variogram_dev", dev_cheb);
    m.add("variogram_oracle_dev", dev_chol);
    if (projection_ran) m.add("projection_max_R", proj.max_rejection);
    m.write(rc.out_dir + "/run_manifest.txt");

    std::ofstream rep(rc.out_dir + "/report.txt");
    rep << report.str();
    std::cout << report.str();

    const bool ok = vario_pass && projection_pass;
    std::cout << (ok ? "validate: PASS" : "validate: FAIL") << "\n";
    return ok ? 0 : 1;
}

int cmd_bench(const RunConfig& rc, const std::vector<int>& orders, const std::vector<int>& grids,
              const std::string& out_path) {
    const gmrfsim::MaternParams params = matern_from(rc);
    std::ofstream out(out_path);
    if (!out) {
        std::cerr << "error: cannot open output file: " << out_path << "\n";
        return 2;
    }
    out << "K,n,n_nz,k_nnz,matvec_count,wall_time_s,time_per_sim_s\n";
    for (int side : grids) {
        RunConfig grc = rc;
        grc.nx = grc.ny = side;
        const BuiltOperator built = build_operator(grc, params);
        for (int K : orders) {
            gmrfsim::SimRequest req;
            req.op = built.op;
            req.cfg = test_config_from(rc);
            req.seed = rc.seed;
            req.n_sims = rc.n_sims;
            req.forced_order = K;
            const gmrfsim::SimResult res = gmrfsim::simulate(req);
            const auto n_nz = static_cast<std::uint64_t>(built.op.S.nnz());
            out << K << ',' << built.op.n() << ',' << n_nz << ','
                << static_cast<std::uint64_t>(K) * n_nz << ',' << res.matvec_count << ','
                << num(res.wall_time_s) << ',' << num(res.wall_time_s / rc.n_sims) << '\n';
        }
    }
    Manifest m;
    m.add("command", std::string("bench"));
    m.add("version", std::string(kVersion));
    m.add("seed", rc.seed);
    m.add("n_sims", rc.n_sims);
    m.add("range_phi", params.range_phi);
    m.add("nu", params.nu);
    m.add("output", out_path);
    m.write(out_path + ".manifest");
    std::cout << "wrote " << out_path << "\n";
    return 0;
}

void add_matern_flags(CLI::App* sub, RunConfig& rc, int& alpha_flag) {
    sub->add_option("--sigma2", rc.sigma2, "marginal variance");
    sub->add_option("--range", rc.range_phi, "scale parameter phi (practical range ~ 4 phi)");
    sub->add_option("--nu", rc.nu, "smoothness nu (alpha = nu + 1 must be a positive integer)");
    sub->add_option("--alpha-spde", alpha_flag, "operator exponent alpha (= nu + 1)");
}

void add_test_flags(CLI::App* sub, RunConfig& rc, double& eta_flag, int& order_flag) {
    sub->add_option("--significance", rc.significance, "test significance alpha");
    sub->add_option("--gamma", rc.gamma, "allowed relative type-I degradation");
    sub->add_option("--eta", eta_flag, "Euclidean order-reduction tolerance");
    sub->add_option("--order", order_flag, "force the approximation order K");
}

bool flag_given(const CLI::App* sub, const std::string& name) {
    const CLI::Option* opt = sub->get_option_no_throw(name);
    return opt != nullptr && opt->count() > 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Gaussian random field simulation with sparse precision operators"};
    app.require_subcommand(1);

    RunConfig rc;
    int alpha_flag = 0, order_flag = 0;
    double eta_flag = 0.0;

    auto* sim = app.add_subcommand("simulate", "simulate Gaussian fields");
    sim->add_option("--nx", rc.nx, "grid nodes in x");
    sim->add_option("--ny", rc.ny, "grid nodes in y");
    sim->add_option("--spacing", rc.h, "grid spacing");
    sim->add_option("--mesh", rc.mesh_file, "triangle mesh file (overrides the grid)")
        ->check(CLI::ExistingFile);
    sim->add_option("--aniso", rc.aniso_file, "per-triangle anisotropy file")
        ->check(CLI::ExistingFile);
    add_matern_flags(sim, rc, alpha_flag);
    add_test_flags(sim, rc, eta_flag, order_flag);
    sim->add_option("--seed", rc.seed, "RNG seed");
    sim->add_option("--n-sims", rc.n_sims, "number of replicates")->check(CLI::PositiveNumber);
    sim->add_option("--out-dir", rc.out_dir, "output directory");

    double tbl_alpha = 0.05;
    std::string tbl_out = "tables.csv";
    auto* tbl = app.add_subcommand("tables", "emit the epsilon_{N,gamma} threshold table");
    tbl->add_option("--significance", tbl_alpha, "test significance alpha");
    tbl->add_option("--out", tbl_out, "output CSV path");

    auto* val = app.add_subcommand("validate", "statistical validation against oracles");
    val->add_option("--nx", rc.nx, "interior grid nodes in x");
    val->add_option("--ny", rc.ny, "interior grid nodes in y");
    val->add_option("--spacing", rc.h, "grid spacing");
    val->add_option("--buffer", rc.buffer, "boundary buffer cells per side (default 2x practical range)");
    add_matern_flags(val, rc, alpha_flag);
    add_test_flags(val, rc, eta_flag, order_flag);
    val->add_option("--seed", rc.seed, "RNG seed");
    auto* val_nsims =
        val->add_option("--n-sims", rc.n_sims, "number of replicates (default 50)")
            ->check(CLI::PositiveNumber);
    val->add_option("--n-directions", rc.n_directions, "projection-test directions");
    val->add_option("--max-lag", rc.max_lag, "variogram maximum lag (default practical range)");
    val->add_option("--n-bins", rc.n_bins, "variogram bins (default lag/h)");
    val->add_option("--out-dir", rc.out_dir, "output directory");

    std::vector<int> bench_orders{50, 100, 200};
    std::vector<int> bench_grids{32, 64, 128};
    std::string bench_out = "timing.csv";
    auto* ben = app.add_subcommand("bench", "time the sampler over a (K, n) ladder");
    ben->add_option("--orders", bench_orders, "forced orders K")->delimiter(',');
    ben->add_option("--grids", bench_grids, "grid side lengths")->delimiter(',');
    ben->add_option("--spacing", rc.h, "grid spacing");
    add_matern_flags(ben, rc, alpha_flag);
    ben->add_option("--seed", rc.seed, "RNG seed");
    ben->add_option("--n-sims", rc.n_sims, "replicates per row")->check(CLI::PositiveNumber);
    ben->add_option("--out", bench_out, "output CSV path");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    CLI::App* active = sim->parsed() ? static_cast<CLI::App*>(sim)
                       : val->parsed() ? static_cast<CLI::App*>(val)
                       : ben->parsed() ? static_cast<CLI::App*>(ben)
                                       : nullptr;
    if (active != nullptr) {
        if (flag_given(active, "--alpha-spde")) rc.alpha_spde = alpha_flag;
        if (flag_given(active, "--eta")) rc.eta = eta_flag;
        if (flag_given(active, "--order")) rc.forced_order = order_flag;
    }

    try {
        if (sim->parsed()) return cmd_simulate(rc);
        if (tbl->parsed()) {
            if (!(tbl_alpha > 0.0 && tbl_alpha < 1.0)) {
                std::cerr << "error: --significance must lie in (0, 1)\n";
                return 2;
            }
            return cmd_tables(tbl_alpha, tbl_out);
        }
        if (val->parsed()) {
            if (val_nsims->count() == 0) rc.n_sims = 50;
            return cmd_validate(rc);
        }
        if (ben->parsed()) return cmd_bench(rc, bench_orders, bench_grids, bench_out);
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 2;
}
