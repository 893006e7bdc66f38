#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "rbffd/experiment.hpp"

using namespace rbffd;
namespace fs = std::filesystem;

namespace {

fs::path temp_dir(const std::string& tag) {
    const fs::path p = fs::temp_directory_path() / ("rbffd_test_" + tag);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

std::string write_config(const fs::path& dir, const std::string& body) {
    const fs::path p = dir / "config.txt";
    std::ofstream os(p);
    os << body;
    return p.string();
}

std::string slurp(const fs::path& p) {
    std::ifstream is(p, std::ios::binary);
    std::stringstream ss;
    ss << is.rdbuf();
    return ss.str();
}

// coarse, fast advection setup
ExperimentConfig fast_advection() {
    ExperimentConfig cfg;
    cfg.problem = "advection";
    cfg.h = 0.06;
    cfg.dt = 1e-3;
    cfg.T = 0.02;
    cfg.alpha = 2;
    cfg.adaptive_c = false;
    cfg.fixed_c = 0.1;
    cfg.seed = 3;
    return cfg;
}

std::ostringstream null_log;

} // namespace

TEST_CASE("config file parsing sets every key") {
    const fs::path dir = temp_dir("parse");
    const std::string path = write_config(dir,
        "# comment\n"
        "problem=burgers\n"
        "h=0.05\n"
        "dt=0.01\n"
        "T=0.5\n"
        "alpha=3\n"
        "k_advection=5\n"
        "m_advection=4\n"
        "n_advection=30\n"
        "k_hyp=7\n"
        "m_hyp=1\n"
        "n_hyp=35\n"
        "c_mode=fixed(0.25)\n"
        "chi=5\n"
        "Re=250\n"
        "seed=11\n"
        "snapshot_times=0.1,0.5\n"
        "tuner.c_init=0.2\n"
        "tuner.sweep_factor=5\n"
        "tuner.max_sweep=6\n"
        "tuner.bisect_tol=0.01\n"
        "tuner.max_bisect=40\n"
        "tuner.num_eigs=20\n"
        "sweep.h=0.05,0.04\n"
        "workers=2\n");
    const ExperimentConfig cfg = parse_config_file(path);
    CHECK(cfg.problem == "burgers");
    CHECK(cfg.h == 0.05);
    CHECK(cfg.dt == 0.01);
    CHECK(cfg.alpha == 3);
    CHECK(cfg.k_advection == 5);
    CHECK(cfg.m_advection == 4);
    CHECK(cfg.n_advection == 30);
    CHECK(cfg.k_hyp == 7);
    CHECK(cfg.m_hyp == 1);
    CHECK(cfg.n_hyp == 35);
    CHECK(!cfg.adaptive_c);
    CHECK(cfg.fixed_c == 0.25);
    CHECK(cfg.chi == 5);
    CHECK(cfg.Re == 250);
    CHECK(cfg.seed == 11);
    CHECK(cfg.snapshot_times == std::vector<double>{0.1, 0.5});
    CHECK(cfg.tuner.c_init == 0.2);
    CHECK(cfg.tuner.num_eigs == 20);
    CHECK(cfg.sweep_h == std::vector<double>{0.05, 0.04});
    CHECK(cfg.workers == 2);
    CHECK_NOTHROW(cfg.validate());
}

TEST_CASE("config errors carry file and line references") {
    const fs::path dir = temp_dir("badcfg");
    const std::string path = write_config(dir, "h=0.05\nnot_a_key=3\n");
    try {
        parse_config_file(path);
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        const std::string msg = e.what();
        CHECK(msg.find(":2") != std::string::npos);
        CHECK(msg.find("not_a_key") != std::string::npos);
    }

    const std::string path2 = write_config(dir, "h=abc\n");
    CHECK_THROWS_AS(parse_config_file(path2), ConfigError);
    const std::string path3 = write_config(dir, "h 0.05\n");
    CHECK_THROWS_AS(parse_config_file(path3), ConfigError);
    CHECK_THROWS_AS(parse_config_file((dir / "missing.txt").string()), ConfigError);
}

TEST_CASE("c_mode accepts adaptive and fixed(<c>) only") {
    ExperimentConfig cfg;
    cfg.set("c_mode", "fixed(0.4)", "t");
    CHECK(!cfg.adaptive_c);
    CHECK(cfg.fixed_c == 0.4);
    cfg.set("c_mode", "adaptive", "t");
    CHECK(cfg.adaptive_c);
    CHECK_THROWS_AS(cfg.set("c_mode", "auto", "t"), ConfigError);
    CHECK_THROWS_AS(cfg.set("c_mode", "fixed(oops)", "t"), ConfigError);
}

TEST_CASE("validation rejects out-of-range numerics") {
    ExperimentConfig cfg = fast_advection();
    cfg.h = 0.7;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg = fast_advection();
    cfg.dt = 0.0;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg = fast_advection();
    cfg.T = cfg.dt / 2;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg = fast_advection();
    cfg.n_advection = 3; // below unisolvency floor for m=2
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
}

TEST_CASE("cmd_run writes provenance-stamped outputs and exits 0") {
    const fs::path dir = temp_dir("run");
    ExperimentConfig cfg = fast_advection();
    cfg.snapshot_times = {0.01};
    const int code = cmd_run(cfg, (dir / "out").string(), null_log);
    CHECK(code == kExitOk);
    for (const char* name : {"metrics.csv", "nodes.csv", "snapshot_t0p01.csv"}) {
        const fs::path f = dir / "out" / name;
        REQUIRE_MESSAGE(fs::exists(f), name);
        const std::string text = slurp(f);
        CHECK(text.rfind("# problem=advection", 0) == 0);
    }
    const std::string metrics = slurp(dir / "out" / "metrics.csv");
    CHECK(metrics.find("t,rel_error,rel_energy,c,rho") != std::string::npos);
}

TEST_CASE("identical config and seed produce byte-identical outputs") {
    const fs::path dir = temp_dir("repro");
    ExperimentConfig cfg = fast_advection();
    cfg.adaptive_c = true; // exercise the tuner path too
    cfg.tuner.num_eigs = 8;
    REQUIRE(cmd_run(cfg, (dir / "a").string(), null_log) == kExitOk);
    REQUIRE(cmd_run(cfg, (dir / "b").string(), null_log) == kExitOk);
    for (const char* name : {"metrics.csv", "nodes.csv", "tune_trace.csv"}) {
        CHECK_MESSAGE(slurp(dir / "a" / name) == slurp(dir / "b" / name), name);
    }
}

TEST_CASE("cmd_tune writes a JSON result with the evaluation trace") {
    const fs::path dir = temp_dir("tune");
    ExperimentConfig cfg = fast_advection();
    cfg.adaptive_c = true;
    const int code = cmd_tune(cfg, (dir / "out").string(), null_log);
    CHECK(code == kExitOk);
    const auto j = nlohmann::json::parse(slurp(dir / "out" / "tune.json"));
    CHECK((j["status"] == "ok" || j["status"] == "already-stable"));
    CHECK(j["c_opt"].get<double>() >= 0.0);
    CHECK(!j["evaluations"].empty());
    for (const auto& e : j["evaluations"]) {
        CHECK(e.contains("c"));
        CHECK(e.contains("rho"));
        CHECK((e["phase"] == "sweep" || e["phase"] == "bisect"));
    }
    CHECK(fs::exists(dir / "out" / "tune_trace.csv"));
}

TEST_CASE("cmd_tune exits 3 when no stable c exists in the sweep") {
    const fs::path dir = temp_dir("tunefail");
    ExperimentConfig cfg = fast_advection();
    cfg.adaptive_c = true;
    cfg.tuner.c_init = 1e-30; // sweep stays below any stabilising gamma
    cfg.tuner.max_sweep = 1;
    const int code = cmd_tune(cfg, (dir / "out").string(), null_log);
    CHECK(code == kExitTunerFailure);
    const auto j = nlohmann::json::parse(slurp(dir / "out" / "tune.json"));
    CHECK(j["status"] == "no-stable-c");
}

TEST_CASE("cmd_spectrum writes one CSV per PHS order") {
    const fs::path dir = temp_dir("spectrum");
    ExperimentConfig cfg = fast_advection();
    cfg.h = 0.12;
    cfg.spectrum_k = {3, 5};
    const int code = cmd_spectrum(cfg, (dir / "out").string(), null_log);
    CHECK(code == kExitOk);
    for (const char* name : {"spectrum_k3.csv", "spectrum_k5.csv"}) {
        const fs::path f = dir / "out" / name;
        REQUIRE_MESSAGE(fs::exists(f), name);
        std::ifstream is(f);
        std::string line;
        std::getline(is, line); // provenance
        std::getline(is, line);
        CHECK(line == "re,im");
        int rows = 0;
        while (std::getline(is, line)) ++rows;
        CHECK(rows > 20); // all N eigenvalues present
    }
}

TEST_CASE("cmd_sweep emits one row per grid point and matches cmd_run on a single point") {
    const fs::path dir = temp_dir("sweep");
    ExperimentConfig cfg = fast_advection();

    SUBCASE("2x2 grid") {
        cfg.sweep_c = {0.05, 0.5};
        cfg.sweep_alpha = {2, 3};
        REQUIRE(cmd_sweep(cfg, (dir / "out").string(), null_log) == kExitOk);
        std::ifstream is(dir / "out" / "sweep.csv");
        std::string line;
        std::getline(is, line); // provenance
        std::getline(is, line);
        CHECK(line ==
              "h,dt,c,alpha,Re,m_advection,n_hyp,m_hyp,rel_error,rel_energy,c_used,rho,status,"
              "fit_k,fit_d");
        int rows = 0;
        while (std::getline(is, line)) rows += !line.empty();
        CHECK(rows == 4);
    }
    SUBCASE("single point reproduces cmd_run's final metrics") {
        cfg.sweep_c = {0.1};
        REQUIRE(cmd_sweep(cfg, (dir / "single").string(), null_log) == kExitOk);
        REQUIRE(cmd_run(cfg, (dir / "runref").string(), null_log) == kExitOk);
        // pull rel_error at T from both outputs
        std::ifstream sw(dir / "single" / "sweep.csv");
        std::string line, row;
        std::getline(sw, line);
        std::getline(sw, line);
        std::getline(sw, row);
        std::stringstream rs(row);
        std::string field;
        std::vector<std::string> fields;
        while (std::getline(rs, field, ',')) fields.push_back(field);
        REQUIRE(fields.size() >= 10);
        std::ifstream mustream(dir / "runref" / "metrics.csv");
        std::string last;
        while (std::getline(mustream, line))
            if (!line.empty() && line[0] != '#' && line[0] != 't') last = line;
        std::stringstream ms(last);
        std::vector<std::string> mfields;
        while (std::getline(ms, field, ',')) mfields.push_back(field);
        CHECK(fields[8] == mfields[1]);  // rel_error
        CHECK(fields[9] == mfields[2]);  // rel_energy
    }
    SUBCASE("sweep without axes is a config error") {
        CHECK_THROWS_AS(cmd_sweep(cfg, (dir / "none").string(), null_log), ConfigError);
    }
}

#ifdef RBFFD_CLI_PATH
TEST_CASE("CLI binary: subcommands, overrides, exit codes") {
    const fs::path dir = temp_dir("cli");
    const std::string cli = RBFFD_CLI_PATH;
    const std::string out = (dir / "out").string();
    const std::string cmd = cli +
        " run --out " + out +
        " --problem=advection --h=0.06 --dt=1e-3 --T=0.01 --c_mode=fixed(0.1)" +
        " --seed=3 > /dev/null 2>&1";
    CHECK(std::system(cmd.c_str()) == 0);
    CHECK(fs::exists(dir / "out" / "metrics.csv"));

    const std::string bad = cli + " run --out " + out + " --h=oops > /dev/null 2>&1";
    const int rc = std::system(bad.c_str());
    CHECK(WEXITSTATUS(rc) == kExitConfigError);

    const std::string badkey = cli + " run --out " + out + " --frobnicate=1 > /dev/null 2>&1";
    CHECK(WEXITSTATUS(std::system(badkey.c_str())) == kExitConfigError);
}
#endif
