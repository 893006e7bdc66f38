#include "rbffd/experiment.hpp"

#include <atomic>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <ostream>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "rbffd/csv.hpp"
#include "rbffd/parallel.hpp"

namespace rbffd {

namespace {

namespace fs = std::filesystem;

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> parts;
    std::string cur;
    for (char ch : s) {
        if (ch == sep) {
            parts.push_back(cur);
            cur.clear();
        } else {
            cur.push_back(ch);
        }
    }
    parts.push_back(cur);
    return parts;
}

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

double parse_double(const std::string& v, const std::string& where) {
    try {
        std::size_t pos = 0;
        const double x = std::stod(v, &pos);
        if (pos != v.size()) throw std::invalid_argument("trailing characters");
        return x;
    } catch (const std::exception&) {
        throw ConfigError(where + ": expected a number, got '" + v + "'");
    }
}

long parse_int(const std::string& v, const std::string& where) {
    try {
        std::size_t pos = 0;
        const long x = std::stol(v, &pos);
        if (pos != v.size()) throw std::invalid_argument("trailing characters");
        return x;
    } catch (const std::exception&) {
        throw ConfigError(where + ": expected an integer, got '" + v + "'");
    }
}

std::vector<double> parse_double_list(const std::string& v, const std::string& where) {
    std::vector<double> out;
    if (trim(v).empty()) return out;
    for (const auto& p : split(v, ',')) out.push_back(parse_double(trim(p), where));
    return out;
}

std::vector<int> parse_int_list(const std::string& v, const std::string& where) {
    std::vector<int> out;
    if (trim(v).empty()) return out;
    for (const auto& p : split(v, ',')) out.push_back(static_cast<int>(parse_int(trim(p), where)));
    return out;
}

std::string join_doubles(const std::vector<double>& v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) s += ',';
        s += format_double(v[i]);
    }
    return s;
}

std::string join_ints(const std::vector<int>& v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) s += ',';
        s += std::to_string(v[i]);
    }
    return s;
}

void write_provenance(std::ostream& os, const ExperimentConfig& cfg) {
    os << "# " << cfg.resolved() << '\n';
}

std::ofstream open_output(const std::string& out_dir, const std::string& name,
                          const ExperimentConfig& cfg) {
    fs::create_directories(out_dir);
    std::ofstream os(fs::path(out_dir) / name, std::ios::binary);
    if (!os) throw std::runtime_error("cannot open output file " + name + " in " + out_dir);
    write_provenance(os, cfg);
    return os;
}

} // namespace

void ExperimentConfig::set(const std::string& key, const std::string& value,
                           const std::string& where) {
    const std::string v = trim(value);
    if (key == "problem") {
        if (v != "advection" && v != "burgers")
            throw ConfigError(where + ": problem must be advection or burgers");
        problem = v;
    } else if (key == "h") {
        h = parse_double(v, where);
    } else if (key == "dt") {
        dt = parse_double(v, where);
    } else if (key == "T") {
        T = parse_double(v, where);
    } else if (key == "alpha") {
        alpha = static_cast<int>(parse_int(v, where));
    } else if (key == "k_advection") {
        k_advection = static_cast<int>(parse_int(v, where));
    } else if (key == "m_advection") {
        m_advection = static_cast<int>(parse_int(v, where));
    } else if (key == "n_advection") {
        n_advection = static_cast<int>(parse_int(v, where));
    } else if (key == "k_hyp") {
        k_hyp = static_cast<int>(parse_int(v, where));
    } else if (key == "m_hyp") {
        m_hyp = static_cast<int>(parse_int(v, where));
    } else if (key == "n_hyp") {
        n_hyp = static_cast<int>(parse_int(v, where));
    } else if (key == "c_mode") {
        if (v == "adaptive") {
            adaptive_c = true;
            fixed_c = 0.0;
        } else if (v.starts_with("fixed(") && v.ends_with(")")) {
            adaptive_c = false;
            fixed_c = parse_double(v.substr(6, v.size() - 7), where);
        } else {
            throw ConfigError(where + ": c_mode must be adaptive or fixed(<c>)");
        }
    } else if (key == "chi") {
        chi = static_cast<int>(parse_int(v, where));
    } else if (key == "Re") {
        Re = parse_double(v, where);
    } else if (key == "seed") {
        seed = static_cast<std::uint64_t>(parse_int(v, where));
    } else if (key == "snapshot_times") {
        snapshot_times = parse_double_list(v, where);
    } else if (key == "tuner.c_init") {
        tuner.c_init = parse_double(v, where);
    } else if (key == "tuner.sweep_factor") {
        tuner.sweep_factor = parse_double(v, where);
    } else if (key == "tuner.max_sweep") {
        tuner.max_sweep = static_cast<int>(parse_int(v, where));
    } else if (key == "tuner.bisect_tol") {
        tuner.bisect_tol = parse_double(v, where);
    } else if (key == "tuner.max_bisect") {
        tuner.max_bisect = static_cast<int>(parse_int(v, where));
    } else if (key == "tuner.num_eigs") {
        tuner.num_eigs = static_cast<int>(parse_int(v, where));
    } else if (key == "spectrum.c") {
        spectrum_c = parse_double_list(v, where);
    } else if (key == "spectrum.k") {
        spectrum_k = parse_int_list(v, where);
    } else if (key == "spectrum.scale") {
        spectrum_scale = parse_double(v, where);
    } else if (key == "sweep.h") {
        sweep_h = parse_double_list(v, where);
    } else if (key == "sweep.dt") {
        sweep_dt = parse_double_list(v, where);
    } else if (key == "sweep.c") {
        sweep_c = parse_double_list(v, where);
    } else if (key == "sweep.alpha") {
        sweep_alpha = parse_int_list(v, where);
    } else if (key == "sweep.Re") {
        sweep_Re = parse_double_list(v, where);
    } else if (key == "sweep.m_advection" || key == "sweep.m") {
        sweep_m_advection = parse_int_list(v, where);
    } else if (key == "sweep.n_hyp" || key == "sweep.n") {
        sweep_n_hyp = parse_int_list(v, where);
    } else if (key == "sweep.m_hyp") {
        sweep_m_hyp = parse_int_list(v, where);
    } else if (key == "workers") {
        workers = static_cast<int>(parse_int(v, where));
    } else {
        throw ConfigError(where + ": unknown key '" + key + "'");
    }
}

void ExperimentConfig::validate() const {
    const auto bad = [](const std::string& msg) { throw ConfigError("config: " + msg); };
    if (!(h > 0.0) || !(h < 0.5)) bad("h must lie in (0, 0.5)");
    if (!(dt > 0.0)) bad("dt must be positive");
    if (!(T >= dt)) bad("T must be >= dt");
    if (alpha < 1) bad("alpha must be >= 1");
    if (chi < 1) bad("chi must be >= 1");
    if (problem == "burgers" && !(Re > 0.0)) bad("Re must be positive");
    if (!adaptive_c && fixed_c < 0.0) bad("fixed c must be >= 0");
    for (double t : snapshot_times)
        if (t < 0.0 || t > T + 1e-12) bad("snapshot time outside [0, T]");
    stepper().validate(); // operator parametrisation checks
    tuner.validate();
}

std::string ExperimentConfig::resolved() const {
    std::ostringstream os;
    os << "problem=" << problem << " h=" << format_double(h) << " dt=" << format_double(dt)
       << " T=" << format_double(T) << " alpha=" << alpha << " k_advection=" << k_advection
       << " m_advection=" << m_advection << " n_advection=" << n_advection
       << " k_hyp=" << k_hyp << " m_hyp=" << m_hyp << " n_hyp=" << n_hyp << " c_mode="
       << (adaptive_c ? std::string("adaptive") : "fixed(" + format_double(fixed_c) + ")")
       << " chi=" << chi << " Re=" << format_double(Re) << " seed=" << seed
       << " snapshot_times=" << join_doubles(snapshot_times)
       << " tuner.c_init=" << format_double(tuner.c_init)
       << " tuner.sweep_factor=" << format_double(tuner.sweep_factor)
       << " tuner.max_sweep=" << tuner.max_sweep
       << " tuner.bisect_tol=" << format_double(tuner.bisect_tol)
       << " tuner.max_bisect=" << tuner.max_bisect << " tuner.num_eigs=" << tuner.num_eigs;
    if (!spectrum_c.empty()) os << " spectrum.c=" << join_doubles(spectrum_c);
    if (!spectrum_k.empty()) os << " spectrum.k=" << join_ints(spectrum_k);
    if (spectrum_scale >= 0.0) os << " spectrum.scale=" << format_double(spectrum_scale);
    if (!sweep_h.empty()) os << " sweep.h=" << join_doubles(sweep_h);
    if (!sweep_dt.empty()) os << " sweep.dt=" << join_doubles(sweep_dt);
    if (!sweep_c.empty()) os << " sweep.c=" << join_doubles(sweep_c);
    if (!sweep_alpha.empty()) os << " sweep.alpha=" << join_ints(sweep_alpha);
    if (!sweep_Re.empty()) os << " sweep.Re=" << join_doubles(sweep_Re);
    if (!sweep_m_advection.empty()) os << " sweep.m_advection=" << join_ints(sweep_m_advection);
    if (!sweep_n_hyp.empty()) os << " sweep.n_hyp=" << join_ints(sweep_n_hyp);
    if (!sweep_m_hyp.empty()) os << " sweep.m_hyp=" << join_ints(sweep_m_hyp);
    if (workers > 0) os << " workers=" << workers;
    return os.str();
}

StepperConfig ExperimentConfig::stepper() const {
    StepperConfig s;
    s.dt = dt;
    s.T = T;
    s.alpha = alpha;
    s.adaptive_c = adaptive_c;
    s.fixed_c = fixed_c;
    s.tuner = tuner;
    s.chi = chi;
    s.snapshot_times = snapshot_times;
    s.k_adv = k_advection;
    s.m_adv = m_advection;
    s.n_adv = n_advection;
    s.k_hyp = k_hyp;
    s.m_hyp = m_hyp;
    s.n_hyp = n_hyp;
    return s;
}

bool ExperimentConfig::has_sweep_axis() const {
    return !(sweep_h.empty() && sweep_dt.empty() && sweep_c.empty() && sweep_alpha.empty() &&
             sweep_Re.empty() && sweep_m_advection.empty() && sweep_n_hyp.empty() &&
             sweep_m_hyp.empty());
}

ExperimentConfig parse_config_file(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw ConfigError(path + ": cannot open config file");
    ExperimentConfig cfg;
    std::string line;
    int lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        const std::string t = trim(line);
        if (t.empty() || t[0] == '#') continue;
        const auto eq = t.find('=');
        const std::string where = path + ":" + std::to_string(lineno);
        if (eq == std::string::npos) throw ConfigError(where + ": expected key=value");
        cfg.set(trim(t.substr(0, eq)), t.substr(eq + 1), where);
    }
    return cfg;
}

namespace {

NodeSet make_nodes(const ExperimentConfig& cfg) {
    return generate_nodes(cfg.h, cfg.problem == "burgers" ? Domain::Square : Domain::Torus,
                          cfg.seed);
}

void write_advection_snapshot(std::ostream& os, const NodeSet& nodes, const Snapshot& snap) {
    os << "x,y,u\n";
    for (int i = 0; i < nodes.size(); ++i) {
        os << format_double(nodes.point(i)[0]) << ',' << format_double(nodes.point(i)[1]) << ','
           << format_double(snap.values(i, 0)) << '\n';
    }
}

void write_burgers_snapshot(std::ostream& os, const NodeSet& nodes, const Snapshot& snap,
                            double Re) {
    os << "x,y,u1,u2,err_l1\n";
    for (int i = 0; i < nodes.size(); ++i) {
        const Eigen::Vector2d f = exact_burgers(nodes.point(i), snap.t, Re);
        const double err = std::abs(snap.values(i, 0) - f(0)) + std::abs(snap.values(i, 1) - f(1));
        os << format_double(nodes.point(i)[0]) << ',' << format_double(nodes.point(i)[1]) << ','
           << format_double(snap.values(i, 0)) << ',' << format_double(snap.values(i, 1)) << ','
           << format_double(err) << '\n';
    }
}

std::string snapshot_name(double t) {
    std::string tag = format_double(t);
    for (char& c : tag)
        if (c == '.') c = 'p';
    return "snapshot_t" + tag + ".csv";
}

void write_run_outputs(const ExperimentConfig& cfg, const std::string& out_dir,
                       const NodeSet& nodes, const RunResult& result) {
    {
        auto os = open_output(out_dir, "nodes.csv", cfg);
        nodes.write_csv(os);
    }
    {
        auto os = open_output(out_dir, "metrics.csv", cfg);
        write_metrics_csv(os, result.metrics);
    }
    if (!result.tunings.empty()) {
        auto os = open_output(out_dir, "tune_trace.csv", cfg);
        os << "c,rho,phase\n";
        for (const auto& tune : result.tunings) {
            for (const auto& e : tune.evaluations) {
                os << format_double(e.c) << ',' << format_double(e.rho) << ','
                   << (e.phase == 's' ? "sweep" : "bisect") << '\n';
            }
        }
    }
    for (const auto& snap : result.snapshots) {
        auto os = open_output(out_dir, snapshot_name(snap.t), cfg);
        if (cfg.problem == "burgers")
            write_burgers_snapshot(os, nodes, snap, cfg.Re);
        else
            write_advection_snapshot(os, nodes, snap);
    }
}

RunResult run_problem(const ExperimentConfig& cfg, const NodeSet& nodes) {
    if (cfg.problem == "burgers") return run_burgers(nodes, cfg.Re, cfg.stepper());
    return run_advection(nodes, Eigen::Vector2d(1.0, 0.0), cfg.stepper());
}

// Evolution-map builder for the configured problem at t = 0.
EvolutionBuilder make_builder(const ExperimentConfig& cfg, const NodeSet& nodes,
                              const SparseOperator& d_advective, const SparseOperator& d_hip) {
    const double h = cfg.h;
    const int alpha = cfg.alpha;
    const double dt = cfg.dt;
    if (cfg.problem == "burgers") {
        return [&d_advective, &d_hip, &nodes, h, alpha, dt](double c) {
            HyperviscosityConfig hv{alpha, c, h};
            return build_evolution(stabilised_operator(d_advective, d_hip, hv), dt,
                                   nodes.boundary_ids());
        };
    }
    return [&d_advective, &d_hip, h, alpha, dt](double c) {
        HyperviscosityConfig hv{alpha, c, h};
        return build_evolution(stabilised_operator(d_advective, d_hip, hv), dt, {},
                               Deflation::ConstantField);
    };
}

// Operators of the configured problem at t = 0 (Burgers linearised about the
// exact initial field).
std::pair<SparseOperator, SparseOperator> initial_operators(const ExperimentConfig& cfg,
                                                            const NodeSet& nodes) {
    const StepperConfig scfg = cfg.stepper();
    const StencilTable st_adv = find_stencils(nodes, scfg.n_adv);
    const StencilTable st_hyp = find_stencils(nodes, scfg.n_hyp);
    SparseOperator d_hip = assemble(nodes, st_hyp, scfg.hyperviscosity_spec());

    SparseOperator d_advective;
    if (cfg.problem == "burgers") {
        const SparseOperator d_x = assemble(nodes, st_adv, scfg.advection_spec(OperatorKind::PartialX));
        const SparseOperator d_y = assemble(nodes, st_adv, scfg.advection_spec(OperatorKind::PartialY));
        const SparseOperator d_lap = assemble(nodes, st_adv, scfg.advection_spec(OperatorKind::Laplacian));
        const Eigen::MatrixXd u0 = exact_burgers_field(nodes, 0.0, cfg.Re);
        d_advective.spec = d_x.spec;
        d_advective.matrix = (u0.col(0).asDiagonal() * d_x.matrix +
                              u0.col(1).asDiagonal() * d_y.matrix - (1.0 / cfg.Re) * d_lap.matrix)
                                 .eval();
    } else {
        d_advective = assemble(nodes, st_adv, scfg.advection_spec(OperatorKind::PartialX));
    }
    return {std::move(d_advective), std::move(d_hip)};
}

} // namespace

int cmd_run(const ExperimentConfig& cfg, const std::string& out_dir, std::ostream& log) {
    cfg.validate();
    const NodeSet nodes = make_nodes(cfg);
    log << "run: problem=" << cfg.problem << " N=" << nodes.size() << " h=" << format_double(cfg.h)
        << '\n';
    const RunResult result = run_problem(cfg, nodes);
    write_run_outputs(cfg, out_dir, nodes, result);
    for (const auto& w : result.warnings) log << "warning: " << w << '\n';
    switch (result.status) {
        case RunStatus::Ok:
            log << "run: completed to T=" << format_double(cfg.T)
                << " c=" << format_double(result.final_c) << '\n';
            return kExitOk;
        case RunStatus::Diverged:
            log << "run: diverged at t=" << format_double(result.blowup_time) << '\n';
            return kExitDivergence;
        case RunStatus::TunerFailed:
            log << "run: tuner found no stable c\n";
            return kExitTunerFailure;
    }
    return kExitOk;
}

int cmd_tune(const ExperimentConfig& cfg, const std::string& out_dir, std::ostream& log) {
    cfg.validate();
    const NodeSet nodes = make_nodes(cfg);
    const auto [d_advective, d_hip] = initial_operators(cfg, nodes);
    const TuneResult tune = find_c_opt(make_builder(cfg, nodes, d_advective, d_hip), cfg.tuner);

    nlohmann::json j;
    j["status"] = to_string(tune.status);
    j["c_opt"] = tune.c_opt;
    j["bracket"] = {tune.bracket.first, tune.bracket.second};
    nlohmann::json evals = nlohmann::json::array();
    for (const auto& e : tune.evaluations) {
        evals.push_back({{"c", e.c},
                         {"rho", e.rho},
                         {"converged", e.converged},
                         {"phase", e.phase == 's' ? "sweep" : "bisect"}});
    }
    j["evaluations"] = evals;

    fs::create_directories(out_dir);
    {
        std::ofstream os(fs::path(out_dir) / "tune.json", std::ios::binary);
        os << j.dump(2) << '\n';
    }
    {
        auto os = open_output(out_dir, "tune_trace.csv", cfg);
        write_tune_trace_csv(os, tune);
    }
    log << "tune: status=" << to_string(tune.status) << " c_opt=" << format_double(tune.c_opt)
        << " evaluations=" << tune.evaluations.size() << '\n';
    return tune.status == TuneStatus::NoStableC ? kExitTunerFailure : kExitOk;
}

int cmd_spectrum(const ExperimentConfig& cfg, const std::string& out_dir, std::ostream& log) {
    cfg.validate();
    const NodeSet nodes = make_nodes(cfg);
    const double scale = cfg.spectrum_scale >= 0.0 ? cfg.spectrum_scale : cfg.h;
    const StepperConfig scfg = cfg.stepper();

    std::vector<int> orders = cfg.spectrum_k;
    if (orders.empty()) orders.push_back(cfg.k_advection);

    int files = 0;
    for (int k : orders) {
        const StencilTable st_adv = find_stencils(nodes, scfg.n_adv);
        OperatorSpec adv_spec{OperatorKind::PartialX, k, cfg.m_advection, cfg.n_advection, 0};
        const SparseOperator d_adv = assemble(nodes, st_adv, adv_spec);
        if (cfg.spectrum_c.empty()) {
            auto os = open_output(out_dir, "spectrum_k" + std::to_string(k) + ".csv", cfg);
            write_spectrum_csv(os, dump_spectrum(d_adv, scale));
            ++files;
            continue;
        }
        const StencilTable st_hyp = find_stencils(nodes, scfg.n_hyp);
        const SparseOperator d_hip = assemble(nodes, st_hyp, scfg.hyperviscosity_spec());
        for (double c : cfg.spectrum_c) {
            HyperviscosityConfig hv{cfg.alpha, c, cfg.h};
            const SparseOperator d_hat = stabilised_operator(d_adv, d_hip, hv);
            std::string cname = format_double(c);
            for (char& ch : cname)
                if (ch == '.') ch = 'p';
            auto os = open_output(out_dir,
                                  "spectrum_k" + std::to_string(k) + "_c" + cname + ".csv", cfg);
            write_spectrum_csv(os, dump_spectrum(d_hat, scale));
            ++files;
        }
    }
    log << "spectrum: wrote " << files << " file(s), N=" << nodes.size() << '\n';
    return kExitOk;
}

namespace {

struct SweepPoint {
    ExperimentConfig cfg;
    double h, dt, c, Re;
    int alpha, m_advection, n_hyp, m_hyp;
    bool fixed_c_axis = false;
};

struct SweepRow {
    bool ok = false;
    std::string status;
    double rel_error = 0.0, rel_energy = 0.0, c_used = 0.0;
    std::optional<double> rho;
    double fit_k = 0.0, fit_d = 0.0;
    bool has_fit = false;
};

} // namespace

int cmd_sweep(const ExperimentConfig& cfg, const std::string& out_dir, std::ostream& log) {
    cfg.validate();
    if (!cfg.has_sweep_axis()) throw ConfigError("config: sweep needs at least one sweep.* axis");

    const auto axis_or = [](const std::vector<double>& axis, double base) {
        return axis.empty() ? std::vector<double>{base} : axis;
    };
    const auto iaxis_or = [](const std::vector<int>& axis, int base) {
        return axis.empty() ? std::vector<int>{base} : axis;
    };
    const auto hs = axis_or(cfg.sweep_h, cfg.h);
    const auto dts = axis_or(cfg.sweep_dt, cfg.dt);
    const auto res = axis_or(cfg.sweep_Re, cfg.Re);
    const auto alphas = iaxis_or(cfg.sweep_alpha, cfg.alpha);
    const auto mads = iaxis_or(cfg.sweep_m_advection, cfg.m_advection);
    const auto nhyps = iaxis_or(cfg.sweep_n_hyp, cfg.n_hyp);
    const auto mhyps = iaxis_or(cfg.sweep_m_hyp, cfg.m_hyp);
    const bool c_axis = !cfg.sweep_c.empty();
    const auto cs = c_axis ? cfg.sweep_c : std::vector<double>{cfg.fixed_c};

    std::vector<SweepPoint> points;
    for (double hv : hs)
        for (double dtv : dts)
            for (double cv : cs)
                for (int av : alphas)
                    for (double rev : res)
                        for (int mav : mads)
                            for (int nhv : nhyps)
                                for (int mhv : mhyps) {
                                    SweepPoint p;
                                    p.cfg = cfg;
                                    p.cfg.h = hv;
                                    p.cfg.dt = dtv;
                                    p.cfg.Re = rev;
                                    p.cfg.alpha = av;
                                    p.cfg.m_advection = mav;
                                    p.cfg.n_hyp = nhv;
                                    p.cfg.m_hyp = mhv;
                                    if (c_axis) {
                                        p.cfg.adaptive_c = false;
                                        p.cfg.fixed_c = cv;
                                    }
                                    p.h = hv;
                                    p.dt = dtv;
                                    p.c = cv;
                                    p.Re = rev;
                                    p.alpha = av;
                                    p.m_advection = mav;
                                    p.n_hyp = nhv;
                                    p.m_hyp = mhv;
                                    points.push_back(std::move(p));
                                }

    const int total = static_cast<int>(points.size());
    std::vector<SweepRow> rows(total);
    std::atomic<int> next{0};
    std::mutex log_mutex;

    int pool = cfg.workers > 0 ? cfg.workers : worker_count();
    pool = std::min(pool, total);
    auto work = [&]() {
        for (;;) {
            const int idx = next.fetch_add(1);
            if (idx >= total) return;
            const SweepPoint& p = points[idx];
            SweepRow& row = rows[idx];
            try {
                const NodeSet nodes = make_nodes(p.cfg);
                const RunResult r = run_problem(p.cfg, nodes);
                row.c_used = r.final_c;
                if (r.status == RunStatus::Ok) {
                    row.ok = true;
                    row.status = "ok";
                    if (!r.metrics.empty()) {
                        row.rel_error = r.metrics.back().rel_error;
                        row.rel_energy = r.metrics.back().rel_energy;
                        row.rho = r.metrics.back().rho_at_tune;
                    }
                } else if (r.status == RunStatus::Diverged) {
                    row.status = "diverged";
                } else {
                    row.status = "tuner-failed";
                }
            } catch (const std::exception& e) {
                row.status = "error";
                std::scoped_lock lock(log_mutex);
                log << "sweep: point " << idx << " failed: " << e.what() << '\n';
            }
        }
    };
    if (pool <= 1) {
        work();
    } else {
        std::vector<std::thread> threads;
        for (int i = 0; i < pool; ++i) threads.emplace_back(work);
        for (auto& t : threads) t.join();
    }

    // Group-wise convergence fits along the h axis (or dt when no h axis).
    const bool fit_h = cfg.sweep_h.size() >= 3;
    const bool fit_dt = !fit_h && cfg.sweep_dt.size() >= 3;
    if (fit_h || fit_dt) {
        std::map<std::string, std::vector<int>> groups;
        for (int i = 0; i < total; ++i) {
            const SweepPoint& p = points[i];
            std::ostringstream key;
            if (!fit_h) key << p.h << '|';
            if (!fit_dt) key << p.dt << '|';
            key << p.c << '|' << p.alpha << '|' << p.Re << '|' << p.m_advection << '|' << p.n_hyp
                << '|' << p.m_hyp;
            groups[key.str()].push_back(i);
        }
        for (const auto& [key, members] : groups) {
            std::vector<std::pair<double, double>> samples;
            for (int i : members) {
                if (rows[i].ok && rows[i].rel_error > 0.0)
                    samples.emplace_back(fit_h ? points[i].h : points[i].dt, rows[i].rel_error);
            }
            if (samples.size() < 3) continue;
            try {
                const FitResult fit =
                    fit_order(samples, fit_h ? FitModel::HPower : FitModel::DtPower);
                for (int i : members) {
                    rows[i].fit_k = fit.k;
                    rows[i].fit_d = fit.d;
                    rows[i].has_fit = true;
                }
            } catch (const std::exception&) {
                // degenerate group; leave fit columns empty
            }
        }
    }

    auto os = open_output(out_dir, "sweep.csv", cfg);
    os << "h,dt,c,alpha,Re,m_advection,n_hyp,m_hyp,rel_error,rel_energy,c_used,rho,status,fit_k,"
          "fit_d\n";
    for (int i = 0; i < total; ++i) {
        const SweepPoint& p = points[i];
        const SweepRow& r = rows[i];
        os << format_double(p.h) << ',' << format_double(p.dt) << ',' << format_double(p.c) << ','
           << p.alpha << ',' << format_double(p.Re) << ',' << p.m_advection << ',' << p.n_hyp
           << ',' << p.m_hyp << ',';
        if (r.ok) os << format_double(r.rel_error);
        os << ',';
        if (r.ok) os << format_double(r.rel_energy);
        os << ',' << format_double(r.c_used) << ',';
        if (r.rho) os << format_double(*r.rho);
        os << ',' << r.status << ',';
        if (r.has_fit) os << format_double(r.fit_k);
        os << ',';
        if (r.has_fit) os << format_double(r.fit_d);
        os << '\n';
    }
    log << "sweep: " << total << " point(s) done\n";
    return kExitOk;
}

} // namespace rbffd
