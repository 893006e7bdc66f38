#ifndef RBFFD_EXPERIMENT_HPP
#define RBFFD_EXPERIMENT_HPP

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "rbffd/timestepping.hpp"

namespace rbffd {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Flat key=value experiment description; see parse_config_file for the file
/// format and README for the key list. c_mode is `adaptive` or `fixed(<c>)`.
struct ExperimentConfig {
    std::string problem = "advection"; // advection | burgers
    double h = 0.01;
    double dt = 1e-4;
    double T = 1.0;
    int alpha = 2;
    int k_advection = 3, m_advection = 2, n_advection = 12;
    int k_hyp = 0, m_hyp = 2, n_hyp = 30; // k_hyp 0 -> 2*alpha+1
    bool adaptive_c = true;
    double fixed_c = 0.0;
    int chi = 10;
    double Re = 1000.0;
    std::uint64_t seed = 1;
    std::vector<double> snapshot_times;
    TunerConfig tuner;

    std::vector<double> spectrum_c; // spectrum subcommand: c values (stabilised operator)
    std::vector<int> spectrum_k;    // spectrum subcommand: PHS orders (pure advection)
    double spectrum_scale = -1.0;   // < 0 -> scale by h

    std::vector<double> sweep_h, sweep_dt, sweep_c, sweep_Re;
    std::vector<int> sweep_alpha, sweep_m_advection, sweep_n_hyp, sweep_m_hyp;

    int workers = 0; // 0 -> hardware, capped by RBFFD_MAX_WORKERS

    /// Apply one `key=value` assignment. `where` prefixes error messages
    /// (file:line or the flag itself).
    void set(const std::string& key, const std::string& value, const std::string& where);
    void validate() const;

    /// Canonical one-line resolved form, written as the provenance comment.
    std::string resolved() const;

    StepperConfig stepper() const;
    bool has_sweep_axis() const;
};

/// Parse a flat config file (one `key=value` per line, `#` comments). Errors
/// carry file:line references.
ExperimentConfig parse_config_file(const std::string& path);

/// Exit codes shared by all subcommands.
enum ExitCode : int {
    kExitOk = 0,
    kExitConfigError = 1,
    kExitDivergence = 2,
    kExitTunerFailure = 3,
};

/// One simulation: metrics CSV, snapshot CSVs, tuning trace, nodes CSV.
int cmd_run(const ExperimentConfig& cfg, const std::string& out_dir, std::ostream& log);

/// Tune c_opt for the configured problem at t = 0; writes tune.json and
/// tune_trace.csv.
int cmd_tune(const ExperimentConfig& cfg, const std::string& out_dir, std::ostream& log);

/// Dense spectra (scaled by h unless spectrum_scale is set): one CSV per
/// requested PHS order (pure advection operator) or c value (stabilised).
int cmd_spectrum(const ExperimentConfig& cfg, const std::string& out_dir, std::ostream& log);

/// Cartesian sweep over the configured axes; one output row per grid point,
/// failures recorded per row. Adds group-wise fitted orders when an h or dt
/// axis is present.
int cmd_sweep(const ExperimentConfig& cfg, const std::string& out_dir, std::ostream& log);

} // namespace rbffd

#endif
