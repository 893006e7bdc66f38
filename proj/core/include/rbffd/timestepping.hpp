#ifndef RBFFD_TIMESTEPPING_HPP
#define RBFFD_TIMESTEPPING_HPP

#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "rbffd/geometry.hpp"
#include "rbffd/metrics.hpp"
#include "rbffd/operators.hpp"
#include "rbffd/spectral.hpp"
#include "rbffd/tuner.hpp"

namespace rbffd {

/// ||u||_inf above this trips divergence detection and ends the run.
constexpr double kDivergenceThreshold = 1e12;

struct DivergenceError : std::runtime_error {
    double t_blowup = 0.0;
    explicit DivergenceError(double t)
        : std::runtime_error("field diverged (||u||_inf > 1e12)"), t_blowup(t) {}
};

/// Nodal field (one column per solution component) at simulation time t.
struct FieldState {
    Eigen::MatrixXd values;
    double t = 0.0;

    double max_abs() const { return values.size() ? values.cwiseAbs().maxCoeff() : 0.0; }
};

struct StepperConfig {
    double dt = 1e-4;
    double T = 1.0;
    int alpha = 2;

    bool adaptive_c = true; // fixed_c used otherwise
    double fixed_c = 0.0;
    TunerConfig tuner;
    int chi = 10; // retune period in steps (Burgers)

    std::vector<double> snapshot_times;

    int k_adv = 3, m_adv = 2, n_adv = 12;
    int k_hyp = 0, m_hyp = 2, n_hyp = 30; // k_hyp 0 -> 2*alpha + 1

    void validate() const;
    OperatorSpec advection_spec(OperatorKind kind) const;
    OperatorSpec hyperviscosity_spec() const;
};

enum class RunStatus { Ok, Diverged, TunerFailed };

struct Snapshot {
    double t = 0.0;
    Eigen::MatrixXd values;
};

struct RunResult {
    RunStatus status = RunStatus::Ok;
    double blowup_time = 0.0; // valid when status == Diverged
    std::vector<MetricsRecord> metrics;
    std::vector<Snapshot> snapshots;
    std::vector<TuneResult> tunings;
    std::vector<std::string> warnings;
    double final_c = 0.0;
};

/// One backward-Euler step u(t+dt) = map.apply(rhs) where rhs is u(t) with
/// Dirichlet data injected when boundary_values is given.
FieldState step_linear(const EvolutionMap& map, const FieldState& state,
                       const Eigen::VectorXd* boundary_values = nullptr);

/// C-infinity bump of radius R at the domain centre; normalised scales the
/// peak to 1 (the raw formula peaks at exp(-100.01) for R = 0.1).
double bump_ic(const Point2& x, double R = 0.1, bool normalise = true,
               Metric metric = Metric::PeriodicTorus);

/// Closed-form travelling-front solution of the viscid Burgers system.
Eigen::Vector2d exact_burgers(const Point2& x, double t, double Re);

/// Linear advection du/dt + beta . grad u = hyperviscosity on the torus.
/// The operator is time-independent: c is tuned once at t = 0 when adaptive.
RunResult run_advection(const NodeSet& nodes, const Eigen::Vector2d& beta,
                        const StepperConfig& cfg);

/// Viscid Burgers on the unit square, linearised with the previous-step
/// velocity; Dirichlet data from the closed form; c retuned every chi steps.
RunResult run_burgers(const NodeSet& nodes, double Re, const StepperConfig& cfg);

/// Exact advected bump: u0(x - beta*t) under the periodic metric.
Eigen::VectorXd advected_bump(const NodeSet& nodes, const Eigen::Vector2d& beta, double t);

/// Closed-form Burgers field sampled at all nodes (2 columns).
Eigen::MatrixXd exact_burgers_field(const NodeSet& nodes, double t, double Re);

} // namespace rbffd

#endif
