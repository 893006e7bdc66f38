#ifndef RBFFD_METRICS_HPP
#define RBFFD_METRICS_HPP

#include <iosfwd>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace rbffd {

struct MetricsRecord {
    double t = 0.0;
    double rel_error = 0.0;
    double rel_energy = 0.0;
    std::optional<double> rho_at_tune;
    std::optional<double> c_current;
};

/// ||u - u_h||_2 / ||u||_2 on nodal values (the |Omega|/N weight cancels).
double relative_l2_error(const Eigen::VectorXd& u_h, const Eigen::VectorXd& u);

/// sum(u_h^2) / sum(u^2).
double relative_energy(const Eigen::VectorXd& u_h, const Eigen::VectorXd& u);

enum class FitModel { HPower, DtPower };

struct FitResult {
    double k = 0.0; // fitted order
    double d = 0.0; // plateau offset
};

/// Least-squares fit of error ~ a*scale^k + d in log-error space: inner
/// closed-form line fit of log(error - d) against log(scale), outer 1D
/// search over the plateau d >= 0. Needs >= 3 samples with positive scales
/// and errors; throws on degenerate (all-equal) samples.
FitResult fit_order(std::span<const std::pair<double, double>> samples, FitModel model);

/// CSV with header `t,rel_error,rel_energy,c,rho`; absent optionals print
/// as empty fields.
void write_metrics_csv(std::ostream& os, std::span<const MetricsRecord> records);

} // namespace rbffd

#endif
