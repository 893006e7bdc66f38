#include "rbffd/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <stdexcept>

#include "rbffd/csv.hpp"

namespace rbffd {

double relative_l2_error(const Eigen::VectorXd& u_h, const Eigen::VectorXd& u) {
    if (u_h.size() != u.size())
        throw std::invalid_argument("relative_l2_error: length mismatch");
    const double ref = u.norm();
    if (!(ref > 0.0)) throw std::invalid_argument("relative_l2_error: zero reference norm");
    return (u - u_h).norm() / ref;
}

double relative_energy(const Eigen::VectorXd& u_h, const Eigen::VectorXd& u) {
    if (u_h.size() != u.size())
        throw std::invalid_argument("relative_energy: length mismatch");
    const double ref = u.squaredNorm();
    if (!(ref > 0.0)) throw std::invalid_argument("relative_energy: zero reference norm");
    return u_h.squaredNorm() / ref;
}

namespace {

struct LineFit {
    double k = 0.0;
    double log_a = 0.0;
    double sse = 0.0;
};

// Closed-form least squares of log(e - d) over log(s).
LineFit fit_line(std::span<const std::pair<double, double>> samples, double d) {
    const int n = static_cast<int>(samples.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (const auto& [s, e] : samples) {
        const double x = std::log(s);
        const double y = std::log(e - d);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    const double det = n * sxx - sx * sx;
    LineFit fit;
    fit.k = (n * sxy - sx * sy) / det;
    fit.log_a = (sy - fit.k * sx) / n;
    for (const auto& [s, e] : samples) {
        const double r = std::log(e - d) - (fit.log_a + fit.k * std::log(s));
        fit.sse += r * r;
    }
    return fit;
}

} // namespace

FitResult fit_order(std::span<const std::pair<double, double>> samples, FitModel) {
    if (samples.size() < 3) throw std::invalid_argument("fit_order: need at least 3 samples");
    double emin = samples[0].second;
    double emax = samples[0].second;
    for (const auto& [s, e] : samples) {
        if (!(s > 0.0)) throw std::invalid_argument("fit_order: scales must be positive");
        if (!(e > 0.0)) throw std::invalid_argument("fit_order: errors must be positive");
        emin = std::min(emin, e);
        emax = std::max(emax, e);
    }
    if (emax - emin <= 1e-15 * emax)
        throw std::invalid_argument("fit_order: degenerate samples (all errors equal)");

    // Outer search over the plateau offset: coarse grid, then golden-section
    // refinement around the best cell. d is capped strictly below the
    // smallest error so the log stays finite.
    const double dmax = emin * (1.0 - 1e-9);
    const int grid = 64;
    double best_d = 0.0;
    double best_sse = fit_line(samples, 0.0).sse;
    for (int i = 1; i <= grid; ++i) {
        const double d = dmax * i / grid;
        const double sse = fit_line(samples, d).sse;
        if (sse < best_sse) {
            best_sse = sse;
            best_d = d;
        }
    }
    double lo = std::max(0.0, best_d - dmax / grid);
    double hi = std::min(dmax, best_d + dmax / grid);
    const double phi = 0.5 * (std::sqrt(5.0) - 1.0);
    double x1 = hi - phi * (hi - lo);
    double x2 = lo + phi * (hi - lo);
    double f1 = fit_line(samples, x1).sse;
    double f2 = fit_line(samples, x2).sse;
    for (int it = 0; it < 80 && hi - lo > 1e-14 * std::max(1.0, dmax); ++it) {
        if (f1 <= f2) {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - phi * (hi - lo);
            f1 = fit_line(samples, x1).sse;
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + phi * (hi - lo);
            f2 = fit_line(samples, x2).sse;
        }
    }
    const double d_refined = 0.5 * (lo + hi);
    if (fit_line(samples, d_refined).sse < best_sse) best_d = d_refined;

    const LineFit fit = fit_line(samples, best_d);
    return {fit.k, best_d};
}

void write_metrics_csv(std::ostream& os, std::span<const MetricsRecord> records) {
    os << "t,rel_error,rel_energy,c,rho\n";
    for (const auto& r : records) {
        os << format_double(r.t) << ',' << format_double(r.rel_error) << ','
           << format_double(r.rel_energy) << ',';
        if (r.c_current) os << format_double(*r.c_current);
        os << ',';
        if (r.rho_at_tune) os << format_double(*r.rho_at_tune);
        os << '\n';
    }
}

} // namespace rbffd
