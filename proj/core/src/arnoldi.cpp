#include "rbffd/arnoldi.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>

namespace rbffd {

namespace {

using Complex = std::complex<double>;

// Swap the diagonal entries T(i,i) and T(i+1,i+1) of an upper-triangular T by
// a unitary similarity, accumulated into Q. The rotation's first column is the
// (normalised) eigenvector [b, c-a] of the 2x2 block for the trailing value.
void swap_schur_pair(Eigen::MatrixXcd& t, Eigen::MatrixXcd& q, int i) {
    const Complex a = t(i, i);
    const Complex b = t(i, i + 1);
    const Complex c = t(i + 1, i + 1);
    const double norm = std::hypot(std::abs(b), std::abs(c - a));
    if (norm <= std::numeric_limits<double>::min()) return; // equal values, nothing to order
    Eigen::Matrix2cd g;
    g << b / norm, -std::conj((c - a) / norm),
         (c - a) / norm, std::conj(b / norm);
    t.middleCols(i, 2) = (t.middleCols(i, 2) * g).eval();
    t.middleRows(i, 2) = (g.adjoint() * t.middleRows(i, 2)).eval();
    t(i + 1, i) = 0.0;
    q.middleCols(i, 2) = (q.middleCols(i, 2) * g).eval();
}

// Stable insertion sort of the Schur form by descending eigenvalue magnitude.
void sort_schur_descending(Eigen::MatrixXcd& t, Eigen::MatrixXcd& q) {
    const int m = static_cast<int>(t.rows());
    for (int i = 1; i < m; ++i) {
        int j = i;
        while (j > 0 && std::abs(t(j, j)) > std::abs(t(j - 1, j - 1)) +
                            1e-14 * std::abs(t(j, j))) {
            swap_schur_pair(t, q, j - 1);
            --j;
        }
    }
}

} // namespace

ArnoldiResult arnoldi_largest(
    const std::function<Eigen::VectorXcd(const Eigen::VectorXcd&)>& apply,
    int n, const ArnoldiOptions& opts) {
    if (n < 2) throw std::invalid_argument("arnoldi_largest: need n >= 2");
    const int wanted = std::min(opts.num_eigs, n - 1);
    int m = opts.subspace > 0 ? opts.subspace : 2 * opts.num_eigs + 1;
    m = std::min(m, n);
    m = std::max(m, std::min(wanted + 2, n));

    Eigen::MatrixXcd basis = Eigen::MatrixXcd::Zero(n, m + 1);
    Eigen::MatrixXcd hess = Eigen::MatrixXcd::Zero(m + 1, m);

    Eigen::VectorXcd v0;
    if (opts.start_vector) {
        v0 = opts.start_vector(n);
    } else {
        std::mt19937_64 rng(opts.seed);
        v0.resize(n);
        for (int i = 0; i < n; ++i)
            v0(i) = Complex(2.0 * (static_cast<double>(rng() >> 11) * 0x1.0p-53) - 1.0, 0.0);
    }
    basis.col(0) = v0 / v0.norm();

    ArnoldiResult result;
    int locked = 0;
    double hscale = 0.0;
    std::vector<double> rho_history;

    for (int cycle = 0;; ++cycle) {
        // Expand the Arnoldi factorisation from column `locked` up to m.
        int m_eff = m;
        bool invariant = false;
        for (int j = locked; j < m; ++j) {
            Eigen::VectorXcd w = apply(basis.col(j));
            // two-pass classical Gram-Schmidt
            Eigen::VectorXcd h1 = basis.leftCols(j + 1).adjoint() * w;
            w.noalias() -= basis.leftCols(j + 1) * h1;
            Eigen::VectorXcd h2 = basis.leftCols(j + 1).adjoint() * w;
            w.noalias() -= basis.leftCols(j + 1) * h2;
            h1 += h2;
            hess.col(j).head(j + 1) = h1;
            const double beta = w.norm();
            hess(j + 1, j) = beta;
            hscale = std::max({hscale, h1.cwiseAbs().maxCoeff(), beta});
            if (beta <= 1e-14 * std::max(hscale, 1.0)) {
                m_eff = j + 1;
                invariant = true;
                break;
            }
            basis.col(j + 1) = w / beta;
        }

        Eigen::MatrixXcd hm = hess.topLeftCorner(m_eff, m_eff);
        const double beta_m = invariant ? 0.0 : std::abs(hess(m_eff, m_eff - 1));

        Eigen::ComplexSchur<Eigen::MatrixXcd> schur(hm, /*computeU=*/true);
        if (schur.info() != Eigen::Success)
            throw std::runtime_error("arnoldi_largest: Schur decomposition failed");
        Eigen::MatrixXcd t = schur.matrixT();
        Eigen::MatrixXcd q = schur.matrixU();
        sort_schur_descending(t, q);

        const int k = std::min(wanted, m_eff);
        result.ritz.resize(k);
        result.residuals.resize(k);
        int nconv = 0;
        const double floor = std::numeric_limits<double>::epsilon() * std::max(hscale, 1.0);
        for (int i = 0; i < k; ++i) {
            result.ritz[i] = t(i, i);
            result.residuals[i] = beta_m * std::abs(q(m_eff - 1, i));
            if (result.residuals[i] <= opts.tol * std::max(std::abs(t(i, i)), floor)) ++nconv;
        }
        result.restarts = cycle;
        result.converged = nconv == k;
        result.by_stagnation = false;

        const double rho_now = std::abs(t(0, 0));
        if (!result.converged && !invariant &&
            static_cast<int>(rho_history.size()) >= opts.stall_window &&
            result.residuals[0] <= opts.stall_gate * std::max(rho_now, floor)) {
            bool flat = true;
            for (int w = 1; w <= opts.stall_window; ++w) {
                const double past = rho_history[rho_history.size() - w];
                if (std::abs(past - rho_now) > opts.stall_tol * std::max(1.0, rho_now))
                    flat = false;
            }
            if (flat) {
                result.converged = true;
                result.by_stagnation = true;
            }
        }
        rho_history.push_back(rho_now);

        if (invariant || result.converged || cycle >= opts.max_restarts) return result;

        // Thick restart: keep the leading Schur block plus the residual vector.
        const int keep = std::min(std::max(k, nconv + (m_eff - k) / 2), m_eff - 1);
        basis.leftCols(keep) = (basis.leftCols(m_eff) * q.leftCols(keep)).eval();
        basis.col(keep) = basis.col(m_eff);
        hess.setZero();
        hess.topLeftCorner(keep, keep) = t.topLeftCorner(keep, keep);
        hess.row(keep).head(keep) = beta_m * q.row(m_eff - 1).head(keep);
        locked = keep;
    }
}

} // namespace rbffd
