#ifndef RBFFD_SPECTRAL_HPP
#define RBFFD_SPECTRAL_HPP

#include <complex>
#include <iosfwd>
#include <memory>
#include <span>
#include <vector>

#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include "rbffd/arnoldi.hpp"
#include "rbffd/operators.hpp"

namespace rbffd {

/// rho(G) <= 1 + 1e-12; the strict and non-strict conditions are equivalent
/// under round-off, the slack avoids flapping at the boundary.
constexpr double kStabilityTolerance = 1e-12;

inline bool is_stable_rho(double rho) { return rho <= 1.0 + kStabilityTolerance; }

struct FactorizationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Exactly-known neutral directions of an evolution map. Round-off on these
/// modes otherwise drowns the rho <= 1 + 1e-12 test: they are projected out
/// of the eigenvalue iteration and their unit eigenvalue re-inserted
/// analytically.
enum class Deflation {
    None,
    ConstantField,  // operators annihilate constants (periodic transport)
    DirichletRows,  // identity rows/columns hold boundary values
};

/// Implicit-Euler evolution map G = (I - dt*D_hat)^-1, exposed as
/// apply-by-solve on a sparse LU factorisation computed once. Dirichlet rows
/// and columns of the system are the identity; the retained boundary-column
/// coupling block lets callers inject boundary data through the RHS.
class EvolutionMap {
public:
    EvolutionMap(SparseMatrixRM system, double dt, std::vector<int> boundary_ids,
                 Deflation deflation = Deflation::None);

    /// Solve (I - dt*D_hat) x = v; refined until the residual is <= 1e-11*|v|.
    Eigen::VectorXd apply(const Eigen::VectorXd& v) const;

    /// P G P with P the projector onto the complement of the deflated modes.
    Eigen::VectorXd apply_deflated(const Eigen::VectorXd& v) const;
    Deflation deflation() const { return deflation_; }
    /// Project away the deflated directions.
    void project(Eigen::VectorXd& v) const;

    /// RHS for a Dirichlet step: interior entries get the eliminated-column
    /// correction -C*g, boundary entries are replaced by g.
    Eigen::VectorXd inject_boundary(const Eigen::VectorXd& rhs,
                                    const Eigen::VectorXd& boundary_values) const;

    int size() const { return n_; }
    double dt() const { return dt_; }
    const std::vector<int>& boundary_ids() const { return boundary_; }
    const Eigen::SparseMatrix<double>& system() const { return system_; }

private:
    int n_ = 0;
    double dt_ = 0.0;
    std::vector<int> boundary_;
    Deflation deflation_ = Deflation::None;
    Eigen::SparseMatrix<double> system_;   // after Dirichlet replacement
    Eigen::SparseMatrix<double> coupling_; // N x N, boundary columns of the pre-replacement system
    std::shared_ptr<Eigen::SparseLU<Eigen::SparseMatrix<double>>> lu_;
};

/// S = I - dt*D_hat with Dirichlet rows/columns replaced by the identity.
/// A non-empty boundary always deflates the Dirichlet rows; pass
/// Deflation::ConstantField for boundary-free operators that annihilate
/// constants. Throws FactorizationError when the sparse LU fails.
EvolutionMap build_evolution(const SparseOperator& d_hat, double dt,
                             std::span<const int> boundary_ids,
                             Deflation deflation = Deflation::None);

struct StabilityReport {
    double rho = 0.0;
    std::vector<std::complex<double>> leading_eigs; // descending magnitude
    bool converged = false;
    int iterations = 0;

    bool stable() const { return is_stable_rho(rho); }
};

enum class EigMethod {
    Auto,    // dense for N <= 1000, Arnoldi above
    Arnoldi,
    Dense,
};

/// Spectral radius of the evolution map via restarted Arnoldi on the
/// apply-by-solve operator (or a dense eigendecomposition for small systems).
StabilityReport spectral_radius(const EvolutionMap& map, int num_eigs = 40,
                                EigMethod method = EigMethod::Auto,
                                const ArnoldiOptions& opts = {});

/// All eigenvalues (dense path, N <= 5000), each multiplied by `scale`.
std::vector<std::complex<double>> dump_spectrum(const SparseOperator& op, double scale);
std::vector<std::complex<double>> dump_spectrum(const EvolutionMap& map, double scale);

/// CSV with header `re,im`.
void write_spectrum_csv(std::ostream& os, const std::vector<std::complex<double>>& eigs);

} // namespace rbffd

#endif
