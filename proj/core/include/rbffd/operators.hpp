#ifndef RBFFD_OPERATORS_HPP
#define RBFFD_OPERATORS_HPP

#include <cmath>
#include <iosfwd>
#include <span>

#include <Eigen/Sparse>

#include "rbffd/geometry.hpp"
#include "rbffd/local_approx.hpp"

namespace rbffd {

using SparseMatrixRM = Eigen::SparseMatrix<double, Eigen::RowMajor>;

/// Global N x N differentiation matrix; row i carries the RBF-FD weights of
/// node i at its stencil columns. Combined operators (sums) keep the spec of
/// the advection part and the union sparsity pattern.
struct SparseOperator {
    SparseMatrixRM matrix;
    OperatorSpec spec;

    int dimension() const { return static_cast<int>(matrix.rows()); }

    /// Coordinate-format text `row,col,value`, sorted by (row, col), values
    /// as shortest round-trip decimals.
    void write_coo(std::ostream& os) const;
};

/// gamma = c * h^(2 alpha), applied with sign (-1)^(alpha+1).
struct HyperviscosityConfig {
    int alpha = 2;
    double c = 0.0;
    double h = 0.0;

    double gamma() const { return c * std::pow(h, 2 * alpha); }
    double sign() const { return alpha % 2 == 0 ? -1.0 : 1.0; }
};

/// Assemble the operator row by row (parallel, order-deterministic).
/// Singular local systems surface as SingularStencilError with node index.
SparseOperator assemble(const NodeSet& nodes, const StencilTable& stencils,
                        const OperatorSpec& spec);

/// D_hat = -D_adv + (-1)^(alpha+1) * gamma * D_hip.
SparseOperator stabilised_operator(const SparseOperator& d_adv, const SparseOperator& d_hip,
                                   const HyperviscosityConfig& cfg);

/// Replace boundary rows and columns with the identity pattern (1 on the
/// diagonal, 0 elsewhere). Boundary data enters through the right-hand side.
SparseMatrixRM apply_dirichlet(const SparseMatrixRM& matrix, std::span<const int> boundary_ids);
SparseOperator apply_dirichlet(const SparseOperator& op, std::span<const int> boundary_ids);

} // namespace rbffd

#endif
