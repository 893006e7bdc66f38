#ifndef RBFFD_LOCAL_APPROX_HPP
#define RBFFD_LOCAL_APPROX_HPP

#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "rbffd/geometry.hpp"

namespace rbffd {

enum class OperatorKind { PartialX, PartialY, Laplacian, Hyperviscosity };

/// Recipe for one differential-operator approximation: polyharmonic spline
/// exponent k (odd), monomial augmentation degree m, stencil size n, and for
/// the hyperviscosity kind the Laplacian power alpha.
struct OperatorSpec {
    OperatorKind kind = OperatorKind::PartialX;
    int k = 3;
    int m = 2;
    int n = 12;
    int alpha = 0; // hyperviscosity only

    /// Differential order of the operator (1 gradients, 2 Laplacian, 2*alpha
    /// hyperviscosity); drives the h-scaling of computed weights.
    int order() const;
    /// Monomial count q = C(m+2, 2).
    int monomial_count() const { return (m + 1) * (m + 2) / 2; }
    void validate() const;

    static OperatorSpec partial_x(int k = 3, int m = 2, int n = 12);
    static OperatorSpec partial_y(int k = 3, int m = 2, int n = 12);
    static OperatorSpec laplacian(int k = 3, int m = 2, int n = 12);
    static OperatorSpec hyperviscosity(int alpha, int m = 2, int n = 30, int k = 0);
};

struct PhsDeriv {
    enum Kind { Value, LaplacianPower } kind = Value;
    int alpha = 0;
};

/// phi(r) = r^k and its iterated 2D Laplacians:
/// Delta^a r^k = prod_{j<a} (k-2j)^2 * r^(k-2a).
double phs_eval(double r, int k, PhsDeriv deriv = {});

/// 2D exponent pairs (a, b), a+b <= m, graded-lexicographic.
std::vector<std::array<int, 2>> monomial_basis(int m);

/// Exact derivative of x^a y^b under the operator, evaluated at the point.
double monomial_apply(const std::array<int, 2>& exponents, const OperatorSpec& spec,
                      const Point2& point);

struct SingularStencilError : std::runtime_error {
    int node = -1;
    explicit SingularStencilError(int node_, const std::string& what)
        : std::runtime_error(what), node(node_) {}
};

/// Augmented local collocation system in shifted/scaled coordinates, kept
/// around for diagnostics and the saddle-residual checks. weights/multipliers
/// solve the stored (scaled) system; physical weights are the scaled ones
/// times h^-order.
struct LocalSystem {
    Eigen::MatrixXd saddle;   // [[A, P], [P^T, 0]], (n+q) x (n+q)
    Eigen::VectorXd rhs;      // evaluated operator, length n+q
    Eigen::VectorXd weights;  // length n, solution in scaled coordinates
    Eigen::VectorXd multipliers; // length q
};

/// RBF-FD weights for one node: solve the augmented interpolation system with
/// the operator applied to the basis as right-hand side. Stencil coordinates
/// are shifted to the centre and scaled by h before assembly; the returned
/// weights are rescaled by h^-order back to physical units.
Eigen::VectorXd compute_weights(const NodeSet& nodes, std::span<const int> stencil,
                                int center, const OperatorSpec& spec);

/// Same, but returns the full local system.
LocalSystem compute_local_system(const NodeSet& nodes, std::span<const int> stencil,
                                 int center, const OperatorSpec& spec);

} // namespace rbffd

#endif
