#include "rbffd/local_approx.hpp"

#include <cmath>

namespace rbffd {

namespace {

double ipow(double x, int e) {
    double r = 1.0;
    for (int i = 0; i < e; ++i) r *= x;
    return r;
}

// Sparse polynomial in two variables, used to push Laplacians through x^a y^b.
struct PolyTerm {
    double coef;
    int a, b;
};

std::vector<PolyTerm> laplacian_of(const std::vector<PolyTerm>& p) {
    std::vector<PolyTerm> out;
    for (const auto& t : p) {
        if (t.a >= 2) out.push_back({t.coef * t.a * (t.a - 1), t.a - 2, t.b});
        if (t.b >= 2) out.push_back({t.coef * t.b * (t.b - 1), t.a, t.b - 2});
    }
    return out;
}

double eval_poly(const std::vector<PolyTerm>& p, const Point2& x) {
    double s = 0.0;
    for (const auto& t : p) s += t.coef * ipow(x[0], t.a) * ipow(x[1], t.b);
    return s;
}

} // namespace

int OperatorSpec::order() const {
    switch (kind) {
        case OperatorKind::PartialX:
        case OperatorKind::PartialY: return 1;
        case OperatorKind::Laplacian: return 2;
        case OperatorKind::Hyperviscosity: return 2 * alpha;
    }
    return 0;
}

void OperatorSpec::validate() const {
    if (k < 1 || k % 2 == 0)
        throw std::invalid_argument("OperatorSpec: PHS exponent k must be odd and >= 1");
    if (m < 0) throw std::invalid_argument("OperatorSpec: monomial degree m must be >= 0");
    if (kind == OperatorKind::Hyperviscosity) {
        if (alpha < 1) throw std::invalid_argument("OperatorSpec: hyperviscosity needs alpha >= 1");
        if (k < 2 * alpha + 1)
            throw std::invalid_argument("OperatorSpec: hyperviscosity regularity requires k >= 2*alpha + 1");
    }
    if (n < monomial_count())
        throw std::invalid_argument("OperatorSpec: stencil size n below unisolvency floor q");
}

OperatorSpec OperatorSpec::partial_x(int k, int m, int n) {
    return {OperatorKind::PartialX, k, m, n, 0};
}
OperatorSpec OperatorSpec::partial_y(int k, int m, int n) {
    return {OperatorKind::PartialY, k, m, n, 0};
}
OperatorSpec OperatorSpec::laplacian(int k, int m, int n) {
    return {OperatorKind::Laplacian, k, m, n, 0};
}
OperatorSpec OperatorSpec::hyperviscosity(int alpha, int m, int n, int k) {
    if (k == 0) k = 2 * alpha + 1;
    return {OperatorKind::Hyperviscosity, k, m, n, alpha};
}

double phs_eval(double r, int k, PhsDeriv deriv) {
    if (deriv.kind == PhsDeriv::Value || deriv.alpha == 0) return std::pow(r, k);
    double coef = 1.0;
    for (int j = 0; j < deriv.alpha; ++j) {
        const double f = static_cast<double>(k - 2 * j);
        coef *= f * f; // (k-2j)(k-2j+d-2) with d = 2
    }
    const int e = k - 2 * deriv.alpha;
    if (e >= 0) return coef * ipow(r, e);
    return coef * std::pow(r, e);
}

std::vector<std::array<int, 2>> monomial_basis(int m) {
    if (m < 0) throw std::invalid_argument("monomial_basis: m must be >= 0");
    std::vector<std::array<int, 2>> exps;
    exps.reserve(static_cast<std::size_t>((m + 1) * (m + 2) / 2));
    for (int deg = 0; deg <= m; ++deg)
        for (int a = deg; a >= 0; --a) exps.push_back({a, deg - a});
    return exps;
}

double monomial_apply(const std::array<int, 2>& exponents, const OperatorSpec& spec,
                      const Point2& point) {
    const auto [a, b] = exponents;
    switch (spec.kind) {
        case OperatorKind::PartialX:
            return a == 0 ? 0.0 : a * ipow(point[0], a - 1) * ipow(point[1], b);
        case OperatorKind::PartialY:
            return b == 0 ? 0.0 : b * ipow(point[0], a) * ipow(point[1], b - 1);
        case OperatorKind::Laplacian: {
            std::vector<PolyTerm> p{{1.0, a, b}};
            return eval_poly(laplacian_of(p), point);
        }
        case OperatorKind::Hyperviscosity: {
            std::vector<PolyTerm> p{{1.0, a, b}};
            for (int i = 0; i < spec.alpha; ++i) p = laplacian_of(p);
            return eval_poly(p, point);
        }
    }
    return 0.0;
}

namespace {

// L applied to phi(||x - xi_j||), evaluated at the origin; xi_j are scaled
// stencil offsets. Gradient and Laplacian of r^k follow from
// f'(r)/r = k r^(k-2) and Delta r^k = k^2 r^(k-2) in 2D.
double phs_operator_rhs(const Point2& xi, const OperatorSpec& spec) {
    const double r = std::hypot(xi[0], xi[1]);
    switch (spec.kind) {
        case OperatorKind::PartialX:
            return r == 0.0 ? 0.0 : -spec.k * std::pow(r, spec.k - 2) * xi[0];
        case OperatorKind::PartialY:
            return r == 0.0 ? 0.0 : -spec.k * std::pow(r, spec.k - 2) * xi[1];
        case OperatorKind::Laplacian:
            return static_cast<double>(spec.k) * spec.k * std::pow(r, spec.k - 2);
        case OperatorKind::Hyperviscosity:
            return phs_eval(r, spec.k, {PhsDeriv::LaplacianPower, spec.alpha});
    }
    return 0.0;
}

} // namespace

LocalSystem compute_local_system(const NodeSet& nodes, std::span<const int> stencil,
                                 int center, const OperatorSpec& spec) {
    spec.validate();
    const int n = static_cast<int>(stencil.size());
    if (n != spec.n)
        throw std::invalid_argument("compute_weights: stencil length does not match spec.n");
    const int q = spec.monomial_count();
    const double h = nodes.h();

    // Shift to the centre and scale by h; on the torus offsets are wrapped.
    std::vector<Point2> xi(n);
    const Point2& xc = nodes.point(center);
    for (int j = 0; j < n; ++j) {
        const Point2 d = displacement(xc, nodes.point(stencil[j]), nodes.metric());
        xi[j] = {d[0] / h, d[1] / h};
    }

    const auto exps = monomial_basis(spec.m);
    Eigen::MatrixXd S = Eigen::MatrixXd::Zero(n + q, n + q);
    for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) {
            const double r = std::hypot(xi[i][0] - xi[j][0], xi[i][1] - xi[j][1]);
            const double v = phs_eval(r, spec.k);
            S(i, j) = v;
            S(j, i) = v;
        }
    }
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < q; ++j) {
            const double v = ipow(xi[i][0], exps[j][0]) * ipow(xi[i][1], exps[j][1]);
            S(i, n + j) = v;
            S(n + j, i) = v;
        }
    }

    Eigen::VectorXd rhs(n + q);
    for (int j = 0; j < n; ++j) rhs(j) = phs_operator_rhs(xi[j], spec);
    for (int j = 0; j < q; ++j) rhs(n + j) = monomial_apply(exps[j], spec, {0.0, 0.0});

    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(S);
    const Eigen::VectorXd rdiag = qr.matrixR().diagonal().cwiseAbs();
    const double pivot_max = rdiag.maxCoeff();
    const double pivot_min = rdiag.minCoeff();
    if (!(pivot_max > 0.0) || pivot_min < 1e-12 * pivot_max)
        throw SingularStencilError(center,
            "singular local interpolation system at node " + std::to_string(center));

    LocalSystem sys;
    sys.saddle = std::move(S);
    sys.rhs = std::move(rhs);
    const Eigen::VectorXd sol = qr.solve(sys.rhs);
    sys.weights = sol.head(n);
    sys.multipliers = sol.tail(q);
    return sys;
}

Eigen::VectorXd compute_weights(const NodeSet& nodes, std::span<const int> stencil,
                                int center, const OperatorSpec& spec) {
    LocalSystem sys = compute_local_system(nodes, stencil, center, spec);
    const double scale = std::pow(nodes.h(), -spec.order());
    return sys.weights * scale;
}

} // namespace rbffd
