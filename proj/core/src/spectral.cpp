#include "rbffd/spectral.hpp"

#include <algorithm>
#include <ostream>
#include <random>

#include <Eigen/Eigenvalues>

#include "rbffd/csv.hpp"

namespace rbffd {

namespace {

constexpr int kDenseAutoLimit = 1000;
constexpr int kDenseSpectrumLimit = 5000;

std::vector<std::complex<double>> sorted_descending(Eigen::VectorXcd vals) {
    std::vector<std::complex<double>> out(vals.data(), vals.data() + vals.size());
    std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
        return std::abs(a) > std::abs(b);
    });
    return out;
}

} // namespace

EvolutionMap::EvolutionMap(SparseMatrixRM system, double dt, std::vector<int> boundary_ids,
                           Deflation deflation)
    : n_(static_cast<int>(system.rows())), dt_(dt), boundary_(std::move(boundary_ids)),
      deflation_(boundary_.empty() ? deflation : Deflation::DirichletRows) {
    // Keep the boundary columns (interior rows only) before the identity
    // replacement; they carry the eliminated Dirichlet coupling.
    std::vector<char> is_boundary(n_, 0);
    for (int b : boundary_) is_boundary[b] = 1;
    std::vector<Eigen::Triplet<double>> ctrips;
    if (!boundary_.empty()) {
        for (int i = 0; i < system.outerSize(); ++i) {
            for (SparseMatrixRM::InnerIterator it(system, i); it; ++it) {
                if (!is_boundary[it.row()] && is_boundary[it.col()])
                    ctrips.emplace_back(it.row(), it.col(), it.value());
            }
        }
    }
    coupling_.resize(n_, n_);
    coupling_.setFromTriplets(ctrips.begin(), ctrips.end());

    system_ = apply_dirichlet(system, boundary_); // column-major copy below
    lu_ = std::make_shared<Eigen::SparseLU<Eigen::SparseMatrix<double>>>();
    lu_->compute(system_);
    if (lu_->info() != Eigen::Success) {
        throw FactorizationError("evolution map: sparse LU failed (dt=" + format_double(dt_) +
                                 ", N=" + std::to_string(n_) +
                                 ", nnz=" + std::to_string(system_.nonZeros()) + ")");
    }
}

Eigen::VectorXd EvolutionMap::apply(const Eigen::VectorXd& v) const {
    Eigen::VectorXd x = lu_->solve(v);
    const double vn = v.lpNorm<Eigen::Infinity>();
    for (int pass = 0; pass < 2; ++pass) {
        Eigen::VectorXd r = v - system_ * x;
        if (r.lpNorm<Eigen::Infinity>() <= 1e-11 * vn) break;
        x += lu_->solve(r);
    }
    return x;
}

void EvolutionMap::project(Eigen::VectorXd& v) const {
    switch (deflation_) {
        case Deflation::None:
            break;
        case Deflation::ConstantField:
            v.array() -= v.mean();
            break;
        case Deflation::DirichletRows:
            for (int b : boundary_) v(b) = 0.0;
            break;
    }
}

Eigen::VectorXd EvolutionMap::apply_deflated(const Eigen::VectorXd& v) const {
    if (deflation_ == Deflation::None) return apply(v);
    Eigen::VectorXd in = v;
    project(in);
    Eigen::VectorXd out = apply(in);
    project(out);
    return out;
}

Eigen::VectorXd EvolutionMap::inject_boundary(const Eigen::VectorXd& rhs,
                                              const Eigen::VectorXd& boundary_values) const {
    Eigen::VectorXd g = Eigen::VectorXd::Zero(n_);
    for (int b : boundary_) g(b) = boundary_values(b);
    Eigen::VectorXd out = rhs - coupling_ * g;
    for (int b : boundary_) out(b) = boundary_values(b);
    return out;
}

EvolutionMap build_evolution(const SparseOperator& d_hat, double dt,
                             std::span<const int> boundary_ids, Deflation deflation) {
    if (!(dt > 0.0)) throw std::invalid_argument("build_evolution: dt must be positive");
    const int N = d_hat.dimension();
    SparseMatrixRM identity(N, N);
    identity.setIdentity();
    SparseMatrixRM system = (identity - dt * d_hat.matrix).eval();
    return EvolutionMap(std::move(system), dt,
                        std::vector<int>(boundary_ids.begin(), boundary_ids.end()), deflation);
}

StabilityReport spectral_radius(const EvolutionMap& map, int num_eigs, EigMethod method,
                                const ArnoldiOptions& opts) {
    const int N = map.size();
    if (N < 2) throw std::invalid_argument("spectral_radius: need N >= 2");
    if (method == EigMethod::Auto)
        method = N <= kDenseAutoLimit ? EigMethod::Dense : EigMethod::Arnoldi;

    const Deflation defl = map.deflation();
    StabilityReport report;
    if (method == EigMethod::Dense) {
        Eigen::MatrixXd g(N, N);
        Eigen::VectorXd e = Eigen::VectorXd::Zero(N);
        const bool project = defl == Deflation::ConstantField;
        for (int j = 0; j < N; ++j) {
            e(j) = 1.0;
            g.col(j) = project ? map.apply_deflated(e) : map.apply(e);
            e(j) = 0.0;
        }
        Eigen::EigenSolver<Eigen::MatrixXd> eig(g, /*computeEigenvectors=*/false);
        if (eig.info() != Eigen::Success)
            throw std::runtime_error("spectral_radius: dense eigendecomposition failed");
        auto all = sorted_descending(eig.eigenvalues());
        if (project) all.insert(all.begin(), {1.0, 0.0}); // exact neutral mode
        std::sort(all.begin(), all.end(),
                  [](const auto& a, const auto& b) { return std::abs(a) > std::abs(b); });
        const int keep = std::min<int>(num_eigs, static_cast<int>(all.size()));
        report.leading_eigs.assign(all.begin(), all.begin() + keep);
        report.rho = std::abs(all.front());
        report.converged = true;
        report.iterations = 0;
        return report;
    }

    ArnoldiOptions o = opts;
    o.num_eigs = num_eigs;
    if (defl != Deflation::None && !o.start_vector) {
        const std::uint64_t seed = o.seed;
        o.start_vector = [&map, seed](int n) {
            std::mt19937_64 rng(seed);
            Eigen::VectorXd v(n);
            for (int i = 0; i < n; ++i)
                v(i) = 2.0 * (static_cast<double>(rng() >> 11) * 0x1.0p-53) - 1.0;
            map.project(v);
            return Eigen::VectorXcd(v.cast<std::complex<double>>());
        };
    }
    auto result = arnoldi_largest(
        [&map](const Eigen::VectorXcd& v) {
            Eigen::VectorXcd out(v.size());
            out.real() = map.apply_deflated(v.real());
            out.imag() = map.apply_deflated(v.imag());
            return out;
        },
        N, o);
    report.leading_eigs = result.ritz;
    if (defl != Deflation::None) {
        // the deflated neutral eigenvalue is known exactly
        report.leading_eigs.insert(report.leading_eigs.begin(), {1.0, 0.0});
        std::sort(report.leading_eigs.begin(), report.leading_eigs.end(),
                  [](const auto& a, const auto& b) { return std::abs(a) > std::abs(b); });
        if (static_cast<int>(report.leading_eigs.size()) > num_eigs)
            report.leading_eigs.resize(num_eigs);
    }
    report.rho = 0.0;
    for (const auto& z : report.leading_eigs) report.rho = std::max(report.rho, std::abs(z));
    report.converged = result.converged;
    report.iterations = result.restarts;
    return report;
}

std::vector<std::complex<double>> dump_spectrum(const SparseOperator& op, double scale) {
    const int N = op.dimension();
    if (N > kDenseSpectrumLimit)
        throw std::invalid_argument("dump_spectrum: N exceeds the dense-path limit");
    Eigen::MatrixXd dense = Eigen::MatrixXd(op.matrix);
    Eigen::EigenSolver<Eigen::MatrixXd> eig(dense, false);
    if (eig.info() != Eigen::Success)
        throw std::runtime_error("dump_spectrum: eigendecomposition failed");
    auto out = sorted_descending(eig.eigenvalues());
    for (auto& z : out) z *= scale;
    return out;
}

std::vector<std::complex<double>> dump_spectrum(const EvolutionMap& map, double scale) {
    const int N = map.size();
    if (N > kDenseSpectrumLimit)
        throw std::invalid_argument("dump_spectrum: N exceeds the dense-path limit");
    Eigen::MatrixXd g(N, N);
    Eigen::VectorXd e = Eigen::VectorXd::Zero(N);
    for (int j = 0; j < N; ++j) {
        e(j) = 1.0;
        g.col(j) = map.apply(e);
        e(j) = 0.0;
    }
    Eigen::EigenSolver<Eigen::MatrixXd> eig(g, false);
    if (eig.info() != Eigen::Success)
        throw std::runtime_error("dump_spectrum: eigendecomposition failed");
    auto out = sorted_descending(eig.eigenvalues());
    for (auto& z : out) z *= scale;
    return out;
}

void write_spectrum_csv(std::ostream& os, const std::vector<std::complex<double>>& eigs) {
    os << "re,im\n";
    for (const auto& z : eigs) os << format_complex_csv(z.real(), z.imag()) << '\n';
}

} // namespace rbffd
