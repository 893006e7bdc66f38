#include "rbffd/operators.hpp"

#include <ostream>
#include <vector>

#include "rbffd/csv.hpp"
#include "rbffd/parallel.hpp"

namespace rbffd {

void SparseOperator::write_coo(std::ostream& os) const {
    for (int i = 0; i < matrix.outerSize(); ++i) {
        for (SparseMatrixRM::InnerIterator it(matrix, i); it; ++it) {
            os << it.row() << ',' << it.col() << ',' << format_double(it.value()) << '\n';
        }
    }
}

SparseOperator assemble(const NodeSet& nodes, const StencilTable& stencils,
                        const OperatorSpec& spec) {
    spec.validate();
    if (stencils.n != spec.n)
        throw std::invalid_argument("assemble: stencil table size does not match spec.n");
    const int N = nodes.size();

    std::vector<Eigen::VectorXd> rows(N);
    parallel_for(0, N, [&](int i) {
        rows[i] = compute_weights(nodes, stencils.stencil(i), i, spec);
    });

    std::vector<Eigen::Triplet<double>> trips;
    trips.reserve(static_cast<std::size_t>(N) * spec.n);
    for (int i = 0; i < N; ++i) {
        const auto& st = stencils.stencil(i);
        for (int j = 0; j < spec.n; ++j) trips.emplace_back(i, st[j], rows[i](j));
    }
    SparseOperator op;
    op.spec = spec;
    op.matrix.resize(N, N);
    op.matrix.setFromTriplets(trips.begin(), trips.end());
    op.matrix.makeCompressed();
    return op;
}

SparseOperator stabilised_operator(const SparseOperator& d_adv, const SparseOperator& d_hip,
                                   const HyperviscosityConfig& cfg) {
    if (d_adv.dimension() != d_hip.dimension())
        throw std::invalid_argument("stabilised_operator: dimension mismatch");
    if (cfg.c < 0.0)
        throw std::invalid_argument("stabilised_operator: hyperviscosity constant c must be >= 0");
    SparseOperator out;
    out.spec = d_adv.spec;
    out.matrix = (-d_adv.matrix + cfg.sign() * cfg.gamma() * d_hip.matrix).eval();
    out.matrix.makeCompressed();
    return out;
}

SparseMatrixRM apply_dirichlet(const SparseMatrixRM& matrix, std::span<const int> boundary_ids) {
    const int N = static_cast<int>(matrix.rows());
    std::vector<char> is_boundary(N, 0);
    for (int b : boundary_ids) {
        if (b < 0 || b >= N) throw std::invalid_argument("apply_dirichlet: boundary id out of range");
        is_boundary[b] = 1;
    }
    std::vector<Eigen::Triplet<double>> trips;
    trips.reserve(static_cast<std::size_t>(matrix.nonZeros()));
    for (int i = 0; i < matrix.outerSize(); ++i) {
        for (SparseMatrixRM::InnerIterator it(matrix, i); it; ++it) {
            if (is_boundary[it.row()] || is_boundary[it.col()]) continue;
            trips.emplace_back(it.row(), it.col(), it.value());
        }
    }
    for (int b : boundary_ids) trips.emplace_back(b, b, 1.0);
    SparseMatrixRM out(N, N);
    out.setFromTriplets(trips.begin(), trips.end());
    out.makeCompressed();
    return out;
}

SparseOperator apply_dirichlet(const SparseOperator& op, std::span<const int> boundary_ids) {
    SparseOperator out;
    out.spec = op.spec;
    out.matrix = apply_dirichlet(op.matrix, boundary_ids);
    return out;
}

} // namespace rbffd
