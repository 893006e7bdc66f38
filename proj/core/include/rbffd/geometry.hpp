#ifndef RBFFD_GEOMETRY_HPP
#define RBFFD_GEOMETRY_HPP

#include <array>
#include <cstdint>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

namespace rbffd {

using Point2 = std::array<double, 2>;

enum class Metric { PeriodicTorus, Euclidean };
enum class Domain { Torus, Square };

/// Componentwise displacement from a to b under the metric. On the torus each
/// component is the wrapped representative of magnitude <= 0.5.
Point2 displacement(const Point2& a, const Point2& b, Metric metric);

double distance(const Point2& a, const Point2& b, Metric metric);

/// Scattered discretisation nodes with the metric they live under.
/// Immutable after construction; boundary nodes (square domain only) come
/// first in the ordering and are listed in boundary_ids.
class NodeSet {
public:
    NodeSet(std::vector<Point2> points, double h, Metric metric,
            std::vector<int> boundary_ids);

    int size() const { return static_cast<int>(points_.size()); }
    const std::vector<Point2>& points() const { return points_; }
    const Point2& point(int i) const { return points_[i]; }
    double h() const { return h_; }
    Metric metric() const { return metric_; }
    const std::vector<int>& boundary_ids() const { return boundary_ids_; }
    bool is_boundary(int i) const { return boundary_flag_[i]; }
    int interior_count() const { return size() - static_cast<int>(boundary_ids_.size()); }

    double dist(int i, int j) const { return distance(points_[i], points_[j], metric_); }

    /// CSV with header `x,y,boundary`.
    void write_csv(std::ostream& os) const;
    static NodeSet read_csv(std::istream& is, double h, Metric metric);

private:
    std::vector<Point2> points_;
    double h_;
    Metric metric_;
    std::vector<int> boundary_ids_;
    std::vector<char> boundary_flag_;
};

/// Per-node nearest-neighbour lists, self first, sorted by distance with ties
/// broken by ascending node index.
struct StencilTable {
    std::vector<std::vector<int>> neighbours;
    int n = 0;

    const std::vector<int>& stencil(int i) const { return neighbours[i]; }
    int size() const { return static_cast<int>(neighbours.size()); }
};

/// Quasi-uniform scattered nodes on the periodic unit torus or the unit
/// square: jittered grid, deterministic in (h, domain, seed). Square domains
/// get boundary nodes exactly on the edges (corners included) before the
/// interior fill. Throws std::invalid_argument unless 0 < h < 0.5.
NodeSet generate_nodes(double h, Domain domain, std::uint64_t seed);

/// k-nearest-neighbour stencils under the node set's metric.
/// Throws std::invalid_argument if n < 1 or n > N.
StencilTable find_stencils(const NodeSet& nodes, int n);

} // namespace rbffd

#endif
