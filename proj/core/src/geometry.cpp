#include "rbffd/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <random>
#include <sstream>

#include "rbffd/csv.hpp"
#include "rbffd/parallel.hpp"

namespace rbffd {

namespace {

// Grid pitch relative to the requested spacing h. A pitch slightly above h
// reproduces the node counts of advancing-front layouts (h = 0.02 on the
// torus gives N ~ 2100-2300 rather than the 2500 of an exact-h grid) while
// keeping the 0.5 h separation floor trivially satisfied.
constexpr double kPitchFactor = 1.05;
constexpr double kJitterFactor = 0.25;

double uniform01(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

double wrap01(double x) {
    x -= std::floor(x);
    if (x >= 1.0) x = 0.0; // guards x = 1 - eps rounding up
    return x;
}

// Greedy separation filter on a bucket grid; keeps a candidate only if every
// previously kept node is at least min_sep away under the metric.
class SeparationFilter {
public:
    SeparationFilter(double min_sep, Metric metric)
        : min_sep_(min_sep), metric_(metric) {
        cells_per_axis_ = std::max(1, static_cast<int>(std::floor(1.0 / min_sep)));
        buckets_.resize(static_cast<std::size_t>(cells_per_axis_) * cells_per_axis_);
    }

    bool try_insert(const Point2& p, const std::vector<Point2>& kept) {
        const int cx = cell_of(p[0]);
        const int cy = cell_of(p[1]);
        for (int dy = -1; dy <= 1; ++dy) {
            for (int dx = -1; dx <= 1; ++dx) {
                int bx = cx + dx;
                int by = cy + dy;
                if (metric_ == Metric::PeriodicTorus) {
                    bx = (bx + cells_per_axis_) % cells_per_axis_;
                    by = (by + cells_per_axis_) % cells_per_axis_;
                } else if (bx < 0 || by < 0 || bx >= cells_per_axis_ || by >= cells_per_axis_) {
                    continue;
                }
                for (int idx : buckets_[static_cast<std::size_t>(by) * cells_per_axis_ + bx]) {
                    if (distance(p, kept[idx], metric_) < min_sep_) return false;
                }
            }
        }
        buckets_[static_cast<std::size_t>(cy) * cells_per_axis_ + cx]
            .push_back(static_cast<int>(kept.size()));
        return true;
    }

private:
    int cell_of(double x) const {
        int c = static_cast<int>(x * cells_per_axis_);
        return std::clamp(c, 0, cells_per_axis_ - 1);
    }

    double min_sep_;
    Metric metric_;
    int cells_per_axis_;
    std::vector<std::vector<int>> buckets_;
};

} // namespace

Point2 displacement(const Point2& a, const Point2& b, Metric metric) {
    Point2 d{b[0] - a[0], b[1] - a[1]};
    if (metric == Metric::PeriodicTorus) {
        for (double& c : d) {
            c -= std::round(c);
            if (c == -0.5) c = 0.5; // single representative for the half-way wrap
        }
    }
    return d;
}

double distance(const Point2& a, const Point2& b, Metric metric) {
    const Point2 d = displacement(a, b, metric);
    return std::hypot(d[0], d[1]);
}

NodeSet::NodeSet(std::vector<Point2> points, double h, Metric metric,
                 std::vector<int> boundary_ids)
    : points_(std::move(points)), h_(h), metric_(metric),
      boundary_ids_(std::move(boundary_ids)), boundary_flag_(points_.size(), 0) {
    if (metric_ == Metric::PeriodicTorus && !boundary_ids_.empty())
        throw std::invalid_argument("periodic node set cannot carry boundary nodes");
    for (int id : boundary_ids_) {
        if (id < 0 || id >= size())
            throw std::invalid_argument("boundary id out of range");
        boundary_flag_[id] = 1;
    }
}

void NodeSet::write_csv(std::ostream& os) const {
    os << "x,y,boundary\n";
    for (int i = 0; i < size(); ++i) {
        os << format_double(points_[i][0]) << ',' << format_double(points_[i][1])
           << ',' << (boundary_flag_[i] ? 1 : 0) << '\n';
    }
}

NodeSet NodeSet::read_csv(std::istream& is, double h, Metric metric) {
    std::string line;
    if (!std::getline(is, line) || line != "x,y,boundary")
        throw std::runtime_error("node CSV: missing x,y,boundary header");
    std::vector<Point2> pts;
    std::vector<int> bnd;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        std::istringstream ss(line);
        double x, y;
        int flag;
        char c1, c2;
        if (!(ss >> x >> c1 >> y >> c2 >> flag) || c1 != ',' || c2 != ',')
            throw std::runtime_error("node CSV: bad row '" + line + "'");
        if (flag) bnd.push_back(static_cast<int>(pts.size()));
        pts.push_back({x, y});
    }
    return NodeSet(std::move(pts), h, metric, std::move(bnd));
}

NodeSet generate_nodes(double h, Domain domain, std::uint64_t seed) {
    if (!(h > 0.0) || !(h < 0.5))
        throw std::invalid_argument("generate_nodes: h must lie in (0, 0.5)");

    std::mt19937_64 rng(seed);
    const double jitter = kJitterFactor * h;
    const double min_sep = 0.5 * h;
    const int cells = std::max(2, static_cast<int>(std::lround(1.0 / (kPitchFactor * h))));
    const double pitch = 1.0 / cells;

    auto jitter_offset = [&]() { return (2.0 * uniform01(rng) - 1.0) * jitter; };

    if (domain == Domain::Torus) {
        std::vector<Point2> kept;
        SeparationFilter filter(min_sep, Metric::PeriodicTorus);
        kept.reserve(static_cast<std::size_t>(cells) * cells);
        for (int iy = 0; iy < cells; ++iy) {
            for (int ix = 0; ix < cells; ++ix) {
                Point2 p{wrap01(ix * pitch + jitter_offset()),
                         wrap01(iy * pitch + jitter_offset())};
                if (filter.try_insert(p, kept)) kept.push_back(p);
            }
        }
        return NodeSet(std::move(kept), h, Metric::PeriodicTorus, {});
    }

    // Square: edge nodes first (exact positions, spacing ~h, corners included).
    const int nb = std::max(1, static_cast<int>(std::lround(1.0 / h)));
    const double bs = 1.0 / nb;
    std::vector<Point2> kept;
    SeparationFilter filter(min_sep, Metric::Euclidean);
    for (int j = 0; j <= nb; ++j) {
        Point2 p{j * bs, 0.0};
        if (filter.try_insert(p, kept)) kept.push_back(p);
    }
    for (int j = 0; j <= nb; ++j) {
        Point2 p{j * bs, 1.0};
        if (filter.try_insert(p, kept)) kept.push_back(p);
    }
    for (int j = 1; j < nb; ++j) {
        Point2 p{0.0, j * bs};
        if (filter.try_insert(p, kept)) kept.push_back(p);
    }
    for (int j = 1; j < nb; ++j) {
        Point2 p{1.0, j * bs};
        if (filter.try_insert(p, kept)) kept.push_back(p);
    }
    std::vector<int> boundary(kept.size());
    for (std::size_t i = 0; i < kept.size(); ++i) boundary[i] = static_cast<int>(i);

    for (int iy = 1; iy < cells; ++iy) {
        for (int ix = 1; ix < cells; ++ix) {
            Point2 p{ix * pitch + jitter_offset(), iy * pitch + jitter_offset()};
            p[0] = std::clamp(p[0], 0.0, 1.0);
            p[1] = std::clamp(p[1], 0.0, 1.0);
            if (filter.try_insert(p, kept)) kept.push_back(p);
        }
    }
    return NodeSet(std::move(kept), h, Metric::Euclidean, std::move(boundary));
}

StencilTable find_stencils(const NodeSet& nodes, int n) {
    const int N = nodes.size();
    if (n < 1 || n > N)
        throw std::invalid_argument("find_stencils: need 1 <= n <= N");

    const bool periodic = nodes.metric() == Metric::PeriodicTorus;
    // Bucket grid sized for ~1 node per cell.
    const int G = std::max(1, static_cast<int>(std::floor(std::sqrt(static_cast<double>(N)))));
    const double cell = 1.0 / G;
    std::vector<std::vector<int>> buckets(static_cast<std::size_t>(G) * G);
    auto cell_of = [&](double x) {
        return std::clamp(static_cast<int>(x * G), 0, G - 1);
    };
    for (int i = 0; i < N; ++i) {
        const Point2& p = nodes.point(i);
        buckets[static_cast<std::size_t>(cell_of(p[1])) * G + cell_of(p[0])].push_back(i);
    }

    StencilTable table;
    table.n = n;
    table.neighbours.assign(N, {});

    parallel_for(0, N, [&](int i) {
        const Point2& q = nodes.point(i);
        const int cx = cell_of(q[0]);
        const int cy = cell_of(q[1]);
        std::vector<std::pair<double, int>> cand; // (squared distance, index)
        cand.reserve(static_cast<std::size_t>(4 * n + 16));

        auto measure = [&](int j) {
            const Point2 d = displacement(q, nodes.point(j), nodes.metric());
            cand.emplace_back(d[0] * d[0] + d[1] * d[1], j);
        };
        auto scan_cell = [&](int bx, int by) {
            if (periodic) {
                bx = (bx % G + G) % G;
                by = (by % G + G) % G;
            } else if (bx < 0 || by < 0 || bx >= G || by >= G) {
                return;
            }
            for (int j : buckets[static_cast<std::size_t>(by) * G + bx]) measure(j);
        };

        bool done = false;
        for (int ring = 0; !done; ++ring) {
            if (periodic && 2 * ring + 1 > G) {
                // the ring would wrap onto already-visited cells
                cand.clear();
                for (int j = 0; j < N; ++j) measure(j);
                break;
            }
            if (!periodic && ring >= G) break; // everything visited
            if (ring == 0) {
                scan_cell(cx, cy);
            } else {
                for (int t = -ring; t <= ring; ++t) {
                    scan_cell(cx + t, cy - ring);
                    scan_cell(cx + t, cy + ring);
                    if (t > -ring && t < ring) {
                        scan_cell(cx - ring, cy + t);
                        scan_cell(cx + ring, cy + t);
                    }
                }
            }
            if (static_cast<int>(cand.size()) >= n) {
                std::nth_element(cand.begin(), cand.begin() + (n - 1), cand.end());
                const double kth = cand[n - 1].first;
                // any unvisited cell lies at Euclidean distance >= ring*cell
                const double safe = static_cast<double>(ring) * cell;
                done = kth <= safe * safe;
            }
            if (periodic && 2 * ring + 1 == G) break; // all cells visited
        }

        std::sort(cand.begin(), cand.end(), [](const auto& a, const auto& b) {
            return a.first != b.first ? a.first < b.first : a.second < b.second;
        });
        auto& out = table.neighbours[i];
        out.resize(n);
        for (int t = 0; t < n; ++t) out[t] = cand[t].second;
    });
    return table;
}

} // namespace rbffd
