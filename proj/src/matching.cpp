#include "heatflow/errors.hpp"
#include "heatflow/rootdyn.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace heatflow {

namespace {

// Min-cost assignment on a dense n x n matrix (shortest augmenting paths with
// potentials). Returns row -> column.
std::vector<int> hungarian(const std::vector<double>& cost, int n) {
    const double inf = std::numeric_limits<double>::infinity();
    std::vector<double> u(static_cast<std::size_t>(n) + 1, 0.0), v(static_cast<std::size_t>(n) + 1, 0.0);
    std::vector<int> p(static_cast<std::size_t>(n) + 1, 0), way(static_cast<std::size_t>(n) + 1, 0);
    std::vector<double> minv(static_cast<std::size_t>(n) + 1);
    std::vector<char> used(static_cast<std::size_t>(n) + 1);
    auto c = [&](int i, int j) { return cost[static_cast<std::size_t>((i - 1) * n + (j - 1))]; };
    for (int i = 1; i <= n; ++i) {
        p[0] = i;
        int j0 = 0;
        std::fill(minv.begin(), minv.end(), inf);
        std::fill(used.begin(), used.end(), 0);
        do {
            used[static_cast<std::size_t>(j0)] = 1;
            const int i0 = p[static_cast<std::size_t>(j0)];
            double delta = inf;
            int j1 = 0;
            for (int j = 1; j <= n; ++j) {
                if (used[static_cast<std::size_t>(j)]) continue;
                const double cur = c(i0, j) - u[static_cast<std::size_t>(i0)] - v[static_cast<std::size_t>(j)];
                if (cur < minv[static_cast<std::size_t>(j)]) {
                    minv[static_cast<std::size_t>(j)] = cur;
                    way[static_cast<std::size_t>(j)] = j0;
                }
                if (minv[static_cast<std::size_t>(j)] < delta) {
                    delta = minv[static_cast<std::size_t>(j)];
                    j1 = j;
                }
            }
            for (int j = 0; j <= n; ++j) {
                if (used[static_cast<std::size_t>(j)]) {
                    u[static_cast<std::size_t>(p[static_cast<std::size_t>(j)])] += delta;
                    v[static_cast<std::size_t>(j)] -= delta;
                } else {
                    minv[static_cast<std::size_t>(j)] -= delta;
                }
            }
            j0 = j1;
        } while (p[static_cast<std::size_t>(j0)] != 0);
        do {
            const int j1 = way[static_cast<std::size_t>(j0)];
            p[static_cast<std::size_t>(j0)] = p[static_cast<std::size_t>(j1)];
            j0 = j1;
        } while (j0 != 0);
    }
    std::vector<int> row_to_col(static_cast<std::size_t>(n));
    for (int j = 1; j <= n; ++j) row_to_col[static_cast<std::size_t>(p[static_cast<std::size_t>(j)] - 1)] = j - 1;
    return row_to_col;
}

// Mutual nearest neighbours with a 10x gap to the runner-up, for every point.
bool greedy_match(const std::vector<double>& cost, int n, std::vector<int>& perm) {
    if (n == 1) {
        perm.assign(1, 0);
        return true;
    }
    perm.assign(static_cast<std::size_t>(n), -1);
    std::vector<char> taken(static_cast<std::size_t>(n), 0);
    for (int i = 0; i < n; ++i) {
        double best = std::numeric_limits<double>::infinity(), second = best;
        int arg = -1;
        for (int j = 0; j < n; ++j) {
            const double d = cost[static_cast<std::size_t>(i * n + j)];
            if (d < best) {
                second = best;
                best = d;
                arg = j;
            } else if (d < second) {
                second = d;
            }
        }
        if (!(second > 10.0 * best) || taken[static_cast<std::size_t>(arg)]) return false;
        for (int k = 0; k < n; ++k)
            if (k != i && !(cost[static_cast<std::size_t>(k * n + arg)] > 10.0 * best)) return false;
        taken[static_cast<std::size_t>(arg)] = 1;
        perm[static_cast<std::size_t>(i)] = arg;
    }
    return true;
}

}  // namespace

MatchResult match_points_report(const PointSet& prev, const PointSet& next, double tol) {
    if (prev.size() != next.size())
        throw InvalidArgument("matching sets of sizes " + std::to_string(prev.size()) + " and " +
                              std::to_string(next.size()));
    const int n = static_cast<int>(prev.size());
    MatchResult r;
    if (n == 0) return r;
    std::vector<double> cost(static_cast<std::size_t>(n) * static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            cost[static_cast<std::size_t>(i * n + j)] = std::abs(prev[static_cast<std::size_t>(i)] - next[static_cast<std::size_t>(j)]);

    if (!greedy_match(cost, n, r.perm)) r.perm = hungarian(cost, n);
    for (int i = 0; i < n; ++i) r.cost += cost[static_cast<std::size_t>(i * n + r.perm[static_cast<std::size_t>(i)])];

    const double slack = tol * r.cost;
    for (int i = 0; i < n && !r.ambiguous; ++i) {
        const int pi = r.perm[static_cast<std::size_t>(i)];
        for (int k = i + 1; k < n; ++k) {
            const int pk = r.perm[static_cast<std::size_t>(k)];
            const double delta = cost[static_cast<std::size_t>(i * n + pk)] + cost[static_cast<std::size_t>(k * n + pi)] -
                                 cost[static_cast<std::size_t>(i * n + pi)] - cost[static_cast<std::size_t>(k * n + pk)];
            // equal points on either side make the swap free
            if (delta <= slack && !(prev[static_cast<std::size_t>(i)] == prev[static_cast<std::size_t>(k)]) &&
                !(next[static_cast<std::size_t>(pi)] == next[static_cast<std::size_t>(pk)])) {
                r.ambiguous = true;
                break;
            }
        }
    }
    return r;
}

std::vector<int> match_points(const PointSet& prev, const PointSet& next, double tol) {
    auto r = match_points_report(prev, next, tol);
    if (r.ambiguous) throw AmbiguousMatch("two pairings have equal cost within tolerance");
    return r.perm;
}

double max_pairing_distance(const PointSet& a, const PointSet& b) {
    const auto r = match_points_report(a, b, 0.0);
    double worst = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i)
        worst = std::max(worst, std::abs(a[i] - b[static_cast<std::size_t>(r.perm[i])]));
    return worst;
}

}  // namespace heatflow
