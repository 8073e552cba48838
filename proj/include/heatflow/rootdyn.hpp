#pragma once

// Zeros of heat-evolved polynomials: simultaneous root finding, the
// Calogero-Moser velocity/acceleration fields, trajectory integration with a
// coefficient-route fallback through collisions, and point matching.

#include "heatflow/polyheat.hpp"
#include "heatflow/types.hpp"

#include <optional>
#include <string>
#include <vector>

namespace heatflow {

// ---- root finding -----------------------------------------------------------

struct RootOpts {
    int max_iterations = 2000;
    /// Warm start (e.g. the previous sample's roots). Empty means a cold start
    /// from the Newton polygon of the coefficient moduli.
    std::vector<cplx> initial_guesses;
    /// Extra full sweeps after every root meets the backward-error test.
    int polish_sweeps = 1;
};

struct RootResult {
    std::vector<mp::Complex> roots;
    PointSet points;
    int iterations = 0;
    /// max_j |p(z_j)| / sum_k |a_k||z_j|^k
    double worst_backward_error = 0.0;
};

/// Aberth-Ehrlich iteration at the polynomial's precision. Throws NoConvergence.
RootResult find_roots(const Poly& p, const RootOpts& opts = {});
inline PointSet roots(const Poly& p, const RootOpts& opts = {}) { return find_roots(p, opts).points; }

// ---- Calogero-Moser fields --------------------------------------------------

/// v_j = -(1/N) sum_{k!=j} 1/(z_j - z_k). Throws CollisionDetected when two
/// points are closer than `guard`.
std::vector<cplx> cm_rational_rhs(const PointSet& points, int N, double guard = 0.0);

/// v_j = z_j/(2N) [1 + sum_{k!=j} (z_j+z_k)/(z_j-z_k)]. Throws ZeroPoint and
/// CollisionDetected.
std::vector<cplx> cm_trig_rhs(const PointSet& points, int N, double guard = 0.0);

/// additive: d^2 z_j/dtau^2 = -(2/N^2) sum (z_j-z_k)^{-3}
/// multiplicative: d^2 w_j/dtau^2 with w = -i log z,
///   = -(1/(4N^2)) sum cos((w_j-w_k)/2)/sin^3((w_j-w_k)/2)
std::vector<cplx> cm_accel(const PointSet& points, int N, Mode mode, double guard = 0.0);

// ---- matching ---------------------------------------------------------------

struct MatchResult {
    /// perm[i] is the index in `next` paired with prev[i].
    std::vector<int> perm;
    double cost = 0.0;
    /// Some 2-swap of the optimal pairing costs within `tol` of it.
    bool ambiguous = false;
};

/// Minimum total-distance pairing (Hungarian algorithm; points whose nearest
/// partner is mutual and 10x closer than the runner-up are fixed greedily).
MatchResult match_points_report(const PointSet& prev, const PointSet& next, double tol = 1e-12);
/// As above but throws AmbiguousMatch instead of choosing between near-ties.
std::vector<int> match_points(const PointSet& prev, const PointSet& next, double tol = 1e-12);

/// Largest distance within the optimal pairing of two equal-size multisets.
double max_pairing_distance(const PointSet& a, const PointSet& b);

// ---- trajectories -----------------------------------------------------------

struct IntegrationOpts {
    double rel_tol = 1e-9;
    double abs_tol = 1e-12;
    /// Collision guard; unset means 1e-4 * diameter(start).
    std::optional<double> min_separation;
    double max_step = 0.05;
    double initial_step = 1e-3;
    /// Cross near-collisions on the coefficient route instead of failing.
    bool fallback = true;
    /// Truncate and return at the first guard trip (takes precedence over fallback).
    bool stop_at_collision = false;
    double fallback_window = 1e-2;
    /// Uniform output samples in t (including both ends); ignored when
    /// sample_times is set.
    int t_samples = 2;
    std::vector<double> sample_times;
    /// Compare the endpoint with the fully coefficient-evolved roots.
    bool cross_validate = false;
    /// Working precision of the coefficient route; 0 means default_precision(N).
    mp::Precision precision_bits = 0;
    int max_steps = 2'000'000;
};

struct CollisionEvent {
    double t = 0.0;
    int i = 0;
    int j = 0;
    double min_separation = 0.0;
    /// The re-matching after the fallback window had a near-tie.
    bool ambiguous_rematch = false;
    /// The window was crossed on the coefficient route.
    bool resolved = true;
};

enum class TrajectoryMethod { ode, coefficient };

struct TrajectoryBundle {
    std::vector<double> t;
    std::vector<cplx> tau_samples;
    /// paths[j][s]: position of zero j at sample s.
    std::vector<std::vector<cplx>> paths;
    std::vector<CollisionEvent> collisions;
    TrajectoryMethod method = TrajectoryMethod::ode;
    /// Max pairing distance between the endpoint and the coefficient-route
    /// roots; NaN unless cross-validation ran.
    double endpoint_check = std::numeric_limits<double>::quiet_NaN();
    bool truncated = false;

    std::size_t sample_count() const { return t.size(); }
    PointSet at(std::size_t sample) const;
    PointSet endpoints() const { return at(t.size() - 1); }
};

/// Integrates the CM flow along tau(t) = tau0 + t (tau1 - tau0), t in [0, 1],
/// with an adaptive Dormand-Prince pair. Multiplicative flows are integrated
/// in u = log z so the angle w = -i u stays continuous.
TrajectoryBundle integrate_trajectories(const PointSet& start, int N, cplx tau0, cplx tau1, Mode mode,
                                        const IntegrationOpts& opts = {});

/// Coefficient route: zeros of the heat-evolved polynomial at t_samples
/// uniform times, each warm-started from the previous sample and matched to it.
TrajectoryBundle continue_roots(const PointSet& start, int N, cplx tau0, cplx tau1, Mode mode,
                                int t_samples, mp::Precision prec = 0);

/// Zeros of heat(from_roots(start), tau1 - tau0) for the given mode.
PointSet evolve_zeros(const PointSet& start, int N, cplx delta_tau, Mode mode, mp::Precision prec = 0,
                      const std::vector<cplx>& guesses = {});

/// CSV: t, re(tau), im(tau), then re(z_j), im(z_j) for each j.
std::string to_csv(const TrajectoryBundle& bundle);
/// JSON list of collision events.
std::string collisions_json(const TrajectoryBundle& bundle);

}  // namespace heatflow
