#include "heatflow/rootdyn.hpp"

#include "heatflow/errors.hpp"

#include <boost/numeric/odeint.hpp>
#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <string>

namespace heatflow {

namespace odeint = boost::numeric::odeint;

namespace {

using State = std::vector<double>;

// v_j = -(1/N) sum_{k!=j} 1/(z_j - z_k), no guard.
void rational_velocity(const std::vector<cplx>& z, int N, std::vector<cplx>& v) {
    const std::size_t n = z.size();
    v.assign(n, cplx{});
    for (std::size_t j = 0; j < n; ++j)
        for (std::size_t k = j + 1; k < n; ++k) {
            const cplx r = 1.0 / (z[j] - z[k]);
            v[j] += r;
            v[k] -= r;
        }
    const double scale = -1.0 / N;
    for (auto& x : v) x *= scale;
}

// (1/z_j) dz_j/dtau = (1/2N)[1 + sum_{k!=j} (z_j+z_k)/(z_j-z_k)], no guard.
void trig_log_velocity(const std::vector<cplx>& z, int N, std::vector<cplx>& v) {
    const std::size_t n = z.size();
    v.assign(n, cplx(1.0, 0.0));
    for (std::size_t j = 0; j < n; ++j)
        for (std::size_t k = j + 1; k < n; ++k) {
            const cplx r = (z[j] + z[k]) / (z[j] - z[k]);
            v[j] += r;
            v[k] -= r;
        }
    const double scale = 1.0 / (2.0 * N);
    for (auto& x : v) x *= scale;
}

void check_guard(const PointSet& points, double guard) {
    if (points.size() < 2) return;
    std::size_t i = 0, j = 0;
    const double sep = points.min_separation(&i, &j);
    if (sep == 0.0 || sep < guard)
        throw CollisionDetected("points " + std::to_string(i) + " and " + std::to_string(j) +
                                " are " + std::to_string(sep) + " apart (guard " + std::to_string(guard) + ")");
}

void check_nonzero(const PointSet& points) {
    for (std::size_t j = 0; j < points.size(); ++j)
        if (points[j] == cplx(0.0, 0.0)) throw ZeroPoint("point " + std::to_string(j) + " is the origin");
}

struct Flow {
    int N;
    Mode mode;
    cplx dtau;
    mutable std::vector<cplx> z, v;

    void operator()(const State& x, State& dxdt, double /*t*/) const {
        const std::size_t n = x.size() / 2;
        z.resize(n);
        for (std::size_t j = 0; j < n; ++j) {
            const cplx y(x[2 * j], x[2 * j + 1]);
            z[j] = mode == Mode::additive ? y : std::exp(y);
        }
        if (mode == Mode::additive) rational_velocity(z, N, v);
        else trig_log_velocity(z, N, v);
        for (std::size_t j = 0; j < n; ++j) {
            const cplx d = dtau * v[j];
            dxdt[2 * j] = d.real();
            dxdt[2 * j + 1] = d.imag();
        }
    }
};

std::vector<cplx> state_points(const State& x, Mode mode) {
    std::vector<cplx> z(x.size() / 2);
    for (std::size_t j = 0; j < z.size(); ++j) {
        const cplx y(x[2 * j], x[2 * j + 1]);
        z[j] = mode == Mode::additive ? y : std::exp(y);
    }
    return z;
}

bool all_finite(const State& x) {
    return std::all_of(x.begin(), x.end(), [](double v) { return std::isfinite(v); });
}

std::vector<double> sample_grid(const IntegrationOpts& opts) {
    std::vector<double> ts;
    if (!opts.sample_times.empty()) {
        ts = opts.sample_times;
        for (double t : ts)
            if (!(t >= 0.0 && t <= 1.0)) throw InvalidArgument("sample times must lie in [0, 1]");
    } else {
        const int m = std::max(2, opts.t_samples);
        for (int i = 0; i < m; ++i) ts.push_back(static_cast<double>(i) / (m - 1));
    }
    ts.push_back(0.0);
    ts.push_back(1.0);
    std::sort(ts.begin(), ts.end());
    ts.erase(std::unique(ts.begin(), ts.end()), ts.end());
    return ts;
}

// Reorders `next` so next[i] continues prev[i]; returns whether the pairing was ambiguous.
bool rematch(const PointSet& prev, PointSet& next) {
    const auto m = match_points_report(prev, next, 1e-9);
    std::vector<cplx> ordered(prev.size());
    for (std::size_t i = 0; i < prev.size(); ++i) ordered[i] = next[static_cast<std::size_t>(m.perm[i])];
    next.points = std::move(ordered);
    return m.ambiguous;
}

}  // namespace

std::vector<cplx> cm_rational_rhs(const PointSet& points, int N, double guard) {
    if (N < 1) throw InvalidArgument("normalization N must be positive");
    check_guard(points, guard);
    std::vector<cplx> v;
    rational_velocity(points.points, N, v);
    return v;
}

std::vector<cplx> cm_trig_rhs(const PointSet& points, int N, double guard) {
    if (N < 1) throw InvalidArgument("normalization N must be positive");
    check_nonzero(points);
    check_guard(points, guard);
    std::vector<cplx> v;
    trig_log_velocity(points.points, N, v);
    for (std::size_t j = 0; j < v.size(); ++j) v[j] *= points[j];
    return v;
}

std::vector<cplx> cm_accel(const PointSet& points, int N, Mode mode, double guard) {
    if (N < 1) throw InvalidArgument("normalization N must be positive");
    if (mode == Mode::multiplicative) check_nonzero(points);
    check_guard(points, guard);
    const std::size_t n = points.size();
    std::vector<cplx> a(n, cplx{});
    const double nn = static_cast<double>(N) * N;
    if (mode == Mode::additive) {
        for (std::size_t j = 0; j < n; ++j)
            for (std::size_t k = j + 1; k < n; ++k) {
                const cplx d = points[j] - points[k];
                const cplx r = 1.0 / (d * d * d);
                a[j] += r;
                a[k] -= r;
            }
        for (auto& x : a) x *= -2.0 / nn;
        return a;
    }
    // With q = sqrt(z_j/z_k) = e^{i(w_j-w_k)/2}: cos = (q + 1/q)/2, sin = (q - 1/q)/(2i).
    // The sign ambiguity of q cancels in cos/sin^3.
    for (std::size_t j = 0; j < n; ++j)
        for (std::size_t k = j + 1; k < n; ++k) {
            const cplx q = std::sqrt(points[j] / points[k]);
            const cplx c = 0.5 * (q + 1.0 / q);
            const cplx s = (q - 1.0 / q) / cplx(0.0, 2.0);
            const cplx r = c / (s * s * s);
            a[j] += r;
            a[k] -= r;
        }
    for (auto& x : a) x *= -1.0 / (4.0 * nn);
    return a;
}

PointSet TrajectoryBundle::at(std::size_t sample) const {
    std::vector<cplx> pts(paths.size());
    for (std::size_t j = 0; j < paths.size(); ++j) pts[j] = paths[j].at(sample);
    return PointSet(std::move(pts));
}

PointSet evolve_zeros(const PointSet& start, int N, cplx delta_tau, Mode mode, mp::Precision prec,
                      const std::vector<cplx>& guesses) {
    if (start.empty()) return start;
    if (prec == 0) prec = default_precision(std::max(N, static_cast<int>(start.size())));
    const Poly q = apply_heat(from_roots(start, prec), HeatStep{delta_tau, N, mode});
    RootOpts ro;
    ro.initial_guesses = guesses;
    return roots(q, ro);
}

TrajectoryBundle integrate_trajectories(const PointSet& start, int N, cplx tau0, cplx tau1, Mode mode,
                                        const IntegrationOpts& opts) {
    if (N < 1) throw InvalidArgument("normalization N must be positive");
    if (start.empty()) throw InvalidArgument("empty start set");
    if (!start.all_finite()) throw InvalidArgument("non-finite start point");
    if (!(opts.rel_tol > 0.0) || !(opts.abs_tol > 0.0) || !(opts.max_step > 0.0) || !(opts.initial_step > 0.0))
        throw InvalidArgument("integration tolerances and steps must be positive");
    if (mode == Mode::multiplicative) {
        check_nonzero(start);
        if (static_cast<int>(start.size()) > N)
            throw InvalidArgument("multiplicative flow needs at most N points");
    }

    const std::size_t n = start.size();
    const double guard = opts.min_separation.value_or(1e-4 * start.diameter());
    const mp::Precision prec =
        opts.precision_bits > 0 ? opts.precision_bits : default_precision(std::max(N, static_cast<int>(n)));
    const cplx dtau = tau1 - tau0;
    const auto times = sample_grid(opts);

    TrajectoryBundle bundle;
    bundle.method = TrajectoryMethod::ode;
    bundle.paths.assign(n, {});

    State x(2 * n);
    auto load_state = [&](const std::vector<cplx>& z, const std::vector<cplx>* branch_ref) {
        for (std::size_t j = 0; j < n; ++j) {
            cplx y = z[j];
            if (mode == Mode::multiplicative) {
                y = std::log(z[j]);
                if (branch_ref != nullptr) {
                    const double turns = std::round(((*branch_ref)[j].imag() - y.imag()) / (2.0 * std::numbers::pi));
                    y += cplx(0.0, 2.0 * std::numbers::pi * turns);
                }
            }
            x[2 * j] = y.real();
            x[2 * j + 1] = y.imag();
        }
    };
    auto current_logs = [&]() {
        std::vector<cplx> u(n);
        for (std::size_t j = 0; j < n; ++j) u[j] = cplx(x[2 * j], x[2 * j + 1]);
        return u;
    };
    auto record = [&](double t, const std::vector<cplx>& z) {
        bundle.t.push_back(t);
        bundle.tau_samples.push_back(tau0 + t * dtau);
        for (std::size_t j = 0; j < n; ++j) bundle.paths[j].push_back(z[j]);
    };

    load_state(start.points, nullptr);
    record(0.0, start.points);
    std::size_t next = 1;

    Flow flow{N, mode, dtau, {}, {}};
    auto stepper = odeint::make_controlled(opts.abs_tol, opts.rel_tol, odeint::runge_kutta_dopri5<State>());
    double t = 0.0;
    double dt = opts.initial_step;
    int steps = 0;
    constexpr double kMinStep = 1e-14;

    // The window is anchored at the start polynomial: near a multiple zero the
    // current ODE points are too inaccurate to rebuild coefficients from.
    const Poly start_poly = from_roots(start, prec);

    // Crosses [t, t + window] on the coefficient route, recording any samples inside.
    auto cross_window = [&](std::size_t ci, std::size_t cj, double sep) {
        CollisionEvent ev{t, static_cast<int>(ci), static_cast<int>(cj), sep, false, false};
        if (opts.stop_at_collision) {
            if (bundle.t.back() != t) record(t, state_points(x, mode));
            bundle.collisions.push_back(ev);
            bundle.truncated = true;
            return false;
        }
        if (!opts.fallback)
            throw CollisionUnresolved("separation " + std::to_string(sep) + " below guard " +
                                      std::to_string(guard) + " at t = " + std::to_string(t));
        const double t_end = std::min(1.0, t + opts.fallback_window);
        PointSet prev(state_points(x, mode));
        std::vector<double> stops;
        while (next < times.size() && times[next] <= t_end) stops.push_back(times[next++]);
        if (stops.empty() || stops.back() != t_end) stops.push_back(t_end);
        for (double s : stops) {
            const Poly q = apply_heat(start_poly, HeatStep{s * dtau, N, mode});
            RootOpts ro;
            ro.initial_guesses = prev.points;
            PointSet found = roots(q, ro);
            ev.ambiguous_rematch = rematch(prev, found) || ev.ambiguous_rematch;
            prev = std::move(found);
            if (std::binary_search(times.begin(), times.end(), s)) record(s, prev.points);
        }
        const auto logs = current_logs();
        load_state(prev.points, &logs);
        ev.resolved = true;
        bundle.collisions.push_back(ev);
        t = t_end;
        dt = opts.initial_step;
        return true;
    };

    while (next < times.size()) {
        const double target = times[next];
        if (t >= target) {
            record(target, state_points(x, mode));
            ++next;
            continue;
        }
        if (n >= 2) {
            const PointSet cur(state_points(x, mode));
            std::size_t ci = 0, cj = 0;
            const double sep = cur.min_separation(&ci, &cj);
            if (sep < guard) {
                if (!cross_window(ci, cj, sep)) return bundle;
                continue;
            }
        }
        dt = std::min({dt, opts.max_step, target - t});
        const State backup = x;
        const double t_before = t;
        const auto res = stepper.try_step(flow, x, t, dt);
        if (res == odeint::success && !all_finite(x)) {
            x = backup;
            t = t_before;
            dt *= 0.25;
        }
        if (t == t_before && dt < kMinStep) {
            // step size collapsed: treat as a collision at the closest pair
            const PointSet cur(state_points(x, mode));
            std::size_t ci = 0, cj = 0;
            const double sep = n >= 2 ? cur.min_separation(&ci, &cj) : 0.0;
            if (!cross_window(ci, cj, sep)) return bundle;
            continue;
        }
        if (t > target || std::abs(t - target) < 1e-15) t = target;
        if (n >= 2 && t != t_before) {
            // a step that lands inside the guard is not trusted: cross from its start
            const PointSet cur(state_points(x, mode));
            if (cur.min_separation() < guard) {
                x = backup;
                t = t_before;
                const PointSet prev(state_points(x, mode));
                std::size_t ci = 0, cj = 0;
                const double sep = prev.min_separation(&ci, &cj);
                if (!cross_window(ci, cj, sep)) return bundle;
                continue;
            }
        }
        if (++steps > opts.max_steps)
            throw NoConvergence("integration step cap reached at t = " + std::to_string(t));
    }

    if (opts.cross_validate) {
        const PointSet end = bundle.endpoints();
        const PointSet ref = evolve_zeros(start, N, dtau, mode, prec, end.points);
        bundle.endpoint_check = max_pairing_distance(end, ref);
    }
    return bundle;
}

TrajectoryBundle continue_roots(const PointSet& start, int N, cplx tau0, cplx tau1, Mode mode, int t_samples,
                                mp::Precision prec) {
    if (N < 1) throw InvalidArgument("normalization N must be positive");
    if (start.empty()) throw InvalidArgument("empty start set");
    if (t_samples < 2) throw InvalidArgument("need at least two samples");
    const std::size_t n = start.size();
    if (prec == 0) prec = default_precision(std::max(N, static_cast<int>(n)));
    const cplx dtau = tau1 - tau0;

    TrajectoryBundle bundle;
    bundle.method = TrajectoryMethod::coefficient;
    bundle.paths.assign(n, {});
    auto record = [&](double t, const PointSet& z) {
        bundle.t.push_back(t);
        bundle.tau_samples.push_back(tau0 + t * dtau);
        for (std::size_t j = 0; j < n; ++j) bundle.paths[j].push_back(z[j]);
    };

    const Poly base = from_roots(start, prec);
    PointSet prev = start;
    record(0.0, prev);
    for (int s = 1; s < t_samples; ++s) {
        const double t = static_cast<double>(s) / (t_samples - 1);
        const Poly q = apply_heat(base, HeatStep{t * dtau, N, mode});
        RootOpts ro;
        ro.initial_guesses = prev.points;
        PointSet found = roots(q, ro);
        if (rematch(prev, found)) {
            std::size_t i = 0, j = 0;
            const double sep = n >= 2 ? found.min_separation(&i, &j) : 0.0;
            bundle.collisions.push_back({t, static_cast<int>(i), static_cast<int>(j), sep, true, true});
        }
        prev = std::move(found);
        record(t, prev);
    }
    return bundle;
}

std::string to_csv(const TrajectoryBundle& bundle) {
    std::string out = "t,tau_re,tau_im";
    for (std::size_t j = 0; j < bundle.paths.size(); ++j)
        out += ",z" + std::to_string(j) + "_re,z" + std::to_string(j) + "_im";
    out += '\n';
    char buf[64];
    auto put = [&](double v) {
        std::snprintf(buf, sizeof buf, "%.17g", v);
        out += buf;
    };
    for (std::size_t s = 0; s < bundle.t.size(); ++s) {
        put(bundle.t[s]);
        out += ',';
        put(bundle.tau_samples[s].real());
        out += ',';
        put(bundle.tau_samples[s].imag());
        for (const auto& path : bundle.paths) {
            out += ',';
            put(path[s].real());
            out += ',';
            put(path[s].imag());
        }
        out += '\n';
    }
    return out;
}

std::string collisions_json(const TrajectoryBundle& bundle) {
    auto arr = nlohmann::json::array();
    for (const auto& c : bundle.collisions)
        arr.push_back({{"t", c.t},
                       {"i", c.i},
                       {"j", c.j},
                       {"min_separation", c.min_separation},
                       {"ambiguous_rematch", c.ambiguous_rematch},
                       {"resolved", c.resolved}});
    return arr.dump(2) + "\n";
}

}  // namespace heatflow
