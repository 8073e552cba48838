#include "heatflow/observables.hpp"

#include "heatflow/errors.hpp"

#include <boost/numeric/odeint.hpp>
#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <sstream>
#include <string>

namespace heatflow {

namespace odeint = boost::numeric::odeint;

MomentVector moments(const PointSet& points, int K) {
    if (K < 0) throw InvalidArgument("moment order must be nonnegative");
    if (points.empty()) throw InvalidArgument("moments of an empty set");
    MomentVector out;
    out.N = static_cast<int>(points.size());
    out.m.assign(static_cast<std::size_t>(K) + 1, cplx{});
    for (cplx z : points) {
        cplx p(1.0, 0.0);
        for (int k = 1; k <= K; ++k) {
            p *= z;
            out.m[static_cast<std::size_t>(k)] += p;
        }
    }
    const double n = static_cast<double>(points.size());
    for (auto& v : out.m) v /= n;
    out.m[0] = 1.0;
    return out;
}

MomentVector evolve_moments(const MomentVector& m0, int N, cplx tau0, cplx tau1, double rel_tol,
                            double abs_tol) {
    if (N < 1) throw InvalidArgument("normalization N must be positive");
    if (m0.m.empty()) throw InvalidArgument("empty moment vector");
    const std::size_t K = m0.m.size() - 1;
    const cplx dtau = tau1 - tau0;
    using State = std::vector<double>;
    State x(2 * (K + 1));
    for (std::size_t k = 0; k <= K; ++k) {
        x[2 * k] = m0.m[k].real();
        x[2 * k + 1] = m0.m[k].imag();
    }
    auto rhs = [&](const State& s, State& d, double) {
        auto m = [&](std::size_t k) { return cplx(s[2 * k], s[2 * k + 1]); };
        for (std::size_t k = 0; k <= K; ++k) {
            cplx v{};
            if (k >= 2) {
                cplx conv{};
                for (std::size_t j = 0; j + 2 <= k; ++j) conv += m(k - j - 2) * m(j);
                const double kk = static_cast<double>(k);
                v = -0.5 * kk * conv + kk * (kk - 1.0) / (2.0 * N) * m(k - 2);
            }
            v *= dtau;
            d[2 * k] = v.real();
            d[2 * k + 1] = v.imag();
        }
    };
    try {
        odeint::integrate_adaptive(odeint::make_controlled(abs_tol, rel_tol, odeint::runge_kutta_dopri5<State>()),
                                   rhs, x, 0.0, 1.0, 1e-3);
    } catch (const odeint::step_adjustment_error& e) {
        throw NoConvergence(std::string("moment ODE: ") + e.what());
    }
    MomentVector out;
    out.N = m0.N;
    out.m.resize(K + 1);
    for (std::size_t k = 0; k <= K; ++k) out.m[k] = cplx(x[2 * k], x[2 * k + 1]);
    out.m[0] = m0.m[0];
    if (K >= 1) out.m[1] = m0.m[1];
    return out;
}

cplx cauchy_transform(const PointSet& points, cplx z, std::optional<std::size_t> exclude) {
    if (points.empty()) throw InvalidArgument("Cauchy transform of an empty set");
    cplx acc{};
    for (std::size_t k = 0; k < points.size(); ++k) {
        if (exclude && *exclude == k) continue;
        const cplx d = z - points[k];
        if (d == cplx(0.0, 0.0)) throw PoleHit("evaluation point coincides with point " + std::to_string(k));
        acc += 1.0 / d;
    }
    return acc / static_cast<double>(points.size());
}

double log_potential(const PointSet& points, cplx z) {
    if (points.empty()) throw InvalidArgument("log potential of an empty set");
    double acc = 0.0;
    for (std::size_t k = 0; k < points.size(); ++k) {
        const double n2 = std::norm(z - points[k]);
        if (n2 == 0.0) throw PoleHit("evaluation point coincides with point " + std::to_string(k));
        acc += std::log(n2);
    }
    return acc / static_cast<double>(points.size());
}

Pushforward pushforward_elliptic(const PointSet& points, double t) {
    Pushforward out;
    out.in_range = t >= -1.0 && t <= 1.0;
    out.points.points.reserve(points.size());
    for (cplx z : points) out.points.points.push_back(z + t * std::conj(z));
    return out;
}

cplx char_curve(const CharCurveInput& in) {
    if (in.mode == Mode::additive) return in.z0 - in.delta_tau * in.g;
    if (in.z0 == cplx(0.0, 0.0)) throw ZeroPoint("multiplicative characteristic curve from the origin");
    return in.z0 * std::exp(in.delta_tau * (in.z0 * in.g - 0.5));
}

PointSet predicted_cloud(const PointSet& points, cplx delta_tau, Mode mode) {
    std::vector<cplx> out(points.size());
    for (std::size_t j = 0; j < points.size(); ++j) {
        cplx g;
        try {
            g = cauchy_transform(points, points[j], j);
        } catch (const PoleHit&) {
            throw CollisionDetected("repeated point at index " + std::to_string(j));
        }
        out[j] = char_curve({points[j], g, delta_tau, mode});
    }
    return PointSet(std::move(out));
}

namespace {

double mean_cross(const PointSet& a, const PointSet& b) {
    double acc = 0.0;
    for (cplx x : a)
        for (cplx y : b) acc += std::abs(x - y);
    return acc / (static_cast<double>(a.size()) * static_cast<double>(b.size()));
}

// V-statistic (diagonal included), so the distance between two empirical
// measures is never negative.
double mean_within(const PointSet& a) { return mean_cross(a, a); }

}  // namespace

double energy_distance(const PointSet& a, const PointSet& b) {
    if (a.empty() || b.empty()) throw InvalidArgument("energy distance of an empty set");
    const double e2 = 2.0 * mean_cross(a, b) - mean_within(a) - mean_within(b);
    return std::sqrt(std::max(0.0, e2));
}

double ks_two_sample(std::vector<double> a, std::vector<double> b) {
    if (a.empty() || b.empty()) throw InvalidArgument("KS statistic of an empty sample");
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
    std::size_t i = 0, j = 0;
    double d = 0.0;
    while (i < a.size() && j < b.size()) {
        const double x = std::min(a[i], b[j]);
        while (i < a.size() && a[i] <= x) ++i;
        while (j < b.size() && b[j] <= x) ++j;
        d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
    }
    return d;
}

double ks_against(std::vector<double> a, const std::function<double(double)>& cdf) {
    if (a.empty()) throw InvalidArgument("KS statistic of an empty sample");
    std::sort(a.begin(), a.end());
    const double n = static_cast<double>(a.size());
    double d = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double f = cdf(a[i]);
        d = std::max({d, static_cast<double>(i + 1) / n - f, f - static_cast<double>(i) / n});
    }
    return d;
}

std::vector<double> real_parts(const PointSet& p) {
    std::vector<double> v;
    v.reserve(p.size());
    for (cplx z : p) v.push_back(z.real());
    return v;
}

std::vector<double> imag_parts(const PointSet& p) {
    std::vector<double> v;
    v.reserve(p.size());
    for (cplx z : p) v.push_back(z.imag());
    return v;
}

std::vector<double> moduli(const PointSet& p) {
    std::vector<double> v;
    v.reserve(p.size());
    for (cplx z : p) v.push_back(std::abs(z));
    return v;
}

DistanceReport distribution_distance(const EmpiricalMeasure& a, const EmpiricalMeasure& b) {
    DistanceReport r;
    r.energy = energy_distance(a.support, b.support);
    r.ks_re = ks_two_sample(real_parts(a.support), real_parts(b.support));
    r.ks_im = ks_two_sample(imag_parts(a.support), imag_parts(b.support));
    r.ks_abs = ks_two_sample(moduli(a.support), moduli(b.support));
    return r;
}

double semicircle_density(double x, double s) {
    const double r2 = 4.0 * s;
    if (x * x >= r2) return 0.0;
    return std::sqrt(r2 - x * x) / (2.0 * std::numbers::pi * s);
}

double semicircle_cdf(double x, double s) {
    const double u = x / (2.0 * std::sqrt(s));
    if (u <= -1.0) return 0.0;
    if (u >= 1.0) return 1.0;
    return 0.5 + (u * std::sqrt(1.0 - u * u) + std::asin(u)) / std::numbers::pi;
}

ReferenceLaw ReferenceLaw::parse(std::string_view text) {
    const auto open = text.find('(');
    const std::string name(text.substr(0, open));
    std::vector<double> args;
    if (open != std::string_view::npos) {
        const auto close = text.find(')', open);
        if (close == std::string_view::npos) throw ParseError("unterminated reference law '" + std::string(text) + "'");
        std::stringstream ss{std::string(text.substr(open + 1, close - open - 1))};
        std::string item;
        while (std::getline(ss, item, ',')) args.push_back(std::stod(item));
    }
    if (name == "semicircle") return semicircle(args.empty() ? 1.0 : args.at(0));
    if (name == "disk") return disk();
    if (name == "circle") return circle();
    if (name == "ellipse") {
        if (args.size() != 2) throw ParseError("ellipse needs two semi-axes");
        return ellipse(args[0], args[1]);
    }
    throw ParseError("unknown reference law '" + std::string(text) + "'");
}

PointSet reference_sampler(const ReferenceLaw& law, std::size_t n, Rng& rng) {
    std::vector<cplx> out;
    out.reserve(n);
    auto disk_point = [&rng]() {
        const double r = std::sqrt(rng.uniform());
        return std::polar(r, 2.0 * std::numbers::pi * rng.uniform());
    };
    switch (law.kind) {
    case ReferenceLaw::Kind::semicircle:
        if (!(law.s > 0.0)) throw InvalidArgument("semicircle variance must be positive");
        for (std::size_t i = 0; i < n; ++i) out.emplace_back(2.0 * std::sqrt(law.s) * disk_point().real(), 0.0);
        break;
    case ReferenceLaw::Kind::disk:
        for (std::size_t i = 0; i < n; ++i) out.push_back(disk_point());
        break;
    case ReferenceLaw::Kind::ellipse:
        if (!(law.a >= 0.0 && law.b >= 0.0)) throw InvalidArgument("ellipse semi-axes must be nonnegative");
        for (std::size_t i = 0; i < n; ++i) {
            const cplx d = disk_point();
            out.emplace_back(law.a * d.real(), law.b * d.imag());
        }
        break;
    case ReferenceLaw::Kind::circle:
        for (std::size_t i = 0; i < n; ++i) out.push_back(std::polar(1.0, 2.0 * std::numbers::pi * rng.uniform()));
        break;
    }
    return PointSet(std::move(out));
}

std::string points_csv(const PointSet& p) {
    std::string out = "re,im\n";
    char buf[80];
    for (cplx z : p) {
        std::snprintf(buf, sizeof buf, "%.17g,%.17g\n", z.real(), z.imag());
        out += buf;
    }
    return out;
}

PointSet points_from_csv(std::string_view text) {
    std::istringstream is{std::string(text)};
    std::string line;
    std::vector<cplx> pts;
    bool first = true;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        if (first) {
            first = false;
            if (line.find_first_of("0123456789") == std::string::npos || line.rfind("re", 0) == 0) continue;
        }
        const auto comma = line.find(',');
        if (comma == std::string::npos) throw ParseError("bad point row '" + line + "'");
        try {
            pts.emplace_back(std::stod(line.substr(0, comma)), std::stod(line.substr(comma + 1)));
        } catch (const std::exception&) {
            throw ParseError("bad point row '" + line + "'");
        }
    }
    return PointSet(std::move(pts));
}

std::string moments_json(const MomentVector& m) {
    auto arr = nlohmann::json::array();
    for (cplx v : m.m) arr.push_back({v.real(), v.imag()});
    return arr.dump() + "\n";
}

}  // namespace heatflow
