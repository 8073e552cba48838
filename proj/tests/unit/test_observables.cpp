#include "heatflow/errors.hpp"
#include "heatflow/models.hpp"
#include "heatflow/observables.hpp"
#include "heatflow/rootdyn.hpp"

#include <catch_amalgamated.hpp>

#include <json.hpp>

#include <cmath>
#include <numbers>

using namespace heatflow;
using Catch::Approx;

namespace {

PointSet ginibre_eigs(int N, std::uint64_t seed) {
    Rng rng(seed);
    return eigenvalues(sample_elliptic(N, {1.0, {1.0, 0.0}, false}, rng));
}

PointSet disk_sample(std::size_t n, std::uint64_t seed) {
    Rng rng(seed);
    return reference_sampler(ReferenceLaw::disk(), n, rng);
}

}  // namespace

TEST_CASE("moment examples") {
    const auto m = moments(PointSet{1.0, -1.0}, 2);
    REQUIRE(m.K() == 2);
    CHECK(m.m[0] == cplx(1.0, 0.0));
    CHECK(std::abs(m.m[1]) == 0.0);
    CHECK(m.m[2] == cplx(1.0, 0.0));

    std::vector<cplx> unity(12);
    for (std::size_t j = 0; j < unity.size(); ++j) unity[j] = std::polar(1.0, 2.0 * std::numbers::pi * j / 12.0);
    const auto r = moments(PointSet(unity), 11);
    CHECK(r.m[0] == cplx(1.0, 0.0));
    for (int k = 1; k <= 11; ++k) CHECK(std::abs(r.m[static_cast<std::size_t>(k)]) < 1e-14);

    std::vector<cplx> pooled;
    for (std::uint64_t i = 0; i < 100; ++i)
        for (cplx z : ginibre_eigs(100, 1000 + i)) pooled.push_back(z);
    const auto g = moments(PointSet(pooled), 4);
    for (int k = 1; k <= 4; ++k) CHECK(std::abs(g.m[static_cast<std::size_t>(k)]) <= 0.05);
}

TEST_CASE("moment ODE") {
    Rng rng(2);
    const int N = 16;
    std::vector<cplx> z(N);
    for (auto& w : z) w = rng.complex_normal();
    const PointSet start(z);
    const auto m0 = moments(start, 6);

    const cplx tau1(0.3, 0.0);
    const auto m1 = evolve_moments(m0, N, 0.0, tau1);
    CHECK(m1.m[0] == m0.m[0]);
    CHECK(m1.m[1] == m0.m[1]);
    CHECK(std::abs(m1.m[2] - (m0.m[2] - tau1 * (1.0 - 1.0 / N))) < 1e-12);

    IntegrationOpts opts;
    opts.rel_tol = 1e-12;
    opts.abs_tol = 1e-14;
    const auto b = integrate_trajectories(start, N, 0.0, tau1, Mode::additive, opts);
    const auto mt = moments(b.endpoints(), 6);
    for (int k = 0; k <= 6; ++k) {
        INFO("k = " << k);
        CHECK(std::abs(mt.m[static_cast<std::size_t>(k)] - m1.m[static_cast<std::size_t>(k)]) < 1e-8);
    }
}

TEST_CASE("moments follow the ODE through a collision window") {
    const PointSet start{1.0, -1.0, cplx(0.0, 3.0)};
    const int N = 3;
    IntegrationOpts opts;
    opts.rel_tol = 1e-12;
    opts.abs_tol = 1e-14;
    opts.t_samples = 5;
    const cplx tau1(3.2, 0.0);
    const auto b = integrate_trajectories(start, N, 0.0, tau1, Mode::additive, opts);
    const auto m0 = moments(start, 5);
    for (std::size_t s = 0; s < b.sample_count(); ++s) {
        const auto ode = evolve_moments(m0, N, 0.0, b.tau_samples[s]);
        const auto traj = moments(b.at(s), 5);
        for (int k = 0; k <= 5; ++k) CHECK(std::abs(ode.m[static_cast<std::size_t>(k)] - traj.m[static_cast<std::size_t>(k)]) < 1e-6);
        CHECK(std::abs(traj.m[2] - (m0.m[2] - b.tau_samples[s] * (1.0 - 1.0 / N))) < 1e-8);
    }
}

TEST_CASE("Cauchy transform") {
    CHECK(std::abs(cauchy_transform(PointSet{1.0, -1.0}, 0.0)) == 0.0);

    // 1/(z - w) has a log-divergent variance: single near points make spikes,
    // so take the median over independent samples
    std::vector<double> err;
    for (std::uint64_t i = 0; i < 25; ++i) err.push_back(std::abs(cauchy_transform(disk_sample(10000, 300 + i), 0.5) - 0.5));
    std::nth_element(err.begin(), err.begin() + 12, err.end());
    CHECK(err[12] < 0.05);

    Rng rng(4);
    std::vector<cplx> z(30);
    for (auto& w : z) w = rng.complex_normal();
    const PointSet p(z);
    const cplx far(600.0, 800.0);
    const cplx m1 = moments(p, 1).m[1];
    const cplx laurent = 1.0 / far + m1 / (far * far);
    CHECK(std::abs(cauchy_transform(p, far) - laurent) < 1e-4 * std::abs(laurent));

    CHECK_THROWS_AS(cauchy_transform(PointSet{1.0, 2.0}, 2.0), PoleHit);
    CHECK_NOTHROW(cauchy_transform(PointSet{1.0, 2.0}, 2.0, std::size_t{1}));
}

TEST_CASE("log potential") {
    CHECK(log_potential(PointSet{0.0}, std::numbers::e) == Approx(2.0));
    CHECK(std::abs(log_potential(PointSet{1.0, -1.0}, 0.0)) < 1e-16);
    CHECK_THROWS_AS(log_potential(PointSet{1.0}, 1.0), PoleHit);

    // the Cauchy transform is the Wirtinger z-derivative of the log potential
    Rng rng(5);
    std::vector<cplx> z(25);
    for (auto& w : z) w = rng.complex_normal();
    const PointSet p(z);
    const double h = 1e-5;
    for (int i = 0; i < 20; ++i) {
        const cplx at = 2.0 * rng.complex_normal();
        const double dx = (log_potential(p, at + h) - log_potential(p, at - h)) / (2 * h);
        const double dy = (log_potential(p, at + cplx(0, h)) - log_potential(p, at - cplx(0, h))) / (2 * h);
        const cplx wirtinger = 0.5 * cplx(dx, -dy);
        const cplx g = cauchy_transform(p, at);
        CHECK(std::abs(wirtinger - g) < 1e-6 * std::max(1.0, std::abs(g)));
    }
}

TEST_CASE("elliptic push-forward") {
    CHECK(std::abs(pushforward_elliptic(PointSet{cplx(0, 1)}, 1.0).points[0]) == 0.0);
    CHECK(std::abs(pushforward_elliptic(PointSet{cplx(0.6, 0.8)}, 1.0).points[0] - 1.2) < 1e-15);
    CHECK_FALSE(pushforward_elliptic(PointSet{1.0}, 1.5).in_range);

    const auto disk = disk_sample(20000, 6);
    const auto image = pushforward_elliptic(disk, 1.0);
    CHECK(ks_against(real_parts(image.points), [](double x) { return semicircle_cdf(x, 1.0); }) <= 0.05);

    // composing t then t' gives z (1 + t t') + (t + t') conj(z)
    Rng rng(7);
    for (int i = 0; i < 100; ++i) {
        const double t = 2.0 * rng.uniform() - 1.0, u = 2.0 * rng.uniform() - 1.0;
        const cplx z = rng.complex_normal();
        const cplx twice = pushforward_elliptic(pushforward_elliptic(PointSet{z}, t).points, u).points[0];
        CHECK(std::abs(twice - (z * (1.0 + t * u) + (t + u) * std::conj(z))) < 1e-14);
    }
}

TEST_CASE("characteristic curves") {
    CHECK(std::abs(char_curve({cplx(0, 1), cplx(0, -1), -1.0, Mode::additive})) < 1e-16);
    const cplx z0(0.3, -1.1);
    CHECK(std::abs(char_curve({z0, 0.5 / z0, cplx(2.0, 7.0), Mode::multiplicative}) - z0) < 1e-15);
    CHECK(char_curve({1.0, 1.0, 0.6, Mode::multiplicative}).real() == Approx(std::exp(0.3)));
}

TEST_CASE("predicted clouds") {
    const auto two = predicted_cloud(PointSet{1.0, -1.0}, 1.0, Mode::additive);
    CHECK(max_pairing_distance(two, PointSet{0.75, -0.75}) < 1e-15);

    const PointSet sym{cplx(1, 0.5), cplx(-1, -0.5), cplx(0.2, 2.0), cplx(-0.2, -2.0)};
    const auto img = predicted_cloud(sym, cplx(0.3, 0.4), Mode::additive);
    CHECK(std::abs(img[0] + img[1]) < 1e-15);
    CHECK(std::abs(img[2] + img[3]) < 1e-15);

    const auto g = ginibre_eigs(256, 8);
    const auto pred = predicted_cloud(g, -1.0, Mode::additive);
    const auto push = pushforward_elliptic(g, 1.0);
    CHECK(energy_distance(pred, push.points) <= 0.05);

    CHECK_THROWS_AS(predicted_cloud(PointSet{1.0, 1.0}, 1.0, Mode::additive), CollisionDetected);
}

TEST_CASE("predicted displacement is the CM velocity to first order") {
    Rng rng(9);
    std::vector<cplx> z(10);
    for (auto& w : z) w = rng.complex_normal();
    const PointSet p(z);
    const auto v = cm_rational_rhs(p, 10);
    // predicted_cloud is linear in delta_tau, so the Richardson combination
    // of two step sizes isolates the first-order coefficient
    const cplx d1(1e-3, 0.0), d2(2e-3, 0.0);
    const auto a = predicted_cloud(p, d1, Mode::additive);
    const auto b = predicted_cloud(p, d2, Mode::additive);
    for (std::size_t j = 0; j < z.size(); ++j) {
        const cplx first = (4.0 * (a[j] - z[j]) - (b[j] - z[j])) / (4.0 * d1 - d2);
        CHECK(std::abs(first - v[j]) < 1e-9 * std::max(1.0, std::abs(v[j])));
    }
}

TEST_CASE("distances") {
    const auto a = disk_sample(500, 10);
    CHECK(energy_distance(a, a) == 0.0);
    CHECK(energy_distance(PointSet{0.0}, PointSet{1.0}) == Approx(std::sqrt(2.0)));
    CHECK(energy_distance(disk_sample(1000, 11), disk_sample(1000, 12)) <= 0.05);

    const auto r = distribution_distance({a}, {a});
    CHECK(r.energy == 0.0);
    CHECK(r.ks_re == 0.0);
    CHECK(r.ks_im == 0.0);
    CHECK(r.ks_abs == 0.0);

    CHECK(ks_two_sample({0.0, 1.0}, {2.0, 3.0}) == 1.0);
    CHECK(ks_against({0.5}, [](double x) { return std::clamp(x, 0.0, 1.0); }) == Approx(0.5));
}

TEST_CASE("reference samplers") {
    Rng rng(13);
    const std::size_t n = 100000;
    const auto sc = reference_sampler(ReferenceLaw::semicircle(1.0), n, rng);
    double s1 = 0.0, s2 = 0.0, s4 = 0.0;
    for (cplx z : sc) {
        CHECK(z.imag() == 0.0);
        s1 += z.real();
        s2 += z.real() * z.real();
        s4 += std::pow(z.real(), 4);
    }
    const double mean = s1 / n, second = s2 / n;
    // semicircle: variance 1, fourth moment 2 (Catalan numbers)
    CHECK(std::abs(mean) <= 3.0 * std::sqrt(1.0 / n));
    CHECK(std::abs(second - 1.0) <= 3.0 * std::sqrt((s4 / n - second * second) / n));

    Rng r1(14), r2(14);
    const auto e = reference_sampler(ReferenceLaw::ellipse(1.0, 1.0), 100, r1);
    const auto d = reference_sampler(ReferenceLaw::disk(), 100, r2);
    CHECK(max_pairing_distance(e, d) == 0.0);

    const auto pushed = pushforward_elliptic(disk_sample(2000, 15), 0.5).points;
    Rng r3(16);
    CHECK(energy_distance(pushed, reference_sampler(ReferenceLaw::ellipse(1.5, 0.5), 2000, r3)) <= 0.05);

    Rng r4(17);
    for (cplx z : reference_sampler(ReferenceLaw::circle(), 50, r4)) CHECK(std::abs(std::abs(z) - 1.0) < 1e-15);

    CHECK(ReferenceLaw::parse("ellipse(1.5,0.5)").a == 1.5);
    CHECK(ReferenceLaw::parse("semicircle(2)").s == 2.0);
    CHECK(ReferenceLaw::parse("disk").kind == ReferenceLaw::Kind::disk);
    CHECK_THROWS_AS(ReferenceLaw::parse("square"), ParseError);
}

TEST_CASE("semicircle density and CDF") {
    CHECK(semicircle_cdf(-2.0) == 0.0);
    CHECK(semicircle_cdf(0.0) == Approx(0.5));
    CHECK(semicircle_cdf(2.0) == 1.0);
    CHECK(semicircle_density(0.0) == Approx(1.0 / std::numbers::pi));
    // integrate the density numerically to the CDF
    const double s = 2.0;
    double acc = 0.0, prev = -2.0 * std::sqrt(s);
    const int steps = 200000;
    for (int i = 1; i <= steps; ++i) {
        const double x = -2.0 * std::sqrt(s) + 4.0 * std::sqrt(s) * i / steps;
        acc += 0.5 * (semicircle_density(prev, s) + semicircle_density(x, s)) * (x - prev);
        prev = x;
        if (i % 40000 == 0) CHECK(acc == Approx(semicircle_cdf(x, s)).margin(1e-6));
    }
}

TEST_CASE("serialization") {
    const PointSet p{cplx(0.1, -2.0), cplx(1e-300, 3.5)};
    const auto back = points_from_csv(points_csv(p));
    REQUIRE(back.size() == 2);
    CHECK(back[0] == p[0]);
    CHECK(back[1] == p[1]);
    CHECK_THROWS_AS(points_from_csv("re,im\n1,x\n"), ParseError);

    const auto j = nlohmann::json::parse(moments_json(moments(PointSet{1.0, cplx(0, 1)}, 2)));
    REQUIRE(j.size() == 3);
    CHECK(j[0][0] == 1.0);
    CHECK(j[2][0] == 0.0);
}
