#include "heatflow/models.hpp"

#include "heatflow/errors.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

namespace heatflow {

namespace {

constexpr double kDiskSlack = 1e-12;

void fill_gue(ComplexMatrix& out, double s, Rng& rng) {
    const Eigen::Index n = out.rows();
    const double diag_sd = std::sqrt(s / static_cast<double>(n));
    const double off_sd = std::sqrt(s / (2.0 * static_cast<double>(n)));
    for (Eigen::Index i = 0; i < n; ++i) {
        out(i, i) = cplx(diag_sd * rng.normal(), 0.0);
        for (Eigen::Index j = i + 1; j < n; ++j) {
            const double re = off_sd * rng.normal();
            const double im = off_sd * rng.normal();
            out(i, j) = cplx(re, im);
            out(j, i) = cplx(re, -im);
        }
    }
}

bool is_negative_real(cplx tau) { return tau.imag() == 0.0 && tau.real() < 0.0; }

// Z_{s,tau} into `out`, reusing X and Y as scratch.
void fill_elliptic(ComplexMatrix& out, ComplexMatrix& X, ComplexMatrix& Y,
                   const EllipticParams& params, const EllipticDecomposition* d, Rng& rng) {
    if (d == nullptr) {
        // extended negative-real tau: GUE of variance s + t
        fill_gue(out, params.s - params.tau.real(), rng);
        return;
    }
    fill_gue(X, 1.0, rng);
    fill_gue(Y, 1.0, rng);
    const cplx rot = std::polar(1.0, d->theta);
    out = (rot * d->a) * X + (rot * cplx(0.0, d->b)) * Y;
}

}  // namespace

bool EllipticParams::in_disk() const { return std::abs(tau - s) <= s * (1.0 + kDiskSlack); }

void EllipticParams::validate() const {
    if (!std::isfinite(s) || !std::isfinite(tau.real()) || !std::isfinite(tau.imag()))
        throw InvalidArgument("non-finite elliptic parameters");
    if (s < 0.0) throw InvalidArgument("variance s must be positive");
    if (s == 0.0 && tau != cplx(0.0, 0.0))
        throw InvalidArgument("s = 0 is only admitted with tau = 0 (degenerate model)");
    if (!allow_extended && !in_disk())
        throw InvalidArgument("|tau - s| > s requires allow_extended");
}

EllipticDecomposition elliptic_decompose(const EllipticParams& params) {
    if (params.s < 0.0) throw InvalidArgument("variance s must be nonnegative");
    // + 0.0 drops a negative zero so tau = 2s gives theta = +pi/2
    const cplx diff(params.s - params.tau.real(), -params.tau.imag() + 0.0);
    const double r = std::abs(diff);
    if (r > params.s * (1.0 + kDiskSlack))
        throw ExtendedRange("no elliptic decomposition for |tau - s| > s");
    const double rr = std::min(r, params.s);
    EllipticDecomposition d;
    d.a = std::sqrt((params.s + rr) / 2.0);
    d.b = std::sqrt(std::max(0.0, (params.s - rr) / 2.0));
    d.theta = (diff == cplx(0.0, 0.0)) ? 0.0 : std::arg(diff) / 2.0;
    return d;
}

int default_brownian_steps(const EllipticParams& params) {
    const double scale = std::ceil(params.s + std::abs(params.tau));
    return 100 * static_cast<int>(std::max(1.0, scale));
}

int ModelSpec::steps() const {
    return brownian_steps > 0 ? brownian_steps : default_brownian_steps(params);
}

void ModelSpec::validate() const {
    if (N < 1) throw InvalidArgument("matrix dimension must be positive");
    params.validate();
    if (brownian_steps < 0) throw InvalidArgument("brownian_steps must be nonnegative");
    switch (initial.kind) {
    case InitialSpectrum::Kind::values:
        if (static_cast<int>(initial.values.size()) != N)
            throw InvalidArgument("initial spectrum has " + std::to_string(initial.values.size()) +
                                  " values, expected " + std::to_string(N));
        for (cplx v : initial.values) {
            if (!std::isfinite(v.real()) || !std::isfinite(v.imag()))
                throw InvalidArgument("non-finite initial eigenvalue");
            if (kind == Mode::multiplicative && v == cplx(0.0, 0.0))
                throw InvalidArgument("multiplicative initial spectrum must be nonzero");
        }
        break;
    case InitialSpectrum::Kind::zero:
        if (kind == Mode::multiplicative)
            throw InvalidArgument("multiplicative model needs a nonzero initial spectrum");
        break;
    case InitialSpectrum::Kind::haar_unitary:
        break;
    }
    if (scheme == BrownianScheme::exact_unitary && params.tau != cplx(0.0, 0.0))
        throw InvalidArgument("exact-unitary Brownian scheme requires tau = 0");
}

ComplexMatrix sample_gue(int N, double s, Rng& rng) {
    if (N < 1) throw InvalidArgument("matrix dimension must be positive");
    ComplexMatrix out(N, N);
    fill_gue(out, s, rng);
    return out;
}

ComplexMatrix combine_elliptic(const ComplexMatrix& X, const ComplexMatrix& Y,
                               const EllipticDecomposition& d) {
    const cplx rot = std::polar(1.0, d.theta);
    return (rot * d.a) * X + (rot * cplx(0.0, d.b)) * Y;
}

ComplexMatrix sample_elliptic(int N, const EllipticParams& params, Rng& rng) {
    if (N < 1) throw InvalidArgument("matrix dimension must be positive");
    ComplexMatrix out(N, N), X(N, N), Y(N, N);
    if (params.in_disk()) {
        const auto d = elliptic_decompose(params);
        fill_elliptic(out, X, Y, params, &d, rng);
        return out;
    }
    if (params.allow_extended && is_negative_real(params.tau)) {
        fill_elliptic(out, X, Y, params, nullptr, rng);
        return out;
    }
    throw ExtendedRange("no matrix model for tau outside the disk off the negative real axis");
}

ComplexMatrix sample_haar_unitary(int N, Rng& rng) {
    if (N < 1) throw InvalidArgument("matrix dimension must be positive");
    ComplexMatrix g(N, N);
    for (int j = 0; j < N; ++j)
        for (int i = 0; i < N; ++i) g(i, j) = rng.complex_normal(1.0);
    Eigen::HouseholderQR<ComplexMatrix> qr(g);
    ComplexMatrix q = qr.householderQ();
    const ComplexMatrix& r = qr.matrixQR();
    for (int j = 0; j < N; ++j) {
        const cplx d = r(j, j);
        const double m = std::abs(d);
        q.col(j) *= (m > 0.0) ? d / m : cplx(1.0, 0.0);
    }
    return q;
}

ComplexMatrix sample_gl_brownian(int N, const EllipticParams& params, int steps, Rng& rng,
                                 BrownianScheme scheme) {
    if (N < 1) throw InvalidArgument("matrix dimension must be positive");
    if (steps < 1) throw InvalidArgument("Brownian step count must be positive");
    params.validate();
    const auto d = elliptic_decompose(params);
    const double k = static_cast<double>(steps);
    const cplx drift = 1.0 - (params.s - params.tau) / (2.0 * k);
    const cplx kick(0.0, 1.0 / std::sqrt(k));

    ComplexMatrix B = ComplexMatrix::Identity(N, N);
    ComplexMatrix Z(N, N), X(N, N), Y(N, N), F(N, N), tmp(N, N);

    if (scheme == BrownianScheme::exact_unitary) {
        if (params.tau != cplx(0.0, 0.0))
            throw InvalidArgument("exact-unitary Brownian scheme requires tau = 0");
        Eigen::SelfAdjointEigenSolver<ComplexMatrix> es;
        Eigen::VectorXcd phases(N);
        for (int step = 0; step < steps; ++step) {
            fill_elliptic(Z, X, Y, params, &d, rng);
            es.compute(Z);
            for (int i = 0; i < N; ++i)
                phases(i) = std::polar(1.0, es.eigenvalues()(i) / std::sqrt(k));
            F.noalias() = es.eigenvectors() * phases.asDiagonal() * es.eigenvectors().adjoint();
            tmp.noalias() = B * F;
            B.swap(tmp);
        }
        return B;
    }

    for (int step = 0; step < steps; ++step) {
        fill_elliptic(Z, X, Y, params, &d, rng);
        F = kick * Z;
        F.diagonal().array() += drift;
        tmp.noalias() = B * F;
        B.swap(tmp);
    }
    return B;
}

ComplexMatrix build_model_matrix(const ModelSpec& spec, Rng& rng) {
    spec.validate();
    const int N = spec.N;
    ComplexMatrix A0;
    switch (spec.initial.kind) {
    case InitialSpectrum::Kind::zero:
        A0 = ComplexMatrix::Zero(N, N);
        break;
    case InitialSpectrum::Kind::haar_unitary:
        A0 = sample_haar_unitary(N, rng);
        break;
    case InitialSpectrum::Kind::values:
        A0 = ComplexMatrix::Zero(N, N);
        for (int i = 0; i < N; ++i) A0(i, i) = spec.initial.values[static_cast<std::size_t>(i)];
        break;
    }
    if (spec.kind == Mode::additive) return A0 + sample_elliptic(N, spec.params, rng);
    return A0 * sample_gl_brownian(N, spec.params, spec.steps(), rng, spec.scheme);
}

PointSet eigenvalues(const ComplexMatrix& m) {
    if (m.rows() != m.cols()) throw InvalidArgument("eigenvalues of a non-square matrix");
    if (!m.allFinite()) throw InvalidArgument("matrix has non-finite entries");
    const Eigen::Index n = m.rows();
    if (n == 1) return PointSet{m(0, 0)};
    Eigen::ComplexEigenSolver<ComplexMatrix> es;
    es.setMaxIterations(60 * n);
    es.compute(m, false);
    if (es.info() != Eigen::Success) throw NoConvergence("dense eigensolver iteration cap reached");
    const auto& ev = es.eigenvalues();
    return PointSet(std::vector<cplx>(ev.data(), ev.data() + ev.size()));
}

ParamEstimate estimate_params(std::span<const ComplexMatrix> samples) {
    const std::size_t M = samples.size();
    if (M < 2) throw InsufficientSamples("need at least two samples");
    const Eigen::Index N = samples.front().rows();
    std::vector<double> svals(M);
    std::vector<cplx> tvals(M);
    for (std::size_t i = 0; i < M; ++i) {
        const auto& Z = samples[i];
        if (Z.rows() != N || Z.cols() != N) throw InvalidArgument("samples of unequal dimension");
        const double n = static_cast<double>(N);
        const double tr_ss = Z.squaredNorm() / n;
        const cplx tr_sq = Z.cwiseProduct(Z.transpose()).sum() / n;
        svals[i] = tr_ss;
        tvals[i] = tr_ss - tr_sq;
    }

    // Jackknife over leave-one-out means.
    auto jackknife = [M](auto const& vals, auto zero) {
        auto total = zero;
        for (auto v : vals) total += v;
        const double m = static_cast<double>(M);
        const auto mean = total / m;
        double acc_re = 0.0, acc_im = 0.0;
        for (auto v : vals) {
            const auto loo = (total - v) / (m - 1.0);
            const auto dev = loo - mean;
            acc_re += std::real(dev) * std::real(dev);
            acc_im += std::imag(dev) * std::imag(dev);
        }
        const double f = (m - 1.0) / m;
        return std::tuple{mean, std::sqrt(f * acc_re), std::sqrt(f * acc_im)};
    };

    ParamEstimate est;
    auto [s_mean, s_se, s_unused] = jackknife(svals, 0.0);
    (void)s_unused;
    auto [t_mean, t_se_re, t_se_im] = jackknife(tvals, cplx{});
    est.s_hat = s_mean;
    est.s_se = s_se;
    est.tau_hat = t_mean;
    est.tau_se = cplx(t_se_re, t_se_im);
    return est;
}

}  // namespace heatflow
