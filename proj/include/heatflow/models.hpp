#pragma once

// Random matrix ensembles: GUE, rotated elliptic Z_{s,tau}, Haar unitaries,
// the discretized GL(N) Brownian motion B_{s,tau}, and the additive /
// multiplicative models built from them.

#include "heatflow/rng.hpp"
#include "heatflow/types.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <span>
#include <vector>

namespace heatflow {

using ComplexMatrix = Eigen::MatrixXcd;

/// Variance s and covariance tau of an elliptic model:
///   s   = E (1/N) Tr(Z* Z)
///   tau = s - E (1/N) Tr(Z^2)
/// Matrix models exist only for |tau - s| <= s. `allow_extended` admits tau
/// outside that disk for operator-only experiments; of those, only the
/// negative real axis has a (Hermitian) matrix realization.
struct EllipticParams {
    double s = 1.0;
    cplx tau{1.0, 0.0};
    bool allow_extended = false;

    bool in_disk() const;
    /// s > 0 (or the degenerate s = tau = 0); in-disk unless extended.
    void validate() const;
};

/// Z = e^{i theta} (a X + i b Y) with unit-variance GUEs X, Y.
struct EllipticDecomposition {
    double a = 0.0;
    double b = 0.0;
    double theta = 0.0;
};

EllipticDecomposition elliptic_decompose(const EllipticParams& params);

enum class BrownianScheme {
    euler,          ///< prod (I + i Z_j/sqrt(k) - (s - tau)/(2k) I)
    exact_unitary,  ///< prod exp(i Z_j/sqrt(k)); tau = 0 only
};

/// Deterministic eigenvalues of X0 / A0 / U0, or one of two shortcuts.
struct InitialSpectrum {
    enum class Kind { values, haar_unitary, zero };
    Kind kind = Kind::zero;
    std::vector<cplx> values;

    static InitialSpectrum zero() { return {Kind::zero, {}}; }
    static InitialSpectrum haar_unitary() { return {Kind::haar_unitary, {}}; }
    static InitialSpectrum from_values(std::vector<cplx> v) { return {Kind::values, std::move(v)}; }
};

struct ModelSpec {
    Mode kind = Mode::additive;
    int N = 1;
    EllipticParams params;
    InitialSpectrum initial;
    /// Brownian discretization count k; 0 selects default_brownian_steps.
    int brownian_steps = 0;
    BrownianScheme scheme = BrownianScheme::euler;
    std::uint64_t seed = 0;

    int steps() const;
    void validate() const;
};

/// k = 100 * max(1, ceil(s + |tau|)).
int default_brownian_steps(const EllipticParams& params);

/// Hermitian, E (1/N) Tr X^2 = s. Always consumes N^2 normals.
ComplexMatrix sample_gue(int N, double s, Rng& rng);

/// Sample of Z_{s,tau}. In-disk parameters always consume two GUE draws (X then
/// Y) whatever tau is, so equal seeds give common random numbers across tau.
/// Extended tau = -t < 0 returns a GUE of variance s + t.
ComplexMatrix sample_elliptic(int N, const EllipticParams& params, Rng& rng);

/// e^{i theta} (a X + i b Y) from supplied unit-variance GUEs.
ComplexMatrix combine_elliptic(const ComplexMatrix& X, const ComplexMatrix& Y,
                               const EllipticDecomposition& d);

/// Haar unitary via QR of a complex Ginibre matrix with phase correction.
ComplexMatrix sample_haar_unitary(int N, Rng& rng);

/// Discretized GL(N) Brownian motion B_{s,tau} at time 1 with `steps` factors.
ComplexMatrix sample_gl_brownian(int N, const EllipticParams& params, int steps, Rng& rng,
                                 BrownianScheme scheme = BrownianScheme::euler);

/// additive: diag(initial) + Z_{s,tau};  multiplicative: diag(initial) B_{s,tau}.
ComplexMatrix build_model_matrix(const ModelSpec& spec, Rng& rng);

/// Dense nonsymmetric eigenvalues (with multiplicity).
PointSet eigenvalues(const ComplexMatrix& m);

struct ParamEstimate {
    double s_hat = 0.0;
    cplx tau_hat{};
    double s_se = 0.0;
    /// Standard errors of the real and imaginary parts of tau_hat.
    cplx tau_se{};
};

/// Trace estimators of (s, tau) with jackknife standard errors.
ParamEstimate estimate_params(std::span<const ComplexMatrix> samples);

}  // namespace heatflow
