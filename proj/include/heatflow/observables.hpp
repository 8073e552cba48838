#pragma once

// Moments, empirical transforms, push-forward and characteristic-curve maps,
// and distances between planar point clouds.

#include "heatflow/rng.hpp"
#include "heatflow/types.hpp"

#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace heatflow {

/// m_k = (1/N) sum_j z_j^k for k = 0..K.
struct MomentVector {
    std::vector<cplx> m;
    int N = 0;

    int K() const { return static_cast<int>(m.size()) - 1; }
};

MomentVector moments(const PointSet& points, int K);

/// Integrates dm_k/dtau = -(k/2) sum_{j=0}^{k-2} m_{k-j-2} m_j + k(k-1)/(2N) m_{k-2}
/// along the segment tau0 -> tau1. m_0 and m_1 have zero right-hand side and
/// are carried through unchanged.
MomentVector evolve_moments(const MomentVector& m0, int N, cplx tau0, cplx tau1, double rel_tol = 1e-13,
                            double abs_tol = 1e-15);

/// (1/n) sum_k 1/(z - w_k), optionally omitting index `exclude`. Throws PoleHit.
cplx cauchy_transform(const PointSet& points, cplx z, std::optional<std::size_t> exclude = std::nullopt);

/// (1/n) sum_k log|z - w_k|^2. Throws PoleHit.
double log_potential(const PointSet& points, cplx z);

struct Pushforward {
    PointSet points;
    /// -1 <= t <= 1
    bool in_range = true;
};

/// z -> z + t conj(z).
Pushforward pushforward_elliptic(const PointSet& points, double t);

struct CharCurveInput {
    cplx z0{};
    cplx g{};  ///< dS/dz at z0
    cplx delta_tau{};
    Mode mode = Mode::additive;
};

/// additive: z0 - delta_tau g; multiplicative: z0 exp{delta_tau (z0 g - 1/2)}.
cplx char_curve(const CharCurveInput& in);

/// char_curve at every point with g the self-excluded empirical Cauchy transform.
PointSet predicted_cloud(const PointSet& points, cplx delta_tau, Mode mode);

struct EmpiricalMeasure {
    PointSet support;
};

/// Energy distance with U-statistic within-sample terms, clamped at 0.
double energy_distance(const PointSet& a, const PointSet& b);

/// Two-sample Kolmogorov-Smirnov statistic.
double ks_two_sample(std::vector<double> a, std::vector<double> b);
/// One-sample KS statistic against a continuous CDF.
double ks_against(std::vector<double> a, const std::function<double(double)>& cdf);

struct DistanceReport {
    double energy = 0.0;
    double ks_re = 0.0;
    double ks_im = 0.0;
    double ks_abs = 0.0;
};

DistanceReport distribution_distance(const EmpiricalMeasure& a, const EmpiricalMeasure& b);

std::vector<double> real_parts(const PointSet& p);
std::vector<double> imag_parts(const PointSet& p);
std::vector<double> moduli(const PointSet& p);

/// Semicircle law of variance s on [-2 sqrt(s), 2 sqrt(s)].
double semicircle_density(double x, double s = 1.0);
double semicircle_cdf(double x, double s = 1.0);

struct ReferenceLaw {
    enum class Kind { semicircle, disk, ellipse, circle };
    Kind kind = Kind::disk;
    double s = 1.0;  ///< semicircle variance
    double a = 1.0;  ///< ellipse semi-axis along the real axis
    double b = 1.0;  ///< ellipse semi-axis along the imaginary axis

    static ReferenceLaw semicircle(double s) { return {Kind::semicircle, s, 1.0, 1.0}; }
    static ReferenceLaw disk() { return {Kind::disk, 1.0, 1.0, 1.0}; }
    static ReferenceLaw ellipse(double a, double b) { return {Kind::ellipse, 1.0, a, b}; }
    static ReferenceLaw circle() { return {Kind::circle, 1.0, 1.0, 1.0}; }
    /// "semicircle(2)", "disk", "ellipse(1.5,0.5)", "circle".
    static ReferenceLaw parse(std::string_view text);
};

/// i.i.d. samples. Semicircle samples are real parts of uniform points on the
/// disk of radius 2 sqrt(s); ellipse samples are the linear image of the disk.
PointSet reference_sampler(const ReferenceLaw& law, std::size_t n, Rng& rng);

/// "re,im" per row with a header.
std::string points_csv(const PointSet& p);
PointSet points_from_csv(std::string_view text);
/// [[re, im], ...]
std::string moments_json(const MomentVector& m);

}  // namespace heatflow
