#pragma once

// Monte Carlo second moments D(z) = E |det(z - M)|^2 of the random models,
// evaluated either directly at tau or by heat-evolving samples drawn at tau0,
// with the comparison table, the log-determinant pair (T, S) and a
// finite-difference check of the PDE in tau.

#include "heatflow/models.hpp"
#include "heatflow/mp.hpp"
#include "heatflow/types.hpp"

#include <string>
#include <vector>

namespace heatflow {

enum class Route { direct, heatflow };
std::string_view to_string(Route r);

struct McOpts {
    /// Worker threads; results do not depend on it.
    int threads = 1;
    /// Fixed block count for the reduction and the median-of-means diagnostic.
    int blocks = 32;
    /// Working precision for the heatflow route; 0 means default_precision(N).
    mp::Precision precision_bits = 0;
};

struct SecondMomentReport {
    std::vector<cplx> z_grid;
    std::vector<double> estimates;
    std::vector<double> std_errors;
    /// Robustness diagnostic only.
    std::vector<double> median_of_means;
    std::size_t M = 0;
    Route route = Route::direct;
    ModelSpec spec;
    cplx tau0{};
    cplx tau{};

    std::string to_json() const;
};

/// Samples spec (at spec.params.tau) and averages |prod (z - lambda_j)|^2 over
/// the grid. Sample i uses Rng(spec.seed, stream) with a route-specific stream.
SecondMomentReport estimate_D_direct(const ModelSpec& spec, const std::vector<cplx>& z_grid, std::size_t M,
                                     const McOpts& opts = {});

/// Samples spec at tau0 = spec.params.tau, heat-evolves each characteristic
/// polynomial by tau - tau0 and averages |q(z)|^2.
SecondMomentReport estimate_D_heatflow(const ModelSpec& spec, cplx tau, const std::vector<cplx>& z_grid,
                                       std::size_t M, const McOpts& opts = {});

struct VerdictRow {
    cplx z{};
    double lhs = 0.0;
    double rhs = 0.0;
    double combined_se = 0.0;
    double z_score = 0.0;
    bool pass = false;
};

struct VerdictTable {
    std::vector<VerdictRow> rows;
    double threshold = 4.0;
    double pass_fraction = 0.0;
    bool overall_pass = false;

    std::string to_csv() const;
};

/// Per-point z-scores; overall pass when at least `required_fraction` of the
/// points satisfy |lhs - rhs| <= threshold * combined SE. Throws GridMismatch.
VerdictTable verify_deformation(const SecondMomentReport& lhs, const SecondMomentReport& rhs,
                                double threshold = 4.0, double required_fraction = 0.85);

struct TSReport {
    std::vector<cplx> z_grid;
    /// (1/N) log E|det|^2
    std::vector<double> T;
    std::vector<double> T_se;
    /// E (1/N) log|det|^2
    std::vector<double> S;
    std::vector<double> S_se;
    std::size_t M = 0;
};

/// Throws NonpositiveMean when a grid point's mean determinant vanishes.
TSReport estimate_T_and_S(const ModelSpec& spec, const std::vector<cplx>& z_grid, std::size_t M,
                          const McOpts& opts = {});

struct PdeResidual {
    cplx d_dtau{};      ///< finite-difference Wirtinger tau-derivative of D
    cplx spatial{};     ///< the mode's z-operator applied to D
    cplx residual{};    ///< d_dtau - spatial, averaged per sample
    double se_re = 0.0;
    double se_im = 0.0;
    double D = 0.0;
    std::size_t M = 0;
    bool pass = false;  ///< |residual| <= 4 sqrt(se_re^2 + se_im^2)
};

/// additive:        dD/dtau = (1/2N) d^2D/dz^2
/// multiplicative:  dD/dtau = -(1/2N) (z^2 d^2D/dz^2 - (N-2) z dD/dz - N D)
/// Every stencil point of one sample reuses that sample's random stream, so
/// the finite differences see common random numbers. The Brownian step count
/// is pinned to its value at tau0. Throws StencilIllConditioned.
PdeResidual pde_residual_check(const ModelSpec& spec, cplx z0, double h_tau, double h_z, std::size_t M,
                               const McOpts& opts = {});

/// 3x3 grid over the square bounding the expected support, inset 10% from its edges.
std::vector<cplx> default_grid(const ModelSpec& spec);

}  // namespace heatflow
