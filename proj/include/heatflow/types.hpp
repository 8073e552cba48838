#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

namespace heatflow {

using cplx = std::complex<double>;

/// Which heat-type operator (and which random matrix model) is in play.
enum class Mode { additive, multiplicative };

std::string_view to_string(Mode mode);
Mode mode_from_string(std::string_view name);

/// Unordered multiset of points in the plane: eigenvalues or polynomial zeros.
/// Index order carries no meaning except inside a TrajectoryBundle.
struct PointSet {
    std::vector<cplx> points;

    PointSet() = default;
    explicit PointSet(std::vector<cplx> pts) : points(std::move(pts)) {}
    PointSet(std::initializer_list<cplx> pts) : points(pts) {}

    std::size_t size() const { return points.size(); }
    bool empty() const { return points.empty(); }
    const cplx& operator[](std::size_t i) const { return points[i]; }
    cplx& operator[](std::size_t i) { return points[i]; }
    auto begin() const { return points.begin(); }
    auto end() const { return points.end(); }
    std::span<const cplx> view() const { return points; }

    /// Largest pairwise distance.
    double diameter() const;
    /// Smallest pairwise distance, with the indices realizing it.
    double min_separation(std::size_t* i = nullptr, std::size_t* j = nullptr) const;
    bool all_finite() const;
};

}  // namespace heatflow
