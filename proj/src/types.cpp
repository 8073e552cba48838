#include "heatflow/types.hpp"

#include "heatflow/errors.hpp"

#include <cmath>
#include <limits>
#include <string>

namespace heatflow {

std::string_view to_string(Mode mode) {
    return mode == Mode::additive ? "additive" : "multiplicative";
}

Mode mode_from_string(std::string_view name) {
    if (name == "additive") return Mode::additive;
    if (name == "multiplicative") return Mode::multiplicative;
    throw InvalidArgument("unknown mode '" + std::string(name) + "'");
}

double PointSet::diameter() const {
    double d = 0.0;
    for (std::size_t i = 0; i < points.size(); ++i)
        for (std::size_t j = i + 1; j < points.size(); ++j)
            d = std::max(d, std::abs(points[i] - points[j]));
    return d;
}

double PointSet::min_separation(std::size_t* i_out, std::size_t* j_out) const {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < points.size(); ++i) {
        for (std::size_t j = i + 1; j < points.size(); ++j) {
            const double d = std::abs(points[i] - points[j]);
            if (d < best) {
                best = d;
                if (i_out) *i_out = i;
                if (j_out) *j_out = j;
            }
        }
    }
    return best;
}

bool PointSet::all_finite() const {
    for (cplx p : points)
        if (!std::isfinite(p.real()) || !std::isfinite(p.imag())) return false;
    return true;
}

}  // namespace heatflow
