#include "heatflow/artifacts.hpp"

#include "heatflow/errors.hpp"

#include <openssl/sha.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

namespace heatflow {

std::string sha256_hex(std::string_view bytes) {
    unsigned char digest[SHA256_DIGEST_LENGTH];
    SHA256(reinterpret_cast<const unsigned char*>(bytes.data()), bytes.size(), digest);
    static constexpr char hex[] = "0123456789abcdef";
    std::string out;
    out.reserve(2 * SHA256_DIGEST_LENGTH);
    for (unsigned char c : digest) {
        out += hex[c >> 4];
        out += hex[c & 0xf];
    }
    return out;
}

FileRecord write_artifact(const std::filesystem::path& dir, const std::string& name, std::string_view content) {
    std::filesystem::create_directories(dir);
    const auto path = dir / name;
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os) throw InvalidArgument("cannot open " + path.string() + " for writing");
    os.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!os) throw InvalidArgument("write to " + path.string() + " failed");
    return {name, sha256_hex(content), content.size()};
}

HistAxis hist_axis_from_string(std::string_view name) {
    if (name == "re") return HistAxis::re;
    if (name == "im") return HistAxis::im;
    if (name == "arg") return HistAxis::arg;
    if (name == "abs") return HistAxis::abs;
    throw InvalidArgument("unknown histogram axis '" + std::string(name) + "'");
}

std::string Histogram::to_csv() const {
    std::string out = "left,right,count\n";
    char buf[96];
    for (std::size_t b = 0; b < counts.size(); ++b) {
        std::snprintf(buf, sizeof buf, "%.17g,%.17g,%zu\n", edges[b], edges[b + 1], counts[b]);
        out += buf;
    }
    return out;
}

Histogram emit_histogram(const PointSet& points, HistAxis axis, int bins) {
    if (bins < 2) throw InvalidArgument("histogram needs at least two bins");
    if (points.empty()) throw InvalidArgument("histogram of an empty set");
    std::vector<double> v;
    v.reserve(points.size());
    for (cplx z : points) {
        switch (axis) {
        case HistAxis::re: v.push_back(z.real()); break;
        case HistAxis::im: v.push_back(z.imag()); break;
        case HistAxis::arg: v.push_back(std::arg(z)); break;
        case HistAxis::abs: v.push_back(std::abs(z)); break;
        }
    }
    auto [lo_it, hi_it] = std::minmax_element(v.begin(), v.end());
    double lo = *lo_it, hi = *hi_it;
    if (lo == hi) {
        lo -= 0.5;
        hi += 0.5;
    }
    Histogram h;
    const auto nb = static_cast<std::size_t>(bins);
    h.edges.resize(nb + 1);
    for (std::size_t b = 0; b <= nb; ++b) h.edges[b] = lo + (hi - lo) * static_cast<double>(b) / static_cast<double>(nb);
    h.edges[nb] = hi;
    h.counts.assign(nb, 0);
    for (double x : v) {
        auto b = static_cast<std::size_t>(std::upper_bound(h.edges.begin(), h.edges.end(), x) - h.edges.begin());
        b = b == 0 ? 0 : b - 1;
        h.counts[std::min(b, nb - 1)] += 1;
    }
    return h;
}

}  // namespace heatflow
