#pragma once

// Output plumbing: content hashes, file emission, histograms.

#include "heatflow/types.hpp"

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace heatflow {

/// Lowercase hex SHA-256 of the bytes.
std::string sha256_hex(std::string_view bytes);

struct FileRecord {
    std::string path;  ///< relative to the run's output directory
    std::string sha256;
    std::size_t bytes = 0;
};

/// Writes `content` to dir/name (creating dir) and returns its record.
FileRecord write_artifact(const std::filesystem::path& dir, const std::string& name, std::string_view content);

enum class HistAxis { re, im, arg, abs };
HistAxis hist_axis_from_string(std::string_view name);

struct Histogram {
    std::vector<double> edges;  ///< bins + 1 edges
    std::vector<std::size_t> counts;

    /// Header "left,right,count".
    std::string to_csv() const;
};

/// Equal-width bins over the data range. Bins are left-closed [e_i, e_{i+1})
/// except the last, which also holds the maximum. A degenerate range is
/// widened to [x - 1/2, x + 1/2].
Histogram emit_histogram(const PointSet& points, HistAxis axis, int bins);

}  // namespace heatflow
