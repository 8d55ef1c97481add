#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "bgcount/grid.hpp"

namespace bgcount {

/// Smallest head diameter assigned to any annotated person, in pixels.
inline constexpr double kMinHeadDiameter = 15.0;
/// Standard deviation of the fixed ground-truth Gaussian kernel, in pixels.
inline constexpr double kDefaultDensitySigma = 15.0;
/// Kernels are cut off at this many standard deviations.
inline constexpr double kKernelTruncation = 4.0;

/// Annotated head position. Integer coordinates are pixel centers, so a point
/// is in bounds when 0 <= x < width and 0 <= y < height.
struct HeadPoint {
    double x = 0.0;
    double y = 0.0;
    std::optional<double> size_hint;  // externally supplied head side length
};

struct AnnotatedImage {
    std::string image_id;
    std::size_t width = 0;
    std::size_t height = 0;
    std::vector<HeadPoint> points;

    std::size_t count() const noexcept { return points.size(); }
};

/// Head detector box; (x, y) is the top-left corner.
struct Detection {
    double x = 0.0;
    double y = 0.0;
    double w = 0.0;
    double h = 0.0;
    double score = 0.0;

    double center_x() const noexcept { return x + 0.5 * w; }
    double center_y() const noexcept { return y + 0.5 * h; }
    double diagonal() const noexcept;
};

struct HeadSizeEstimate {
    double diameter = kMinHeadDiameter;
};

/// Throws ParameterError if any point lies outside the image.
void check_points_in_bounds(const AnnotatedImage& img);

/// Assigns every point a head diameter d = max(s, 15).
///
/// Detections are matched one-to-one with points by greedy nearest-center
/// matching over all (point, detection) pairs sorted by center distance, ties
/// broken by point index then detection index. A pair is admissible only when
/// the distance does not exceed the box diagonal. A matched point takes
/// s = max(w, h); an unmatched point falls back to its size hint, then to 15.
std::vector<HeadSizeEstimate> estimate_head_sizes(const AnnotatedImage& img,
                                                  std::span<const Detection> detections);

/// Foreground mask: pixel (row j, col k) is set iff (k, j) lies within
/// distance d_i * alpha / 2 of some head point. Intersected with `roi` when
/// one is given.
BinaryMask build_foreground_mask(const AnnotatedImage& img,
                                 std::span<const HeadSizeEstimate> sizes, double alpha,
                                 const BinaryMask* roi = nullptr);

/// Ground-truth density: one isotropic Gaussian per point, truncated to a
/// disk of radius 4*sigma and renormalized so its in-image mass is exactly 1.
DensityMap gaussian_density_map(const AnnotatedImage& img, double sigma = kDefaultDensitySigma);

struct AnnotationLoadReport {
    std::size_t records = 0;
    std::size_t points = 0;
    std::size_t clamped_points = 0;
};

struct AnnotationSet {
    std::vector<AnnotatedImage> images;
    AnnotationLoadReport report;
};

using DetectionIndex = std::map<std::string, std::vector<Detection>>;

/// JSON lines: {"image_id", "width", "height", "points": [{"x","y","size"}]}.
/// Out-of-bounds points are clamped into the image and counted.
AnnotationSet parse_annotations(std::istream& in);
AnnotationSet load_annotations(const std::filesystem::path& path);

/// JSON lines: {"image_id", "boxes": [{"x","y","w","h","score"}]}.
DetectionIndex parse_detections(std::istream& in);
DetectionIndex load_detections(const std::filesystem::path& path);

}  // namespace bgcount
