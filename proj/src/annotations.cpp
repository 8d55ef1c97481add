#include "bgcount/annotations.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <set>
#include <tuple>

#include <json.hpp>

namespace bgcount {

double Detection::diagonal() const noexcept { return std::hypot(w, h); }

void check_points_in_bounds(const AnnotatedImage& img) {
    const double w = static_cast<double>(img.width);
    const double h = static_cast<double>(img.height);
    for (std::size_t i = 0; i < img.points.size(); ++i) {
        const auto& p = img.points[i];
        if (!(p.x >= 0.0 && p.x < w && p.y >= 0.0 && p.y < h)) {
            throw ParameterError("image '" + img.image_id + "': point " + std::to_string(i) +
                                 " out of bounds");
        }
    }
}

std::vector<HeadSizeEstimate> estimate_head_sizes(const AnnotatedImage& img,
                                                  std::span<const Detection> detections) {
    struct Candidate {
        double distance;
        std::size_t point;
        std::size_t detection;
    };
    std::vector<Candidate> candidates;
    for (std::size_t p = 0; p < img.points.size(); ++p) {
        for (std::size_t d = 0; d < detections.size(); ++d) {
            const auto& det = detections[d];
            const double dist = std::hypot(img.points[p].x - det.center_x(),
                                           img.points[p].y - det.center_y());
            if (dist <= det.diagonal()) candidates.push_back({dist, p, d});
        }
    }
    std::sort(candidates.begin(), candidates.end(), [](const Candidate& a, const Candidate& b) {
        return std::tie(a.distance, a.point, a.detection) < std::tie(b.distance, b.point, b.detection);
    });

    std::vector<std::optional<double>> matched(img.points.size());
    std::vector<bool> used(detections.size(), false);
    for (const auto& c : candidates) {
        if (matched[c.point] || used[c.detection]) continue;
        matched[c.point] = std::max(detections[c.detection].w, detections[c.detection].h);
        used[c.detection] = true;
    }

    std::vector<HeadSizeEstimate> sizes;
    sizes.reserve(img.points.size());
    for (std::size_t p = 0; p < img.points.size(); ++p) {
        const double s = matched[p].value_or(img.points[p].size_hint.value_or(kMinHeadDiameter));
        sizes.push_back({std::max(s, kMinHeadDiameter)});
    }
    return sizes;
}

namespace {

struct Window {
    std::size_t row0, row1, col0, col1;  // inclusive; empty when row0 > row1
};

// Pixels whose centers may lie within `radius` of (x, y), clipped to the image.
Window clip_window(double x, double y, double radius, std::size_t height, std::size_t width) {
    const double r0 = std::max(0.0, std::ceil(y - radius));
    const double r1 = std::min(static_cast<double>(height) - 1.0, std::floor(y + radius));
    const double c0 = std::max(0.0, std::ceil(x - radius));
    const double c1 = std::min(static_cast<double>(width) - 1.0, std::floor(x + radius));
    if (height == 0 || width == 0 || r0 > r1 || c0 > c1) return {1, 0, 1, 0};
    return {static_cast<std::size_t>(r0), static_cast<std::size_t>(r1), static_cast<std::size_t>(c0),
            static_cast<std::size_t>(c1)};
}

}  // namespace

BinaryMask build_foreground_mask(const AnnotatedImage& img,
                                 std::span<const HeadSizeEstimate> sizes, double alpha,
                                 const BinaryMask* roi) {
    if (sizes.size() != img.points.size()) {
        throw ShapeError("build_foreground_mask: " + std::to_string(sizes.size()) + " sizes for " +
                         std::to_string(img.points.size()) + " points");
    }
    if (!(alpha > 0.0) || !std::isfinite(alpha)) {
        throw ParameterError("build_foreground_mask: alpha must be positive");
    }
    BinaryMask mask(img.height, img.width);
    for (std::size_t i = 0; i < img.points.size(); ++i) {
        const auto& p = img.points[i];
        const double radius = sizes[i].diameter * alpha / 2.0;
        const double r2 = radius * radius;
        const Window win = clip_window(p.x, p.y, radius, img.height, img.width);
        for (std::size_t j = win.row0; j <= win.row1; ++j) {
            const double dy = static_cast<double>(j) - p.y;
            for (std::size_t k = win.col0; k <= win.col1; ++k) {
                const double dx = static_cast<double>(k) - p.x;
                if (dx * dx + dy * dy <= r2) mask(j, k) = 1;
            }
        }
    }
    if (roi != nullptr) {
        require_same_shape(mask, *roi, "build_foreground_mask roi");
        return intersect(mask, *roi);
    }
    return mask;
}

DensityMap gaussian_density_map(const AnnotatedImage& img, double sigma) {
    if (!(sigma > 0.0) || !std::isfinite(sigma)) {
        throw ParameterError("gaussian_density_map: sigma must be positive");
    }
    check_points_in_bounds(img);
    DensityMap density(img.height, img.width);
    const double radius = kKernelTruncation * sigma;
    const double r2 = radius * radius;
    const double inv_two_var = 1.0 / (2.0 * sigma * sigma);
    std::vector<double> weights;

    for (const auto& p : img.points) {
        const Window win = clip_window(p.x, p.y, radius, img.height, img.width);
        weights.clear();
        double mass = 0.0;
        for (std::size_t j = win.row0; j <= win.row1; ++j) {
            const double dy = static_cast<double>(j) - p.y;
            for (std::size_t k = win.col0; k <= win.col1; ++k) {
                const double dx = static_cast<double>(k) - p.x;
                const double d2 = dx * dx + dy * dy;
                const double w = d2 <= r2 ? std::exp(-d2 * inv_two_var) : 0.0;
                weights.push_back(w);
                mass += w;
            }
        }
        if (!(mass > 0.0)) {
            // Kernel underflowed everywhere (sigma far below a pixel).
            const auto row = std::min(static_cast<std::size_t>(std::lround(p.y)), img.height - 1);
            const auto col = std::min(static_cast<std::size_t>(std::lround(p.x)), img.width - 1);
            density(row, col) += 1.0;
            continue;
        }
        std::size_t n = 0;
        for (std::size_t j = win.row0; j <= win.row1; ++j) {
            for (std::size_t k = win.col0; k <= win.col1; ++k) {
                density(j, k) += weights[n++] / mass;
            }
        }
    }
    return density;
}

namespace {

using nlohmann::json;

double require_number(const json& obj, const char* key, std::size_t line) {
    const auto it = obj.find(key);
    if (it == obj.end() || !it->is_number()) {
        throw ParseError(std::string("missing or non-numeric '") + key + "'", line);
    }
    const double v = it->get<double>();
    if (!std::isfinite(v)) throw ParseError(std::string("non-finite '") + key + "'", line);
    return v;
}

std::size_t require_unsigned(const json& obj, const char* key, std::size_t line) {
    const auto it = obj.find(key);
    if (it == obj.end() || !it->is_number_integer() || it->get<std::int64_t>() < 0) {
        throw ParseError(std::string("missing or invalid unsigned '") + key + "'", line);
    }
    return it->get<std::size_t>();
}

std::string require_string(const json& obj, const char* key, std::size_t line) {
    const auto it = obj.find(key);
    if (it == obj.end() || !it->is_string()) {
        throw ParseError(std::string("missing or non-string '") + key + "'", line);
    }
    return it->get<std::string>();
}

const json& require_array(const json& obj, const char* key, std::size_t line) {
    const auto it = obj.find(key);
    if (it == obj.end() || !it->is_array()) {
        throw ParseError(std::string("missing or non-array '") + key + "'", line);
    }
    return *it;
}

// Calls `fn(object, line)` for every non-blank line, which must be a JSON object.
template <typename Fn>
void for_each_json_line(std::istream& in, Fn&& fn) {
    std::string text;
    std::size_t line = 0;
    while (std::getline(in, text)) {
        ++line;
        if (text.find_first_not_of(" \t\r") == std::string::npos) continue;
        json record;
        try {
            record = json::parse(text);
        } catch (const json::parse_error& e) {
            throw ParseError(std::string("malformed JSON: ") + e.what(), line);
        }
        if (!record.is_object()) throw ParseError("record is not a JSON object", line);
        fn(record, line);
    }
}

double clamp_coordinate(double v, std::size_t extent, bool& clamped) {
    if (v < 0.0) {
        clamped = true;
        return 0.0;
    }
    if (v >= static_cast<double>(extent)) {
        clamped = true;
        return static_cast<double>(extent) - 1.0;
    }
    return v;
}

}  // namespace

AnnotationSet parse_annotations(std::istream& in) {
    AnnotationSet set;
    std::set<std::string> seen;
    for_each_json_line(in, [&](const json& rec, std::size_t line) {
        AnnotatedImage img;
        img.image_id = require_string(rec, "image_id", line);
        img.width = require_unsigned(rec, "width", line);
        img.height = require_unsigned(rec, "height", line);
        if (!seen.insert(img.image_id).second) {
            throw ParseError("duplicate image_id '" + img.image_id + "'", line);
        }
        const json& points = require_array(rec, "points", line);
        if (!points.empty() && (img.width == 0 || img.height == 0)) {
            throw ParseError("points given for an empty image", line);
        }
        for (const auto& pt : points) {
            if (!pt.is_object()) throw ParseError("point is not an object", line);
            HeadPoint p;
            bool clamped = false;
            p.x = clamp_coordinate(require_number(pt, "x", line), img.width, clamped);
            p.y = clamp_coordinate(require_number(pt, "y", line), img.height, clamped);
            if (const auto it = pt.find("size"); it != pt.end() && !it->is_null()) {
                if (!it->is_number() || !(it->get<double>() > 0.0)) {
                    throw ParseError("'size' must be a positive number or null", line);
                }
                p.size_hint = it->get<double>();
            }
            set.report.clamped_points += clamped ? 1 : 0;
            img.points.push_back(p);
        }
        set.report.points += img.points.size();
        ++set.report.records;
        set.images.push_back(std::move(img));
    });
    return set;
}

AnnotationSet load_annotations(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open annotations '" + path.string() + "'");
    return parse_annotations(in);
}

DetectionIndex parse_detections(std::istream& in) {
    DetectionIndex index;
    for_each_json_line(in, [&](const json& rec, std::size_t line) {
        const std::string id = require_string(rec, "image_id", line);
        auto& boxes = index[id];
        for (const auto& b : require_array(rec, "boxes", line)) {
            if (!b.is_object()) throw ParseError("box is not an object", line);
            Detection det{require_number(b, "x", line), require_number(b, "y", line),
                          require_number(b, "w", line), require_number(b, "h", line),
                          require_number(b, "score", line)};
            if (!(det.w > 0.0 && det.h > 0.0)) throw ParseError("box with non-positive size", line);
            if (det.score < 0.0 || det.score > 1.0) throw ParseError("score outside [0,1]", line);
            boxes.push_back(det);
        }
    });
    return index;
}

DetectionIndex load_detections(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open detections '" + path.string() + "'");
    return parse_detections(in);
}

}  // namespace bgcount
