#pragma once

// Brute-force reference implementations. They share no code with the
// library: every pixel is tested against every point, cells are found by
// recursive splitting, and sums skip masked-out pixels instead of
// multiplying by zero.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "bgcount/annotations.hpp"
#include "bgcount/grid.hpp"
#include "bgcount/metrics.hpp"

namespace oracle {

using bgcount::AnnotatedImage;
using bgcount::BinaryMask;
using bgcount::DensityMap;

using Mask = std::vector<std::vector<int>>;

inline Mask disk_union(const AnnotatedImage& img, const std::vector<double>& diameters, double alpha) {
    Mask m(img.height, std::vector<int>(img.width, 0));
    for (std::size_t j = 0; j < img.height; ++j) {
        for (std::size_t k = 0; k < img.width; ++k) {
            for (std::size_t i = 0; i < img.points.size(); ++i) {
                const double r = diameters[i] * alpha / 2.0;
                const double dx = static_cast<double>(k) - img.points[i].x;
                const double dy = static_cast<double>(j) - img.points[i].y;
                if (dx * dx + dy * dy <= r * r) {
                    m[j][k] = 1;
                    break;
                }
            }
        }
    }
    return m;
}

inline Mask from_grid(const BinaryMask& g) {
    Mask m(g.height(), std::vector<int>(g.width(), 0));
    for (std::size_t j = 0; j < g.height(); ++j)
        for (std::size_t k = 0; k < g.width(); ++k) m[j][k] = g(j, k);
    return m;
}

inline double masked_sum(const DensityMap& d, const Mask& m) {
    double s = 0.0;
    for (std::size_t j = 0; j < d.height(); ++j)
        for (std::size_t k = 0; k < d.width(); ++k)
            if (m[j][k] == 1) s += d(j, k);
    return s;
}

inline std::size_t ones(const Mask& m) {
    std::size_t n = 0;
    for (const auto& row : m)
        for (const int v : row) n += v == 1;
    return n;
}

// Halves [lo, hi) `depth` times, the larger half trailing.
inline void split(std::size_t lo, std::size_t hi, int depth, std::vector<std::pair<std::size_t, std::size_t>>& out) {
    if (depth == 0) {
        out.emplace_back(lo, hi);
        return;
    }
    const std::size_t mid = lo + (hi - lo) / 2;
    split(lo, mid, depth - 1, out);
    split(mid, hi, depth - 1, out);
}

inline double game(const DensityMap& pred, const DensityMap& gt, int level) {
    std::vector<std::pair<std::size_t, std::size_t>> rows, cols;
    split(0, pred.height(), level, rows);
    split(0, pred.width(), level, cols);
    double err = 0.0;
    for (const auto& [r0, r1] : rows) {
        for (const auto& [c0, c1] : cols) {
            double p = 0.0, g = 0.0;
            for (std::size_t j = 0; j < pred.height(); ++j) {
                if (j < r0 || j >= r1) continue;
                for (std::size_t k = 0; k < pred.width(); ++k) {
                    if (k < c0 || k >= c1) continue;
                    p += pred(j, k);
                    g += gt(j, k);
                }
            }
            err += std::abs(p - g);
        }
    }
    return err;
}

struct Case {
    AnnotatedImage img;
    std::vector<double> diameters;
    std::optional<BinaryMask> roi;
    DensityMap gt;
    DensityMap pred;
};

struct Metrics {
    double mae[3];
    double mse[3];
    double surface[3];
};

// Regions indexed Background, Foreground, FullImage.
inline Metrics region_metrics(std::vector<Case> cases, double alpha) {
    std::sort(cases.begin(), cases.end(),
              [](const Case& a, const Case& b) { return a.img.image_id < b.img.image_id; });
    double abs_sum[3] = {0, 0, 0}, sq_sum[3] = {0, 0, 0}, surf_sum[3] = {0, 0, 0};
    for (const auto& c : cases) {
        const Mask fg = disk_union(c.img, c.diameters, alpha);
        const Mask roi = c.roi ? from_grid(*c.roi) : Mask(c.img.height, std::vector<int>(c.img.width, 1));
        Mask regions[3];
        for (auto& r : regions) r = Mask(c.img.height, std::vector<int>(c.img.width, 0));
        for (std::size_t j = 0; j < c.img.height; ++j) {
            for (std::size_t k = 0; k < c.img.width; ++k) {
                if (roi[j][k] != 1) continue;
                regions[2][j][k] = 1;
                regions[fg[j][k] == 1 ? 1 : 0][j][k] = 1;
            }
        }
        const double valid = static_cast<double>(ones(regions[2]));
        for (int r = 0; r < 3; ++r) {
            const double e = masked_sum(c.pred, regions[r]) - masked_sum(c.gt, regions[r]);
            abs_sum[r] += std::abs(e);
            sq_sum[r] += e * e;
            surf_sum[r] += valid == 0 ? 0.0 : static_cast<double>(ones(regions[r])) / valid;
        }
    }
    const double n = static_cast<double>(cases.size());
    Metrics m{};
    for (int r = 0; r < 3; ++r) {
        m.mae[r] = abs_sum[r] / n;
        m.mse[r] = std::sqrt(sq_sum[r] / n);
        m.surface[r] = surf_sum[r] / n;
    }
    return m;
}

// Central difference of f at x along one coordinate.
inline double central_difference(const std::function<double(double)>& f, double x, double h = 1e-5) {
    return (f(x + h) - f(x - h)) / (2.0 * h);
}

inline double relative_error(double analytic, double numeric, double floor = 1e-8) {
    return std::abs(analytic - numeric) / std::max({std::abs(analytic), std::abs(numeric), floor});
}

}  // namespace oracle

namespace testgen {

using bgcount::AnnotatedImage;
using bgcount::BinaryMask;
using bgcount::DensityMap;
using bgcount::HeadPoint;

// Random annotation; roughly one point in five sits on a border or corner.
inline AnnotatedImage annotation(std::mt19937_64& rng, std::size_t h, std::size_t w, std::size_t max_points,
                                 const std::string& id) {
    AnnotatedImage img{id, w, h, {}};
    std::uniform_int_distribution<std::size_t> count(0, max_points);
    std::uniform_real_distribution<double> ux(0.0, std::nextafter(static_cast<double>(w), 0.0));
    std::uniform_real_distribution<double> uy(0.0, std::nextafter(static_cast<double>(h), 0.0));
    std::uniform_int_distribution<int> kind(0, 9);
    const std::size_t n = count(rng);
    for (std::size_t i = 0; i < n; ++i) {
        HeadPoint p{ux(rng), uy(rng), std::nullopt};
        switch (kind(rng)) {
            case 0: p.x = 0.0; break;
            case 1: p.y = static_cast<double>(h - 1); break;
            default: break;
        }
        img.points.push_back(p);
    }
    return img;
}

inline DensityMap density(std::mt19937_64& rng, std::size_t h, std::size_t w, double lo = -0.5, double hi = 1.0) {
    std::uniform_real_distribution<double> u(lo, hi);
    std::vector<double> v(h * w);
    for (auto& x : v) x = u(rng);
    return DensityMap(h, w, std::move(v));
}

inline BinaryMask mask(std::mt19937_64& rng, std::size_t h, std::size_t w, double p_one = 0.7) {
    std::bernoulli_distribution b(p_one);
    std::vector<std::uint8_t> v(h * w);
    for (auto& x : v) x = b(rng) ? 1 : 0;
    return BinaryMask(h, w, std::move(v));
}

inline std::vector<double> diameters(std::mt19937_64& rng, std::size_t n) {
    std::uniform_real_distribution<double> u(0.5, 8.0);
    std::vector<double> d(n);
    for (auto& x : d) x = u(rng);
    return d;
}

inline std::vector<bgcount::HeadSizeEstimate> sizes(const std::vector<double>& d) {
    std::vector<bgcount::HeadSizeEstimate> s;
    for (const double x : d) s.push_back({x});
    return s;
}

}  // namespace testgen
