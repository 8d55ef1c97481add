#include "bgcount/scene.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "bgcount/parallel.hpp"
#include "bgcount/toymodel.hpp"

namespace bgcount {

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) noexcept {
    std::uint64_t z = master + (index + 1) * 0x9E3779B97F4A7C15ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

void SceneProfile::validate() const {
    if (min_people > max_people) throw ParameterError("scene profile: min_people > max_people");
    if (min_clutter > max_clutter) throw ParameterError("scene profile: min_clutter > max_clutter");
    if (!(person_sigma > 0.0 && clutter_sigma > 0.0 && density_sigma > 0.0)) {
        throw ParameterError("scene profile: bump and kernel widths must be positive");
    }
    if (!(noise_amplitude >= 0.0 && border_margin >= 0.0 && clutter_clearance_alpha >= 0.0)) {
        throw ParameterError("scene profile: negative noise, margin or clearance");
    }
}

BinaryMask SyntheticScene::gt_mask(double alpha) const {
    return build_foreground_mask(annotation, sizes, alpha);
}

namespace {

void add_bump(RealGrid& img, double cx, double cy, double sigma, double amplitude) {
    const double inv = 1.0 / (2.0 * sigma * sigma);
    for (std::size_t j = 0; j < img.height(); ++j) {
        const double dy = static_cast<double>(j) - cy;
        for (std::size_t k = 0; k < img.width(); ++k) {
            const double dx = static_cast<double>(k) - cx;
            img(j, k) += amplitude * std::exp(-(dx * dx + dy * dy) * inv);
        }
    }
}

SyntheticScene make_scene(std::size_t index, std::size_t height, std::size_t width, std::uint64_t seed,
                          const SceneProfile& profile, const std::string& id_prefix) {
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<std::size_t> people(profile.min_people, profile.max_people);
    std::uniform_int_distribution<std::size_t> clutter(profile.min_clutter, profile.max_clutter);
    const double margin = profile.border_margin;
    std::uniform_real_distribution<double> xs(margin, static_cast<double>(width) - 1.0 - margin);
    std::uniform_real_distribution<double> ys(margin, static_cast<double>(height) - 1.0 - margin);

    SyntheticScene scene;
    scene.annotation.image_id = id_prefix + "_" + std::to_string(index);
    scene.annotation.width = width;
    scene.annotation.height = height;
    const std::size_t n_people = people(rng);
    for (std::size_t i = 0; i < n_people; ++i) scene.annotation.points.push_back({xs(rng), ys(rng), {}});
    scene.sizes = estimate_head_sizes(scene.annotation, {});

    const std::size_t n_clutter = clutter(rng);
    constexpr int kPlacementAttempts = 200;
    for (std::size_t c = 0; c < n_clutter; ++c) {
        for (int attempt = 0; attempt < kPlacementAttempts; ++attempt) {
            const ScenePoint cand{xs(rng), ys(rng)};
            bool clear = true;
            for (std::size_t p = 0; p < n_people && clear; ++p) {
                const auto& pt = scene.annotation.points[p];
                const double keep_out = scene.sizes[p].diameter * profile.clutter_clearance_alpha / 2.0 +
                                        2.0 * profile.clutter_sigma;
                clear = std::hypot(cand.x - pt.x, cand.y - pt.y) > keep_out;
            }
            if (clear) {
                scene.clutter.push_back(cand);
                break;
            }
        }
    }

    scene.input = RealGrid(height, width);
    for (const auto& p : scene.annotation.points) {
        add_bump(scene.input, p.x, p.y, profile.person_sigma, profile.person_amplitude);
    }
    for (const auto& c : scene.clutter) {
        add_bump(scene.input, c.x, c.y, profile.clutter_sigma, profile.clutter_amplitude);
    }
    if (profile.noise_amplitude > 0.0) {
        std::uniform_real_distribution<double> noise(-profile.noise_amplitude, profile.noise_amplitude);
        for (auto& v : scene.input.values()) v += noise(rng);
    }
    scene.gt_density = gaussian_density_map(scene.annotation, profile.density_sigma);
    return scene;
}

}  // namespace

std::vector<SyntheticScene> generate_scenes(std::size_t n, std::size_t height, std::size_t width,
                                            std::uint64_t seed, const SceneProfile& profile, unsigned jobs,
                                            const std::string& id_prefix) {
    if (n == 0) throw ParameterError("generate_scenes: n must be >= 1");
    profile.validate();
    const double widest = std::max(profile.person_sigma, profile.clutter_sigma);
    const auto min_side = std::max<std::size_t>(
        {kMinToyInputSide, static_cast<std::size_t>(2.0 * std::ceil(3.0 * widest)) + 1,
         static_cast<std::size_t>(2.0 * profile.border_margin) + 2});
    if (height < min_side || width < min_side) {
        throw ParameterError("generate_scenes: " + std::to_string(height) + "x" + std::to_string(width) +
                             " is too small for the bump radius (need >= " + std::to_string(min_side) + ")");
    }
    std::vector<SyntheticScene> scenes(n);
    parallel_for(n, jobs, [&](std::size_t i) {
        scenes[i] = make_scene(i, height, width, derive_seed(seed, i), profile, id_prefix);
    });
    return scenes;
}

}  // namespace bgcount
