#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "bgcount/annotations.hpp"
#include "bgcount/grid.hpp"

namespace bgcount {

/// splitmix64 finalizer applied to master + (index + 1) * golden-ratio
/// increment. Gives independent, reproducible sub-seeds.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) noexcept;

/// How synthetic scenes are populated and rendered.
struct SceneProfile {
    std::size_t min_people = 1;
    std::size_t max_people = 3;
    std::size_t min_clutter = 2;
    std::size_t max_clutter = 4;
    double person_sigma = 1.2;      // width of a rendered person bump
    double person_amplitude = 1.0;
    double clutter_sigma = 3.0;     // distractors are broader, so a different spatial frequency
    double clutter_amplitude = 1.0;
    double density_sigma = 2.0;     // ground-truth kernel for toy scenes
    double noise_amplitude = 0.05;  // uniform pixel noise in [-a, a]
    double border_margin = 2.0;
    /// Clutter stays outside the head disks dilated by this factor.
    double clutter_clearance_alpha = 2.0;

    void validate() const;
};

struct ScenePoint {
    double x = 0.0;
    double y = 0.0;
};

struct SyntheticScene {
    RealGrid input;
    AnnotatedImage annotation;
    std::vector<HeadSizeEstimate> sizes;
    DensityMap gt_density;
    std::vector<ScenePoint> clutter;

    BinaryMask gt_mask(double alpha) const;
};

/// `n` reproducible scenes. Scene i is drawn from derive_seed(seed, i), so
/// the output does not depend on `jobs`. Image ids are "<prefix>_<i>".
std::vector<SyntheticScene> generate_scenes(std::size_t n, std::size_t height, std::size_t width,
                                            std::uint64_t seed, const SceneProfile& profile,
                                            unsigned jobs = 1, const std::string& id_prefix = "scene");

}  // namespace bgcount
