#pragma once

#include <array>
#include <cstddef>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "bgcount/annotations.hpp"
#include "bgcount/grid.hpp"

namespace bgcount {

/// Foreground/background boundary used for evaluation (head diameter x 2).
inline constexpr double kDefaultEvalAlpha = 2.0;
/// Decomposition slack above this fraction of the full-image MAE is flagged.
inline constexpr double kHiddenCompensationRatio = 0.10;

enum class Region : std::size_t { Background = 0, Foreground = 1, FullImage = 2 };
inline constexpr std::array<Region, 3> kRegions{Region::Background, Region::Foreground,
                                                Region::FullImage};

std::string_view region_name(Region r);

struct RegionMetrics {
    Region region = Region::FullImage;
    double mae = 0.0;
    double mse = 0.0;  // root of the mean squared count error
    double surface_fraction = 0.0;
    std::size_t n_images = 0;
};

struct RegionReport {
    std::array<RegionMetrics, 3> regions;

    const RegionMetrics& operator[](Region r) const { return regions[static_cast<std::size_t>(r)]; }
    const RegionMetrics& background() const { return (*this)[Region::Background]; }
    const RegionMetrics& foreground() const { return (*this)[Region::Foreground]; }
    const RegionMetrics& full() const { return (*this)[Region::FullImage]; }
};

/// Everything known about one test image except the prediction: annotation,
/// head sizes, optional ROI and the cached ground-truth density.
struct EvalTarget {
    AnnotatedImage annotation;
    std::vector<HeadSizeEstimate> sizes;
    std::optional<BinaryMask> roi;
    DensityMap gt_density;

    const std::string& image_id() const noexcept { return annotation.image_id; }
};

std::shared_ptr<const EvalTarget> make_eval_target(AnnotatedImage annotation,
                                                   std::vector<HeadSizeEstimate> sizes,
                                                   std::optional<BinaryMask> roi = std::nullopt,
                                                   double sigma = kDefaultDensitySigma);

struct EvalPair {
    std::shared_ptr<const EvalTarget> target;
    DensityMap predicted;

    const std::string& image_id() const noexcept { return target->image_id(); }
};

/// Validates shapes and builds a pair.
EvalPair make_eval_pair(std::shared_ptr<const EvalTarget> target, DensityMap predicted);

/// Per-image counts for each region, indexed by Region.
struct ImageTerms {
    std::string image_id;
    std::array<double, 3> pred_count{};
    std::array<double, 3> gt_count{};
    std::array<double, 3> surface{};

    double error(Region r) const {
        const auto i = static_cast<std::size_t>(r);
        return pred_count[i] - gt_count[i];
    }
};

/// Region masks of one image at a given alpha. Foreground is the head-disk
/// union, Background its complement, FullImage all pixels; each is
/// intersected with the ROI when present.
std::array<BinaryMask, 3> region_masks(const EvalTarget& target, double alpha);

ImageTerms image_terms(const EvalPair& pair, double alpha);

/// Per-image terms in ascending image_id order.
std::vector<ImageTerms> collect_terms(std::span<const EvalPair> pairs, double alpha,
                                      unsigned jobs = 1);

/// MAE and root-mean-squared count error per region. Terms are reduced
/// sequentially in ascending image_id order, so results do not depend on
/// `jobs`.
RegionReport region_metrics(std::span<const EvalPair> pairs, double alpha = kDefaultEvalAlpha,
                            unsigned jobs = 1);
RegionReport aggregate_terms(std::span<const ImageTerms> terms);

struct Decomposition {
    double mae_full = 0.0;
    double mae_bg = 0.0;
    double mae_fg = 0.0;
    double slack = 0.0;  // mae_bg + mae_fg - mae_full, >= 0
    bool hidden_compensation = false;
};

Decomposition decompose(const RegionReport& report);
Decomposition decomposition_report(std::span<const EvalPair> pairs,
                                   double alpha = kDefaultEvalAlpha, unsigned jobs = 1);

/// Cell boundaries along one axis at a GAME level: the extent is bisected
/// `level` times, odd remainders going to the trailing half, so every level
/// refines the previous one. Returns 2^level + 1 offsets from 0 to extent.
std::vector<std::size_t> game_boundaries(std::size_t extent, int level);

/// Grid average mean absolute error of one image: the sum over 4^level cells
/// of |pred cell count - gt cell count|.
double game(const DensityMap& pred, const DensityMap& gt, int level);

struct SweepCurve {
    std::vector<double> alphas;
    std::vector<double> bg_mae;
    std::vector<double> fg_mae;
    std::vector<double> bg_pred_count_mean;
};

SweepCurve alpha_sweep(std::span<const EvalPair> pairs, std::span<const double> alphas,
                       unsigned jobs = 1);

/// True when bg_pred_count_mean never increases along the curve.
bool bg_count_nonincreasing(const SweepCurve& curve);

// ---- cross-dataset background evaluation --------------------------------

struct TestDataset {
    std::string dataset_id;
    std::vector<std::shared_ptr<const EvalTarget>> targets;
};

/// Returns the prediction of model `train_id` for `image_id` of dataset
/// `test_id`, or nullopt when it is missing.
using PredictionLookup = std::function<std::optional<DensityMap>(
    const std::string& train_id, const std::string& test_id, const std::string& image_id)>;

struct CrossEvalCell {
    std::string train_id;
    std::string test_id;
    std::optional<double> bg_mae;  // empty when no image could be evaluated
    std::size_t n_images_used = 0;
    std::size_t n_omitted = 0;
};

struct Omission {
    std::string train_id;
    std::string test_id;
    std::string image_id;
};

struct CrossEvalTable {
    std::vector<std::string> train_ids;
    std::vector<std::string> test_ids;
    std::vector<CrossEvalCell> cells;  // row-major, train x test
    std::vector<Omission> omissions;

    const CrossEvalCell& at(std::size_t train, std::size_t test) const {
        return cells[train * test_ids.size() + test];
    }
};

/// Background MAE of every model on every test dataset. Missing predictions
/// are listed as omissions; affected cells use the remaining images.
CrossEvalTable cross_eval(std::span<const std::string> train_ids,
                          std::span<const TestDataset> tests, const PredictionLookup& lookup,
                          double alpha = kDefaultEvalAlpha, unsigned jobs = 1);

}  // namespace bgcount
