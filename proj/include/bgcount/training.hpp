#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "bgcount/losses.hpp"
#include "bgcount/scene.hpp"
#include "bgcount/toymodel.hpp"

namespace bgcount {

struct TrainConfig {
    bool with_bs = true;
    double lambda = 1e-4;
    double learning_rate = 1e-5;
    std::size_t epochs = 40;
    std::uint64_t seed = 7;
    double alpha_train = 1.0;  // dilation of the training foreground masks
    DensityLossKind density_loss = DensityLossKind::LiteralEq4;

    void validate() const;
    LossConfig loss_config() const;
};

struct EpochLoss {
    std::size_t epoch = 0;
    double total = 0.0;  // mean over the epoch's scenes, evaluated before each step
    double density = 0.0;
    double bce = 0.0;
};

struct TrainResult {
    ToyModelParams params;
    std::vector<EpochLoss> trace;
};

/// Training stopped because a loss or gradient became non-finite.
class TrainingDiverged : public NumericError {
public:
    explicit TrainingDiverged(std::size_t epoch)
        : NumericError("training diverged in epoch " + std::to_string(epoch)), epoch_(epoch) {}
    std::size_t epoch() const noexcept { return epoch_; }

private:
    std::size_t epoch_;
};

/// Plain gradient descent, one step per scene, fixed learning rate. Scene
/// order is reshuffled every epoch from `cfg.seed`. Starts from
/// ToyModelParams::initialize(cfg.seed) unless `initial` is given.
TrainResult train(std::span<const SyntheticScene> scenes, const TrainConfig& cfg,
                  std::optional<ToyModelParams> initial = std::nullopt);

// ---- with / without background suppression comparison --------------------

struct ExperimentConfig {
    std::size_t train_scenes = 16;
    std::size_t test_scenes = 16;
    std::size_t background_scenes = 8;  // zero-person held-out split
    std::size_t height = 40;
    std::size_t width = 40;
    SceneProfile profile;
    TrainConfig train;  // with_bs and seed are set per run
    double eval_alpha = 2.0;
    unsigned jobs = 1;

    void validate() const;
};

struct ExperimentRow {
    std::uint64_t seed = 0;
    std::string variant;  // "with_bs" or "without_bs"
    double bg_mae = 0.0;
    double fg_mae = 0.0;
    double full_mae = 0.0;
    double pure_bg_count = 0.0;  // mean predicted total on the zero-person split
    bool diverged = false;
};

struct ExperimentSummary {
    std::string variant;
    std::size_t runs = 0;
    double bg_mae = 0.0;
    double fg_mae = 0.0;
    double full_mae = 0.0;
    double pure_bg_count = 0.0;
};

struct ExperimentReport {
    std::vector<ExperimentRow> rows;
    ExperimentSummary with_bs;     // medians over non-diverged runs
    ExperimentSummary without_bs;
    std::vector<std::string> warnings;
};

/// For each seed, trains matched models with and without suppression on the
/// same scenes from the same initial weights, then evaluates region MAEs at
/// `eval_alpha` on held-out scenes and the predicted count on a pure
/// background split. Needs at least 3 seeds.
ExperimentReport bs_experiment(std::span<const std::uint64_t> seeds, const ExperimentConfig& cfg);

/// CSV: seed,variant,bg_mae,fg_mae,full_mae,pure_bg_count,diverged, then one
/// "median" row per variant.
std::string experiment_csv(const ExperimentReport& report);

double median(std::vector<double> values);

}  // namespace bgcount
