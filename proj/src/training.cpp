#include "bgcount/training.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include <fmt/format.h>

#include "bgcount/metrics.hpp"

namespace bgcount {

void TrainConfig::validate() const {
    if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate)) {
        throw ParameterError("learning rate must be a finite value >= 0");
    }
    if (epochs < 1) throw ParameterError("epochs must be >= 1");
    if (!(alpha_train > 0.0)) throw ParameterError("alpha_train must be positive");
    loss_config().validate();
}

LossConfig TrainConfig::loss_config() const {
    LossConfig cfg;
    cfg.lambda = lambda;
    cfg.density_loss_kind = density_loss;
    return cfg;
}

namespace {

bool gradients_finite(const ToyModelParams& g) {
    return std::all_of(g.layers.begin(), g.layers.end(), [](const ConvLayer& l) {
        return all_finite(l.weights) && all_finite(l.bias);
    });
}

}  // namespace

TrainResult train(std::span<const SyntheticScene> scenes, const TrainConfig& cfg,
                  std::optional<ToyModelParams> initial) {
    if (scenes.empty()) throw ParameterError("train: no scenes");
    cfg.validate();
    const LossConfig loss_cfg = cfg.loss_config();

    TrainResult result;
    result.params = initial ? std::move(*initial) : ToyModelParams::initialize(cfg.seed);
    result.params.validate();

    std::vector<BinaryMask> masks;
    masks.reserve(scenes.size());
    for (const auto& s : scenes) masks.push_back(s.gt_mask(cfg.alpha_train));

    std::vector<std::size_t> order(scenes.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::mt19937_64 shuffle_rng(cfg.seed);
    const auto n = static_cast<double>(scenes.size());

    for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
        std::shuffle(order.begin(), order.end(), shuffle_rng);
        EpochLoss row{epoch, 0.0, 0.0, 0.0};
        for (const std::size_t i : order) {
            ModelGradients g;
            try {
                g = loss_and_gradients(result.params, scenes[i].input, scenes[i].gt_density, masks[i],
                                       cfg.with_bs, loss_cfg);
            } catch (const NumericError&) {
                throw TrainingDiverged(epoch);
            }
            if (!std::isfinite(g.loss.total) || !gradients_finite(g.grads)) throw TrainingDiverged(epoch);
            row.total += g.loss.total;
            row.density += g.loss.density_term;
            row.bce += g.loss.bce_term;
            result.params.add_scaled(g.grads, -cfg.learning_rate);
        }
        row.total /= n;
        row.density /= n;
        row.bce /= n;
        result.trace.push_back(row);
    }
    return result;
}

void ExperimentConfig::validate() const {
    if (train_scenes == 0 || test_scenes == 0 || background_scenes == 0) {
        throw ParameterError("experiment: every scene split needs at least one scene");
    }
    if (!(eval_alpha > 0.0)) throw ParameterError("experiment: eval_alpha must be positive");
    profile.validate();
    train.validate();
}

double median(std::vector<double> values) {
    if (values.empty()) return std::numeric_limits<double>::quiet_NaN();
    std::sort(values.begin(), values.end());
    const std::size_t mid = values.size() / 2;
    return values.size() % 2 == 1 ? values[mid] : 0.5 * (values[mid - 1] + values[mid]);
}

namespace {

ExperimentRow evaluate_variant(const ToyModelParams& params, bool with_bs,
                               std::span<const SyntheticScene> test, std::span<const SyntheticScene> background,
                               const ExperimentConfig& cfg) {
    std::vector<EvalPair> pairs;
    pairs.reserve(test.size());
    for (const auto& s : test) {
        auto target = make_eval_target(s.annotation, s.sizes, std::nullopt, cfg.profile.density_sigma);
        pairs.push_back(make_eval_pair(std::move(target), forward(params, s.input, with_bs).d_p));
    }
    const RegionReport report = region_metrics(pairs, cfg.eval_alpha, cfg.jobs);

    double bg_total = 0.0;
    for (const auto& s : background) bg_total += total(forward(params, s.input, with_bs).d_p);

    ExperimentRow row;
    row.variant = with_bs ? "with_bs" : "without_bs";
    row.bg_mae = report.background().mae;
    row.fg_mae = report.foreground().mae;
    row.full_mae = report.full().mae;
    row.pure_bg_count = bg_total / static_cast<double>(background.size());
    return row;
}

ExperimentSummary summarize(const std::vector<ExperimentRow>& rows, const std::string& variant) {
    std::vector<double> bg, fg, full, pure;
    for (const auto& r : rows) {
        if (r.variant != variant || r.diverged) continue;
        bg.push_back(r.bg_mae);
        fg.push_back(r.fg_mae);
        full.push_back(r.full_mae);
        pure.push_back(r.pure_bg_count);
    }
    return {variant, bg.size(), median(bg), median(fg), median(full), median(pure)};
}

}  // namespace

ExperimentReport bs_experiment(std::span<const std::uint64_t> seeds, const ExperimentConfig& cfg) {
    if (seeds.size() < 3) throw ParameterError("bs_experiment needs at least 3 seeds");
    cfg.validate();

    SceneProfile background_profile = cfg.profile;
    background_profile.min_people = 0;
    background_profile.max_people = 0;

    ExperimentReport report;
    for (const std::uint64_t seed : seeds) {
        const auto train_set =
            generate_scenes(cfg.train_scenes, cfg.height, cfg.width, derive_seed(seed, 0), cfg.profile, cfg.jobs, "train");
        const auto test_set =
            generate_scenes(cfg.test_scenes, cfg.height, cfg.width, derive_seed(seed, 1), cfg.profile, cfg.jobs, "test");
        const auto background_set = generate_scenes(cfg.background_scenes, cfg.height, cfg.width,
                                                     derive_seed(seed, 2), background_profile, cfg.jobs, "background");
        const ToyModelParams init = ToyModelParams::initialize(derive_seed(seed, 3));

        for (const bool with_bs : {false, true}) {
            TrainConfig tc = cfg.train;
            tc.with_bs = with_bs;
            tc.seed = seed;
            ExperimentRow row;
            try {
                const TrainResult trained = train(train_set, tc, init);
                row = evaluate_variant(trained.params, with_bs, test_set, background_set, cfg);
            } catch (const NumericError& e) {
                const double nan = std::numeric_limits<double>::quiet_NaN();
                row = ExperimentRow{0, with_bs ? "with_bs" : "without_bs", nan, nan, nan, nan, true};
                report.warnings.push_back(fmt::format("seed {} {}: {}; excluded from medians", seed,
                                                      row.variant, e.what()));
            }
            row.seed = seed;
            report.rows.push_back(std::move(row));
        }
    }
    report.without_bs = summarize(report.rows, "without_bs");
    report.with_bs = summarize(report.rows, "with_bs");
    return report;
}

std::string experiment_csv(const ExperimentReport& report) {
    std::string out = "seed,variant,bg_mae,fg_mae,full_mae,pure_bg_count,diverged\n";
    for (const auto& r : report.rows) {
        out += fmt::format("{},{},{:.6f},{:.6f},{:.6f},{:.6f},{}\n", r.seed, r.variant, r.bg_mae, r.fg_mae,
                           r.full_mae, r.pure_bg_count, r.diverged ? 1 : 0);
    }
    for (const auto* s : {&report.without_bs, &report.with_bs}) {
        out += fmt::format("median,{},{:.6f},{:.6f},{:.6f},{:.6f},0\n", s->variant, s->bg_mae, s->fg_mae,
                           s->full_mae, s->pure_bg_count);
    }
    return out;
}

}  // namespace bgcount
