#include <gtest/gtest.h>

#include <cmath>

#include "bgcount/training.hpp"

using namespace bgcount;

namespace {

SceneProfile small_profile() {
    SceneProfile p;
    p.person_sigma = 1.0;
    p.clutter_sigma = 1.5;
    p.density_sigma = 1.0;
    p.border_margin = 1.0;
    p.min_clutter = 1;
    p.max_clutter = 2;
    return p;
}

}  // namespace

TEST(Scenes, Deterministic) {
    const SceneProfile prof;
    const auto a = generate_scenes(5, 40, 40, 7, prof);
    const auto b = generate_scenes(5, 40, 40, 7, prof, 4);
    ASSERT_EQ(a.size(), 5u);
    for (std::size_t i = 0; i < a.size(); ++i) {
        EXPECT_EQ(a[i].input, b[i].input);
        EXPECT_EQ(a[i].gt_density, b[i].gt_density);
        EXPECT_EQ(a[i].annotation.image_id, "scene_" + std::to_string(i));
    }
    EXPECT_NE(generate_scenes(1, 40, 40, 8, prof)[0].input, a[0].input);
}

TEST(Scenes, DensityMatchesCount) {
    const auto scenes = generate_scenes(10, 40, 40, 3, SceneProfile{});
    for (const auto& s : scenes) {
        const double n = static_cast<double>(s.annotation.count());
        EXPECT_GE(n, 1.0);
        EXPECT_LE(std::abs(total(s.gt_density) - n), 1e-6 * n);
    }
}

TEST(Scenes, PureBackground) {
    SceneProfile prof;
    prof.min_people = prof.max_people = 0;
    for (const auto& s : generate_scenes(3, 40, 40, 5, prof)) {
        EXPECT_EQ(s.annotation.count(), 0u);
        EXPECT_EQ(total(s.gt_density), 0.0);
        EXPECT_EQ(count_ones(s.gt_mask(2.0)), 0u);
    }
}

TEST(Scenes, Errors) {
    EXPECT_THROW(generate_scenes(0, 40, 40, 1, SceneProfile{}), ParameterError);
    EXPECT_THROW(generate_scenes(1, 12, 12, 1, SceneProfile{}), ParameterError);
    EXPECT_NO_THROW(generate_scenes(1, 12, 12, 1, small_profile()));
}

TEST(Scenes, DerivedSeedsDiffer) {
    EXPECT_NE(derive_seed(7, 0), derive_seed(7, 1));
    EXPECT_NE(derive_seed(7, 0), derive_seed(8, 0));
    EXPECT_EQ(derive_seed(7, 3), derive_seed(7, 3));
}

TEST(Train, OneSceneLossDrops) {
    const auto scenes = generate_scenes(1, 12, 12, 31, small_profile());
    TrainConfig cfg;
    cfg.epochs = 30;
    cfg.learning_rate = 1e-3;
    const auto r = train(scenes, cfg);
    ASSERT_EQ(r.trace.size(), 30u);
    EXPECT_LT(r.trace.back().total, r.trace.front().total);
}

TEST(Train, ZeroLearningRateIsFlat) {
    const auto scenes = generate_scenes(2, 12, 12, 32, small_profile());
    TrainConfig cfg;
    cfg.epochs = 3;
    cfg.learning_rate = 0.0;
    const auto r = train(scenes, cfg);
    EXPECT_EQ(r.params, ToyModelParams::initialize(cfg.seed));
    EXPECT_EQ(r.trace[0].total, r.trace[2].total);
}

TEST(Train, Deterministic) {
    const auto scenes = generate_scenes(3, 12, 12, 33, small_profile());
    TrainConfig cfg;
    cfg.epochs = 4;
    const auto a = train(scenes, cfg);
    const auto b = train(scenes, cfg);
    EXPECT_EQ(a.params, b.params);
    ASSERT_EQ(a.trace.size(), b.trace.size());
    for (std::size_t i = 0; i < a.trace.size(); ++i) {
        EXPECT_EQ(a.trace[i].total, b.trace[i].total);
        EXPECT_EQ(a.trace[i].bce, b.trace[i].bce);
    }
}

TEST(Train, DivergenceReportsEpoch) {
    const auto scenes = generate_scenes(2, 12, 12, 34, small_profile());
    auto huge = ToyModelParams::initialize(1);
    huge.add_scaled(huge, 1e90);  // activations overflow in the first forward pass
    try {
        train(scenes, TrainConfig{}, huge);
        FAIL();
    } catch (const TrainingDiverged& e) {
        EXPECT_EQ(e.epoch(), 0u);
    }
}

TEST(Train, Validation) {
    TrainConfig cfg;
    cfg.learning_rate = -1.0;
    EXPECT_THROW(cfg.validate(), ParameterError);
    EXPECT_THROW(train({}, TrainConfig{}), ParameterError);
}

TEST(Experiment, NeedsThreeSeeds) {
    const std::vector<std::uint64_t> seeds{1, 2};
    EXPECT_THROW(bs_experiment(seeds, ExperimentConfig{}), ParameterError);
}

TEST(Experiment, SmallRunSchema) {
    ExperimentConfig cfg;
    cfg.train_scenes = 2;
    cfg.test_scenes = 2;
    cfg.background_scenes = 1;
    cfg.height = cfg.width = 12;
    cfg.profile = small_profile();
    cfg.train.epochs = 2;
    const std::vector<std::uint64_t> seeds{1, 2, 3};
    const auto r = bs_experiment(seeds, cfg);
    EXPECT_EQ(r.rows.size(), 6u);
    const std::string csv = experiment_csv(r);
    EXPECT_EQ(csv.substr(0, csv.find('\n')), "seed,variant,bg_mae,fg_mae,full_mae,pure_bg_count,diverged");
    EXPECT_NE(csv.find("\nmedian,with_bs,"), std::string::npos);
    EXPECT_NE(csv.find("\nmedian,without_bs,"), std::string::npos);
    EXPECT_EQ(csv, experiment_csv(bs_experiment(seeds, cfg)));
}

TEST(Experiment, Median) {
    EXPECT_EQ(median({3.0, 1.0, 2.0}), 2.0);
    EXPECT_EQ(median({4.0, 1.0, 2.0, 3.0}), 2.5);
}
