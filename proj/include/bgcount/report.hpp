#pragma once

// CSV and text renderings of metric results. Numbers use fixed 6-decimal
// formatting so identical inputs give byte-identical files.

#include <string>
#include <vector>

#include "bgcount/metrics.hpp"

namespace bgcount {

/// Mean GAME over the evaluated images at one level.
struct GameColumn {
    int level = 0;
    double value = 0.0;
};

/// Columns: region,mae,mse,surface_fraction,n_images,alpha,slack, then one
/// game_L<level> column per entry in `game` (filled on the FullImage row).
std::string region_report_csv(const RegionReport& report, double alpha, const Decomposition& decomposition,
                              const std::vector<GameColumn>& game = {});

/// Columns: alpha,bg_mae,fg_mae,bg_pred_count_mean.
std::string sweep_csv(const SweepCurve& curve);

/// Columns: train_id,test_id,bg_mae,n_images_used,n_omitted. Cells with no
/// usable image have an empty bg_mae.
std::string cross_eval_csv(const CrossEvalTable& table);

/// Aligned train x test matrix; diagonal cells (train_id == test_id) are
/// wrapped in brackets, cells with omissions carry a trailing '?'.
std::string cross_eval_text(const CrossEvalTable& table);

}  // namespace bgcount
