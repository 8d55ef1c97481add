#include "bgcount/report.hpp"

#include <algorithm>

#include <fmt/format.h>

namespace bgcount {

std::string region_report_csv(const RegionReport& report, double alpha, const Decomposition& decomposition,
                              const std::vector<GameColumn>& game) {
    std::string out = "region,mae,mse,surface_fraction,n_images,alpha,slack";
    for (const auto& g : game) out += fmt::format(",game_L{}", g.level);
    out += '\n';
    for (const Region region : kRegions) {
        const RegionMetrics& m = report[region];
        out += fmt::format("{},{:.6f},{:.6f},{:.6f},{},{:.6f},{:.6f}", region_name(region), m.mae, m.mse,
                           m.surface_fraction, m.n_images, alpha, decomposition.slack);
        for (const auto& g : game) {
            out += region == Region::FullImage ? fmt::format(",{:.6f}", g.value) : std::string(",");
        }
        out += '\n';
    }
    return out;
}

std::string sweep_csv(const SweepCurve& curve) {
    std::string out = "alpha,bg_mae,fg_mae,bg_pred_count_mean\n";
    for (std::size_t i = 0; i < curve.alphas.size(); ++i) {
        out += fmt::format("{:.6f},{:.6f},{:.6f},{:.6f}\n", curve.alphas[i], curve.bg_mae[i], curve.fg_mae[i],
                           curve.bg_pred_count_mean[i]);
    }
    return out;
}

std::string cross_eval_csv(const CrossEvalTable& table) {
    std::string out = "train_id,test_id,bg_mae,n_images_used,n_omitted\n";
    for (const auto& c : table.cells) {
        out += fmt::format("{},{},{},{},{}\n", c.train_id, c.test_id,
                           c.bg_mae ? fmt::format("{:.6f}", *c.bg_mae) : std::string(), c.n_images_used,
                           c.n_omitted);
    }
    return out;
}

std::string cross_eval_text(const CrossEvalTable& table) {
    std::vector<std::vector<std::string>> grid;
    std::vector<std::string> header{"train \\ test"};
    header.insert(header.end(), table.test_ids.begin(), table.test_ids.end());
    grid.push_back(header);
    for (std::size_t i = 0; i < table.train_ids.size(); ++i) {
        std::vector<std::string> row{table.train_ids[i]};
        for (std::size_t j = 0; j < table.test_ids.size(); ++j) {
            const auto& cell = table.at(i, j);
            std::string text = cell.bg_mae ? fmt::format("{:.2f}", *cell.bg_mae) : "n/a";
            if (cell.n_omitted > 0) text += '?';
            if (cell.train_id == cell.test_id) text = "[" + text + "]";
            row.push_back(std::move(text));
        }
        grid.push_back(std::move(row));
    }
    std::vector<std::size_t> widths(header.size(), 0);
    for (const auto& row : grid) {
        for (std::size_t j = 0; j < row.size(); ++j) widths[j] = std::max(widths[j], row[j].size());
    }
    std::string out;
    for (const auto& row : grid) {
        for (std::size_t j = 0; j < row.size(); ++j) {
            out += j == 0 ? fmt::format("{:<{}}", row[j], widths[j]) : fmt::format("  {:>{}}", row[j], widths[j]);
        }
        out += '\n';
    }
    return out;
}

}  // namespace bgcount
