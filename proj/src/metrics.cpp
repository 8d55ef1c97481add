#include "bgcount/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "bgcount/parallel.hpp"

namespace bgcount {

std::string_view region_name(Region r) {
    switch (r) {
        case Region::Background: return "Background";
        case Region::Foreground: return "Foreground";
        case Region::FullImage: return "FullImage";
    }
    return "?";
}

std::shared_ptr<const EvalTarget> make_eval_target(AnnotatedImage annotation,
                                                   std::vector<HeadSizeEstimate> sizes,
                                                   std::optional<BinaryMask> roi, double sigma) {
    if (sizes.size() != annotation.points.size()) {
        throw ShapeError("eval target '" + annotation.image_id + "': sizes/points length mismatch");
    }
    if (roi && (roi->height() != annotation.height || roi->width() != annotation.width)) {
        throw ShapeError("eval target '" + annotation.image_id + "': ROI shape mismatch");
    }
    auto target = std::make_shared<EvalTarget>();
    target->gt_density = gaussian_density_map(annotation, sigma);
    target->annotation = std::move(annotation);
    target->sizes = std::move(sizes);
    target->roi = std::move(roi);
    return target;
}

EvalPair make_eval_pair(std::shared_ptr<const EvalTarget> target, DensityMap predicted) {
    if (!target) throw ParameterError("make_eval_pair: null target");
    require_same_shape(predicted, target->gt_density, "eval pair");
    return EvalPair{std::move(target), std::move(predicted)};
}

std::array<BinaryMask, 3> region_masks(const EvalTarget& target, double alpha) {
    const auto& ann = target.annotation;
    BinaryMask fg = build_foreground_mask(ann, target.sizes, alpha);
    BinaryMask bg = complement(fg);
    if (target.roi) {
        return {intersect(bg, *target.roi), intersect(fg, *target.roi), *target.roi};
    }
    return {std::move(bg), std::move(fg), all_ones(ann.height, ann.width)};
}

ImageTerms image_terms(const EvalPair& pair, double alpha) {
    const EvalTarget& target = *pair.target;
    require_same_shape(pair.predicted, target.gt_density, "image_terms");
    const auto masks = region_masks(target, alpha);
    const std::size_t valid = count_ones(masks[static_cast<std::size_t>(Region::FullImage)]);

    ImageTerms terms;
    terms.image_id = target.image_id();
    for (std::size_t r = 0; r < masks.size(); ++r) {
        terms.pred_count[r] = masked_count(pair.predicted, masks[r]);
        terms.gt_count[r] = masked_count(target.gt_density, masks[r]);
        terms.surface[r] = valid == 0 ? 0.0
                                      : static_cast<double>(count_ones(masks[r])) /
                                            static_cast<double>(valid);
    }
    return terms;
}

namespace {

void check_alpha(double alpha) {
    if (!(alpha > 0.0) || !std::isfinite(alpha)) throw ParameterError("alpha must be positive");
}

// Indices of `pairs` sorted by image_id; rejects empty input and duplicates.
std::vector<std::size_t> id_order(std::span<const EvalPair> pairs) {
    if (pairs.empty()) throw ParameterError("no evaluation pairs");
    std::vector<std::size_t> order(pairs.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return pairs[a].image_id() < pairs[b].image_id();
    });
    for (std::size_t i = 1; i < order.size(); ++i) {
        if (pairs[order[i]].image_id() == pairs[order[i - 1]].image_id()) {
            throw ParameterError("duplicate image_id '" + pairs[order[i]].image_id() + "'");
        }
    }
    return order;
}

}  // namespace

std::vector<ImageTerms> collect_terms(std::span<const EvalPair> pairs, double alpha, unsigned jobs) {
    check_alpha(alpha);
    const auto order = id_order(pairs);
    std::vector<ImageTerms> terms(pairs.size());
    parallel_for(order.size(), jobs, [&](std::size_t i) { terms[i] = image_terms(pairs[order[i]], alpha); });
    return terms;
}

RegionReport aggregate_terms(std::span<const ImageTerms> terms) {
    if (terms.empty()) throw ParameterError("no evaluation terms");
    const auto n = static_cast<double>(terms.size());
    RegionReport report;
    for (const Region region : kRegions) {
        const auto r = static_cast<std::size_t>(region);
        double abs_sum = 0.0;
        double sq_sum = 0.0;
        double surface_sum = 0.0;
        for (const auto& t : terms) {
            const double e = t.error(region);
            abs_sum += std::abs(e);
            sq_sum += e * e;
            surface_sum += t.surface[r];
        }
        report.regions[r] = RegionMetrics{region, abs_sum / n, std::sqrt(sq_sum / n),
                                          surface_sum / n, terms.size()};
    }
    return report;
}

RegionReport region_metrics(std::span<const EvalPair> pairs, double alpha, unsigned jobs) {
    const auto terms = collect_terms(pairs, alpha, jobs);
    return aggregate_terms(terms);
}

Decomposition decompose(const RegionReport& report) {
    Decomposition d;
    d.mae_full = report.full().mae;
    d.mae_bg = report.background().mae;
    d.mae_fg = report.foreground().mae;
    // Mathematically >= 0; a negative value can only be rounding.
    d.slack = std::max(0.0, d.mae_bg + d.mae_fg - d.mae_full);
    d.hidden_compensation = d.slack > kHiddenCompensationRatio * d.mae_full && d.slack > 1e-9;
    return d;
}

Decomposition decomposition_report(std::span<const EvalPair> pairs, double alpha, unsigned jobs) {
    return decompose(region_metrics(pairs, alpha, jobs));
}

std::vector<std::size_t> game_boundaries(std::size_t extent, int level) {
    if (level < 0 || level > 30) throw ParameterError("GAME level out of range");
    std::vector<std::size_t> bounds{0, extent};
    for (int l = 0; l < level; ++l) {
        std::vector<std::size_t> next;
        next.reserve(bounds.size() * 2 - 1);
        for (std::size_t i = 0; i + 1 < bounds.size(); ++i) {
            next.push_back(bounds[i]);
            next.push_back(bounds[i] + (bounds[i + 1] - bounds[i]) / 2);
        }
        next.push_back(extent);
        bounds = std::move(next);
    }
    return bounds;
}

double game(const DensityMap& pred, const DensityMap& gt, int level) {
    require_same_shape(pred, gt, "game");
    if (level < 0 || level > 30 ||
        (std::size_t{1} << level) > std::min(pred.height(), pred.width())) {
        throw ParameterError("GAME level " + std::to_string(level) + " too large for a " +
                             std::to_string(pred.height()) + "x" + std::to_string(pred.width()) +
                             " map");
    }
    const auto rows = game_boundaries(pred.height(), level);
    const auto cols = game_boundaries(pred.width(), level);
    double error = 0.0;
    for (std::size_t ci = 0; ci + 1 < rows.size(); ++ci) {
        for (std::size_t cj = 0; cj + 1 < cols.size(); ++cj) {
            double p = 0.0;
            double g = 0.0;
            for (std::size_t j = rows[ci]; j < rows[ci + 1]; ++j) {
                for (std::size_t k = cols[cj]; k < cols[cj + 1]; ++k) {
                    p += pred(j, k);
                    g += gt(j, k);
                }
            }
            error += std::abs(p - g);
        }
    }
    return error;
}

SweepCurve alpha_sweep(std::span<const EvalPair> pairs, std::span<const double> alphas, unsigned jobs) {
    if (alphas.empty()) throw ParameterError("alpha_sweep: no alphas");
    for (std::size_t i = 0; i < alphas.size(); ++i) {
        check_alpha(alphas[i]);
        if (i > 0 && !(alphas[i] > alphas[i - 1])) {
            throw ParameterError("alpha_sweep: alphas must be strictly increasing");
        }
    }
    SweepCurve curve;
    for (const double alpha : alphas) {
        const auto terms = collect_terms(pairs, alpha, jobs);
        const auto report = aggregate_terms(terms);
        double bg_pred = 0.0;
        for (const auto& t : terms) bg_pred += t.pred_count[static_cast<std::size_t>(Region::Background)];
        curve.alphas.push_back(alpha);
        curve.bg_mae.push_back(report.background().mae);
        curve.fg_mae.push_back(report.foreground().mae);
        curve.bg_pred_count_mean.push_back(bg_pred / static_cast<double>(terms.size()));
    }
    return curve;
}

bool bg_count_nonincreasing(const SweepCurve& curve) {
    for (std::size_t i = 1; i < curve.bg_pred_count_mean.size(); ++i) {
        if (curve.bg_pred_count_mean[i] > curve.bg_pred_count_mean[i - 1]) return false;
    }
    return true;
}

CrossEvalTable cross_eval(std::span<const std::string> train_ids, std::span<const TestDataset> tests,
                          const PredictionLookup& lookup, double alpha, unsigned jobs) {
    check_alpha(alpha);
    CrossEvalTable table;
    table.train_ids.assign(train_ids.begin(), train_ids.end());
    for (const auto& t : tests) table.test_ids.push_back(t.dataset_id);

    for (const auto& train : train_ids) {
        for (const auto& test : tests) {
            CrossEvalCell cell{train, test.dataset_id, std::nullopt, 0, 0};
            std::vector<EvalPair> pairs;
            for (const auto& target : test.targets) {
                auto pred = lookup(train, test.dataset_id, target->image_id());
                if (!pred) {
                    table.omissions.push_back({train, test.dataset_id, target->image_id()});
                    ++cell.n_omitted;
                    continue;
                }
                pairs.push_back(make_eval_pair(target, std::move(*pred)));
            }
            cell.n_images_used = pairs.size();
            if (!pairs.empty()) cell.bg_mae = region_metrics(pairs, alpha, jobs).background().mae;
            table.cells.push_back(std::move(cell));
        }
    }
    return table;
}

}  // namespace bgcount
