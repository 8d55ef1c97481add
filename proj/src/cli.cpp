#include "bgcount/cli.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <set>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <fmt/ostream.h>
#include <json.hpp>

#include "bgcount/dataset.hpp"
#include "bgcount/grid_io.hpp"
#include "bgcount/parallel.hpp"
#include "bgcount/report.hpp"
#include "bgcount/training.hpp"

namespace bgcount {

namespace fs = std::filesystem;

namespace {

struct MaskOpts {
    std::string annotations, detections, out_dir, roi_dir;
    double alpha = kDefaultEvalAlpha;
    unsigned jobs = 1;
};

struct DensityOpts {
    std::string annotations, out_dir;
    double sigma = kDefaultDensitySigma;
    unsigned jobs = 1;
};

struct EvalOpts {
    std::string manifest, out;
    double alpha = kDefaultEvalAlpha;
    std::vector<int> game_levels;
    unsigned jobs = 1;
};

struct SweepOpts {
    std::string manifest, out;
    std::vector<double> alphas{1, 2, 3, 4, 5, 6};
    unsigned jobs = 1;
};

struct CrossOpts {
    std::vector<std::string> manifests, pred_dirs;
    std::string out;
    double alpha = kDefaultEvalAlpha;
    unsigned jobs = 1;
};

struct SynthOpts {
    std::size_t n = 8, height = 40, width = 40;
    std::uint64_t seed = 7;
    std::string out_dir;
    SceneProfile profile;
    unsigned jobs = 1;
};

struct ToyOpts {
    std::size_t scenes = 16, height = 40, width = 40;
    std::uint64_t seed = 7;
    TrainConfig train;
    std::string loss = "l1";
    std::string out, trace;
    unsigned jobs = 1;
};

struct ExperimentOpts {
    std::uint64_t seed = 7;
    std::size_t runs = 5;
    std::size_t size = 40;
    ExperimentConfig cfg;
    std::string loss = "l1";
    std::string out;
    bool check = false;
};

class CheckFailed : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

void write_text(const fs::path& path, const std::string& text) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw Error("cannot open '" + path.string() + "' for writing");
    f << text;
    if (!f) throw Error("write failed for '" + path.string() + "'");
}

DensityLossKind parse_loss(const std::string& s) {
    if (s == "l1") return DensityLossKind::LiteralEq4;
    if (s == "l2") return DensityLossKind::SquaredL2;
    throw ParameterError("--loss must be l1 or l2");
}

std::string join(const std::vector<std::string>& v) {
    std::string s;
    for (const auto& x : v) s += (s.empty() ? "" : ",") + x;
    return s;
}

void print_load_report(std::ostream& out, const AnnotationLoadReport& r) {
    fmt::print(out, "annotations: {} images, {} points, {} clamped into bounds\n", r.records, r.points,
               r.clamped_points);
}

int cmd_mask(const MaskOpts& o, std::ostream& out) {
    fmt::print(out, "# bgcount mask --annotations {} --alpha {} --out-dir {}{}{} --jobs {}\n", o.annotations,
               o.alpha, o.out_dir, o.detections.empty() ? "" : " --detections " + o.detections,
               o.roi_dir.empty() ? "" : " --roi-dir " + o.roi_dir, o.jobs);
    if (!(o.alpha > 0.0)) throw ParameterError("--alpha must be positive");
    const AnnotationSet set = load_annotations(o.annotations);
    print_load_report(out, set.report);
    DetectionIndex detections;
    if (!o.detections.empty()) detections = load_detections(o.detections);
    fs::create_directories(o.out_dir);

    const auto& images = set.images;
    std::vector<double> fraction(images.size(), 0.0);
    std::vector<std::string> notes(images.size());
    parallel_for(images.size(), o.jobs, [&](std::size_t i) {
        const auto& img = images[i];
        std::span<const Detection> dets;
        if (auto it = detections.find(img.image_id); it != detections.end()) dets = it->second;
        const auto sizes = estimate_head_sizes(img, dets);
        BinaryMask valid = all_ones(img.height, img.width);
        if (!o.roi_dir.empty()) {
            const fs::path roi_path = fs::path(o.roi_dir) / (img.image_id + ".mask");
            if (fs::exists(roi_path)) {
                valid = read_mask(roi_path);
            } else {
                notes[i] = "no ROI file for '" + img.image_id + "', using the whole image";
            }
        }
        const BinaryMask fg = build_foreground_mask(img, sizes, o.alpha, &valid);
        write_mask(fs::path(o.out_dir) / (img.image_id + ".mask"), fg);
        const std::size_t n_valid = count_ones(valid);
        fraction[i] = n_valid == 0 ? 0.0 : static_cast<double>(count_ones(fg)) / static_cast<double>(n_valid);
    });
    for (const auto& n : notes) {
        if (!n.empty()) fmt::print(out, "note: {}\n", n);
    }
    fmt::print(out, "image_id,foreground_fraction\n");
    for (std::size_t i = 0; i < images.size(); ++i) {
        fmt::print(out, "{},{:.6f}\n", images[i].image_id, fraction[i]);
    }
    if (!images.empty()) {
        double sum = 0.0;
        for (const double f : fraction) sum += f;
        fmt::print(out, "summary: {} masks, foreground fraction mean {:.6f} min {:.6f} max {:.6f}\n",
                   images.size(), sum / static_cast<double>(images.size()),
                   *std::min_element(fraction.begin(), fraction.end()),
                   *std::max_element(fraction.begin(), fraction.end()));
    }
    return kExitOk;
}

int cmd_density(const DensityOpts& o, std::ostream& out) {
    fmt::print(out, "# bgcount density --annotations {} --sigma {} --out-dir {} --jobs {}\n", o.annotations,
               o.sigma, o.out_dir, o.jobs);
    const AnnotationSet set = load_annotations(o.annotations);
    print_load_report(out, set.report);
    fs::create_directories(o.out_dir);
    const auto& images = set.images;
    std::vector<double> sums(images.size(), 0.0);
    parallel_for(images.size(), o.jobs, [&](std::size_t i) {
        const DensityMap d = gaussian_density_map(images[i], o.sigma);
        sums[i] = total(d);
        write_density(fs::path(o.out_dir) / (images[i].image_id + ".dmap"), d);
    });
    bool ok = true;
    fmt::print(out, "image_id,n_points,density_sum,discrepancy\n");
    for (std::size_t i = 0; i < images.size(); ++i) {
        const double n = static_cast<double>(images[i].count());
        const double disc = std::abs(sums[i] - n);
        if (disc > 0.0 && disc >= 1e-6 * n) ok = false;
        fmt::print(out, "{},{},{:.9f},{:.3e}\n", images[i].image_id, images[i].count(), sums[i], disc);
    }
    if (!ok) throw CheckFailed("density sum differs from the point count by 1e-6 * N or more");
    return kExitOk;
}

void print_prediction_notes(std::ostream& out, const LoadedDataset& ds, const PredictionSet& preds) {
    for (const auto& n : ds.notes) fmt::print(out, "note: {}\n", n);
    for (const auto& id : preds.missing) fmt::print(out, "omitted: no prediction for '{}'\n", id);
    if (preds.negative_values > 0) {
        fmt::print(out, "note: predictions contain {} negative values\n", preds.negative_values);
    }
}

PredictionSet require_predictions(const LoadedDataset& ds, unsigned jobs, std::ostream& out) {
    PredictionSet preds = load_predictions(ds, ds.manifest.predictions_dir, jobs);
    print_prediction_notes(out, ds, preds);
    if (preds.pairs.empty()) throw Error("no evaluable images in dataset '" + ds.manifest.dataset_id + "'");
    return preds;
}

DensityMap restrict_to(const DensityMap& d, const std::optional<BinaryMask>& roi) {
    if (!roi) return d;
    std::vector<double> v(d.values().begin(), d.values().end());
    const auto m = roi->values();
    for (std::size_t i = 0; i < v.size(); ++i) v[i] *= static_cast<double>(m[i]);
    return DensityMap(d.height(), d.width(), std::move(v));
}

int cmd_eval(const EvalOpts& o, std::ostream& out) {
    std::string levels;
    for (const int l : o.game_levels) levels += (levels.empty() ? "" : ",") + std::to_string(l);
    fmt::print(out, "# bgcount eval --manifest {} --alpha {}{} --out {} --jobs {}\n", o.manifest, o.alpha,
               levels.empty() ? "" : " --game-levels " + levels, o.out, o.jobs);
    if (!(o.alpha > 0.0)) throw ParameterError("--alpha must be positive");
    const LoadedDataset ds = load_dataset(load_manifest(o.manifest), o.jobs);
    print_load_report(out, ds.load_report);
    const PredictionSet preds = require_predictions(ds, o.jobs, out);

    const auto terms = collect_terms(preds.pairs, o.alpha, o.jobs);
    const RegionReport report = aggregate_terms(terms);
    const Decomposition dec = decompose(report);

    std::vector<GameColumn> game_cols;
    for (const int level : o.game_levels) {
        std::vector<double> per_image(preds.pairs.size(), 0.0);
        parallel_for(preds.pairs.size(), o.jobs, [&](std::size_t i) {
            const auto& p = preds.pairs[i];
            const auto& roi = p.target->roi;
            per_image[i] = game(restrict_to(p.predicted, roi), restrict_to(p.target->gt_density, roi), level);
        });
        // Pairs are already in image_id order.
        double sum = 0.0;
        for (const double g : per_image) sum += g;
        game_cols.push_back({level, sum / static_cast<double>(per_image.size())});
    }

    write_text(o.out, region_report_csv(report, o.alpha, dec, game_cols));
    for (const Region r : kRegions) {
        const auto& m = report[r];
        fmt::print(out, "{:<10} mae {:.6f} mse {:.6f} surface {:.6f} images {}\n", region_name(r), m.mae, m.mse,
                   m.surface_fraction, m.n_images);
    }
    fmt::print(out, "slack {:.6f}{}\n", dec.slack,
               dec.hidden_compensation ? " (hidden compensation: bg and fg errors cancel in the full count)" : "");
    for (const auto& g : game_cols) fmt::print(out, "GAME(L={}) {:.6f}\n", g.level, g.value);
    return kExitOk;
}

int cmd_sweep(const SweepOpts& o, std::ostream& out) {
    std::string alphas;
    for (const double a : o.alphas) alphas += (alphas.empty() ? "" : ",") + fmt::format("{}", a);
    fmt::print(out, "# bgcount sweep --manifest {} --alphas {} --out {} --jobs {}\n", o.manifest, alphas, o.out,
               o.jobs);
    const LoadedDataset ds = load_dataset(load_manifest(o.manifest), o.jobs);
    print_load_report(out, ds.load_report);
    const PredictionSet preds = require_predictions(ds, o.jobs, out);
    const SweepCurve curve = alpha_sweep(preds.pairs, o.alphas, o.jobs);
    write_text(o.out, sweep_csv(curve));
    out << sweep_csv(curve);
    if (preds.negative_values > 0) {
        fmt::print(out, "monotonicity not asserted: predictions contain negative values\n");
        return kExitOk;
    }
    if (!bg_count_nonincreasing(curve)) {
        throw CheckFailed("mean predicted background count increases with alpha");
    }
    fmt::print(out, "background count nonincreasing in alpha: ok\n");
    return kExitOk;
}

std::string dir_basename(const std::string& dir) {
    fs::path p = fs::path(dir).lexically_normal();
    if (p.filename().empty()) p = p.parent_path();
    return p.filename().string();
}

int cmd_crosseval(const CrossOpts& o, std::ostream& out) {
    fmt::print(out, "# bgcount crosseval --manifests {} --pred-dirs {} --alpha {} --out {} --jobs {}\n",
               join(o.manifests), join(o.pred_dirs), o.alpha, o.out, o.jobs);
    std::vector<std::string> train_ids;
    for (const auto& d : o.pred_dirs) {
        train_ids.push_back(dir_basename(d));
        if (!fs::is_directory(d)) throw Error("prediction directory '" + d + "' not found");
    }
    if (std::set<std::string>(train_ids.begin(), train_ids.end()).size() != train_ids.size()) {
        throw ParameterError("prediction directories must have distinct names");
    }
    std::vector<TestDataset> tests;
    for (const auto& m : o.manifests) {
        LoadedDataset ds = load_dataset(load_manifest(m), o.jobs);
        for (const auto& n : ds.notes) fmt::print(out, "note: {}\n", n);
        tests.push_back({ds.manifest.dataset_id, std::move(ds.targets)});
    }
    std::vector<std::string> test_ids;
    for (const auto& t : tests) test_ids.push_back(t.dataset_id);
    if (std::set<std::string>(test_ids.begin(), test_ids.end()).size() != test_ids.size()) {
        throw ParameterError("manifests must have distinct dataset ids");
    }

    const auto lookup = [&](const std::string& train_id, const std::string& test_id,
                            const std::string& image_id) -> std::optional<DensityMap> {
        const auto it = std::find(train_ids.begin(), train_ids.end(), train_id);
        const fs::path p = fs::path(o.pred_dirs[static_cast<std::size_t>(it - train_ids.begin())]) / test_id /
                           (image_id + ".dmap");
        if (!fs::exists(p)) return std::nullopt;
        return read_density(p);
    };
    const CrossEvalTable table = cross_eval(train_ids, tests, lookup, o.alpha, o.jobs);
    write_text(o.out, cross_eval_csv(table));
    out << cross_eval_text(table);
    for (const auto& om : table.omissions) {
        fmt::print(out, "omitted: {} on {}: no prediction for '{}'\n", om.train_id, om.test_id, om.image_id);
    }
    return kExitOk;
}

std::string annotation_line(const AnnotatedImage& img) {
    nlohmann::json j;
    j["image_id"] = img.image_id;
    j["width"] = img.width;
    j["height"] = img.height;
    j["points"] = nlohmann::json::array();
    for (const auto& p : img.points) j["points"].push_back({{"x", p.x}, {"y", p.y}});
    return j.dump() + "\n";
}

int cmd_synth(const SynthOpts& o, std::ostream& out) {
    const auto& pr = o.profile;
    fmt::print(out,
               "# bgcount synth --n {} --height {} --width {} --seed {} --min-people {} --max-people {} "
               "--min-clutter {} --max-clutter {} --out-dir {} --jobs {}\n",
               o.n, o.height, o.width, o.seed, pr.min_people, pr.max_people, pr.min_clutter, pr.max_clutter,
               o.out_dir, o.jobs);
    const auto scenes = generate_scenes(o.n, o.height, o.width, o.seed, pr, o.jobs);
    const fs::path root(o.out_dir);
    fs::create_directories(root / "gt");
    fs::create_directories(root / "input");
    std::string jsonl;
    for (const auto& s : scenes) {
        jsonl += annotation_line(s.annotation);
        write_density(root / "gt" / (s.annotation.image_id + ".dmap"), s.gt_density);
        const auto px = s.input.values();
        write_density(root / "input" / (s.annotation.image_id + ".dmap"),
                      DensityMap(s.input.height(), s.input.width(), std::vector<double>(px.begin(), px.end())));
    }
    write_text(root / "annotations.jsonl", jsonl);
    Manifest m;
    m.dataset_id = "synth";
    m.annotations_path = "annotations.jsonl";
    m.predictions_dir = "gt";
    m.density_sigma = pr.density_sigma;
    write_text(root / "manifest.json", manifest_json(m));
    std::size_t people = 0;
    for (const auto& s : scenes) people += s.annotation.count();
    fmt::print(out, "wrote {} scenes ({} people) to {}\n", scenes.size(), people, root.string());
    return kExitOk;
}

int cmd_train_toy(ToyOpts o, std::ostream& out) {
    o.train.density_loss = parse_loss(o.loss);
    o.train.seed = o.seed;
    fmt::print(out,
               "# bgcount train-toy --seed {} --scenes {} --height {} --width {} --{} --lambda {} --lr {} "
               "--epochs {} --loss {} --out {}{}\n",
               o.seed, o.scenes, o.height, o.width, o.train.with_bs ? "with-bs" : "no-bs", o.train.lambda,
               o.train.learning_rate, o.train.epochs, o.loss, o.out, o.trace.empty() ? "" : " --trace " + o.trace);
    SceneProfile profile;
    const auto scenes = generate_scenes(o.scenes, o.height, o.width, derive_seed(o.seed, 0), profile, o.jobs, "train");
    const TrainResult r = train(scenes, o.train);
    write_params(o.out, r.params);
    std::string trace = "epoch,total,density,bce\n";
    for (const auto& e : r.trace) {
        trace += fmt::format("{},{:.9g},{:.9g},{:.9g}\n", e.epoch, e.total, e.density, e.bce);
    }
    if (!o.trace.empty()) write_text(o.trace, trace);
    if (!r.trace.empty()) {
        fmt::print(out, "loss first epoch {:.6f}, last epoch {:.6f}\n", r.trace.front().total, r.trace.back().total);
    }
    fmt::print(out, "wrote {} parameters to {}\n", r.params.parameter_count(), o.out);
    return kExitOk;
}

int cmd_bs_experiment(ExperimentOpts o, std::ostream& out) {
    o.cfg.train.density_loss = parse_loss(o.loss);
    o.cfg.height = o.cfg.width = o.size;
    fmt::print(out,
               "# bgcount bs-experiment --seed {} --runs {} --size {} --train-scenes {} --test-scenes {} "
               "--background-scenes {} --lambda {} --lr {} --epochs {} --loss {} --alpha {} --out {} --jobs {}\n",
               o.seed, o.runs, o.size, o.cfg.train_scenes, o.cfg.test_scenes, o.cfg.background_scenes,
               o.cfg.train.lambda, o.cfg.train.learning_rate, o.cfg.train.epochs, o.loss, o.cfg.eval_alpha, o.out,
               o.cfg.jobs);
    std::vector<std::uint64_t> seeds;
    for (std::size_t i = 0; i < o.runs; ++i) seeds.push_back(o.seed + i);
    const ExperimentReport r = bs_experiment(seeds, o.cfg);
    const std::string csv = experiment_csv(r);
    write_text(o.out, csv);
    out << csv;
    for (const auto& w : r.warnings) fmt::print(out, "warning: {}\n", w);
    const auto& a = r.with_bs;
    const auto& b = r.without_bs;
    const bool bg_ok = a.bg_mae <= 0.75 * b.bg_mae;
    const bool full_ok = a.full_mae <= 1.05 * b.full_mae;
    const bool pure_ok = a.pure_bg_count < b.pure_bg_count;
    fmt::print(out, "background MAE change {:+.1f}% ({})\n", 100.0 * (a.bg_mae - b.bg_mae) / b.bg_mae,
               bg_ok ? "at least 25% lower" : "less than 25% lower");
    fmt::print(out, "full-image MAE change {:+.1f}% ({})\n", 100.0 * (a.full_mae - b.full_mae) / b.full_mae,
               full_ok ? "within 5%" : "more than 5% worse");
    fmt::print(out, "pure-background count {:.6f} vs {:.6f} ({})\n", a.pure_bg_count, b.pure_bg_count,
               pure_ok ? "lower" : "not lower");
    if (o.check && !(bg_ok && full_ok && pure_ok)) throw CheckFailed("suppression did not improve as expected");
    return kExitOk;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Region-split evaluation of crowd density maps", "bgcount"};
    app.require_subcommand(1);

    MaskOpts mask;
    auto* s_mask = app.add_subcommand("mask", "Write foreground masks from annotations");
    s_mask->add_option("--annotations", mask.annotations, "annotation JSON lines")->required();
    s_mask->add_option("--detections", mask.detections, "head detection JSON lines");
    s_mask->add_option("--alpha", mask.alpha, "head diameter dilation")->capture_default_str();
    s_mask->add_option("--out-dir", mask.out_dir)->required();
    s_mask->add_option("--roi-dir", mask.roi_dir, "directory of <image_id>.mask ROI files");
    s_mask->add_option("--jobs", mask.jobs)->capture_default_str();

    DensityOpts dens;
    auto* s_dens = app.add_subcommand("density", "Write Gaussian ground-truth density maps");
    s_dens->add_option("--annotations", dens.annotations)->required();
    s_dens->add_option("--sigma", dens.sigma)->capture_default_str();
    s_dens->add_option("--out-dir", dens.out_dir)->required();
    s_dens->add_option("--jobs", dens.jobs)->capture_default_str();

    EvalOpts ev;
    auto* s_eval = app.add_subcommand("eval", "Background/foreground/full-image report");
    s_eval->add_option("--manifest", ev.manifest)->required();
    s_eval->add_option("--alpha", ev.alpha)->capture_default_str();
    s_eval->add_option("--game-levels", ev.game_levels, "e.g. 0,1,2")->delimiter(',');
    s_eval->add_option("--out", ev.out, "report CSV")->required();
    s_eval->add_option("--jobs", ev.jobs)->capture_default_str();

    SweepOpts sw;
    auto* s_sweep = app.add_subcommand("sweep", "Region errors as a function of alpha");
    s_sweep->add_option("--manifest", sw.manifest)->required();
    s_sweep->add_option("--alphas", sw.alphas)->delimiter(',')->capture_default_str();
    s_sweep->add_option("--out", sw.out)->required();
    s_sweep->add_option("--jobs", sw.jobs)->capture_default_str();

    CrossOpts cx;
    auto* s_cross = app.add_subcommand("crosseval", "Background MAE of every model on every dataset");
    s_cross->add_option("--manifests", cx.manifests)->delimiter(',')->required();
    s_cross->add_option("--pred-dirs", cx.pred_dirs, "one per model; <dir>/<dataset_id>/<image_id>.dmap")
        ->delimiter(',')
        ->required();
    s_cross->add_option("--alpha", cx.alpha)->capture_default_str();
    s_cross->add_option("--out", cx.out, "matrix CSV")->required();
    s_cross->add_option("--jobs", cx.jobs)->capture_default_str();

    SynthOpts sy;
    auto* s_synth = app.add_subcommand("synth", "Generate a synthetic dataset with a self-evaluation manifest");
    s_synth->add_option("--n", sy.n)->capture_default_str();
    s_synth->add_option("--height", sy.height)->capture_default_str();
    s_synth->add_option("--width", sy.width)->capture_default_str();
    s_synth->add_option("--seed", sy.seed)->capture_default_str();
    s_synth->add_option("--min-people", sy.profile.min_people)->capture_default_str();
    s_synth->add_option("--max-people", sy.profile.max_people)->capture_default_str();
    s_synth->add_option("--min-clutter", sy.profile.min_clutter)->capture_default_str();
    s_synth->add_option("--max-clutter", sy.profile.max_clutter)->capture_default_str();
    s_synth->add_option("--out-dir", sy.out_dir)->required();
    s_synth->add_option("--jobs", sy.jobs)->capture_default_str();

    ToyOpts toy;
    auto* s_toy = app.add_subcommand("train-toy", "Train the toy two-head model on synthetic scenes");
    s_toy->add_option("--seed", toy.seed)->capture_default_str();
    s_toy->add_option("--scenes", toy.scenes)->capture_default_str();
    s_toy->add_option("--height", toy.height)->capture_default_str();
    s_toy->add_option("--width", toy.width)->capture_default_str();
    s_toy->add_flag("--with-bs,!--no-bs", toy.train.with_bs, "background suppression branch (default on)");
    s_toy->add_option("--lambda", toy.train.lambda)->capture_default_str();
    s_toy->add_option("--lr", toy.train.learning_rate)->capture_default_str();
    s_toy->add_option("--epochs", toy.train.epochs)->capture_default_str();
    s_toy->add_option("--loss", toy.loss, "l1 (sum of absolute differences) or l2")->capture_default_str();
    s_toy->add_option("--out", toy.out, "parameter file")->required();
    s_toy->add_option("--trace", toy.trace, "per-epoch loss CSV");
    s_toy->add_option("--jobs", toy.jobs)->capture_default_str();

    ExperimentOpts ex;
    auto* s_ex = app.add_subcommand("bs-experiment", "Compare training with and without background suppression");
    s_ex->add_option("--seed", ex.seed, "first seed; runs use seed .. seed+runs-1")->capture_default_str();
    s_ex->add_option("--runs", ex.runs)->capture_default_str();
    s_ex->add_option("--size", ex.size, "scene height and width")->capture_default_str();
    s_ex->add_option("--train-scenes", ex.cfg.train_scenes)->capture_default_str();
    s_ex->add_option("--test-scenes", ex.cfg.test_scenes)->capture_default_str();
    s_ex->add_option("--background-scenes", ex.cfg.background_scenes)->capture_default_str();
    s_ex->add_option("--lambda", ex.cfg.train.lambda)->capture_default_str();
    s_ex->add_option("--lr", ex.cfg.train.learning_rate)->capture_default_str();
    s_ex->add_option("--epochs", ex.cfg.train.epochs)->capture_default_str();
    s_ex->add_option("--loss", ex.loss)->capture_default_str();
    s_ex->add_option("--alpha", ex.cfg.eval_alpha, "evaluation alpha")->capture_default_str();
    s_ex->add_option("--out", ex.out, "report CSV")->required();
    s_ex->add_flag("--check", ex.check, "exit 1 unless suppression lowers background error");
    s_ex->add_option("--jobs", ex.cfg.jobs)->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e, out, err) == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (*s_mask) return cmd_mask(mask, out);
        if (*s_dens) return cmd_density(dens, out);
        if (*s_eval) return cmd_eval(ev, out);
        if (*s_sweep) return cmd_sweep(sw, out);
        if (*s_cross) return cmd_crosseval(cx, out);
        if (*s_synth) return cmd_synth(sy, out);
        if (*s_toy) return cmd_train_toy(toy, out);
        if (*s_ex) return cmd_bs_experiment(ex, out);
    } catch (const CheckFailed& e) {
        fmt::print(err, "check failed: {}\n", e.what());
        return kExitCheckFailed;
    } catch (const std::exception& e) {
        fmt::print(err, "error: {}\n", e.what());
        return kExitUsage;
    }
    return kExitUsage;
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    std::vector<const char*> argv{"bgcount"};
    for (const auto& a : args) argv.push_back(a.c_str());
    return run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
}

}  // namespace bgcount
