// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any
// criterion fails.

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>

#include <fmt/format.h>

#include "bgcount/cli.hpp"
#include "bgcount/grid_io.hpp"
#include "bgcount/metrics.hpp"
#include "bgcount/training.hpp"
#include "gradcheck.hpp"
#include "oracles.hpp"

using namespace bgcount;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    bool pass = true;
    std::string detail;
};

std::shared_ptr<const EvalTarget> target_of(const oracle::Case& c) {
    return std::make_shared<const EvalTarget>(
        EvalTarget{c.img, testgen::sizes(c.diameters), c.roi, c.gt});
}

oracle::Case random_case(std::mt19937_64& rng, const std::string& id, std::size_t max_side, bool nonneg_pred) {
    std::uniform_int_distribution<std::size_t> side(1, max_side);
    const std::size_t h = side(rng), w = side(rng);
    oracle::Case c{testgen::annotation(rng, h, w, 6, id), {}, std::nullopt, testgen::density(rng, h, w, 0.0, 1.0),
                   testgen::density(rng, h, w, nonneg_pred ? 0.0 : -0.5, 1.0)};
    c.diameters = testgen::diameters(rng, c.img.points.size());
    if (std::bernoulli_distribution(0.3)(rng)) c.roi = testgen::mask(rng, h, w, 0.8);
    return c;
}

Outcome decomposition_suite() {
    std::mt19937_64 rng(101);
    std::size_t images = 0, exact_violations = 0;
    double worst_additivity = 0.0, worst_excess = 0.0;
    for (int inst = 0; inst < 250; ++inst) {
        std::vector<EvalPair> pairs;
        const int n = std::uniform_int_distribution<int>(1, 5)(rng);
        for (int i = 0; i < n; ++i) {
            const auto c = random_case(rng, "i" + std::to_string(i), 48, false);
            pairs.push_back(make_eval_pair(target_of(c), c.pred));
        }
        const double alpha = std::uniform_real_distribution<double>(0.5, 6.0)(rng);
        const auto terms = collect_terms(pairs, alpha);
        const auto rep = aggregate_terms(terms);
        // full is summed independently of bg and fg, so allow last-bit rounding
        const double bound = rep.background().mae + rep.foreground().mae;
        if (rep.full().mae > bound) {
            ++exact_violations;
            worst_excess = std::max(worst_excess, (rep.full().mae - bound) / bound);
        }
        if (rep.full().mae > bound * (1.0 + 1e-12)) {
            return {false, fmt::format("instance {}: mae_full {} > bg {} + fg {}", inst, rep.full().mae,
                                       rep.background().mae, rep.foreground().mae)};
        }
        for (const auto& t : terms) {
            for (const auto* counts : {&t.pred_count, &t.gt_count}) {
                const double bg = (*counts)[0], fg = (*counts)[1], full = (*counts)[2];
                const double rel = std::abs(bg + fg - full) / std::max(std::abs(full), 1e-300);
                const double scale = std::abs(bg) + std::abs(fg);
                if (std::abs(bg + fg - full) > 1e-9 * std::max(std::abs(full), scale) && scale > 0) {
                    return {false, fmt::format("instance {}: C_bg + C_fg = {} vs C_full = {}", inst, bg + fg, full)};
                }
                if (full != 0.0) worst_additivity = std::max(worst_additivity, rel);
            }
            ++images;
        }
    }
    return {true, fmt::format("250 instances, {} images; worst additivity residual {:.2e} relative; "
                              "{} rounding-level triangle excesses, worst {:.2e} relative",
                              images, worst_additivity, exact_violations, worst_excess)};
}

Outcome density_normalization() {
    std::mt19937_64 rng(202);
    double worst = 0.0;
    for (int t = 0; t < 100; ++t) {
        AnnotatedImage img{"d" + std::to_string(t), 256, 256, {}};
        const int n = std::uniform_int_distribution<int>(1, 50)(rng);
        std::uniform_real_distribution<double> u(0.0, std::nextafter(256.0, 0.0));
        std::uniform_int_distribution<int> kind(0, 5);
        for (int i = 0; i < n; ++i) {
            HeadPoint p{u(rng), u(rng), std::nullopt};
            switch (kind(rng)) {
                case 0: p.x = 0.0; p.y = 0.0; break;  // corner
                case 1: p.x = 255.0; p.y = 255.0; break;
                case 2: p.x = 0.0; break;  // border
                case 3: p.y = 255.0; break;
                default: break;
            }
            img.points.push_back(p);
        }
        const double sum = total(gaussian_density_map(img, 15.0));
        const double err = std::abs(sum - n);
        worst = std::max(worst, err / n);
        if (!(err < 1e-6 * n)) return {false, fmt::format("set {}: sum {} for N={}", t, sum, n)};
    }
    return {true, fmt::format("100 sets; worst |sum - N| / N = {:.2e}", worst)};
}

Outcome oracle_equivalence() {
    std::mt19937_64 rng(303);
    for (int t = 0; t < 1000; ++t) {
        std::vector<oracle::Case> cases;
        std::vector<EvalPair> pairs;
        const int n = std::uniform_int_distribution<int>(1, 3)(rng);
        for (int i = 0; i < n; ++i) {
            cases.push_back(random_case(rng, "g" + std::to_string(n - i), 32, false));
            pairs.push_back(make_eval_pair(target_of(cases.back()), cases.back().pred));
        }
        const double alpha = std::uniform_real_distribution<double>(0.5, 6.0)(rng);
        const auto got = region_metrics(pairs, alpha);
        const auto want = oracle::region_metrics(cases, alpha);
        for (std::size_t r = 0; r < 3; ++r) {
            if (got.regions[r].mae != want.mae[r] || got.regions[r].mse != want.mse[r] ||
                got.regions[r].surface_fraction != want.surface[r]) {
                return {false, fmt::format("grid {}: region_metrics differs in region {}", t, r)};
            }
        }
        const auto& c = cases.front();
        const auto m = testgen::mask(rng, c.gt.height(), c.gt.width(), 0.5);
        if (masked_count(c.pred, m) != oracle::masked_sum(c.pred, oracle::from_grid(m))) {
            return {false, fmt::format("grid {}: masked_count differs", t)};
        }
        const std::size_t side = std::min(c.gt.height(), c.gt.width());
        int max_level = 0;
        while ((std::size_t{2} << max_level) <= side) ++max_level;
        const int level = std::uniform_int_distribution<int>(0, max_level)(rng);
        if (game(c.pred, c.gt, level) != oracle::game(c.pred, c.gt, level)) {
            return {false, fmt::format("grid {}: game level {} differs", t, level)};
        }
    }
    return {true, "1000 grids, all bitwise equal"};
}

Outcome game_monotonicity() {
    std::mt19937_64 rng(404);
    std::uniform_int_distribution<std::size_t> side(16, 40);
    std::size_t exact_violations = 0;
    double worst_excess = 0.0;
    for (int t = 0; t < 100; ++t) {
        const std::size_t h = side(rng), w = side(rng);
        const auto p = testgen::density(rng, h, w);
        const auto g = testgen::density(rng, h, w);
        double tp = 0.0, tg = 0.0;
        for (std::size_t j = 0; j < h; ++j)
            for (std::size_t k = 0; k < w; ++k) {
                tp += p(j, k);
                tg += g(j, k);
            }
        if (std::abs(game(p, g, 0) - std::abs(tp - tg)) > 1e-12) {
            return {false, fmt::format("pair {}: game(0) != |dC|", t)};
        }
        for (int l = 0; l <= 3; ++l) {
            const double lo = game(p, g, l), hi = game(p, g, l + 1);
            if (hi < lo) {  // cells are summed separately, so last-bit rounding can invert a tie
                ++exact_violations;
                worst_excess = std::max(worst_excess, (lo - hi) / lo);
            }
            if (hi < lo * (1.0 - 1e-12)) {
                return {false, fmt::format("pair {} ({}x{}): game({}) = {:.17g} < game({}) = {:.17g}", t, h, w, l + 1, game(p, g, l + 1), l, game(p, g, l))};
            }
        }
    }
    return {true, fmt::format("100 pairs, game(L+1) >= game(L) for L = 0..3; {} rounding-level inversions, "
                              "worst {:.2e} relative", exact_violations, worst_excess)};
}

Outcome gradient_checks() {
    std::size_t checked = 0, skipped = 0, tiny = 0;
    double worst = 0.0, worst_unfloored = 0.0;
    LossConfig cfg;  // lambda 1e-4
    SceneProfile prof;
    prof.person_sigma = 1.0;
    prof.clutter_sigma = 1.5;
    prof.density_sigma = 1.0;
    prof.border_margin = 1.0;
    prof.min_clutter = 1;
    prof.max_clutter = 2;

    // combined_loss on the raw intermediate map and logits
    std::mt19937_64 rng(505);
    for (int t = 0; t < 2; ++t) {
        const auto s = generate_scenes(1, 12, 12, 600 + t, prof)[0];
        const auto d = testgen::density(rng, 12, 12);
        std::normal_distribution<double> nd(0.0, 1.5);
        std::vector<double> lv(144);
        for (auto& x : lv) x = nd(rng);
        const RealGrid logits(12, 12, lv);
        const auto m = s.gt_mask(1.0);
        const auto out = combined_loss(d, logits, s.gt_density, m, cfg);
        const std::vector<double> dv(d.values().begin(), d.values().end());
        for (std::size_t i = 0; i < 144; ++i) {
            const auto fd = [&](double x) {
                auto v = dv;
                v[i] = x;
                return combined_loss(DensityMap(12, 12, v), logits, s.gt_density, m, cfg).total;
            };
            const auto fl = [&](double x) {
                auto v = lv;
                v[i] = x;
                return combined_loss(d, RealGrid(12, 12, v), s.gt_density, m, cfg).total;
            };
            for (const auto [a, n] : {std::pair{out.grad_wrt_density_int.values()[i], oracle::central_difference(fd, dv[i])},
                                      std::pair{out.grad_wrt_mask_logits.values()[i], oracle::central_difference(fl, lv[i])}}) {
                worst = std::max(worst, oracle::relative_error(a, n, gradcheck::kGradientFloor));
                worst_unfloored = std::max(worst_unfloored, oracle::relative_error(a, n, 1e-300));
                tiny += std::max(std::abs(a), std::abs(n)) < gradcheck::kGradientFloor;
                ++checked;
            }
        }
    }

    // every parameter of the toy model, both variants
    for (const bool bs : {true, false}) {
        std::uint64_t seed = bs ? 700 : 800;
        SyntheticScene s;
        ToyModelParams params;
        for (;; ++seed) {  // move away from rectifier kinks
            s = generate_scenes(1, 12, 12, seed, prof)[0];
            params = ToyModelParams::initialize(seed);
            if (gradcheck::min_abs_preactivation(params, s.input, bs) >= 1e-6) break;
        }
        std::vector<std::size_t> coords(params.parameter_count());
        for (std::size_t i = 0; i < coords.size(); ++i) coords[i] = i;
        const auto r = gradcheck::run(params, s.input, s.gt_density, s.gt_mask(1.0), bs, cfg, coords, 1e-5);
        checked += r.checked;
        skipped += r.skipped;
        tiny += r.below_floor;
        worst = std::max(worst, r.max_rel_error);
        worst_unfloored = std::max(worst_unfloored, r.max_rel_error_unfloored);
    }
    const bool ok = checked >= 100 && worst < 1e-4;
    return {ok, fmt::format("{} coordinates checked, {} skipped at kinks, max relative error {:.2e} "
                            "(denominator floor {:.0e}; {} gradients below it; unfloored max {:.2e})",
                            checked, skipped, worst, gradcheck::kGradientFloor, tiny, worst_unfloored)};
}

Outcome bs_direction() {
    const std::vector<std::uint64_t> seeds{7, 8, 9, 10, 11};
    const auto r = bs_experiment(seeds, ExperimentConfig{});
    const auto& a = r.with_bs;
    const auto& b = r.without_bs;
    const bool bg = a.bg_mae <= 0.75 * b.bg_mae;
    const bool full = a.full_mae <= 1.05 * b.full_mae;
    const bool pure = a.pure_bg_count < b.pure_bg_count;
    return {bg && full && pure && a.runs == 5 && b.runs == 5,
            fmt::format("median bg MAE {:.4f} vs {:.4f} ({:+.1f}%), full MAE {:.4f} vs {:.4f} ({:+.1f}%), "
                        "pure-bg count {:.4f} vs {:.4f}, runs {}/{}",
                        a.bg_mae, b.bg_mae, 100 * (a.bg_mae / b.bg_mae - 1), a.full_mae, b.full_mae,
                        100 * (a.full_mae / b.full_mae - 1), a.pure_bg_count, b.pure_bg_count, a.runs, b.runs)};
}

Outcome alpha_monotonicity() {
    std::mt19937_64 rng(909);
    const std::vector<double> alphas{1, 2, 3, 4, 5, 6};
    for (int t = 0; t < 100; ++t) {
        auto c = random_case(rng, "a" + std::to_string(t), 48, true);
        const auto sizes = testgen::sizes(c.diameters);
        BinaryMask prev;
        for (const double a : alphas) {
            auto m = build_foreground_mask(c.img, sizes, a);
            if (a > 1 && !is_subset(prev, m)) return {false, fmt::format("annotation {}: mask({}) not nested", t, a)};
            prev = std::move(m);
        }
        const double a1 = std::uniform_real_distribution<double>(0.1, 5.0)(rng);
        const double a2 = a1 + std::uniform_real_distribution<double>(1e-6, 3.0)(rng);
        if (!is_subset(build_foreground_mask(c.img, sizes, a1), build_foreground_mask(c.img, sizes, a2))) {
            return {false, fmt::format("annotation {}: mask({}) not inside mask({})", t, a1, a2)};
        }
    }
    for (int t = 0; t < 20; ++t) {
        std::vector<EvalPair> pairs;
        for (int i = 0; i < 5; ++i) {
            const auto c = random_case(rng, "s" + std::to_string(i), 48, true);
            pairs.push_back(make_eval_pair(target_of(c), c.pred));
        }
        if (!bg_count_nonincreasing(alpha_sweep(pairs, alphas))) {
            return {false, fmt::format("sweep {}: background count increases", t)};
        }
    }
    return {true, "100 annotations nested; 20 sweeps nonincreasing over alpha 1..6"};
}

Outcome round_trips() {
    std::mt19937_64 rng(1010);
    std::uniform_int_distribution<std::size_t> side(0, 24);
    std::uniform_real_distribution<float> uf(-100.0f, 100.0f);
    const fs::path dir = fs::temp_directory_path() / "bgcount_acceptance_io";
    fs::create_directories(dir);
    for (int t = 0; t < 100; ++t) {
        std::size_t h = side(rng), w = side(rng);
        if (t == 0) h = w = 0;
        if (t == 1) h = w = 1;
        std::vector<double> v(h * w);
        for (auto& x : v) x = static_cast<double>(uf(rng));
        const DensityMap d(h, w, v);
        write_density(dir / "d.dmap", d);
        if (read_density(dir / "d.dmap") != d) return {false, fmt::format("density {} ({}x{})", t, h, w)};
        const auto bytes = read_file_bytes(dir / "d.dmap");
        if (encode_density(decode_density(bytes)) != bytes) return {false, fmt::format("density bytes {}", t)};

        const auto m = testgen::mask(rng, h, w, 0.5);
        write_mask(dir / "m.mask", m);
        if (read_mask(dir / "m.mask") != m) return {false, fmt::format("mask {} ({}x{})", t, h, w)};

        const auto p = ToyModelParams::initialize(rng());
        write_params(dir / "p.tfcn", p);
        if (read_params(dir / "p.tfcn") != p) return {false, fmt::format("model {}", t)};
    }
    fs::remove_all(dir);
    return {true, "100 density, mask and model files, including 0x0 and 1x1"};
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream s;
    s << in.rdbuf();
    return s.str();
}

Outcome determinism() {
    const fs::path dir = fs::temp_directory_path() / "bgcount_acceptance_det";
    fs::remove_all(dir);
    fs::create_directories(dir);
    std::ostringstream out, err;
    const auto run = [&](std::vector<std::string> args) { return run_cli(args, out, err); };
    const std::string a = (dir / "a.csv").string(), b = (dir / "b.csv").string();
    if (run({"bs-experiment", "--seed", "7", "--out", a}) != 0 || run({"bs-experiment", "--seed", "7", "--out", b}) != 0) {
        return {false, "bs-experiment failed: " + err.str()};
    }
    const bool same_exp = slurp(a) == slurp(b) && !slurp(a).empty();

    const std::string syn = (dir / "syn").string();
    if (run({"synth", "--n", "16", "--seed", "9", "--out-dir", syn}) != 0) return {false, "synth failed"};
    fs::rename(dir / "syn" / "gt", dir / "syn" / "gt_truth");
    fs::rename(dir / "syn" / "input", dir / "syn" / "gt");  // nonzero errors
    const std::string manifest = (dir / "syn" / "manifest.json").string();
    const std::string e1 = (dir / "e1.csv").string(), e8 = (dir / "e8.csv").string();
    if (run({"eval", "--manifest", manifest, "--game-levels", "0,1,2", "--out", e1, "--jobs", "1"}) != 0 ||
        run({"eval", "--manifest", manifest, "--game-levels", "0,1,2", "--out", e8, "--jobs", "8"}) != 0) {
        return {false, "eval failed: " + err.str()};
    }
    const bool same_eval = slurp(e1) == slurp(e8) && !slurp(e1).empty();
    fs::remove_all(dir);
    return {same_exp && same_eval, fmt::format("bs-experiment reports {}, eval CSVs (jobs 1 vs 8) {}",
                                               same_exp ? "identical" : "DIFFER", same_eval ? "identical" : "DIFFER")};
}

}  // namespace

int main() {
    struct Criterion {
        int id;
        const char* name;
        double budget_s;
        std::function<Outcome()> fn;
    };
    const std::vector<Criterion> criteria{
        {1, "decomposition inequality and count additivity", 10, decomposition_suite},
        {2, "density normalization", 10, density_normalization},
        {3, "metric oracle equivalence", 30, oracle_equivalence},
        {4, "GAME monotonicity", 5, game_monotonicity},
        {5, "gradient checks", 60, gradient_checks},
        {6, "background suppression direction", 300, bs_direction},
        {7, "alpha monotonicity", 10, alpha_monotonicity},
        {8, "format round trips", 5, round_trips},
        {9, "determinism", 0, determinism},
    };
    int failures = 0;
    for (const auto& c : criteria) {
        const auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = c.fn();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        if (c.budget_s > 0 && secs >= c.budget_s) {
            o.pass = false;
            o.detail += fmt::format("; over the {:.0f} s budget", c.budget_s);
        }
        failures += o.pass ? 0 : 1;
        std::cout << fmt::format("{} criterion {}: {} ({:.2f} s) {}\n", o.pass ? "PASS" : "FAIL", c.id, c.name, secs,
                                 o.detail)
                  << std::flush;
    }
    return failures == 0 ? 0 : 1;
}
