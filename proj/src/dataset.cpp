#include "bgcount/dataset.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "bgcount/grid_io.hpp"
#include "bgcount/parallel.hpp"

namespace bgcount {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

fs::path resolve(const fs::path& base, const std::string& p) {
    const fs::path path(p);
    return path.is_absolute() ? path : base / path;
}

std::string required_string(const json& j, const char* key) {
    if (!j.contains(key) || !j[key].is_string()) {
        throw ParseError(std::string("manifest: '") + key + "' must be a string", 0);
    }
    return j[key].get<std::string>();
}

std::optional<std::string> optional_string(const json& j, const char* key) {
    if (!j.contains(key) || j[key].is_null()) return std::nullopt;
    if (!j[key].is_string()) throw ParseError(std::string("manifest: '") + key + "' must be a string", 0);
    return j[key].get<std::string>();
}

}  // namespace

Manifest parse_manifest(std::string_view text, const fs::path& base_dir) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ParseError(std::string("manifest: ") + e.what(), 0);
    }
    if (!j.is_object()) throw ParseError("manifest: expected a JSON object", 0);
    Manifest m;
    m.dataset_id = required_string(j, "dataset_id");
    if (m.dataset_id.empty()) throw ParseError("manifest: empty dataset_id", 0);
    m.annotations_path = resolve(base_dir, required_string(j, "annotations_path"));
    m.predictions_dir = resolve(base_dir, required_string(j, "predictions_dir"));
    if (auto p = optional_string(j, "detections_path")) m.detections_path = resolve(base_dir, *p);
    if (auto p = optional_string(j, "roi_dir")) m.roi_dir = resolve(base_dir, *p);
    if (j.contains("density_sigma")) {
        if (!j["density_sigma"].is_number() || !(j["density_sigma"].get<double>() > 0.0)) {
            throw ParseError("manifest: density_sigma must be a positive number", 0);
        }
        m.density_sigma = j["density_sigma"].get<double>();
    }
    return m;
}

Manifest load_manifest(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open manifest '" + path.string() + "'");
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_manifest(buf.str(), path.parent_path());
}

std::string manifest_json(const Manifest& m) {
    json j;
    j["dataset_id"] = m.dataset_id;
    j["annotations_path"] = m.annotations_path.generic_string();
    if (m.detections_path) j["detections_path"] = m.detections_path->generic_string();
    j["predictions_dir"] = m.predictions_dir.generic_string();
    if (m.roi_dir) j["roi_dir"] = m.roi_dir->generic_string();
    j["density_sigma"] = m.density_sigma;
    return j.dump(2) + "\n";
}

DensityMap to_file_precision(const DensityMap& d) {
    std::vector<double> v(d.values().begin(), d.values().end());
    for (auto& x : v) x = static_cast<double>(static_cast<float>(x));
    return DensityMap(d.height(), d.width(), std::move(v));
}

LoadedDataset load_dataset(const Manifest& m, unsigned jobs) {
    LoadedDataset ds;
    ds.manifest = m;
    AnnotationSet set = load_annotations(m.annotations_path);
    ds.load_report = set.report;
    DetectionIndex detections;
    if (m.detections_path) detections = load_detections(*m.detections_path);

    auto& images = set.images;
    std::sort(images.begin(), images.end(),
              [](const AnnotatedImage& a, const AnnotatedImage& b) { return a.image_id < b.image_id; });

    ds.targets.resize(images.size());
    std::vector<std::string> notes(images.size());
    parallel_for(images.size(), jobs, [&](std::size_t i) {
        const AnnotatedImage& img = images[i];
        std::span<const Detection> dets;
        if (auto it = detections.find(img.image_id); it != detections.end()) dets = it->second;
        auto sizes = estimate_head_sizes(img, dets);
        std::optional<BinaryMask> roi;
        if (m.roi_dir) {
            const fs::path roi_path = *m.roi_dir / (img.image_id + ".mask");
            if (fs::exists(roi_path)) {
                roi = read_mask(roi_path);
            } else {
                notes[i] = "no ROI file for '" + img.image_id + "', using the whole image";
            }
        }
        auto t = make_eval_target(img, std::move(sizes), std::move(roi), m.density_sigma);
        auto held = std::make_shared<EvalTarget>(*t);
        held->gt_density = to_file_precision(t->gt_density);
        ds.targets[i] = std::move(held);
    });
    for (auto& n : notes) {
        if (!n.empty()) ds.notes.push_back(std::move(n));
    }
    return ds;
}

PredictionSet load_predictions(const LoadedDataset& ds, const fs::path& dir, unsigned jobs) {
    const std::size_t n = ds.targets.size();
    std::vector<std::optional<DensityMap>> preds(n);
    std::vector<std::size_t> negatives(n, 0);
    parallel_for(n, jobs, [&](std::size_t i) {
        const fs::path p = dir / (ds.targets[i]->image_id() + ".dmap");
        if (!fs::exists(p)) return;
        DensityReadInfo info;
        preds[i] = read_density(p, &info);
        negatives[i] = info.negative_values;
    });
    PredictionSet out;
    for (std::size_t i = 0; i < n; ++i) {
        if (!preds[i]) {
            out.missing.push_back(ds.targets[i]->image_id());
            continue;
        }
        out.pairs.push_back(make_eval_pair(ds.targets[i], std::move(*preds[i])));
        out.negative_values += negatives[i];
    }
    return out;
}

}  // namespace bgcount
