#pragma once

// Manifest files and the on-disk dataset layout used by the command line.

#include <cstddef>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "bgcount/annotations.hpp"
#include "bgcount/metrics.hpp"

namespace bgcount {

/// JSON object: dataset_id, annotations_path, predictions_dir, optional
/// detections_path and roi_dir, optional density_sigma (default 15).
/// Relative paths are resolved against the manifest's directory.
struct Manifest {
    std::string dataset_id;
    std::filesystem::path annotations_path;
    std::optional<std::filesystem::path> detections_path;
    std::filesystem::path predictions_dir;
    std::optional<std::filesystem::path> roi_dir;
    double density_sigma = kDefaultDensitySigma;
};

Manifest parse_manifest(std::string_view text, const std::filesystem::path& base_dir);
Manifest load_manifest(const std::filesystem::path& path);
std::string manifest_json(const Manifest& m);

/// Rounds every value to the nearest binary32, the precision density files
/// are stored at.
DensityMap to_file_precision(const DensityMap& d);

struct LoadedDataset {
    Manifest manifest;
    std::vector<std::shared_ptr<const EvalTarget>> targets;  // ascending image_id
    AnnotationLoadReport load_report;
    std::vector<std::string> notes;  // e.g. images without an ROI file
};

/// Reads annotations, detections and ROI masks and builds one evaluation
/// target per image. Ground-truth densities are held at file precision so a
/// prediction directory of written ground truth evaluates to exactly zero.
LoadedDataset load_dataset(const Manifest& m, unsigned jobs = 1);

struct PredictionSet {
    std::vector<EvalPair> pairs;
    std::vector<std::string> missing;  // image ids without a prediction file
    std::size_t negative_values = 0;
};

/// Reads <dir>/<image_id>.dmap for every target.
PredictionSet load_predictions(const LoadedDataset& ds, const std::filesystem::path& dir,
                               unsigned jobs = 1);

}  // namespace bgcount
