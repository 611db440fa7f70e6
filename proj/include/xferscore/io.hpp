#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "xferscore/types.hpp"

namespace xfer {

enum class MatrixFormat { csv, fmb };
enum class FmbDtype : unsigned char { f32 = 1, f64 = 2 };

/// Loads and validates a feature matrix. CSV: comma-separated, no header,
/// '.' decimal, one row per sample. FMB: little-endian binary, magic "FMB1",
/// dtype u8 (1=f32, 2=f64), rows u64, cols u64, row-major payload.
FeatureMatrix load_feature_matrix(const std::filesystem::path& path, MatrixFormat format);

/// Picks the format from the file magic ("FMB1" -> fmb, else csv).
FeatureMatrix load_feature_matrix_auto(const std::filesystem::path& path);

/// (rows, cols) without loading the payload: FMB header or first CSV pass.
std::pair<std::uint64_t, std::uint64_t> peek_matrix_shape(const std::filesystem::path& path);

void save_matrix_csv(const Eigen::Ref<const Matrix>& m, const std::filesystem::path& path);
void save_matrix_fmb(const Eigen::Ref<const Matrix>& m, const std::filesystem::path& path,
                     FmbDtype dtype = FmbDtype::f64);

/// Loads labels from text (one integer per line) or FLB binary (magic "FLB1",
/// n u64, n x u32), sniffed by magic. Labels are remapped to contiguous
/// 0..C-1 in order of first appearance; the mapping is kept in original_ids.
LabelVector load_labels(const std::filesystem::path& path);

void save_labels_text(const LabelVector& y, const std::filesystem::path& path);
void save_labels_flb(const LabelVector& y, const std::filesystem::path& path);

/// Remaps arbitrary integer labels to contiguous 0..C-1, first appearance
/// first. Idempotent on already-contiguous input.
LabelVector remap_labels(const std::vector<long long>& raw);

/// Loads soft predictions: entries validated into [0,1], rows must sum to 1
/// within 1e-6 and are renormalized exactly afterwards.
SoftPredictionMatrix load_soft_predictions(const std::filesystem::path& path);

/// One line of the task manifest. Referenced files are resolved relative to
/// the manifest location and loaded lazily; tests may instead supply inline
/// data.
struct TaskRecord {
    std::string id;
    std::filesystem::path features_path;  // empty when inline data is set
    std::filesystem::path labels_path;
    std::filesystem::path softpred_path;  // empty when absent ("-")
    double accuracy = 0.0;
    int num_classes = 0;

    std::optional<FeatureMatrix> features;
    std::optional<LabelVector> labels;
    std::optional<SoftPredictionMatrix> softpred;

    const FeatureMatrix& get_features();
    const LabelVector& get_labels();
    bool has_softpred() const { return softpred.has_value() || !softpred_path.empty(); }
    const SoftPredictionMatrix& get_softpred();
};

/// TSV manifest with header `id features labels softpred accuracy
/// num_classes`; `softpred` may be "-". Task ids must be unique.
std::vector<TaskRecord> load_task_bundle(const std::filesystem::path& manifest);

void append_manifest_row(const std::filesystem::path& manifest, const TaskRecord& rec);

}  // namespace xfer
