#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "aurora/corpus.hpp"
#include "aurora/regress.hpp"
#include "aurora/shapespace.hpp"

namespace aurora {

inline constexpr std::string_view kBundleFormat = "aurora-model/1";

struct BundleMetadata {
  std::string corpus_sha256;  // lowercase hex of the training CSV bytes
  std::string created_utc;    // ISO-8601
  std::string format{kBundleFormat};
};

/// Everything needed to invert formants: shape basis plus regression.
struct ModelBundle {
  PcaModel pca;
  RegressionModel regression;
  BundleMetadata metadata;
};

std::string sha256_hex(std::string_view bytes);

/// Training summary alongside the bundle; the GPA result is kept for callers
/// that report on it.
struct TrainingReport {
  std::size_t gpa_iterations = 0;
  bool gpa_converged = false;
};

/// Centre, align, decompose and regress. `csv_bytes` is hashed into the
/// metadata; pass the raw file contents the corpus was parsed from.
ModelBundle train_model(const Corpus& raw, std::string_view csv_bytes, TrainingReport* report = nullptr);

std::string bundle_to_json(const ModelBundle& b);
ModelBundle bundle_from_json(std::string_view text);

void save_bundle(const std::filesystem::path& path, const ModelBundle& b);
ModelBundle load_bundle(const std::filesystem::path& path);

}  // namespace aurora
