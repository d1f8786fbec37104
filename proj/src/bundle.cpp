#include "aurora/bundle.hpp"

#include <openssl/evp.h>

#include <chrono>
#include <ctime>
#include <fstream>
#include <iterator>
#include <nlohmann/json.hpp>
#include <sstream>

#include "aurora/error.hpp"

namespace aurora {

using nlohmann::json;

std::string sha256_hex(std::string_view bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1)
    throw Error("sha256 failed");
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out += kHex[digest[i] >> 4];
    out += kHex[digest[i] & 0xF];
  }
  return out;
}

namespace {

std::string utc_now() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

template <std::size_t N>
std::array<double, N> to_fixed(const json& j, const char* what) {
  if (!j.is_array() || j.size() != N)
    throw DataError(std::string("model bundle: '") + what + "' must have " + std::to_string(N) + " entries");
  std::array<double, N> out{};
  for (std::size_t i = 0; i < N; ++i) {
    if (!j[i].is_number()) throw DataError(std::string("model bundle: '") + what + "' has a non-number");
    out[i] = j[i].get<double>();
  }
  return out;
}

const json& field(const json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end()) throw DataError(std::string("model bundle: missing field '") + key + "'");
  return *it;
}

}  // namespace

ModelBundle train_model(const Corpus& raw, std::string_view csv_bytes, TrainingReport* report) {
  if (raw.size() < 5)
    throw PreconditionError("training needs at least 5 tokens; " + std::to_string(raw.size()) +
                            " is under-determined for 4 predictors");
  const Corpus centered = raw.centered() ? raw : center_by_speaker(raw);

  std::vector<Configuration> configs;
  configs.reserve(centered.size());
  for (const auto& r : centered.records()) configs.push_back(r.knots);
  const GpaResult gpa = gpa_align(configs);

  std::vector<ShapeVector> tangents;
  tangents.reserve(gpa.aligned.size());
  for (const auto& a : gpa.aligned) tangents.push_back(tangent_project(a, gpa.mean));

  ModelBundle b;
  b.pca = fit_pca(tangents, flatten(gpa.mean));
  b.regression = fit_regression(centered, b.pca, tangents);
  b.metadata.corpus_sha256 = sha256_hex(csv_bytes);
  b.metadata.created_utc = utc_now();
  if (report) {
    report->gpa_iterations = gpa.iterations;
    report->gpa_converged = gpa.converged;
  }
  return b;
}

std::string bundle_to_json(const ModelBundle& b) {
  json pca;
  pca["layout"] = "x1,y1,x2,y2,...,x11,y11";
  pca["mean_shape"] = b.pca.mean_shape;
  pca["components"] = b.pca.components;
  pca["eigenvalues"] = b.pca.eigenvalues;
  pca["n_train"] = b.pca.n_train;
  pca["total_variance"] = b.pca.total_variance;

  const auto& r = b.regression;
  json reg;
  reg["rows"] = {"intercept", "f1", "f2", "f1*f2"};
  reg["columns"] = kTargetNames;
  reg["coefficients"] = r.coefficients;
  reg["residual_variance"] = r.residual_variance;
  reg["r_squared"] = r.r_squared;
  reg["f1_range"] = {r.f1_range.low, r.f1_range.high};
  reg["f2_range"] = {r.f2_range.low, r.f2_range.high};
  reg["n_train"] = r.n_train;

  json root;
  root["format"] = b.metadata.format;
  root["metadata"] = {{"corpus_sha256", b.metadata.corpus_sha256},
                      {"created_utc", b.metadata.created_utc}};
  root["pca"] = std::move(pca);
  root["regression"] = std::move(reg);
  return root.dump(1) + "\n";
}

ModelBundle bundle_from_json(std::string_view text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw DataError(std::string("model bundle is not valid JSON: ") + e.what());
  }
  try {
    ModelBundle b;
    const auto format = field(root, "format").get<std::string>();
    if (format != kBundleFormat) throw DataError("unsupported model bundle format '" + format + "'");
    b.metadata.format = format;
    const auto& meta = field(root, "metadata");
    b.metadata.corpus_sha256 = field(meta, "corpus_sha256").get<std::string>();
    b.metadata.created_utc = field(meta, "created_utc").get<std::string>();

    const auto& pca = field(root, "pca");
    b.pca.mean_shape = to_fixed<kShapeDim>(field(pca, "mean_shape"), "mean_shape");
    const auto& comps = field(pca, "components");
    const auto& eig = field(pca, "eigenvalues");
    if (!comps.is_array() || !eig.is_array() || comps.size() != eig.size() || comps.size() < 2 ||
        comps.size() > kShapeDim)
      throw DataError("model bundle: components/eigenvalues size mismatch");
    for (std::size_t i = 0; i < comps.size(); ++i) {
      b.pca.components.push_back(to_fixed<kShapeDim>(comps[i], "components"));
      b.pca.eigenvalues.push_back(eig[i].get<double>());
    }
    b.pca.n_train = field(pca, "n_train").get<std::size_t>();
    b.pca.total_variance = field(pca, "total_variance").get<double>();

    const auto& reg = field(root, "regression");
    auto& r = b.regression;
    const auto& coef = field(reg, "coefficients");
    if (!coef.is_array() || coef.size() != kPredictorCount)
      throw DataError("model bundle: coefficients must have 4 rows");
    for (std::size_t p = 0; p < kPredictorCount; ++p) r.coefficients[p] = to_fixed<kTargetCount>(coef[p], "coefficients");
    r.residual_variance = to_fixed<kTargetCount>(field(reg, "residual_variance"), "residual_variance");
    r.r_squared = to_fixed<kTargetCount>(field(reg, "r_squared"), "r_squared");
    const auto f1 = to_fixed<2>(field(reg, "f1_range"), "f1_range");
    const auto f2 = to_fixed<2>(field(reg, "f2_range"), "f2_range");
    r.f1_range = {f1[0], f1[1]};
    r.f2_range = {f2[0], f2[1]};
    r.n_train = field(reg, "n_train").get<std::size_t>();
    if (!(r.f1_range.low < r.f1_range.high) || !(r.f2_range.low < r.f2_range.high))
      throw DataError("model bundle: degenerate formant range");
    return b;
  } catch (const json::exception& e) {
    throw DataError(std::string("model bundle: ") + e.what());
  }
}

void save_bundle(const std::filesystem::path& path, const ModelBundle& b) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write model bundle " + path.string());
  out << bundle_to_json(b);
}

ModelBundle load_bundle(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open model bundle " + path.string());
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return bundle_from_json(text);
}

}  // namespace aurora
