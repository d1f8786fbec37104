#pragma once

#include <atomic>
#include <filesystem>
#include <random>
#include <sstream>
#include <string>
#include <unistd.h>

#include "aurora/bundle.hpp"
#include "aurora/corpus.hpp"
#include "aurora/synth.hpp"

namespace testing {

/// Scratch directory removed on destruction.
class TempDir {
 public:
  TempDir() {
    static std::atomic<int> counter{0};
    path_ = std::filesystem::temp_directory_path() /
            ("aurora-test-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

/// Noiseless planted corpus: item templates on the default forward map.
inline aurora::SynthResult planted_corpus(std::uint64_t seed = 11) {
  aurora::SynthSpec spec;
  spec.noise_sd_mm = 0.0;
  return aurora::synth_corpus(spec, seed);
}

inline std::string corpus_csv(const aurora::Corpus& c) {
  std::ostringstream s;
  aurora::write_corpus(s, c);
  return s.str();
}

/// Model trained once on the planted corpus and shared across tests.
inline const aurora::ModelBundle& planted_bundle() {
  static const aurora::ModelBundle bundle = [] {
    const auto r = planted_corpus();
    return aurora::train_model(r.corpus, corpus_csv(r.corpus));
  }();
  return bundle;
}

/// Model trained on tokens that follow the map with formant jitter, so the
/// training ranges cover a continuum instead of ten points.
inline const aurora::ModelBundle& jittered_bundle() {
  static const aurora::ModelBundle bundle = [] {
    aurora::SynthSpec spec;
    spec.noise_sd_mm = 0.0;
    spec.formant_jitter_sd_hz = 40.0;
    spec.forward_map = aurora::default_forward_map();
    const auto r = aurora::synth_corpus(spec, 5);
    return aurora::train_model(r.corpus, corpus_csv(r.corpus));
  }();
  return bundle;
}

}  // namespace testing
