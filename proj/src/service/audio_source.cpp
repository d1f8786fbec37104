#include <algorithm>
#include <chrono>
#include <cmath>

#include "aurora/service.hpp"
#include "aurora/wav.hpp"

namespace aurora {

namespace {

struct Preset {
  const char* name;
  std::vector<VowelSegment> segments;
};

const std::vector<Preset>& presets() {
  static const std::vector<Preset> kPresets = {
      {"synth:bead", {{{{300, 60}, {2300, 100}, {3000, 120}}, 1.0}}},
      {"synth:bard", {{{{700, 80}, {1100, 90}, {2400, 120}}, 1.0}}},
      {"synth:bod", {{{{650, 80}, {850, 90}, {2900, 120}}, 1.0}}},
      {"synth:sweep",
       {{{{300, 60}, {2300, 100}, {3000, 120}}, 1.0}, {{{700, 80}, {1100, 90}, {2400, 120}}, 1.0}}},
      {"synth:silence", {{{}, 1.0}}},
  };
  return kPresets;
}

/// Loops a prepared buffer in real time from a dedicated thread.
class LoopingSource : public AudioSource {
 public:
  ~LoopingSource() override { stop(); }

  void start(double sample_rate, std::size_t block_size, BlockCallback on_block) override {
    stop();
    buffer_ = render(sample_rate);
    if (buffer_.empty()) buffer_.assign(block_size, 0.0f);
    stop_ = false;
    thread_ = std::thread([this, sample_rate, block_size, cb = std::move(on_block)] {
      using clock = std::chrono::steady_clock;
      const auto t0 = clock::now();
      std::vector<float> block(block_size);
      std::size_t pos = 0;
      for (std::uint64_t n = 1; !stop_; ++n) {
        for (auto& v : block) {
          v = buffer_[pos];
          pos = (pos + 1) % buffer_.size();
        }
        cb(block);
        const auto due = t0 + std::chrono::duration<double>(static_cast<double>(n * block_size) / sample_rate);
        std::unique_lock lock(mu_);
        cv_.wait_until(lock, std::chrono::time_point_cast<clock::duration>(due), [this] { return stop_.load(); });
      }
    });
  }

  void stop() override {
    {
      std::lock_guard lock(mu_);
      stop_ = true;
    }
    cv_.notify_all();
    if (thread_.joinable()) thread_.join();
  }

 protected:
  virtual std::vector<float> render(double sample_rate) const = 0;

 private:
  std::vector<float> buffer_;
  std::thread thread_;
  std::mutex mu_;
  std::condition_variable cv_;
  std::atomic<bool> stop_{true};
};

class SynthSource : public LoopingSource {
 public:
  explicit SynthSource(const Preset& p) : preset_(p) {}
  ~SynthSource() override { stop(); }
  std::string name() const override { return preset_.name; }

 protected:
  std::vector<float> render(double sample_rate) const override {
    const bool silent = std::all_of(preset_.segments.begin(), preset_.segments.end(),
                                    [](const VowelSegment& s) { return s.resonances.empty(); });
    if (silent) return std::vector<float>(static_cast<std::size_t>(sample_rate), 0.0f);
    return synthesize_vowels(preset_.segments, sample_rate, 120.0, 0.5);
  }

 private:
  Preset preset_;
};

class WavSource : public LoopingSource {
 public:
  explicit WavSource(std::string path) : path_(std::move(path)), audio_(read_wav(path_)) {}
  ~WavSource() override { stop(); }
  std::string name() const override { return "wav:" + path_; }

 protected:
  std::vector<float> render(double sample_rate) const override {
    const auto& in = audio_.samples;
    if (in.empty()) return {};
    if (audio_.sample_rate == sample_rate) return in;
    const double ratio = audio_.sample_rate / sample_rate;
    const auto n = static_cast<std::size_t>(std::floor(static_cast<double>(in.size() - 1) / ratio)) + 1;
    std::vector<float> out(n);
    for (std::size_t i = 0; i < n; ++i) {
      const double pos = static_cast<double>(i) * ratio;
      const auto k = std::min(static_cast<std::size_t>(pos), in.size() - 1);
      const double frac = pos - static_cast<double>(k);
      const float next = k + 1 < in.size() ? in[k + 1] : in[k];
      out[i] = static_cast<float>((1.0 - frac) * in[k] + frac * next);
    }
    return out;
  }

 private:
  std::string path_;
  WavAudio audio_;
};

}  // namespace

std::vector<std::string> list_audio_devices() {
  std::vector<std::string> names;
  for (const auto& p : presets()) names.emplace_back(p.name);
  return names;
}

std::unique_ptr<AudioSource> make_audio_source(const std::string& name) {
  if (name.rfind("wav:", 0) == 0) {
    try {
      return std::make_unique<WavSource>(name.substr(4));
    } catch (const DataError& e) {
      throw AudioDeviceError("audio device '" + name + "' unavailable: " + e.what());
    }
  }
  for (const auto& p : presets())
    if (name == p.name) return std::make_unique<SynthSource>(p);
  if (!name.empty())
    for (const auto& p : presets())
      if (std::string_view(p.name).find(name) != std::string_view::npos) return std::make_unique<SynthSource>(p);
  throw AudioDeviceError("audio device '" + name + "' unavailable; no capture backend matches it (available: " +
                         [] {
                           std::string s;
                           for (const auto& n : list_audio_devices()) s += (s.empty() ? "" : ", ") + n;
                           return s + ", wav:<path>";
                         }() +
                         ")");
}

void SampleQueue::push(std::span<const float> block) {
  {
    std::lock_guard lock(mu_);
    if (closed_) return;
    blocks_.emplace_back(block.begin(), block.end());
    while (blocks_.size() > capacity_) {
      blocks_.pop_front();
      ++dropped_;
    }
  }
  cv_.notify_one();
}

std::optional<std::vector<float>> SampleQueue::pop(int timeout_ms) {
  std::unique_lock lock(mu_);
  cv_.wait_for(lock, std::chrono::milliseconds(timeout_ms), [this] { return closed_ || !blocks_.empty(); });
  if (closed_ || blocks_.empty()) return std::nullopt;
  auto b = std::move(blocks_.front());
  blocks_.pop_front();
  return b;
}

void SampleQueue::close() {
  {
    std::lock_guard lock(mu_);
    closed_ = true;
    blocks_.clear();
  }
  cv_.notify_all();
}

void SampleQueue::reopen() {
  std::lock_guard lock(mu_);
  closed_ = false;
}

std::uint64_t SampleQueue::dropped() const {
  std::lock_guard lock(mu_);
  return dropped_;
}

}  // namespace aurora
