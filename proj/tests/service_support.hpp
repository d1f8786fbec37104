#pragma once

#include <doctest.h>

#include <chrono>
#include <nlohmann/json.hpp>

#include "aurora/lut.hpp"
#include "aurora/service.hpp"
#include "support.hpp"

namespace testing {

/// Capture state shared between a test and the sources it hands to a Session.
/// The test pushes samples by hand instead of a device thread.
struct ManualFeed {
  std::mutex mu;
  aurora::BlockCallback cb;
  int starts = 0;
  int stops = 0;
  double sample_rate = 0.0;
  std::size_t block_size = 0;

  bool active() {
    std::lock_guard lock(mu);
    return static_cast<bool>(cb);
  }

  void push(std::span<const float> samples) {
    aurora::BlockCallback c;
    std::size_t block;
    {
      std::lock_guard lock(mu);
      c = cb;
      block = block_size;
    }
    if (!c) return;
    for (std::size_t pos = 0; pos < samples.size(); pos += block) c(samples.subspan(pos, std::min(block, samples.size() - pos)));
  }
};

class ManualSource : public aurora::AudioSource {
 public:
  ManualSource(std::shared_ptr<ManualFeed> feed, std::string name) : feed_(std::move(feed)), name_(std::move(name)) {}
  std::string name() const override { return name_; }
  void start(double sr, std::size_t block, aurora::BlockCallback cb) override {
    std::lock_guard lock(feed_->mu);
    feed_->cb = std::move(cb);
    feed_->sample_rate = sr;
    feed_->block_size = block;
    ++feed_->starts;
  }
  void stop() override {
    std::lock_guard lock(feed_->mu);
    if (feed_->cb) ++feed_->stops;
    feed_->cb = nullptr;
  }

 private:
  std::shared_ptr<ManualFeed> feed_;
  std::string name_;
};

inline aurora::AudioSourceFactory manual_factory(std::shared_ptr<ManualFeed> feed) {
  return [feed](const std::string& name) -> std::unique_ptr<aurora::AudioSource> {
    if (name.find("missing") != std::string::npos) throw aurora::AudioDeviceError("no device " + name);
    return std::make_unique<ManualSource>(feed, name.empty() ? "manual" : name);
  };
}

inline std::shared_ptr<const aurora::LookupTable> service_lut() {
  static const auto lut = std::make_shared<const aurora::LookupTable>(
      aurora::compile_lut(jittered_bundle(), {320, 903, 828, 2616, 20}));
  return lut;
}

struct TestClient {
  std::shared_ptr<aurora::ClientChannel> channel;
  aurora::Session::ClientId id = 0;

  nlohmann::json next(int timeout_ms = 3000) {
    auto s = channel->queue.pop(timeout_ms);
    REQUIRE_MESSAGE(s.has_value(), "timed out waiting for a message");
    return nlohmann::json::parse(*s);
  }

  nlohmann::json next_of(const std::string& type, int timeout_ms = 3000) {
    const auto deadline = std::chrono::steady_clock::now() + std::chrono::milliseconds(timeout_ms);
    while (std::chrono::steady_clock::now() < deadline) {
      auto s = channel->queue.pop(50);
      if (!s) continue;
      auto j = nlohmann::json::parse(*s);
      if (j["type"] == type) return j;
    }
    FAIL("timed out waiting for a '" << type << "' message");
    return {};
  }

  std::string raw(int timeout_ms = 3000) {
    auto s = channel->queue.pop(timeout_ms);
    REQUIRE(s.has_value());
    return *s;
  }
};

inline TestClient join(aurora::Session& s, std::size_t capacity = 4096) {
  TestClient c;
  c.channel = std::make_shared<aurora::ClientChannel>(capacity);
  c.id = s.connect(c.channel);
  return c;
}

}  // namespace testing
