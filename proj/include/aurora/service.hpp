#pragma once

#include <atomic>
#include <condition_variable>
#include <cstdint>
#include <deque>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "aurora/error.hpp"
#include "aurora/formants.hpp"
#include "aurora/lut.hpp"

namespace aurora {

// ---------------------------------------------------------------------------
// Audio capture

class AudioDeviceError : public Error {
 public:
  using Error::Error;
};

using BlockCallback = std::function<void(std::span<const float>)>;

/// Producer of mono float blocks at a requested sample rate.
class AudioSource {
 public:
  virtual ~AudioSource() = default;
  virtual std::string name() const = 0;
  virtual void start(double sample_rate, std::size_t block_size, BlockCallback on_block) = 0;
  virtual void stop() = 0;
};

/// Names accepted by make_audio_source: the synthetic vowel presets. Any
/// "wav:<path>" name is also accepted.
std::vector<std::string> list_audio_devices();

/// Resolves a device by exact name, then by substring of a listed name.
/// Throws AudioDeviceError when nothing matches.
std::unique_ptr<AudioSource> make_audio_source(const std::string& name);

/// Fixed-capacity block queue between the capture producer and the analysis
/// consumer; the oldest block is dropped on overflow.
class SampleQueue {
 public:
  explicit SampleQueue(std::size_t capacity) : capacity_(capacity) {}

  void push(std::span<const float> block);
  /// Waits up to `timeout_ms`; nullopt on timeout or after close().
  std::optional<std::vector<float>> pop(int timeout_ms);
  void close();
  void reopen();
  std::uint64_t dropped() const;

 private:
  mutable std::mutex mu_;
  std::condition_variable cv_;
  std::deque<std::vector<float>> blocks_;
  std::size_t capacity_;
  std::uint64_t dropped_ = 0;
  bool closed_ = false;
};

// ---------------------------------------------------------------------------
// Outbound messages

/// Per-client bounded message queue. Frame messages are stored without their
/// trailing `"dropped"` field, which is appended with the client's running
/// drop count when the message is taken.
class OutboundQueue {
 public:
  explicit OutboundQueue(std::size_t capacity = 64) : capacity_(capacity) {}

  void push(std::shared_ptr<const std::string> text, bool is_frame);
  std::optional<std::string> try_pop();
  std::optional<std::string> pop(int timeout_ms);
  std::uint64_t dropped() const;
  std::size_t size() const;
  void close();

 private:
  struct Entry {
    std::shared_ptr<const std::string> text;
    bool is_frame;
  };
  std::string render(const Entry& e) const;

  mutable std::mutex mu_;
  std::condition_variable cv_;
  std::deque<Entry> entries_;
  std::size_t capacity_;
  std::uint64_t dropped_ = 0;
  bool closed_ = false;
};

/// Receives messages for one connected client. `notify` is called after each
/// push so a transport can schedule a write.
struct ClientChannel {
  explicit ClientChannel(std::size_t capacity = 64) : queue(capacity) {}
  OutboundQueue queue;
  std::function<void()> notify;
};

// ---------------------------------------------------------------------------
// Session hub

inline constexpr std::size_t kTransportEnvelopePoints = 256;

struct SessionOptions {
  AnalysisConfig config = AnalysisConfig::for_sample_rate(16000.0);
  std::string device = "synth:bard";
  std::set<int> highlight;
  double display_smoothing = 0.0;  // EMA coefficient on (F1, F2), 0 disables
  std::size_t client_queue_capacity = 64;
  std::size_t capture_queue_hops = 8;
};

using AudioSourceFactory = std::function<std::unique_ptr<AudioSource>(const std::string&)>;

/// Linearly resamples an envelope to `points` values spanning 0..Nyquist.
std::vector<double> resample_envelope(std::span<const double> env, std::size_t points);

/// Biofeedback session: owns the capture -> tracker -> LUT pipeline and fans
/// display frames out to clients. Transport-agnostic; the WebSocket server
/// and the tests both drive it through connect / handle_message.
class Session {
 public:
  Session(std::shared_ptr<const LookupTable> lut, SessionOptions options,
          AudioSourceFactory factory = make_audio_source);
  ~Session();
  Session(const Session&) = delete;
  Session& operator=(const Session&) = delete;

  using ClientId = std::uint64_t;

  /// Sends the current ack to the new client. The first client starts capture.
  ClientId connect(std::shared_ptr<ClientChannel> channel);
  /// The last client to leave stops capture.
  void disconnect(ClientId id);
  void handle_message(ClientId id, std::string_view text);

  /// Runs one tracker output through smoothing, the LUT and broadcast.
  void publish(const FormantFrame& frame);

  bool capturing() const;
  std::size_t client_count() const;
  AnalysisConfig config() const;
  std::set<int> highlight() const;
  std::string ack_message() const;
  std::size_t client_queue_capacity() const { return options_.client_queue_capacity; }

  std::uint64_t capture_dropped_blocks() const { return samples_.dropped(); }
  std::uint64_t analysis_dropped_frames() const { return analysis_dropped_.load(); }

 private:
  // Both require capture_mu_ and must not hold mu_.
  void start_capture();
  void stop_capture();
  void analysis_loop();
  void send_to(ClientId id, std::string text);
  void broadcast(const std::string& text);
  void apply_config(ClientId id, const nlohmann::json& msg);
  void invert_request(ClientId id, const nlohmann::json& msg);

  std::shared_ptr<const LookupTable> lut_;
  AudioSourceFactory factory_;

  std::mutex capture_mu_;  // serializes capture start / stop
  mutable std::mutex mu_;  // guards everything below except the atomics
  SessionOptions options_;
  std::map<ClientId, std::shared_ptr<ClientChannel>> clients_;
  ClientId next_id_ = 1;
  std::unique_ptr<AudioSource> source_;
  std::optional<double> ema_f1_, ema_f2_;
  double last_t_ms_ = -1.0;

  SampleQueue samples_;
  std::thread analysis_;
  std::atomic<bool> running_{false};
  std::atomic<std::uint64_t> config_generation_{0};
  std::atomic<std::uint64_t> analysis_dropped_{0};
};

// ---------------------------------------------------------------------------
// WebSocket transport

class PortInUseError : public Error {
 public:
  using Error::Error;
};

struct ServerOptions {
  std::string address = "127.0.0.1";
  unsigned short port = 8765;  // 0 picks an ephemeral port
  std::string static_dir;      // optional directory served over plain HTTP GET
};

/// WebSocket endpoint at any path; each text message is one JSON object.
class Server {
 public:
  Server(Session& session, ServerOptions options);
  ~Server();
  Server(const Server&) = delete;
  Server& operator=(const Server&) = delete;

  /// Binds and starts the I/O thread. Throws PortInUseError if the port is taken.
  void start();
  void stop();
  unsigned short port() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace aurora
