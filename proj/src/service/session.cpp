#include <algorithm>
#include <cmath>
#include <nlohmann/json.hpp>

#include "aurora/service.hpp"

namespace aurora {

using nlohmann::json;

namespace {

json contour_json(const TongueContour& c) {
  json x = json::array(), y = json::array();
  for (const auto& p : c.points) {
    x.push_back(p.x);
    y.push_back(p.y);
  }
  return {{"x", std::move(x)}, {"y", std::move(y)}};
}

json error_json(const json& id, const std::string& message) {
  return {{"type", "error"}, {"id", id}, {"message", message}};
}

// Rejected config message; field() names the offending key.
struct ConfigRejection {
  std::string message;
};

double number_field(const json& v, const std::string& key) {
  if (!v.is_number()) throw ConfigRejection{key + ": must be a number"};
  return v.get<double>();
}

std::size_t count_field(const json& v, const std::string& key) {
  if (!v.is_number_integer() && !(v.is_number() && std::floor(v.get<double>()) == v.get<double>()))
    throw ConfigRejection{key + ": must be an integer"};
  const double d = v.get<double>();
  if (d < 0 || d > 1e9) throw ConfigRejection{key + ": out of range"};
  return static_cast<std::size_t>(d);
}

}  // namespace

// ---------------------------------------------------------------------------

void OutboundQueue::push(std::shared_ptr<const std::string> text, bool is_frame) {
  {
    std::lock_guard lock(mu_);
    if (closed_) return;
    entries_.push_back({std::move(text), is_frame});
    while (entries_.size() > capacity_) {
      // Only frames are expendable; control replies are always delivered.
      auto it = std::find_if(entries_.begin(), entries_.end(), [](const Entry& e) { return e.is_frame; });
      if (it == entries_.end()) break;
      entries_.erase(it);
      ++dropped_;
    }
  }
  cv_.notify_one();
}

std::string OutboundQueue::render(const Entry& e) const {
  if (!e.is_frame) return *e.text;
  return *e.text + ",\"dropped\":" + std::to_string(dropped_) + "}";
}

std::optional<std::string> OutboundQueue::try_pop() {
  std::lock_guard lock(mu_);
  if (entries_.empty()) return std::nullopt;
  std::string s = render(entries_.front());
  entries_.pop_front();
  return s;
}

std::optional<std::string> OutboundQueue::pop(int timeout_ms) {
  std::unique_lock lock(mu_);
  cv_.wait_for(lock, std::chrono::milliseconds(timeout_ms), [this] { return closed_ || !entries_.empty(); });
  if (entries_.empty()) return std::nullopt;
  std::string s = render(entries_.front());
  entries_.pop_front();
  return s;
}

std::uint64_t OutboundQueue::dropped() const {
  std::lock_guard lock(mu_);
  return dropped_;
}

std::size_t OutboundQueue::size() const {
  std::lock_guard lock(mu_);
  return entries_.size();
}

void OutboundQueue::close() {
  {
    std::lock_guard lock(mu_);
    closed_ = true;
  }
  cv_.notify_all();
}

// ---------------------------------------------------------------------------

std::vector<double> resample_envelope(std::span<const double> env, std::size_t points) {
  std::vector<double> out(points, kSilenceDb);
  if (env.empty() || points == 0) return out;
  if (env.size() == 1 || points == 1) {
    std::fill(out.begin(), out.end(), env.front());
    return out;
  }
  const double scale = static_cast<double>(env.size() - 1) / static_cast<double>(points - 1);
  for (std::size_t i = 0; i < points; ++i) {
    const double pos = static_cast<double>(i) * scale;
    const auto k = std::min(static_cast<std::size_t>(pos), env.size() - 2);
    const double frac = pos - static_cast<double>(k);
    out[i] = (1.0 - frac) * env[k] + frac * env[k + 1];
  }
  return out;
}

Session::Session(std::shared_ptr<const LookupTable> lut, SessionOptions options, AudioSourceFactory factory)
    : lut_(std::move(lut)),
      factory_(std::move(factory)),
      options_(std::move(options)),
      samples_(std::max<std::size_t>(1, options_.capture_queue_hops)) {
  if (!lut_) throw PreconditionError("session needs a lookup table");
  options_.config.validate();
  for (int h : options_.highlight)
    if (h < 1 || h > 4) throw ConfigError("highlight", "formant indices must be 1..4");
  if (!(options_.display_smoothing >= 0.0 && options_.display_smoothing < 1.0))
    throw ConfigError("display_smoothing", "must be in [0, 1)");
}

Session::~Session() {
  std::lock_guard capture(capture_mu_);
  stop_capture();
  std::lock_guard lock(mu_);
  for (auto& [id, ch] : clients_) ch->queue.close();
}

Session::ClientId Session::connect(std::shared_ptr<ClientChannel> channel) {
  std::lock_guard capture(capture_mu_);
  ClientId id;
  bool first;
  {
    std::lock_guard lock(mu_);
    id = next_id_++;
    first = clients_.empty();
    clients_.emplace(id, std::move(channel));
  }
  send_to(id, ack_message());
  if (first) start_capture();
  return id;
}

void Session::disconnect(ClientId id) {
  std::lock_guard capture(capture_mu_);
  bool last;
  {
    std::lock_guard lock(mu_);
    auto it = clients_.find(id);
    if (it == clients_.end()) return;
    it->second->queue.close();
    clients_.erase(it);
    last = clients_.empty();
  }
  if (last) stop_capture();
}

bool Session::capturing() const { return running_.load(); }

std::size_t Session::client_count() const {
  std::lock_guard lock(mu_);
  return clients_.size();
}

AnalysisConfig Session::config() const {
  std::lock_guard lock(mu_);
  return options_.config;
}

std::set<int> Session::highlight() const {
  std::lock_guard lock(mu_);
  return options_.highlight;
}

void Session::start_capture() {
  if (running_) return;
  std::string device;
  AnalysisConfig cfg;
  {
    std::lock_guard lock(mu_);
    device = options_.device;
    cfg = options_.config;
  }
  source_ = factory_(device);
  samples_.reopen();
  running_ = true;
  analysis_ = std::thread([this] { analysis_loop(); });
  source_->start(cfg.sample_rate, cfg.hop_size, [this](std::span<const float> block) { samples_.push(block); });
}

void Session::stop_capture() {
  if (!running_) return;
  if (source_) source_->stop();
  source_.reset();
  running_ = false;
  samples_.close();
  if (analysis_.joinable()) analysis_.join();
}

void Session::analysis_loop() {
  std::optional<FormantTracker> tracker;
  std::uint64_t generation = ~std::uint64_t{0};
  std::uint64_t dropped_before = 0;
  double base_ms = 0.0;

  while (running_) {
    auto block = samples_.pop(50);
    if (!block) continue;
    if (const auto g = config_generation_.load(); g != generation || !tracker) {
      if (tracker) analysis_dropped_ += tracker->dropped_frames() - dropped_before;
      AnalysisConfig cfg;
      {
        std::lock_guard lock(mu_);
        cfg = options_.config;
        base_ms = last_t_ms_ < 0.0 ? 0.0 : last_t_ms_ + 1000.0 * static_cast<double>(cfg.hop_size) / cfg.sample_rate;
      }
      tracker.emplace(cfg);
      generation = g;
      dropped_before = 0;
    }
    for (auto& f : tracker->push(*block)) {
      f.t_ms += base_ms;
      publish(f);
    }
    const auto d = tracker->dropped_frames();
    if (d != dropped_before) {
      analysis_dropped_ += d - dropped_before;
      dropped_before = d;
    }
  }
}

void Session::publish(const FormantFrame& frame) {
  std::lock_guard lock(mu_);
  if (frame.t_ms <= last_t_ms_) return;
  last_t_ms_ = frame.t_ms;

  json msg;
  msg["type"] = "frame";
  msg["t_ms"] = frame.t_ms;
  msg["rms_db"] = frame.rms_db;
  msg["voiced"] = frame.voiced;
  json formants = json::array();
  for (const auto& f : frame.formants) formants.push_back({{"f", f.freq_hz}, {"bw", f.bandwidth_hz}});
  msg["formants"] = std::move(formants);
  msg["envelope_db"] = resample_envelope(frame.envelope_db, kTransportEnvelopePoints);

  const bool has_contour = frame.voiced && frame.formants.size() >= 2;
  if (has_contour) {
    const double f1 = frame.formants[0].freq_hz, f2 = frame.formants[1].freq_hz;
    const double a = options_.display_smoothing;
    if (a == 0.0 || !ema_f1_) {
      ema_f1_ = f1;
      ema_f2_ = f2;
    } else {
      ema_f1_ = a * *ema_f1_ + (1.0 - a) * f1;
      ema_f2_ = a * *ema_f2_ + (1.0 - a) * f2;
    }
    const TongueContour c = lut_->query(*ema_f1_, *ema_f2_);
    msg["contour"] = contour_json(c);
    msg["extrapolated"] = c.extrapolated;
    msg["smoothed"] = {{"f1", *ema_f1_}, {"f2", *ema_f2_}};
  } else {
    ema_f1_.reset();
    ema_f2_.reset();
    msg["contour"] = nullptr;
    msg["extrapolated"] = false;
  }
  msg["highlight"] = options_.highlight;

  std::string text = msg.dump();
  text.pop_back();  // the per-client "dropped" field closes the object
  const auto shared = std::make_shared<const std::string>(std::move(text));
  for (auto& [id, ch] : clients_) {
    ch->queue.push(shared, true);
    if (ch->notify) ch->notify();
  }
}

void Session::send_to(ClientId id, std::string text) {
  std::shared_ptr<ClientChannel> ch;
  {
    std::lock_guard lock(mu_);
    auto it = clients_.find(id);
    if (it == clients_.end()) return;
    ch = it->second;
  }
  ch->queue.push(std::make_shared<const std::string>(std::move(text)), false);
  if (ch->notify) ch->notify();
}

void Session::broadcast(const std::string& text) {
  const auto shared = std::make_shared<const std::string>(text);
  std::lock_guard lock(mu_);
  for (auto& [id, ch] : clients_) {
    ch->queue.push(shared, false);
    if (ch->notify) ch->notify();
  }
}

std::string Session::ack_message() const {
  json cfg;
  {
    std::lock_guard lock(mu_);
    const auto& c = options_.config;
    cfg = {{"sample_rate", c.sample_rate},
           {"frame_size", c.frame_size},
           {"hop_size", c.hop_size},
           {"lpc_order", c.lpc_order},
           {"preemphasis", c.preemphasis},
           {"threshold_db", c.threshold_db},
           {"max_formants", c.max_formants},
           {"max_bandwidth_hz", c.max_bandwidth_hz},
           {"n_fft", c.n_fft},
           {"highlight", options_.highlight},
           {"display_smoothing", options_.display_smoothing},
           {"device", options_.device}};
  }
  const auto& h = lut_->header();
  cfg["lut"] = {{"f1_lo", h.f1.lo}, {"f1_hi", h.f1.hi}, {"f1_step", h.f1.step},
                {"f2_lo", h.f2.lo}, {"f2_hi", h.f2.hi}, {"f2_step", h.f2.step},
                {"model_digest", digest_to_hex(h.model_digest)}};
  return json{{"type", "ack"}, {"config", std::move(cfg)}}.dump();
}

void Session::handle_message(ClientId id, std::string_view text) {
  json msg;
  try {
    msg = json::parse(text);
  } catch (const json::parse_error&) {
    send_to(id, error_json(nullptr, "malformed message: not valid JSON").dump());
    return;
  }
  if (!msg.is_object()) {
    send_to(id, error_json(nullptr, "malformed message: expected a JSON object").dump());
    return;
  }
  const json req_id = msg.contains("id") ? msg["id"] : json(nullptr);
  const auto type_it = msg.find("type");
  if (type_it == msg.end() || !type_it->is_string()) {
    send_to(id, error_json(req_id, "malformed message: missing string field 'type'").dump());
    return;
  }
  const std::string type = type_it->get<std::string>();
  if (type == "config") {
    apply_config(id, msg);
  } else if (type == "invert") {
    invert_request(id, msg);
  } else if (type == "list_devices") {
    send_to(id, json{{"type", "devices"}, {"names", list_audio_devices()}}.dump());
  } else {
    send_to(id, error_json(req_id, "unknown message type '" + type + "'").dump());
  }
}

void Session::apply_config(ClientId id, const json& msg) {
  const json req_id = msg.contains("id") ? msg["id"] : json(nullptr);
  std::lock_guard capture(capture_mu_);
  SessionOptions next;
  {
    std::lock_guard lock(mu_);
    next = options_;
  }
  try {
    for (const auto& [key, v] : msg.items()) {
      if (key == "type" || key == "id") continue;
      auto& c = next.config;
      if (key == "sample_rate") c.sample_rate = number_field(v, key);
      else if (key == "frame_size") c.frame_size = count_field(v, key);
      else if (key == "hop_size") c.hop_size = count_field(v, key);
      else if (key == "lpc_order") c.lpc_order = count_field(v, key);
      else if (key == "max_formants") c.max_formants = count_field(v, key);
      else if (key == "n_fft") c.n_fft = count_field(v, key);
      else if (key == "preemphasis") c.preemphasis = number_field(v, key);
      else if (key == "threshold_db") c.threshold_db = number_field(v, key);
      else if (key == "max_bandwidth_hz") c.max_bandwidth_hz = number_field(v, key);
      else if (key == "display_smoothing") {
        next.display_smoothing = number_field(v, key);
        if (!(next.display_smoothing >= 0.0 && next.display_smoothing < 1.0))
          throw ConfigRejection{"display_smoothing: must be in [0, 1)"};
      } else if (key == "highlight") {
        if (!v.is_array()) throw ConfigRejection{"highlight: must be an array of formant indices"};
        std::set<int> h;
        for (const auto& e : v) {
          if (!e.is_number_integer() || e.get<int>() < 1 || e.get<int>() > 4)
            throw ConfigRejection{"highlight: formant indices must be integers 1..4"};
          h.insert(e.get<int>());
        }
        next.highlight = std::move(h);
      } else if (key == "device") {
        if (!v.is_string()) throw ConfigRejection{"device: must be a string"};
        try {
          next.device = factory_(v.get<std::string>())->name();
        } catch (const AudioDeviceError& e) {
          throw ConfigRejection{std::string("device: ") + e.what()};
        }
      } else {
        throw ConfigRejection{key + ": unknown config field"};
      }
    }
    next.config.validate();
  } catch (const ConfigRejection& r) {
    send_to(id, error_json(req_id, "config rejected: " + r.message).dump());
    return;
  } catch (const ConfigError& e) {
    send_to(id, error_json(req_id, std::string("config rejected: ") + e.what()).dump());
    return;
  }

  bool restart;
  {
    std::lock_guard lock(mu_);
    restart = next.device != options_.device || next.config.sample_rate != options_.config.sample_rate ||
              next.config.hop_size != options_.config.hop_size;
    options_ = std::move(next);
    ema_f1_.reset();
    ema_f2_.reset();
  }
  if (running_ && restart) {
    stop_capture();
    start_capture();
  }
  ++config_generation_;
  broadcast(ack_message());
}

void Session::invert_request(ClientId id, const json& msg) {
  const json req_id = msg.contains("id") ? msg["id"] : json(nullptr);
  const auto f1 = msg.find("f1");
  const auto f2 = msg.find("f2");
  if (f1 == msg.end() || f2 == msg.end() || !f1->is_number() || !f2->is_number()) {
    send_to(id, error_json(req_id, "invert: numeric fields 'f1' and 'f2' are required").dump());
    return;
  }
  const double a = f1->get<double>(), b = f2->get<double>();
  if (!(a > 0.0) || !(b > 0.0)) {
    send_to(id, error_json(req_id, "invert: formants must be positive").dump());
    return;
  }
  const TongueContour c = lut_->query(a, b);
  send_to(id, json{{"type", "contour"}, {"id", req_id}, {"f1", a}, {"f2", b},
                   {"extrapolated", c.extrapolated}, {"contour", contour_json(c)}}
                  .dump());
}

}  // namespace aurora
