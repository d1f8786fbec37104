#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string_view>
#include <vector>

namespace aurora {

enum class WavEncoding { Pcm16, Float32 };

struct WavAudio {
  double sample_rate = 0.0;
  std::uint16_t channels = 1;
  WavEncoding encoding = WavEncoding::Pcm16;
  std::vector<float> samples;  // first channel, full scale = 1.0
};

/// Accepts 16-bit PCM and 32-bit IEEE float, any channel count (keeps channel 0),
/// including WAVE_FORMAT_EXTENSIBLE headers. Throws DataError otherwise.
WavAudio parse_wav(std::string_view bytes);
WavAudio read_wav(const std::filesystem::path& path);

void write_wav(const std::filesystem::path& path, std::span<const float> samples, double sample_rate,
               WavEncoding encoding = WavEncoding::Pcm16);

}  // namespace aurora
