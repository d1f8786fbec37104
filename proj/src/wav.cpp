#include "aurora/wav.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <string>

#include "aurora/error.hpp"

namespace aurora {

namespace {

std::uint16_t u16(const char* p) {
  return static_cast<std::uint16_t>(static_cast<unsigned char>(p[0]) | (static_cast<unsigned char>(p[1]) << 8));
}
std::uint32_t u32(const char* p) {
  return static_cast<std::uint32_t>(u16(p)) | (static_cast<std::uint32_t>(u16(p + 2)) << 16);
}

void put16(std::string& b, std::uint16_t v) {
  b.push_back(static_cast<char>(v & 0xFF));
  b.push_back(static_cast<char>(v >> 8));
}
void put32(std::string& b, std::uint32_t v) {
  put16(b, static_cast<std::uint16_t>(v & 0xFFFF));
  put16(b, static_cast<std::uint16_t>(v >> 16));
}

constexpr std::uint16_t kFormatPcm = 1;
constexpr std::uint16_t kFormatFloat = 3;
constexpr std::uint16_t kFormatExtensible = 0xFFFE;

}  // namespace

WavAudio parse_wav(std::string_view bytes) {
  if (bytes.size() < 12 || bytes.substr(0, 4) != "RIFF" || bytes.substr(8, 4) != "WAVE")
    throw DataError("not a RIFF/WAVE file");

  WavAudio out;
  std::uint16_t format = 0, bits = 0, block_align = 0;
  bool have_fmt = false;
  std::size_t pos = 12;
  while (pos + 8 <= bytes.size()) {
    const std::string_view id = bytes.substr(pos, 4);
    const std::uint32_t size = u32(bytes.data() + pos + 4);
    const std::size_t body = pos + 8;
    const std::size_t avail = std::min<std::size_t>(size, bytes.size() - body);
    if (id == "fmt ") {
      if (avail < 16) throw DataError("WAV fmt chunk too short");
      const char* p = bytes.data() + body;
      format = u16(p);
      out.channels = u16(p + 2);
      out.sample_rate = u32(p + 4);
      block_align = u16(p + 12);
      bits = u16(p + 14);
      if (format == kFormatExtensible) {
        if (avail < 26) throw DataError("WAV extensible fmt chunk too short");
        format = u16(p + 24);
      }
      have_fmt = true;
    } else if (id == "data") {
      if (!have_fmt) throw DataError("WAV data chunk before fmt chunk");
      if (out.channels == 0 || out.sample_rate <= 0) throw DataError("WAV header has zero channels or rate");
      const char* p = bytes.data() + body;
      if (format == kFormatPcm && bits == 16) {
        out.encoding = WavEncoding::Pcm16;
      } else if (format == kFormatFloat && bits == 32) {
        out.encoding = WavEncoding::Float32;
      } else {
        throw DataError("unsupported WAV encoding (format " + std::to_string(format) + ", " + std::to_string(bits) +
                        " bits); need 16-bit PCM or 32-bit float");
      }
      const std::size_t stride = block_align ? block_align : out.channels * (bits / 8u);
      const std::size_t frames = avail / stride;
      out.samples.resize(frames);
      for (std::size_t i = 0; i < frames; ++i) {
        const char* s = p + i * stride;
        if (out.encoding == WavEncoding::Pcm16)
          out.samples[i] = static_cast<float>(static_cast<std::int16_t>(u16(s))) / 32768.0f;
        else
          out.samples[i] = std::bit_cast<float>(u32(s));
      }
      return out;
    }
    pos = body + size + (size & 1);
  }
  throw DataError("WAV file has no data chunk");
}

WavAudio read_wav(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open WAV file " + path.string());
  const std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return parse_wav(bytes);
}

void write_wav(const std::filesystem::path& path, std::span<const float> samples, double sample_rate,
               WavEncoding encoding) {
  const std::uint16_t bytes_per = encoding == WavEncoding::Pcm16 ? 2 : 4;
  const auto data_size = static_cast<std::uint32_t>(samples.size() * bytes_per);
  const auto rate = static_cast<std::uint32_t>(std::lround(sample_rate));
  std::string b;
  b += "RIFF";
  put32(b, 36 + data_size);
  b += "WAVEfmt ";
  put32(b, 16);
  put16(b, encoding == WavEncoding::Pcm16 ? kFormatPcm : kFormatFloat);
  put16(b, 1);
  put32(b, rate);
  put32(b, rate * bytes_per);
  put16(b, bytes_per);
  put16(b, static_cast<std::uint16_t>(8 * bytes_per));
  b += "data";
  put32(b, data_size);
  for (float v : samples) {
    if (encoding == WavEncoding::Pcm16) {
      const double scaled = std::clamp(static_cast<double>(v) * 32768.0, -32768.0, 32767.0);
      put16(b, static_cast<std::uint16_t>(static_cast<std::int16_t>(std::lround(scaled))));
    } else {
      put32(b, std::bit_cast<std::uint32_t>(v));
    }
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write WAV file " + path.string());
  out.write(b.data(), static_cast<std::streamsize>(b.size()));
}

}  // namespace aurora
