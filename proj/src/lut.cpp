#include "aurora/lut.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>

namespace aurora {

namespace {

constexpr char kMagic[4] = {'A', 'U', 'R', 'L'};

// Little-endian encoders; the file layout is fixed regardless of host order.
void put_u32(std::string& b, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) b.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}
void put_u64(std::string& b, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) b.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}
void put_f64(std::string& b, double v) { put_u64(b, std::bit_cast<std::uint64_t>(v)); }

std::uint32_t get_u32(const unsigned char* p) {
  std::uint32_t v = 0;
  for (int i = 3; i >= 0; --i) v = (v << 8) | p[i];
  return v;
}
std::uint64_t get_u64(const unsigned char* p) {
  std::uint64_t v = 0;
  for (int i = 7; i >= 0; --i) v = (v << 8) | p[i];
  return v;
}
double get_f64(const unsigned char* p) { return std::bit_cast<double>(get_u64(p)); }

struct AxisPosition {
  std::size_t index = 0;
  double frac = 0.0;
  bool clamped = false;
};

AxisPosition locate(const LutAxis& axis, double f) {
  AxisPosition pos;
  if (!(f >= axis.lo)) {  // also catches NaN
    pos.clamped = true;
    return pos;
  }
  const std::size_t last_cell = axis.count - 2;
  if (f >= axis.hi) {
    pos.clamped = f > axis.hi;
    pos.index = last_cell;
    pos.frac = 1.0;
    return pos;
  }
  std::size_t k = std::min(static_cast<std::size_t>(std::floor((f - axis.lo) / axis.step)), last_cell);
  if (k < last_cell && f >= axis.value(k + 1)) ++k;
  if (k > 0 && f < axis.value(k)) --k;
  pos.index = k;
  const double a = axis.value(k), b = axis.value(k + 1);
  pos.frac = std::clamp((f - a) / (b - a), 0.0, 1.0);
  return pos;
}

LutFormatError format_error(LutFormatError::Kind kind, const std::string& what) {
  return LutFormatError(kind, "lookup table: " + what);
}

}  // namespace

Digest digest_from_hex(const std::string& hex) {
  Digest d{};
  if (hex.size() != 64) throw DataError("digest must be 64 hex characters");
  auto nibble = [](char c) -> int {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    if (c >= 'A' && c <= 'F') return c - 'A' + 10;
    throw DataError("digest has a non-hex character");
  };
  for (std::size_t i = 0; i < 32; ++i)
    d[i] = static_cast<std::uint8_t>(nibble(hex[2 * i]) * 16 + nibble(hex[2 * i + 1]));
  return d;
}

std::string digest_to_hex(const Digest& d) {
  static constexpr char kHex[] = "0123456789abcdef";
  std::string s;
  for (auto b : d) {
    s += kHex[b >> 4];
    s += kHex[b & 0xF];
  }
  return s;
}

LutAxis LutAxis::make(double lo, double hi, double step) {
  if (!(step > 0.0) || !std::isfinite(step)) throw PreconditionError("lookup table step must be positive");
  if (!(hi > lo) || !std::isfinite(lo) || !std::isfinite(hi))
    throw PreconditionError("lookup table range must satisfy lo < hi");
  const double intervals = std::ceil((hi - lo) / step - 1e-9);
  if (intervals + 1.0 > 4.0e9) throw LutTooLargeError("lookup table axis is too long; use a larger step");
  return {lo, hi, step, static_cast<std::uint32_t>(intervals) + 1};
}

double LutAxis::value(std::size_t i) const {
  return i + 1 >= count ? hi : lo + step * static_cast<double>(i);
}

std::vector<double> LutAxis::values() const {
  std::vector<double> v(count);
  for (std::size_t i = 0; i < count; ++i) v[i] = value(i);
  return v;
}

LookupTable::LookupTable(LutHeader header, std::vector<float> payload)
    : header_(header), payload_(std::move(payload)) {
  if (header_.f1.count < 2 || header_.f2.count < 2)
    throw format_error(LutFormatError::Kind::DimensionMismatch, "each axis needs at least two nodes");
  if (header_.points_per_contour != kContourPoints)
    throw format_error(LutFormatError::Kind::DimensionMismatch, "contours must have 100 points");
  if (payload_.size() != cells() * kContourPoints * 2)
    throw format_error(LutFormatError::Kind::DimensionMismatch, "payload size does not match grid dimensions");
}

const float* LookupTable::contour_ptr(std::size_t i, std::size_t j) const {
  return payload_.data() + (i * header_.f2.count + j) * kContourPoints * 2;
}

TongueContour LookupTable::node(std::size_t i, std::size_t j) const {
  TongueContour c;
  const float* p = contour_ptr(i, j);
  for (std::size_t k = 0; k < kContourPoints; ++k) c.points[k] = {p[2 * k], p[2 * k + 1]};
  c.source_f1_hz = header_.f1.value(i);
  c.source_f2_hz = header_.f2.value(j);
  return c;
}

TongueContour LookupTable::query(double f1_hz, double f2_hz) const {
  const AxisPosition a = locate(header_.f1, f1_hz);
  const AxisPosition b = locate(header_.f2, f2_hz);
  const float* c00 = contour_ptr(a.index, b.index);
  const float* c01 = contour_ptr(a.index, b.index + 1);
  const float* c10 = contour_ptr(a.index + 1, b.index);
  const float* c11 = contour_ptr(a.index + 1, b.index + 1);
  const double w00 = (1.0 - a.frac) * (1.0 - b.frac);
  const double w01 = (1.0 - a.frac) * b.frac;
  const double w10 = a.frac * (1.0 - b.frac);
  const double w11 = a.frac * b.frac;

  TongueContour out;
  for (std::size_t k = 0; k < 2 * kContourPoints; k += 2) {
    out.points[k / 2] = {w00 * c00[k] + w01 * c01[k] + w10 * c10[k] + w11 * c11[k],
                         w00 * c00[k + 1] + w01 * c01[k + 1] + w10 * c10[k + 1] + w11 * c11[k + 1]};
  }
  out.extrapolated = a.clamped || b.clamped;
  out.source_f1_hz = f1_hz;
  out.source_f2_hz = f2_hz;
  return out;
}

LutRanges default_lut_ranges(const ModelBundle& bundle, double step) {
  const auto& r = bundle.regression;
  return {r.f1_range.low, r.f1_range.high, r.f2_range.low, r.f2_range.high, step};
}

LookupTable compile_lut(const ModelBundle& bundle, const LutRanges& ranges, std::size_t cell_cap) {
  LutHeader h;
  h.f1 = LutAxis::make(ranges.f1_lo, ranges.f1_hi, ranges.step);
  h.f2 = LutAxis::make(ranges.f2_lo, ranges.f2_hi, ranges.step);
  const std::size_t cells = std::size_t{h.f1.count} * h.f2.count;
  if (cells > cell_cap)
    throw LutTooLargeError("lookup table would have " + std::to_string(h.f1.count) + " x " +
                           std::to_string(h.f2.count) + " = " + std::to_string(cells) + " cells, over the cap of " +
                           std::to_string(cell_cap) + "; use a larger step");
  h.model_digest = digest_from_hex(bundle.metadata.corpus_sha256);

  std::vector<float> payload;
  payload.reserve(cells * kContourPoints * 2);
  for (std::size_t i = 0; i < h.f1.count; ++i) {
    for (std::size_t j = 0; j < h.f2.count; ++j) {
      const TongueContour c = invert(bundle, h.f1.value(i), h.f2.value(j));
      for (const auto& p : c.points) {
        payload.push_back(static_cast<float>(p.x));
        payload.push_back(static_cast<float>(p.y));
      }
    }
  }
  return LookupTable(h, std::move(payload));
}

void write_lut(std::ostream& out, const LookupTable& t) {
  const auto& h = t.header();
  std::string b;
  b.reserve(kLutHeaderBytes + t.payload().size() * 4);
  b.append(kMagic, 4);
  put_u32(b, h.version);
  b.append(reinterpret_cast<const char*>(h.model_digest.data()), h.model_digest.size());
  put_u32(b, h.f1.count);
  put_u32(b, h.f2.count);
  put_u32(b, h.points_per_contour);
  put_u32(b, 0);
  for (const LutAxis* a : {&h.f1, &h.f2}) {
    put_f64(b, a->lo);
    put_f64(b, a->hi);
    put_f64(b, a->step);
  }
  for (float v : t.payload()) put_u32(b, std::bit_cast<std::uint32_t>(v));
  out.write(b.data(), static_cast<std::streamsize>(b.size()));
  if (!out) throw format_error(LutFormatError::Kind::Io, "write failed");
}

LutHeader read_lut_header(std::istream& in) {
  unsigned char buf[kLutHeaderBytes];
  in.read(reinterpret_cast<char*>(buf), sizeof buf);
  const auto got = static_cast<std::size_t>(in.gcount());
  if (got >= 4 && std::memcmp(buf, kMagic, 4) != 0)
    throw format_error(LutFormatError::Kind::BadMagic, "bad magic bytes, not an AURL file");
  if (got < kLutHeaderBytes) throw format_error(LutFormatError::Kind::Truncated, "file ends inside the header");

  LutHeader h;
  h.version = get_u32(buf + 4);
  if (h.version != kLutVersion)
    throw format_error(LutFormatError::Kind::UnsupportedVersion,
                       "unsupported version " + std::to_string(h.version) + " (expected " +
                           std::to_string(kLutVersion) + ")");
  std::memcpy(h.model_digest.data(), buf + 8, 32);
  const std::uint32_t n1 = get_u32(buf + 40), n2 = get_u32(buf + 44);
  h.points_per_contour = get_u32(buf + 48);
  if (get_u32(buf + 52) != 0) throw format_error(LutFormatError::Kind::CorruptHeader, "reserved field is not zero");

  auto axis = [&](const unsigned char* p, std::uint32_t count, const char* name) {
    LutAxis a;
    try {
      a = LutAxis::make(get_f64(p), get_f64(p + 8), get_f64(p + 16));
    } catch (const PreconditionError&) {
      throw format_error(LutFormatError::Kind::CorruptHeader, std::string("invalid ") + name + " axis parameters");
    }
    if (a.count != count)
      throw format_error(LutFormatError::Kind::DimensionMismatch,
                         std::string(name) + " axis count " + std::to_string(count) +
                             " disagrees with its range and step (" + std::to_string(a.count) + ")");
    return a;
  };
  h.f1 = axis(buf + 56, n1, "F1");
  h.f2 = axis(buf + 80, n2, "F2");
  if (h.points_per_contour != kContourPoints)
    throw format_error(LutFormatError::Kind::DimensionMismatch, "contours must have 100 points");
  return h;
}

LookupTable read_lut(std::istream& in) {
  const LutHeader h = read_lut_header(in);
  const std::size_t n = std::size_t{h.f1.count} * h.f2.count * kContourPoints * 2;
  std::vector<unsigned char> raw(n * 4);
  in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
  if (static_cast<std::size_t>(in.gcount()) != raw.size())
    throw format_error(LutFormatError::Kind::Truncated, "payload truncated: expected " +
                                                            std::to_string(raw.size()) + " bytes, found " +
                                                            std::to_string(in.gcount()));
  if (in.peek() != std::char_traits<char>::eof())
    throw format_error(LutFormatError::Kind::DimensionMismatch, "trailing bytes after the payload");
  std::vector<float> payload(n);
  for (std::size_t i = 0; i < n; ++i) payload[i] = std::bit_cast<float>(get_u32(raw.data() + 4 * i));
  return LookupTable(h, std::move(payload));
}

void save_lut(const std::filesystem::path& path, const LookupTable& t) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw format_error(LutFormatError::Kind::Io, "cannot write " + path.string());
  write_lut(out, t);
}

LookupTable load_lut(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw format_error(LutFormatError::Kind::Io, "cannot open " + path.string());
  return read_lut(in);
}

LutHeader inspect_lut(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw format_error(LutFormatError::Kind::Io, "cannot open " + path.string());
  return read_lut_header(in);
}

}  // namespace aurora
