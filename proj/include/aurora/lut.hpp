#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "aurora/bundle.hpp"
#include "aurora/error.hpp"
#include "aurora/inversion.hpp"

namespace aurora {

inline constexpr std::uint32_t kLutVersion = 1;
inline constexpr std::size_t kLutDefaultCellCap = 500'000;
inline constexpr std::size_t kLutHeaderBytes = 104;

using Digest = std::array<std::uint8_t, 32>;

Digest digest_from_hex(const std::string& hex);
std::string digest_to_hex(const Digest& d);

/// Uniform axis from lo to hi. The last interval is shorter than `step` when
/// the span is not a whole number of steps.
struct LutAxis {
  double lo = 0.0;
  double hi = 0.0;
  double step = 0.0;
  std::uint32_t count = 0;

  static LutAxis make(double lo, double hi, double step);
  double value(std::size_t i) const;
  std::vector<double> values() const;

  friend bool operator==(const LutAxis&, const LutAxis&) = default;
};

struct LutHeader {
  std::uint32_t version = kLutVersion;
  Digest model_digest{};
  LutAxis f1;
  LutAxis f2;
  std::uint32_t points_per_contour = static_cast<std::uint32_t>(kContourPoints);

  friend bool operator==(const LutHeader&, const LutHeader&) = default;
};

/// Dense grid of pre-computed contours, stored as float32 x/y pairs.
/// Immutable once built; safe for concurrent queries.
class LookupTable {
 public:
  LookupTable(LutHeader header, std::vector<float> payload);

  const LutHeader& header() const noexcept { return header_; }
  const std::vector<float>& payload() const noexcept { return payload_; }
  std::size_t cells() const noexcept { return std::size_t{header_.f1.count} * header_.f2.count; }

  /// Node contour (i over F1, j over F2) widened to double.
  TongueContour node(std::size_t i, std::size_t j) const;

  /// Bilinear interpolation of the four surrounding node contours. Inputs
  /// outside the grid are clamped to its hull and flagged extrapolated.
  TongueContour query(double f1_hz, double f2_hz) const;

  friend bool operator==(const LookupTable&, const LookupTable&) = default;

 private:
  const float* contour_ptr(std::size_t i, std::size_t j) const;

  LutHeader header_;
  std::vector<float> payload_;
};

class LutTooLargeError : public PreconditionError {
 public:
  using PreconditionError::PreconditionError;
};

class LutFormatError : public DataError {
 public:
  enum class Kind { BadMagic, UnsupportedVersion, CorruptHeader, Truncated, DimensionMismatch, Io };
  LutFormatError(Kind kind, const std::string& what) : DataError(what), kind_(kind) {}
  Kind kind() const noexcept { return kind_; }

 private:
  Kind kind_;
};

struct LutRanges {
  double f1_lo, f1_hi, f2_lo, f2_hi, step;
};

/// Ranges from the model's stored percentiles with a 10 Hz step.
LutRanges default_lut_ranges(const ModelBundle& bundle, double step = 10.0);

LookupTable compile_lut(const ModelBundle& bundle, const LutRanges& ranges,
                        std::size_t cell_cap = kLutDefaultCellCap);

inline TongueContour query_lut(const LookupTable& t, double f1_hz, double f2_hz) { return t.query(f1_hz, f2_hz); }

void write_lut(std::ostream& out, const LookupTable& t);
LookupTable read_lut(std::istream& in);
LutHeader read_lut_header(std::istream& in);

void save_lut(const std::filesystem::path& path, const LookupTable& t);
LookupTable load_lut(const std::filesystem::path& path);
/// Reads only the fixed-size header; the contour payload is not touched.
LutHeader inspect_lut(const std::filesystem::path& path);

}  // namespace aurora
