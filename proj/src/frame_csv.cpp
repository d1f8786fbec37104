#include "aurora/frame_csv.hpp"

#include <istream>
#include <ostream>
#include <sstream>
#include <string>

#include "numeric.hpp"

namespace aurora {

namespace {
constexpr const char* kHeader = "t_ms,rms_db,voiced,f1,b1,f2,b2,f3,b3,f4,b4";
constexpr std::size_t kSlots = 4;
}  // namespace

void write_frame_csv(std::ostream& out, std::span<const FormantFrame> frames) {
  out << kHeader << '\n';
  for (const auto& f : frames) {
    out << detail::format_double(f.t_ms) << ',' << detail::format_double(f.rms_db) << ',' << (f.voiced ? 1 : 0);
    for (std::size_t i = 0; i < kSlots; ++i) {
      if (i < f.formants.size())
        out << ',' << detail::format_double(f.formants[i].freq_hz) << ','
            << detail::format_double(f.formants[i].bandwidth_hz);
      else
        out << ",,";
    }
    out << '\n';
  }
}

std::vector<FormantFrame> read_frame_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line.rfind(kHeader, 0) != 0) throw DataError("frame CSV: missing header");
  std::vector<FormantFrame> frames;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    ++row;
    if (line.back() == '\r') line.pop_back();
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    if (cells.size() != 3 + 2 * kSlots) throw ParseError(row, "", "expected 11 cells");
    auto num = [&](std::size_t i, const char* col) {
      auto v = detail::parse_double(cells[i]);
      if (!v) throw ParseError(row, col, "not a number");
      return *v;
    };
    FormantFrame f;
    f.t_ms = num(0, "t_ms");
    f.rms_db = num(1, "rms_db");
    if (cells[2] != "0" && cells[2] != "1") throw ParseError(row, "voiced", "must be 0 or 1");
    f.voiced = cells[2] == "1";
    for (std::size_t i = 0; i < kSlots; ++i) {
      const std::size_t c = 3 + 2 * i;
      if (cells[c].empty() && cells[c + 1].empty()) continue;
      f.formants.push_back({num(c, "f"), num(c + 1, "b")});
    }
    frames.push_back(std::move(f));
  }
  return frames;
}

}  // namespace aurora
