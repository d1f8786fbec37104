#include "aurora/corpus.hpp"

#include <algorithm>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <string_view>
#include <unordered_map>

#include "aurora/error.hpp"
#include "numeric.hpp"

namespace aurora {

namespace {

constexpr std::size_t kColumnCount = 2 + kShapeDim + 2;

// Splits one CSV line. Double-quoted fields may contain commas; "" escapes a quote.
std::vector<std::string> split_csv_line(std::string_view line) {
  std::vector<std::string> cells;
  std::string cell;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char ch = line[i];
    if (quoted) {
      if (ch == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cell += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cell += ch;
      }
    } else if (ch == '"') {
      quoted = true;
    } else if (ch == ',') {
      cells.push_back(std::move(cell));
      cell.clear();
    } else if (ch != '\r') {
      cell += ch;
    }
  }
  cells.push_back(std::move(cell));
  return cells;
}

std::string quote_if_needed(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"') out += '"';
    out += ch;
  }
  return out + '"';
}

}  // namespace

void validate_record(const TokenRecord& r) {
  if (!all_finite(r.knots)) throw DataError("token has non-finite landmark coordinates");
  if (!(r.f1_hz > 0.0) || !(r.f2_hz > 0.0) || !std::isfinite(r.f1_hz) || !std::isfinite(r.f2_hz))
    throw DataError("token formants must be finite and positive");
  if (!(r.f2_hz > r.f1_hz)) throw DataError("token has F2 <= F1");
}

Corpus::Corpus(std::vector<TokenRecord> records, bool centered)
    : records_(std::move(records)), centered_(centered) {
  for (const auto& r : records_) validate_record(r);
}

std::vector<std::string> Corpus::speakers() const {
  std::vector<std::string> out;
  for (const auto& r : records_)
    if (std::find(out.begin(), out.end(), r.speaker_id) == out.end()) out.push_back(r.speaker_id);
  return out;
}

std::vector<std::string> Corpus::items() const {
  std::vector<std::string> out;
  for (const auto& r : records_) out.push_back(r.item);
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

std::vector<std::string> corpus_csv_header() {
  std::vector<std::string> cols = {"speaker", "item"};
  for (std::size_t i = 1; i <= kKnotCount; ++i) {
    cols.push_back("x" + std::to_string(i));
    cols.push_back("y" + std::to_string(i));
  }
  cols.push_back("f1");
  cols.push_back("f2");
  return cols;
}

Corpus parse_corpus(std::istream& in) {
  const auto expected = corpus_csv_header();
  std::string line;
  if (!std::getline(in, line)) throw ParseError(0, "", "empty file, header row missing");
  if (line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);

  const auto header = split_csv_line(line);
  std::unordered_map<std::string, std::size_t> position;
  for (std::size_t i = 0; i < header.size(); ++i) position.emplace(header[i], i);
  std::array<std::size_t, kColumnCount> index{};
  for (std::size_t c = 0; c < kColumnCount; ++c) {
    auto it = position.find(expected[c]);
    if (it == position.end()) throw ParseError(0, expected[c], "missing column");
    index[c] = it->second;
  }

  std::vector<TokenRecord> records;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    if (line.empty() || line == "\r") continue;
    ++row;
    const auto cells = split_csv_line(line);
    if (cells.size() != header.size())
      throw ParseError(row, "", "expected " + std::to_string(header.size()) + " cells, found " +
                                    std::to_string(cells.size()));
    for (std::size_t c = 0; c < kColumnCount; ++c)
      if (cells[index[c]].empty()) throw ParseError(row, expected[c], "empty cell");

    auto number = [&](std::size_t c) {
      auto v = detail::parse_double(cells[index[c]]);
      if (!v || !std::isfinite(*v))
        throw ParseError(row, expected[c], "not a finite number: '" + cells[index[c]] + "'");
      return *v;
    };

    TokenRecord r;
    r.speaker_id = cells[index[0]];
    r.item = cells[index[1]];
    for (std::size_t k = 0; k < kKnotCount; ++k) r.knots[k] = {number(2 + 2 * k), number(3 + 2 * k)};
    r.f1_hz = number(kColumnCount - 2);
    r.f2_hz = number(kColumnCount - 1);
    if (r.f1_hz <= 0.0) throw ParseError(row, "f1", "formant must be positive");
    if (r.f2_hz <= 0.0) throw ParseError(row, "f2", "formant must be positive");
    if (r.f2_hz <= r.f1_hz) throw ParseError(row, "f2", "F2 must exceed F1");
    records.push_back(std::move(r));
  }
  return Corpus(std::move(records), false);
}

Corpus load_corpus(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open corpus file " + path.string());
  return parse_corpus(in);
}

void write_corpus(std::ostream& out, const Corpus& c) {
  const auto header = corpus_csv_header();
  for (std::size_t i = 0; i < header.size(); ++i) out << (i ? "," : "") << header[i];
  out << '\n';
  for (const auto& r : c.records()) {
    out << quote_if_needed(r.speaker_id) << ',' << quote_if_needed(r.item);
    for (const auto& p : r.knots)
      out << ',' << detail::format_double(p.x) << ',' << detail::format_double(p.y);
    out << ',' << detail::format_double(r.f1_hz) << ',' << detail::format_double(r.f2_hz) << '\n';
  }
}

void save_corpus(const std::filesystem::path& path, const Corpus& c) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write corpus file " + path.string());
  write_corpus(out, c);
}

Corpus center_by_speaker(const Corpus& c) {
  if (c.centered()) throw PreconditionError("corpus is already centred by speaker");

  struct Accum {
    detail::CompensatedSum x, y;
    std::size_t n = 0;
  };
  std::map<std::string, Accum> acc;
  for (const auto& r : c.records()) {
    auto& a = acc[r.speaker_id];
    for (const auto& p : r.knots) {
      a.x.add(p.x);
      a.y.add(p.y);
    }
    a.n += kKnotCount;
  }

  std::map<std::string, Point2> centroid;
  for (const auto& [speaker, a] : acc)
    centroid[speaker] = {a.x.value() / static_cast<double>(a.n), a.y.value() / static_cast<double>(a.n)};

  std::vector<TokenRecord> out = c.records();
  for (auto& r : out) {
    const Point2 m = centroid.at(r.speaker_id);
    for (auto& p : r.knots) p = p - m;
  }
  return Corpus(std::move(out), true);
}

std::vector<ItemSummary> item_means(const Corpus& c) {
  if (c.empty()) throw PreconditionError("item_means: corpus is empty");
  if (!c.centered()) throw PreconditionError("item_means: corpus must be centred by speaker first");

  struct Accum {
    std::array<detail::CompensatedSum, kShapeDim> coord;
    detail::CompensatedSum f1, f2;
    std::size_t n = 0;
  };
  std::map<std::string, Accum> acc;
  for (const auto& r : c.records()) {
    auto& a = acc[r.item];
    for (std::size_t k = 0; k < kKnotCount; ++k) {
      a.coord[2 * k].add(r.knots[k].x);
      a.coord[2 * k + 1].add(r.knots[k].y);
    }
    a.f1.add(r.f1_hz);
    a.f2.add(r.f2_hz);
    ++a.n;
  }

  std::vector<ItemSummary> out;
  for (const auto& [item, a] : acc) {
    const double n = static_cast<double>(a.n);
    ItemSummary s;
    s.item = item;
    s.n_tokens = a.n;
    for (std::size_t k = 0; k < kKnotCount; ++k)
      s.mean_knots[k] = {a.coord[2 * k].value() / n, a.coord[2 * k + 1].value() / n};
    s.mean_f1_hz = a.f1.value() / n;
    s.mean_f2_hz = a.f2.value() / n;
    out.push_back(std::move(s));
  }
  return out;
}

}  // namespace aurora
