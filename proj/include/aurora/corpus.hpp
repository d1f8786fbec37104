#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "aurora/geometry.hpp"

namespace aurora {

/// One vowel token measured at the acoustic midpoint.
struct TokenRecord {
  std::string speaker_id;
  std::string item;
  Knots knots{};  // mm, index 0 = vallecula, 10 = tip
  double f1_hz = 0.0;
  double f2_hz = 0.0;

  friend bool operator==(const TokenRecord&, const TokenRecord&) = default;
};

/// Throws DataError if the record breaks the TokenRecord invariants.
void validate_record(const TokenRecord& r);

/// Ordered token list plus a flag recording whether per-speaker centring has
/// been applied. Immutable after construction.
class Corpus {
 public:
  Corpus() = default;
  explicit Corpus(std::vector<TokenRecord> records, bool centered = false);

  const std::vector<TokenRecord>& records() const noexcept { return records_; }
  bool centered() const noexcept { return centered_; }
  std::size_t size() const noexcept { return records_.size(); }
  bool empty() const noexcept { return records_.empty(); }

  std::vector<std::string> speakers() const;  // first-appearance order
  std::vector<std::string> items() const;     // sorted

  friend bool operator==(const Corpus&, const Corpus&) = default;

 private:
  std::vector<TokenRecord> records_;
  bool centered_ = false;
};

struct ItemSummary {
  std::string item;
  std::size_t n_tokens = 0;
  Knots mean_knots{};
  double mean_f1_hz = 0.0;
  double mean_f2_hz = 0.0;
};

/// Column names of the corpus CSV, in order:
/// speaker,item,x1,y1,...,x11,y11,f1,f2
std::vector<std::string> corpus_csv_header();

Corpus parse_corpus(std::istream& in);
Corpus load_corpus(const std::filesystem::path& path);

/// Writes with round-trip precision, so parse_corpus(write_corpus(c)) == c.
void write_corpus(std::ostream& out, const Corpus& c);
void save_corpus(const std::filesystem::path& path, const Corpus& c);

/// Subtracts one 2-D centroid per speaker (mean over all knots of all that
/// speaker's tokens). Rejects an already centred corpus.
Corpus center_by_speaker(const Corpus& c);

/// Per-item means of every knot coordinate and of F1, F2, sorted by item.
std::vector<ItemSummary> item_means(const Corpus& c);

}  // namespace aurora
