#include <doctest.h>

#include <cstring>
#include <fstream>
#include <random>
#include <sstream>

#include "aurora/inversion.hpp"
#include "aurora/lut.hpp"
#include "support.hpp"

using namespace aurora;

namespace {

const LutRanges kPaperRanges{320, 903, 828, 2616, 10};

const LookupTable& paper_lut() {
  static const LookupTable t = compile_lut(testing::jittered_bundle(), kPaperRanges);
  return t;
}

std::string serialize(const LookupTable& t) {
  std::ostringstream s;
  write_lut(s, t);
  return s.str();
}

LutFormatError::Kind read_kind(const std::string& bytes) {
  std::istringstream in(bytes);
  try {
    read_lut(in);
  } catch (const LutFormatError& e) {
    return e.kind();
  }
  FAIL("expected a format error");
  return LutFormatError::Kind::Io;
}

double max_dev(const TongueContour& a, const TongueContour& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < kContourPoints; ++i)
    m = std::max({m, std::abs(a.points[i].x - b.points[i].x), std::abs(a.points[i].y - b.points[i].y)});
  return m;
}

void put_u32(std::string& s, std::size_t at, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) s[at + i] = static_cast<char>((v >> (8 * i)) & 0xff);
}

void put_f64(std::string& s, std::size_t at, double v) {
  std::uint64_t u;
  std::memcpy(&u, &v, 8);
  for (int i = 0; i < 8; ++i) s[at + i] = static_cast<char>((u >> (8 * i)) & 0xff);
}

}  // namespace

TEST_SUITE("lut") {

TEST_CASE("axis arithmetic") {
  const LutAxis a = LutAxis::make(320, 903, 10);
  CHECK(a.count == 60);
  CHECK(a.value(0) == 320);
  CHECK(a.value(58) == 900);
  CHECK(a.value(59) == 903);
  CHECK(LutAxis::make(828, 2616, 10).count == 180);
  CHECK(LutAxis::make(0, 100, 10).count == 11);
  CHECK(LutAxis::make(0, 100, 10).value(10) == 100);
  CHECK_THROWS_AS(LutAxis::make(10, 10, 1), PreconditionError);
  CHECK_THROWS_AS(LutAxis::make(0, 10, 0), PreconditionError);
}

TEST_CASE("paper ranges give a 60 x 180 grid carrying the model digest") {
  const auto& h = paper_lut().header();
  CHECK(h.f1.count == 60);
  CHECK(h.f2.count == 180);
  CHECK(paper_lut().cells() == 10800);
  CHECK(digest_to_hex(h.model_digest) == testing::jittered_bundle().metadata.corpus_sha256);
}

TEST_CASE("digest hex round trip") {
  const std::string hex = testing::jittered_bundle().metadata.corpus_sha256;
  CHECK(digest_to_hex(digest_from_hex(hex)) == hex);
  CHECK_THROWS(digest_from_hex("abc"));
}

TEST_CASE("nodes equal direct inversion rounded to float") {
  const auto& t = paper_lut();
  const auto& b = testing::jittered_bundle();
  for (std::size_t i : {0u, 17u, 59u})
    for (std::size_t j : {0u, 93u, 179u}) {
      const TongueContour direct = invert(b, t.header().f1.value(i), t.header().f2.value(j));
      const TongueContour node = t.node(i, j);
      for (std::size_t k = 0; k < kContourPoints; ++k) {
        CHECK(node.points[k].x == static_cast<double>(static_cast<float>(direct.points[k].x)));
        CHECK(node.points[k].y == static_cast<double>(static_cast<float>(direct.points[k].y)));
      }
      CHECK(max_dev(t.query(t.header().f1.value(i), t.header().f2.value(j)), node) == 0.0);
    }
}

TEST_CASE("cell centre is the average of its four corners") {
  const auto& t = paper_lut();
  const auto& h = t.header();
  for (std::size_t i : {0u, 30u, 57u})
    for (std::size_t j : {0u, 100u, 177u}) {
      const double f1 = 0.5 * (h.f1.value(i) + h.f1.value(i + 1));
      const double f2 = 0.5 * (h.f2.value(j) + h.f2.value(j + 1));
      const TongueContour q = t.query(f1, f2);
      const auto a = t.node(i, j), b = t.node(i, j + 1), c = t.node(i + 1, j), d = t.node(i + 1, j + 1);
      for (std::size_t k = 0; k < kContourPoints; ++k) {
        CHECK(std::abs(q.points[k].x - 0.25 * (a.points[k].x + b.points[k].x + c.points[k].x + d.points[k].x)) <= 1e-12);
        CHECK(std::abs(q.points[k].y - 0.25 * (a.points[k].y + b.points[k].y + c.points[k].y + d.points[k].y)) <= 1e-12);
      }
    }
}

TEST_CASE("short last interval interpolates against the clamped node") {
  const auto& t = paper_lut();
  const auto& h = t.header();
  // F1 cell [900, 903]: midpoint 901.5 averages nodes 58 and 59.
  const TongueContour q = t.query(901.5, h.f2.value(4));
  const auto a = t.node(58, 4), b = t.node(59, 4);
  for (std::size_t k = 0; k < kContourPoints; ++k)
    CHECK(std::abs(q.points[k].x - 0.5 * (a.points[k].x + b.points[k].x)) <= 1e-12);
}

TEST_CASE("continuity across cell edges") {
  const auto& t = paper_lut();
  const double edge = t.header().f1.value(20);
  for (double f2 : {900.0, 1555.5, 2500.0}) {
    const TongueContour below = t.query(edge - 1e-9, f2), above = t.query(edge + 1e-9, f2);
    CHECK(max_dev(below, above) <= 1e-9);
  }
}

TEST_CASE("out-of-hull queries clamp and flag") {
  const auto& t = paper_lut();
  const TongueContour q = t.query(100, 5000);
  CHECK(q.extrapolated);
  CHECK(max_dev(q, t.node(0, 179)) == 0.0);
  CHECK_FALSE(t.query(500, 1500).extrapolated);
}

TEST_CASE("fidelity against direct inversion and refinement") {
  const auto& b = testing::jittered_bundle();
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> f1(320, 903), f2(828, 2616);
  std::vector<std::pair<double, double>> queries;
  for (int i = 0; i < 300; ++i) queries.emplace_back(f1(rng), f2(rng));
  auto worst = [&](const LookupTable& t) {
    double m = 0.0;
    for (auto [a, c] : queries) m = std::max(m, max_dev(t.query(a, c), invert(b, a, c)));
    return m;
  };
  const double coarse = worst(compile_lut(b, {320, 903, 828, 2616, 40}));
  const double mid = worst(compile_lut(b, {320, 903, 828, 2616, 20}));
  const double fine = worst(paper_lut());
  CHECK(mid <= coarse);
  CHECK(fine <= mid);
  CHECK(fine < 0.2);
}

TEST_CASE("cell cap") {
  CHECK_THROWS_WITH_AS(compile_lut(testing::jittered_bundle(), {320, 903, 828, 2616, 0.5}),
                       doctest::Contains("larger step"), LutTooLargeError);
  CHECK_NOTHROW(compile_lut(testing::jittered_bundle(), {320, 903, 828, 2616, 100}, 200));
  CHECK_THROWS_AS(compile_lut(testing::jittered_bundle(), {320, 903, 828, 2616, 100}, 100), LutTooLargeError);
}

TEST_CASE("binary layout") {
  const std::string bytes = serialize(paper_lut());
  CHECK(bytes.size() == kLutHeaderBytes + 10800 * 100 * 2 * 4);
  CHECK(bytes.substr(0, 4) == "AURL");
  CHECK(static_cast<unsigned char>(bytes[4]) == 1);
  CHECK(static_cast<unsigned char>(bytes[40]) == 60);
  CHECK(static_cast<unsigned char>(bytes[44]) == 180);
  CHECK(static_cast<unsigned char>(bytes[48]) == 100);
  double lo;
  std::memcpy(&lo, bytes.data() + 56, 8);
  CHECK(lo == 320.0);
  float x0;
  std::memcpy(&x0, bytes.data() + kLutHeaderBytes, 4);
  CHECK(x0 == paper_lut().payload()[0]);
}

TEST_CASE("round trips") {
  const std::string bytes = serialize(paper_lut());
  std::istringstream in(bytes);
  const LookupTable back = read_lut(in);
  CHECK(back == paper_lut());
  CHECK(serialize(back) == bytes);
  testing::TempDir dir;
  save_lut(dir / "a.lut", paper_lut());
  CHECK(load_lut(dir / "a.lut") == paper_lut());
  CHECK(inspect_lut(dir / "a.lut") == paper_lut().header());
  // Same bundle and ranges compile to the same bytes.
  CHECK(serialize(compile_lut(testing::jittered_bundle(), kPaperRanges)) == bytes);
}

TEST_CASE("corrupted files raise typed errors") {
  using K = LutFormatError::Kind;
  const std::string good = serialize(compile_lut(testing::jittered_bundle(), {320, 903, 828, 2616, 100}));
  SUBCASE("magic") {
    std::string s = good;
    s[0] = 'X';
    CHECK(read_kind(s) == K::BadMagic);
    CHECK(read_kind("RIFF....") == K::BadMagic);
  }
  SUBCASE("version") {
    std::string s = good;
    put_u32(s, 4, 2);
    CHECK(read_kind(s) == K::UnsupportedVersion);
  }
  SUBCASE("reserved field and axis parameters") {
    std::string s = good;
    put_u32(s, 52, 7);
    CHECK(read_kind(s) == K::CorruptHeader);
    s = good;
    put_f64(s, 72, -10.0);  // F1 step
    CHECK(read_kind(s) == K::CorruptHeader);
    s = good;
    put_f64(s, 80, std::numeric_limits<double>::quiet_NaN());
    CHECK(read_kind(s) == K::CorruptHeader);
  }
  SUBCASE("dimensions disagree") {
    std::string s = good;
    put_u32(s, 40, 61);
    CHECK(read_kind(s) == K::DimensionMismatch);
    s = good;
    put_u32(s, 48, 50);
    CHECK(read_kind(s) == K::DimensionMismatch);
    CHECK(read_kind(good + "x") == K::DimensionMismatch);
  }
  SUBCASE("truncation") {
    CHECK(read_kind(good.substr(0, 50)) == K::Truncated);
    CHECK(read_kind(good.substr(0, good.size() - 3)) == K::Truncated);
    CHECK(read_kind("") == K::Truncated);
  }
  SUBCASE("missing file") {
    try {
      load_lut("/nonexistent/dir/x.lut");
      FAIL("expected an error");
    } catch (const LutFormatError& e) {
      CHECK(e.kind() == K::Io);
    }
  }
  SUBCASE("random byte flips never crash") {
    std::mt19937_64 rng(3);
    for (int i = 0; i < 300; ++i) {
      std::string s = good;
      const std::size_t at = rng() % kLutHeaderBytes;
      s[at] = static_cast<char>(rng());
      std::istringstream in(s);
      try {
        const LookupTable t = read_lut(in);
        (void)t.query(500, 1500);
      } catch (const LutFormatError&) {
      }
    }
  }
}

}  // TEST_SUITE
