#include <doctest.h>

#include <cmath>
#include <random>

#include "fixtures.hpp"
#include "ragmem/attributes.hpp"
#include "ragmem/codec.hpp"
#include "ragmem/embedding.hpp"
#include "ragmem/error.hpp"
#include "ragmem/landmark.hpp"
#include "ragmem/landmark_io.hpp"

using namespace ragmem;

namespace {

ErrorCode code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an Error");
  return ErrorCode::Io;
}

std::map<std::string, std::string> full_attributes() {
  return {{"category", "T-shirt"},   {"fit", "Regular"},       {"collar", "Round"},
          {"sleeve_length", "Short"}, {"fabric", "Knit"},       {"length", "Medium"},
          {"with_inner_wear", "No"},  {"sleeves_rolled_up", "No"},
          {"top_open", "No"},         {"top_tuck_in", "No"}};
}

}  // namespace

TEST_SUITE("core") {
  TEST_CASE("normalize produces unit vectors") {
    const std::vector<double> v = {3.0, 4.0};
    const auto e = StructureEmbedding::normalize(v);
    CHECK(e[0] == doctest::Approx(0.6));
    CHECK(e[1] == doctest::Approx(0.8));
    CHECK(l2_norm(e.values()) == doctest::Approx(1.0).epsilon(1e-15));
  }

  TEST_CASE("normalize survives extreme magnitudes") {
    const std::vector<double> small = {1e-11, 1e-11};
    const std::vector<double> below = {1e-13, 1e-13};
    const std::vector<double> huge = {1e200, -1e200};
    CHECK(StructureEmbedding::normalize(small)[0] == doctest::Approx(std::sqrt(0.5)));
    CHECK_THROWS_AS(StructureEmbedding::normalize(below), Error);
    CHECK(StructureEmbedding::normalize(huge)[1] == doctest::Approx(-std::sqrt(0.5)));
  }

  TEST_CASE("normalize rejects zero and non-finite input") {
    const std::vector<double> zero = {0.0, 0.0, 0.0};
    const std::vector<double> nan = {1.0, std::nan("")};
    const std::vector<double> inf = {INFINITY, 1.0};
    CHECK(code_of([&] { StructureEmbedding::normalize(zero); }) == ErrorCode::ZeroVector);
    CHECK(code_of([&] { StructureEmbedding::normalize(nan); }) == ErrorCode::NonFinite);
    CHECK(code_of([&] { StructureEmbedding::normalize(inf); }) == ErrorCode::NonFinite);
  }

  TEST_CASE("from_unit checks the norm") {
    CHECK_NOTHROW(StructureEmbedding::from_unit({1.0, 0.0}));
    CHECK(code_of([] { StructureEmbedding::from_unit({2.0, 0.0}); }) ==
          ErrorCode::ValidationFailed);
  }

  TEST_CASE("dot checks dimensions") {
    const std::vector<double> a = {1.0, 2.0}, b = {1.0};
    CHECK(code_of([&] { dot(a, b); }) == ErrorCode::DimMismatch);
  }

  TEST_CASE("concat_features lays image features first") {
    std::vector<double> img(768, 1.0), attr(320, 2.0);
    const auto joint = concat_features(img, attr);
    REQUIRE(joint.size() == 1088);
    CHECK(joint[767] == 1.0);
    CHECK(joint[768] == 2.0);
    std::vector<double> short_img(10, 1.0);
    CHECK(code_of([&] { concat_features(short_img, attr); }) == ErrorCode::DimMismatch);
  }

  TEST_CASE("error codes have stable names") {
    CHECK(std::string(code_name(ErrorCode::KTooLarge)) == "k_too_large");
    CHECK(std::string(code_name(ErrorCode::DimMismatch)) == "dim_mismatch");
  }
}

TEST_SUITE("landmark") {
  TEST_CASE("bounding box is tight and half-open") {
    LandmarkMask m(10, 8);
    CHECK_FALSE(m.bounding_box().has_value());
    m.fill_rect(2, 3, 5, 7);
    const auto box = m.bounding_box();
    REQUIRE(box.has_value());
    CHECK(*box == BoundingBox{2, 3, 5, 7});
    CHECK(m.foreground_count() == 12);
    const auto crop = m.crop(*box);
    CHECK(crop.width() == 3);
    CHECK(crop.height() == 4);
    CHECK(crop.foreground_count() == 12);
  }

  TEST_CASE("fill_rect clips to the mask") {
    LandmarkMask m(4, 4);
    m.fill_rect(2, 2, 100, 100);
    CHECK(m.foreground_count() == 4);
  }

  TEST_CASE("nearest-neighbour resize of a full mask stays full") {
    LandmarkMask m(3, 5);
    m.fill_rect(0, 0, 3, 5);
    const auto r = m.resized(7, 11);
    CHECK(r.foreground_count() == 77);
  }

  TEST_CASE("resize doubles a checkerboard into 2x2 blocks") {
    LandmarkMask m(2, 2);
    m.set(0, 0, true);
    m.set(1, 1, true);
    const auto r = m.resized(4, 4);
    CHECK(r.at(0, 0));
    CHECK(r.at(1, 1));
    CHECK_FALSE(r.at(2, 0));
    CHECK(r.at(3, 3));
    CHECK(r.foreground_count() == 8);
  }

  TEST_CASE("shape errors") {
    CHECK(code_of([] { LandmarkMask(0, 4); }) == ErrorCode::ShapeMismatch);
    CHECK(code_of([] { LandmarkMask(2, 2, std::vector<std::uint8_t>(3)); }) ==
          ErrorCode::ShapeMismatch);
  }
}

TEST_SUITE("landmark_io") {
  TEST_CASE("PNG round trip is exact") {
    std::mt19937_64 rng(5);
    LandmarkMask m(37, 23);
    for (std::size_t y = 0; y < 23; ++y) {
      for (std::size_t x = 0; x < 37; ++x) m.set(x, y, rng() & 1);
    }
    const std::string png = encode_png(m);
    const auto bytes = std::span(reinterpret_cast<const std::uint8_t*>(png.data()), png.size());
    CHECK(decode_png(bytes) == m);
    CHECK(decode_mask(bytes) == m);
  }

  TEST_CASE("PBM round trip and both encodings") {
    LandmarkMask m(5, 3);
    m.fill_rect(1, 0, 4, 2);
    CHECK(decode_pbm(encode_pbm(m)) == m);
    const auto parsed = decode_pbm("P1\n# comment\n3 2\n1 0 1\n0 1 0\n");
    CHECK(parsed.at(0, 0));
    CHECK_FALSE(parsed.at(1, 0));
    CHECK(parsed.at(1, 1));
    CHECK(parsed.foreground_count() == 3);
  }

  TEST_CASE("files round trip by extension") {
    fixtures::TempDir dir("io");
    LandmarkMask m(9, 9);
    m.fill_rect(2, 2, 7, 5);
    write_mask(m, dir / "a.png");
    write_mask(m, dir / "a.pbm");
    CHECK(read_mask(dir / "a.png") == m);
    CHECK(read_mask(dir / "a.pbm") == m);
  }

  TEST_CASE("garbage is rejected") {
    const std::string junk = "not an image";
    const auto bytes = std::span(reinterpret_cast<const std::uint8_t*>(junk.data()), junk.size());
    CHECK_THROWS_AS(decode_mask(bytes), Error);
    CHECK_THROWS_AS(decode_pbm("P1\n2 2\n1 0\n"), Error);
  }
}

TEST_SUITE("attributes") {
  TEST_CASE("a full attribute set parses and encodes to 320 dims") {
    const auto attrs = AttributeSet::from_map(full_attributes());
    CHECK(attrs.category() == "T-shirt");
    CHECK(attrs.value("collar") == "Round");
    const AttributeCodebook book(42);
    const auto feat = encode_attributes(attrs, book);
    REQUIRE(feat.size() == kAttributeFeatureDim);
    for (std::size_t a = 0; a < kEncodedAttributeCount; ++a) {
      const std::span<const double> block(feat.data() + a * kAttributeCodeDim, kAttributeCodeDim);
      CHECK(l2_norm(block) == doctest::Approx(1.0));
    }
  }

  TEST_CASE("unknown values and missing attributes are errors") {
    auto bad = full_attributes();
    bad["fabric"] = "Unobtainium";
    CHECK(code_of([&] { AttributeSet::from_map(bad); }) == ErrorCode::UnknownValue);
    auto missing = full_attributes();
    missing.erase("fit");
    CHECK(code_of([&] { AttributeSet::from_map(missing); }) == ErrorCode::MissingAttribute);
  }

  TEST_CASE("codebook is deterministic per seed and survives JSON") {
    const AttributeCodebook a(9), b(9), c(10);
    const auto ca = a.code(0, "Dress");
    const auto cb = b.code(0, "Dress");
    const auto cc = c.code(0, "Dress");
    CHECK(std::equal(ca.begin(), ca.end(), cb.begin()));
    CHECK_FALSE(std::equal(ca.begin(), ca.end(), cc.begin()));
    const auto restored = AttributeCodebook::from_json(a.to_json());
    const auto cr = restored.code(0, "Dress");
    CHECK(std::equal(ca.begin(), ca.end(), cr.begin()));
  }

  TEST_CASE("attribute JSON round trip") {
    auto values = full_attributes();
    values["gender"] = "Female";
    const auto attrs = AttributeSet::from_map(values);
    CHECK(AttributeSet::from_json(attrs.to_json()) == attrs);
  }
}

TEST_SUITE("codec") {
  TEST_CASE("base64 matches known vectors") {
    CHECK(base64_encode(std::string_view("")) == "");
    CHECK(base64_encode(std::string_view("f")) == "Zg==");
    CHECK(base64_encode(std::string_view("foob")) == "Zm9vYg==");
    CHECK(base64_encode(std::string_view("foobar")) == "Zm9vYmFy");
    const auto back = base64_decode("Zm9vYg==");
    CHECK(std::string(back.begin(), back.end()) == "foob");
    CHECK_THROWS_AS(base64_decode("@@@"), Error);
  }

  TEST_CASE("sha256 of abc") {
    const std::string abc = "abc";
    CHECK(sha256_hex(std::span(reinterpret_cast<const std::uint8_t*>(abc.data()), 3)) ==
          "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  }
}
