#include <doctest.h>

#include <filesystem>
#include <random>
#include <string>

#include "oracles.hpp"
#include "planestack/pgm.hpp"

using namespace planestack;

namespace {

std::vector<std::uint8_t> bytes_of(const std::string& s) { return {s.begin(), s.end()}; }

PgmErrorKind error_kind(const std::string& text) {
    try {
        read_pgm(bytes_of(text));
    } catch (const PgmError& e) {
        return e.kind();
    }
    FAIL("expected a PgmError");
    return PgmErrorKind::MalformedHeader;
}

}  // namespace

TEST_CASE("read_pgm parses binary and ascii payloads") {
    auto p5 = bytes_of("P5\n2 2\n255\n");
    p5.insert(p5.end(), {0, 128, 255, 7});
    const auto img = read_pgm(p5);
    REQUIRE(img.width() == 2);
    REQUIRE(img.height() == 2);
    CHECK(img(0, 0) == 0);
    CHECK(img(0, 1) == 128);
    CHECK(img(1, 0) == 255);
    CHECK(img(1, 1) == 7);

    const auto p2 = read_pgm(bytes_of("P2\n1 1\n255\n42\n"));
    CHECK(p2.width() == 1);
    CHECK(p2(0, 0) == 42);
}

TEST_CASE("read_pgm reports each failure distinctly") {
    CHECK(error_kind("P5\n2 2\n65535\n") == PgmErrorKind::UnsupportedMaxval);
    CHECK(error_kind("P5\n2 2\n0\n") == PgmErrorKind::UnsupportedMaxval);
    CHECK(error_kind("P5\n2 2\n255\n\x01\x02") == PgmErrorKind::TruncatedPayload);
    CHECK(error_kind("P2\n2 1\n255\n3") == PgmErrorKind::TruncatedPayload);
    CHECK(error_kind("P6\n1 1\n255\n\x00") == PgmErrorKind::MalformedHeader);
    CHECK(error_kind("P5\nx 1\n255\n\x00") == PgmErrorKind::MalformedHeader);
    CHECK(error_kind("P5\n0 1\n255\n") == PgmErrorKind::MalformedHeader);
    CHECK(error_kind("P5 1 1 255") == PgmErrorKind::MalformedHeader);
    CHECK(error_kind("P2\n1 1\n100\n101\n") == PgmErrorKind::InvalidPixel);
    CHECK(error_kind("") == PgmErrorKind::MalformedHeader);
}

TEST_CASE("read_pgm accepts comments and arbitrary whitespace in headers") {
    std::mt19937_64 rng(11);
    const char* separators[] = {" ", "\n", "\t", "\r\n", "  \n ", "\n# a comment\n", " #c\n\t"};
    std::uniform_int_distribution<int> pick(0, 6);
    std::uniform_int_distribution<int> dim(1, 9);
    for (int trial = 0; trial < 200; ++trial) {
        const int w = dim(rng), h = dim(rng);
        const auto img = oracle::random_image(rng, w, h, 200);
        const bool binary = trial % 2 == 0;
        std::string text = binary ? "P5" : "P2";
        auto sep = [&] { return std::string(separators[pick(rng)]); };
        text += sep() + std::to_string(w) + sep() + std::to_string(h) + sep() + "255";
        std::vector<std::uint8_t> bytes;
        if (binary) {
            text += (trial % 4 == 0) ? "\n" : " ";
            bytes = bytes_of(text);
            bytes.insert(bytes.end(), img.pixels().begin(), img.pixels().end());
        } else {
            for (auto v : img.pixels()) text += sep() + std::to_string(v);
            text += sep();
            bytes = bytes_of(text);
        }
        CHECK(read_pgm(bytes) == img);
    }
}

TEST_CASE("write_pgm emits canonical P5") {
    const auto bytes = write_pgm(GrayImage(1, 1, std::vector<std::uint8_t>{0}));
    auto expected = bytes_of("P5\n1 1\n255\n");
    expected.push_back(0);
    CHECK(bytes == expected);
}

TEST_CASE("write/read roundtrip is the identity") {
    std::mt19937_64 rng(3);
    const auto small = oracle::random_image(rng, 8, 8, 256);
    CHECK(read_pgm(write_pgm(small)) == small);
    CHECK(write_pgm(read_pgm(write_pgm(small))) == write_pgm(small));

    const auto large = oracle::random_image(rng, 4284, 2844, 256);
    const auto bytes = write_pgm(large);
    CHECK(read_pgm(bytes) == large);
}

TEST_CASE("plane/image conversion") {
    const BinaryPlane plane(2, 1, std::vector<std::uint8_t>{1, 0});
    const auto img = plane_to_image(plane);
    CHECK(img(0, 0) == 255);
    CHECK(img(0, 1) == 0);
    CHECK(image_to_plane(img) == plane);
    CHECK_THROWS_AS(image_to_plane(GrayImage(1, 1, std::vector<std::uint8_t>{128})), InvalidArgument);
}

TEST_CASE("raster and plane invariants") {
    CHECK_THROWS_AS(GrayImage(0, 3), InvalidArgument);
    CHECK_THROWS_AS(GrayImage(2, 2, std::vector<std::uint8_t>{1, 2, 3}), InvalidArgument);
    CHECK_THROWS_AS(BinaryPlane(1, 1, std::vector<std::uint8_t>{2}), InvalidArgument);
}

TEST_CASE("files are written atomically and read back") {
    const auto dir = std::filesystem::temp_directory_path() / "planestack_pgm_test";
    std::filesystem::create_directories(dir);
    std::mt19937_64 rng(5);
    const auto img = oracle::random_image(rng, 13, 7, 256);
    save_pgm(dir / "a.pgm", img);
    CHECK(load_pgm(dir / "a.pgm") == img);
    CHECK_FALSE(std::filesystem::exists(dir / "a.pgm.tmp"));
    CHECK_THROWS_AS(load_pgm(dir / "missing.pgm"), IoError);
    std::filesystem::remove_all(dir);
}
