#include "planestack/pgm.hpp"

#include <cctype>
#include <fstream>
#include <limits>

namespace planestack {

namespace {

class HeaderReader {
public:
    explicit HeaderReader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

    // Skips whitespace and '#' comments that run to end of line.
    void skip_separators() {
        while (pos_ < bytes_.size()) {
            const auto c = bytes_[pos_];
            if (c == '#') {
                while (pos_ < bytes_.size() && bytes_[pos_] != '\n' && bytes_[pos_] != '\r') ++pos_;
            } else if (std::isspace(c)) {
                ++pos_;
            } else {
                break;
            }
        }
    }

    long read_uint(const char* field) {
        skip_separators();
        if (pos_ >= bytes_.size() || !std::isdigit(bytes_[pos_])) {
            throw PgmError(PgmErrorKind::MalformedHeader,
                           std::string("pgm: expected unsigned integer for ") + field);
        }
        long v = 0;
        while (pos_ < bytes_.size() && std::isdigit(bytes_[pos_])) {
            v = v * 10 + (bytes_[pos_] - '0');
            if (v > std::numeric_limits<int>::max()) {
                throw PgmError(PgmErrorKind::MalformedHeader,
                               std::string("pgm: value too large for ") + field);
            }
            ++pos_;
        }
        return v;
    }

    bool at_end() const { return pos_ >= bytes_.size(); }
    std::uint8_t peek() const { return bytes_[pos_]; }
    void advance() { ++pos_; }
    std::size_t pos() const { return pos_; }

private:
    std::span<const std::uint8_t> bytes_;
    std::size_t pos_ = 0;
};

}  // namespace

GrayImage read_pgm(std::span<const std::uint8_t> bytes) {
    if (bytes.size() < 2 || bytes[0] != 'P' || (bytes[1] != '5' && bytes[1] != '2')) {
        throw PgmError(PgmErrorKind::MalformedHeader, "pgm: missing P2/P5 magic");
    }
    const bool binary = bytes[1] == '5';
    HeaderReader in(bytes.subspan(2));
    if (!in.at_end() && !std::isspace(in.peek()) && in.peek() != '#') {
        throw PgmError(PgmErrorKind::MalformedHeader, "pgm: bad magic");
    }
    const long width = in.read_uint("width");
    const long height = in.read_uint("height");
    const long maxval = in.read_uint("maxval");
    if (width < 1 || height < 1) {
        throw PgmError(PgmErrorKind::MalformedHeader, "pgm: dimensions must be positive");
    }
    if (maxval < 1 || maxval > 255) {
        throw PgmError(PgmErrorKind::UnsupportedMaxval,
                       "pgm: unsupported maxval " + std::to_string(maxval));
    }
    const std::size_t n = static_cast<std::size_t>(width) * static_cast<std::size_t>(height);
    std::vector<std::uint8_t> data;
    data.reserve(n);

    if (binary) {
        // Exactly one whitespace byte separates maxval from the raster.
        if (in.at_end() || !std::isspace(in.peek())) {
            throw PgmError(PgmErrorKind::MalformedHeader, "pgm: missing separator after maxval");
        }
        in.advance();
        const std::size_t offset = 2 + in.pos();
        if (bytes.size() - offset < n) {
            throw PgmError(PgmErrorKind::TruncatedPayload,
                           "pgm: payload has " + std::to_string(bytes.size() - offset) +
                               " bytes, expected " + std::to_string(n));
        }
        for (std::size_t i = 0; i < n; ++i) {
            const auto v = bytes[offset + i];
            if (v > maxval) {
                throw PgmError(PgmErrorKind::InvalidPixel, "pgm: sample exceeds maxval");
            }
            data.push_back(v);
        }
    } else {
        for (std::size_t i = 0; i < n; ++i) {
            in.skip_separators();
            if (in.at_end()) {
                throw PgmError(PgmErrorKind::TruncatedPayload,
                               "pgm: ascii payload ended after " + std::to_string(i) + " samples");
            }
            const long v = in.read_uint("sample");
            if (v > maxval) {
                throw PgmError(PgmErrorKind::InvalidPixel, "pgm: sample exceeds maxval");
            }
            data.push_back(static_cast<std::uint8_t>(v));
        }
    }
    return GrayImage(static_cast<int>(width), static_cast<int>(height), std::move(data));
}

std::vector<std::uint8_t> write_pgm(const GrayImage& img) {
    const std::string header = "P5\n" + std::to_string(img.width()) + " " +
                               std::to_string(img.height()) + "\n255\n";
    std::vector<std::uint8_t> out(header.begin(), header.end());
    out.insert(out.end(), img.pixels().begin(), img.pixels().end());
    return out;
}

GrayImage plane_to_image(const BinaryPlane& plane) {
    std::vector<std::uint8_t> px(plane.size());
    auto bits = plane.pixels();
    for (std::size_t i = 0; i < px.size(); ++i) px[i] = bits[i] ? 255 : 0;
    return GrayImage(plane.width(), plane.height(), std::move(px));
}

BinaryPlane image_to_plane(const GrayImage& img) {
    std::vector<std::uint8_t> bits(img.size());
    auto px = img.pixels();
    for (std::size_t i = 0; i < bits.size(); ++i) {
        if (px[i] == 255) {
            bits[i] = 1;
        } else if (px[i] != 0) {
            throw InvalidArgument("image_to_plane: intensity " + std::to_string(px[i]) +
                                  " at index " + std::to_string(i) + " is not 0 or 255");
        }
    }
    return BinaryPlane(img.width(), img.height(), std::move(bits));
}

std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot open " + path.string());
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(f)),
                                    std::istreambuf_iterator<char>());
    if (f.bad()) throw IoError("error reading " + path.string());
    return bytes;
}

void write_file_atomic(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
        if (!f) throw IoError("cannot open " + tmp.string() + " for writing");
        f.write(reinterpret_cast<const char*>(bytes.data()),
                static_cast<std::streamsize>(bytes.size()));
        f.flush();
        if (!f) throw IoError("error writing " + tmp.string());
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) {
        std::filesystem::remove(tmp, ec);
        throw IoError("cannot move output into place at " + path.string());
    }
}

void write_file_atomic(const std::filesystem::path& path, const std::string& text) {
    write_file_atomic(path, std::span(reinterpret_cast<const std::uint8_t*>(text.data()),
                                      text.size()));
}

GrayImage load_pgm(const std::filesystem::path& path) {
    const auto bytes = read_file(path);
    try {
        return read_pgm(bytes);
    } catch (const PgmError& e) {
        throw PgmError(e.kind(), path.string() + ": " + e.what());
    }
}

void save_pgm(const std::filesystem::path& path, const GrayImage& img) {
    write_file_atomic(path, write_pgm(img));
}

}  // namespace planestack
