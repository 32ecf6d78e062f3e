#include "planestack/dataset.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <sstream>

#include "planestack/pgm.hpp"
#include "planestack/random.hpp"

namespace planestack {

namespace {

constexpr std::uint64_t kSplitStream = 0x73706c6974;    // "split"
constexpr std::uint64_t kSampleStream = 0x73616d706c65;  // "sample"

void check_patch_geometry(int target, int side) {
    if (target < 2 || target > kMaxDepth) {
        throw InvalidArgument("target bitplane must be in 2..8, got " + std::to_string(target));
    }
    if (side < 1 || side % 2 == 0) {
        throw InvalidArgument("patch side must be odd and positive, got " + std::to_string(side));
    }
}

bool has_whitespace(const std::string& s) {
    return std::any_of(s.begin(), s.end(), [](unsigned char c) { return std::isspace(c); });
}

}  // namespace

std::vector<std::string> CorpusManifest::select(Split split) const {
    std::vector<std::string> out;
    for (std::size_t i = 0; i < paths.size(); ++i) {
        if (holdout[i] == (split == Split::Holdout)) out.push_back(paths[i]);
    }
    return out;
}

CorpusManifest make_manifest(std::vector<std::string> paths, std::uint64_t seed,
                             double holdout_fraction) {
    if (!(holdout_fraction >= 0.0 && holdout_fraction < 1.0)) {
        throw InvalidArgument("holdout fraction must be in [0, 1)");
    }
    std::sort(paths.begin(), paths.end());
    if (std::adjacent_find(paths.begin(), paths.end()) != paths.end()) {
        throw InvalidArgument("corpus lists the same path twice");
    }
    const std::size_t n = paths.size();
    std::size_t held = 0;
    if (n >= 2 && holdout_fraction > 0.0) {
        held = static_cast<std::size_t>(std::llround(holdout_fraction * static_cast<double>(n)));
        held = std::clamp<std::size_t>(held, 1, n - 1);
    }
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    Rng rng(derive_stream(seed, kSplitStream));
    deterministic_shuffle(order, rng);

    CorpusManifest m{std::move(paths), seed, std::vector<bool>(n, false)};
    for (std::size_t i = 0; i < held; ++i) m.holdout[order[i]] = true;
    return m;
}

CorpusManifest scan_corpus(const std::filesystem::path& dir, std::uint64_t seed,
                           double holdout_fraction) {
    std::error_code ec;
    if (!std::filesystem::is_directory(dir, ec)) {
        throw IoError("corpus directory not found: " + dir.string());
    }
    std::vector<std::string> paths;
    for (const auto& entry : std::filesystem::directory_iterator(dir)) {
        if (entry.is_regular_file() && entry.path().extension() == ".pgm") {
            paths.push_back(entry.path().string());
        }
    }
    if (paths.empty()) throw InvalidArgument("corpus is empty: no .pgm files in " + dir.string());
    return make_manifest(std::move(paths), seed, holdout_fraction);
}

std::string format_manifest(const CorpusManifest& manifest) {
    std::ostringstream out;
    out << "seed " << manifest.seed << "\n";
    out << "holdout";
    for (std::size_t i = 0; i < manifest.paths.size(); ++i) {
        if (has_whitespace(manifest.paths[i])) {
            throw InvalidArgument("manifest paths may not contain whitespace: " + manifest.paths[i]);
        }
        if (manifest.holdout[i]) out << ' ' << manifest.paths[i];
    }
    out << "\n";
    for (const auto& p : manifest.paths) out << p << "\n";
    return out.str();
}

CorpusManifest parse_manifest(std::string_view text) {
    std::istringstream in{std::string(text)};
    std::string line;
    CorpusManifest m;
    bool have_seed = false;
    bool have_holdout = false;
    std::vector<std::string> held;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::istringstream fields(line);
        std::string head;
        fields >> head;
        if (head == "seed" && !have_seed) {
            if (!(fields >> m.seed)) throw FormatError("manifest: bad seed line");
            have_seed = true;
        } else if (head == "holdout" && !have_holdout) {
            for (std::string p; fields >> p;) held.push_back(p);
            have_holdout = true;
        } else {
            m.paths.push_back(line);
        }
    }
    if (!have_seed || !have_holdout) throw FormatError("manifest: missing seed or holdout header");
    if (!std::is_sorted(m.paths.begin(), m.paths.end())) {
        throw FormatError("manifest: paths must be sorted lexicographically");
    }
    m.holdout.assign(m.paths.size(), false);
    for (const auto& h : held) {
        auto it = std::lower_bound(m.paths.begin(), m.paths.end(), h);
        if (it == m.paths.end() || *it != h) {
            throw FormatError("manifest: held-out path not listed: " + h);
        }
        m.holdout[static_cast<std::size_t>(it - m.paths.begin())] = true;
    }
    return m;
}

PatchBatch::PatchBatch(int target, int side) : target_(target), side_(side) {
    check_patch_geometry(target, side);
}

void PatchBatch::reserve(std::size_t n) {
    features_.reserve(n * features_per_sample());
    labels_.reserve(n);
    origins_.reserve(n);
}

void PatchBatch::add(std::span<const std::uint8_t> features, std::uint8_t label,
                     PatchOrigin origin) {
    if (features.size() != features_per_sample()) {
        throw InvalidArgument("patch has " + std::to_string(features.size()) +
                              " features, expected " + std::to_string(features_per_sample()));
    }
    if (label > 1) throw InvalidArgument("patch label must be 0 or 1");
    features_.insert(features_.end(), features.begin(), features.end());
    labels_.push_back(label);
    origins_.push_back(origin);
}

PatchBatch PatchBatch::reordered(std::span<const std::size_t> order) const {
    PatchBatch out(target_, side_);
    out.reserve(order.size());
    for (auto i : order) out.add(features(i), label(i), origin(i));
    return out;
}

void extract_patch(const BitplaneStack& stack, int target, int side, int row, int col,
                   std::vector<std::uint8_t>& out) {
    const int half = side / 2;
    out.clear();
    for (int k = 1; k < target; ++k) {
        const auto& plane = stack.plane(k);
        for (int r = row - half; r <= row + half; ++r) {
            auto span = plane.row(r).subspan(static_cast<std::size_t>(col - half), side);
            out.insert(out.end(), span.begin(), span.end());
        }
    }
}

PatchBatch sample_batch(std::span<const BitplaneStack> stacks, int target, int side,
                        std::size_t count, std::uint64_t seed) {
    check_patch_geometry(target, side);
    PatchBatch batch(target, side);
    if (count == 0) return batch;
    if (stacks.empty()) throw InvalidArgument("cannot sample patches from an empty corpus");

    std::vector<std::uint64_t> cumulative;
    std::uint64_t total = 0;
    for (const auto& s : stacks) {
        if (s.depth() < target) {
            throw InvalidArgument("target bitplane " + std::to_string(target) +
                                  " exceeds stack depth " + std::to_string(s.depth()));
        }
        if (s.width() < side || s.height() < side) {
            throw InvalidArgument("image " + std::to_string(s.width()) + "x" +
                                  std::to_string(s.height()) + " is smaller than patch side " +
                                  std::to_string(side));
        }
        total += static_cast<std::uint64_t>(s.width() - side + 1) * (s.height() - side + 1);
        cumulative.push_back(total);
    }

    const int half = side / 2;
    Rng rng(derive_stream(seed, kSampleStream));
    batch.reserve(count);
    std::vector<std::uint8_t> patch;
    for (std::size_t m = 0; m < count; ++m) {
        const auto g = uniform_below(rng, total);
        const auto img = static_cast<std::size_t>(
            std::upper_bound(cumulative.begin(), cumulative.end(), g) - cumulative.begin());
        const auto local = g - (img == 0 ? 0 : cumulative[img - 1]);
        const auto& stack = stacks[img];
        const auto valid_w = static_cast<std::uint64_t>(stack.width() - side + 1);
        const int row = static_cast<int>(local / valid_w) + half;
        const int col = static_cast<int>(local % valid_w) + half;
        extract_patch(stack, target, side, row, col, patch);
        batch.add(patch, stack.plane(target)(row, col),
                  PatchOrigin{static_cast<std::uint32_t>(img), row, col});
    }
    return batch;
}

std::vector<BitplaneStack> load_stacks(const CorpusManifest& manifest, Split split) {
    std::vector<BitplaneStack> stacks;
    for (const auto& path : manifest.select(split)) {
        stacks.push_back(decompose_image(load_pgm(path), kMaxDepth));
    }
    return stacks;
}

PatchBatch sample_batch(const CorpusManifest& manifest, Split split, int target, int side,
                        std::size_t count, std::uint64_t seed) {
    const auto stacks = load_stacks(manifest, split);
    if (stacks.empty() && count > 0) {
        throw InvalidArgument(split == Split::Holdout ? "held-out split is empty"
                                                      : "training split is empty");
    }
    return sample_batch(stacks, target, side, count, seed);
}

}  // namespace planestack
