#include "pgds/curation.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <numbers>
#include <unordered_map>
#include <unordered_set>

#include "pgds/common.hpp"

namespace pgds {

namespace {

constexpr std::size_t kHashSide = 32;
constexpr std::size_t kBlock = 8;

// Orthonormal DCT-II basis: basis[k][n] = c_k cos(pi (2n+1) k / 2N).
const std::array<std::array<double, kHashSide>, kHashSide>& dct_basis() {
    static const auto table = [] {
        std::array<std::array<double, kHashSide>, kHashSide> t{};
        const double n_total = static_cast<double>(kHashSide);
        for (std::size_t k = 0; k < kHashSide; ++k) {
            const double scale = k == 0 ? std::sqrt(1.0 / n_total) : std::sqrt(2.0 / n_total);
            for (std::size_t n = 0; n < kHashSide; ++n) {
                t[k][n] = scale * std::cos(std::numbers::pi * (2.0 * static_cast<double>(n) + 1.0) *
                                           static_cast<double>(k) / (2.0 * n_total));
            }
        }
        return t;
    }();
    return table;
}

}  // namespace

void CurationConfig::validate() const {
    if (!(dedup_similarity_threshold >= 0.0 && dedup_similarity_threshold <= 1.0)) {
        throw ValidationError("dedup similarity threshold must be in [0,1]");
    }
    if (!(watermark_area_threshold >= 0.0 && watermark_area_threshold <= 1.0)) {
        throw ValidationError("watermark area threshold must be in [0,1]");
    }
}

PerceptualHash compute_phash(const GrayImage& image) {
    if (image.empty()) throw ValidationError("compute_phash: zero-dimension image");
    GrayImage small = resize_bilinear(image, kHashSide, kHashSide);

    // Removing the mean only moves the DC term, which the hash ignores, and
    // makes every AC coefficient of a flat image exactly zero.
    double mean = 0.0;
    for (double v : small.pixels) mean += v;
    mean /= static_cast<double>(small.pixels.size());
    for (double& v : small.pixels) v -= mean;

    const auto& basis = dct_basis();
    // Only rows 0..7 and columns 0..8 of the transform are ever read.
    constexpr std::size_t kCols = kBlock + 1;
    std::array<std::array<double, kHashSide>, kBlock> rows{};  // rows[u][x] = sum_y basis[u][y] f(x,y)
    for (std::size_t u = 0; u < kBlock; ++u) {
        for (std::size_t x = 0; x < kHashSide; ++x) {
            double acc = 0.0;
            for (std::size_t y = 0; y < kHashSide; ++y) acc += basis[u][y] * small.at(x, y);
            rows[u][x] = acc;
        }
    }
    std::array<std::array<double, kCols>, kBlock> coeff{};  // coeff[row u][col v]
    for (std::size_t u = 0; u < kBlock; ++u) {
        for (std::size_t v = 0; v < kCols; ++v) {
            double acc = 0.0;
            for (std::size_t x = 0; x < kHashSide; ++x) acc += basis[v][x] * rows[u][x];
            coeff[u][v] = acc;
        }
    }

    std::array<double, kBlock * kBlock> values{};
    for (std::size_t u = 0; u < kBlock; ++u) {
        for (std::size_t v = 0; v < kBlock; ++v) values[u * kBlock + v] = coeff[u][v];
    }
    values[0] = coeff[0][kBlock];

    std::array<double, kBlock * kBlock> sorted = values;
    std::sort(sorted.begin(), sorted.end());
    const double median = 0.5 * (sorted[31] + sorted[32]);

    PerceptualHash hash;
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (values[i] > median) hash.bits |= std::uint64_t{1} << i;
    }
    return hash;
}

int hamming_distance(PerceptualHash a, PerceptualHash b) { return std::popcount(a.bits ^ b.bits); }

double hash_similarity(PerceptualHash a, PerceptualHash b) {
    return 1.0 - static_cast<double>(hamming_distance(a, b)) / 64.0;
}

DedupResult deduplicate(std::vector<std::pair<std::string, PerceptualHash>> hashes, const CurationConfig& cfg) {
    std::sort(hashes.begin(), hashes.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
    DedupResult result;
    std::vector<PerceptualHash> kept_hashes;
    for (const auto& [id, hash] : hashes) {
        std::size_t match = kept_hashes.size();
        for (std::size_t k = 0; k < kept_hashes.size(); ++k) {
            if (hash_similarity(hash, kept_hashes[k]) > cfg.dedup_similarity_threshold) {
                match = k;
                break;
            }
        }
        if (match == kept_hashes.size()) {
            result.kept.push_back(id);
            kept_hashes.push_back(hash);
        } else {
            result.removed.emplace_back(id, result.kept[match]);
        }
    }
    return result;
}

LowResResult filter_low_resolution(const std::vector<std::pair<std::string, std::optional<ImageSize>>>& sizes,
                                   const CurationConfig& cfg) {
    LowResResult result;
    for (const auto& [id, size] : sizes) {
        if (!size) {
            result.removed.push_back(id);
            result.unreadable.push_back(id);
        } else if (size->width < cfg.min_width || size->height < cfg.min_height) {
            result.removed.push_back(id);
        }
    }
    return result;
}

std::vector<std::string> filter_commercial(const std::vector<Sample>& samples, const CurationConfig& cfg,
                                           const CommercialPredicate& predicate) {
    std::vector<std::string> removed;
    for (const Sample& s : samples) {
        const auto area = s.extra_number("watermark_area");
        const bool over_area = area && *area > cfg.watermark_area_threshold;
        if (over_area || (predicate && predicate(s))) removed.push_back(s.id);
    }
    return removed;
}

std::vector<Json> CurationReport::to_records() const {
    std::vector<Json> out;
    const std::unordered_set<std::string> unreadable_set(unreadable.begin(), unreadable.end());
    for (const auto& id : kept) out.push_back({{"kind", "kept"}, {"id", id}});
    for (const auto& [id, kept_id] : removed_duplicates) {
        out.push_back({{"kind", "removed_duplicate"}, {"id", id}, {"kept_id", kept_id}});
    }
    for (const auto& id : removed_commercial) out.push_back({{"kind", "removed_commercial"}, {"id", id}});
    for (const auto& id : removed_low_res) {
        out.push_back({{"kind", "removed_low_res"}, {"id", id}, {"unreadable", unreadable_set.contains(id)}});
    }
    return out;
}

CurationOutcome curate(const DatasetSplit& split, const CurationConfig& cfg, const std::filesystem::path& image_root,
                       const CommercialPredicate& predicate) {
    cfg.validate();
    CurationOutcome outcome;
    CurationReport& report = outcome.report;

    // Decode once: hash and size come from the same pixels.
    std::vector<std::pair<std::string, PerceptualHash>> hashes;
    std::unordered_map<std::string, ImageSize> sizes;
    for (const Sample& s : split.samples) {
        if (!s.image_path) {
            report.removed_low_res.push_back(s.id);
            report.unreadable.push_back(s.id);
            continue;
        }
        try {
            const GrayImage img = read_image(image_root / *s.image_path);
            hashes.emplace_back(s.id, compute_phash(img));
            sizes.emplace(s.id, ImageSize{img.width, img.height});
        } catch (const std::exception&) {
            report.removed_low_res.push_back(s.id);
            report.unreadable.push_back(s.id);
        }
    }

    DedupResult dedup = deduplicate(std::move(hashes), cfg);
    report.removed_duplicates = dedup.removed;
    const std::unordered_set<std::string> after_dedup(dedup.kept.begin(), dedup.kept.end());

    std::vector<Sample> stage;
    for (const Sample& s : split.samples) {
        if (after_dedup.contains(s.id)) stage.push_back(s);
    }
    report.removed_commercial = filter_commercial(stage, cfg, predicate);
    const std::unordered_set<std::string> commercial(report.removed_commercial.begin(), report.removed_commercial.end());

    std::vector<std::pair<std::string, std::optional<ImageSize>>> size_list;
    for (const Sample& s : stage) {
        if (!commercial.contains(s.id)) size_list.emplace_back(s.id, sizes.at(s.id));
    }
    LowResResult low_res = filter_low_resolution(size_list, cfg);
    report.removed_low_res.insert(report.removed_low_res.end(), low_res.removed.begin(), low_res.removed.end());
    const std::unordered_set<std::string> low_set(low_res.removed.begin(), low_res.removed.end());

    outcome.kept.name = split.name;
    for (const Sample& s : stage) {
        if (commercial.contains(s.id) || low_set.contains(s.id)) continue;
        report.kept.push_back(s.id);
        outcome.kept.samples.push_back(s);
    }
    return outcome;
}

}  // namespace pgds
