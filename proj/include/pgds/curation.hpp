#pragma once
// Dataset purification: perceptual-hash deduplication, commercial-content
// filtering over precomputed metadata, and low-resolution filtering.

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "pgds/core_data.hpp"
#include "pgds/image.hpp"

namespace pgds {

struct PerceptualHash {
    std::uint64_t bits = 0;
    bool operator==(const PerceptualHash&) const = default;
};

struct CurationConfig {
    double dedup_similarity_threshold = 0.90;
    std::size_t min_width = 512;
    std::size_t min_height = 512;
    double watermark_area_threshold = 0.15;

    void validate() const;
};

// 32x32 bilinear resize, orthonormal 2-D DCT-II, then the top-left 8x8 block
// in row-major order with the DC term swapped for coefficient (row 0, col 8).
// Bit i is set iff value i is strictly above the median of the 64 values.
PerceptualHash compute_phash(const GrayImage& image);

int hamming_distance(PerceptualHash a, PerceptualHash b);

// 1 - hamming/64.
double hash_similarity(PerceptualHash a, PerceptualHash b);

struct DedupResult {
    std::vector<std::string> kept;
    std::vector<std::pair<std::string, std::string>> removed;  // (removed_id, kept_id)
};

// Greedy scan in ascending id order. A sample is dropped when its similarity
// to an already kept sample is strictly above the threshold; it is reported
// against the first such kept sample.
DedupResult deduplicate(std::vector<std::pair<std::string, PerceptualHash>> hashes, const CurationConfig& cfg);

struct ImageSize {
    std::size_t width = 0;
    std::size_t height = 0;
};

struct LowResResult {
    std::vector<std::string> removed;
    std::vector<std::string> unreadable;  // subset of removed
};

// nullopt size means the image could not be read.
LowResResult filter_low_resolution(const std::vector<std::pair<std::string, std::optional<ImageSize>>>& sizes,
                                   const CurationConfig& cfg);

// External logo/watermark verdict for a sample.
using CommercialPredicate = std::function<bool(const Sample&)>;

std::vector<std::string> filter_commercial(const std::vector<Sample>& samples, const CurationConfig& cfg,
                                           const CommercialPredicate& predicate = {});

struct CurationReport {
    std::vector<std::string> kept;
    std::vector<std::pair<std::string, std::string>> removed_duplicates;
    std::vector<std::string> removed_low_res;
    std::vector<std::string> unreadable;  // subset of removed_low_res
    std::vector<std::string> removed_commercial;

    std::vector<Json> to_records() const;
};

struct CurationOutcome {
    DatasetSplit kept;
    CurationReport report;
};

// Full pipeline in the order dedup -> commercial -> resolution. Image paths
// resolve against image_root. Samples whose image is missing or undecodable
// land in removed_low_res and are flagged unreadable.
CurationOutcome curate(const DatasetSplit& split, const CurationConfig& cfg, const std::filesystem::path& image_root,
                       const CommercialPredicate& predicate = {});

}  // namespace pgds
