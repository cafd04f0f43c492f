#pragma once

#include <array>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "gsemtmo/image.hpp"

namespace gsemtmo {

// Per-image filter measurements recorded in the manifest.
struct FilterReport {
    double saturation_fraction = 0.0;
    double dynamic_range = 0.0;
    int segment_count = 0;
    std::optional<double> c_ml;  // filled by contrast selection
};

struct ManifestEntry {
    std::string id;
    std::string linear_path;
    std::string seg_path;
    std::string ref_path;
    std::string split = "train";
    FilterReport report;
};

struct RejectedEntry {
    std::string id;
    std::string reason;
};

struct DatasetManifest {
    std::vector<ManifestEntry> entries;
    std::vector<RejectedEntry> rejected;

    nlohmann::json to_json() const;
    static DatasetManifest from_json(const nlohmann::json& j);
    void save(const std::filesystem::path& path) const;
    static DatasetManifest load(const std::filesystem::path& path);
};

// Fraction of pixels whose R, G or B exceeds cutoff.
double saturation_fraction(const ImageF& img, double cutoff);

// log10(P99/P1) of Rec.709 linear luminance. P1 is floored at 1/65535;
// throws on an all-zero image.
double dynamic_range(const ImageF& img);

// True iff the map holds at least min_labels distinct labels.
bool segment_count_filter(const SegMap& seg, int min_labels);

// Percentile by linear interpolation between order statistics, q in [0,100].
double percentile(std::vector<double> values, double q);

struct ResizedTriple {
    ImageF linear;
    SegMap seg;
    ImageF ref;
};

// Bilinear for both images, nearest-neighbor for labels. The segmentation
// may arrive at a different (full) resolution; linear and reference must
// agree with each other.
ResizedTriple resize_pair(const ImageF& img, const SegMap& seg, const ImageF& ref,
                          int out_w, int out_h);

// Fine (ADE20K, 0..149) to coarse (0..8) label table, loaded from a text
// file of "fine_index coarse_index" lines ('#' comments). Unlisted fine
// labels fall back to "others".
struct LabelMergeTable {
    std::array<std::uint8_t, 256> to_coarse;
    std::array<bool, 256> mapped;

    LabelMergeTable();
    static LabelMergeTable load(const std::filesystem::path& path);
};

// Applies the table; unmapped labels become "others" and are counted in
// *unmapped_pixels when provided.
SegMap merge_labels(const SegMap& fine, const LabelMergeTable& table,
                    std::size_t* unmapped_pixels = nullptr);

}  // namespace gsemtmo
