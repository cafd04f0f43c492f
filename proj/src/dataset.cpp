#include "gsemtmo/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "gsemtmo/errors.hpp"

namespace gsemtmo {

nlohmann::json DatasetManifest::to_json() const {
    nlohmann::json j;
    j["entries"] = nlohmann::json::array();
    for (const auto& e : entries) {
        nlohmann::json ej;
        ej["id"] = e.id;
        ej["linear"] = e.linear_path;
        ej["seg"] = e.seg_path;
        ej["ref"] = e.ref_path;
        ej["split"] = e.split;
        ej["report"]["saturation_fraction"] = e.report.saturation_fraction;
        ej["report"]["dynamic_range"] = e.report.dynamic_range;
        ej["report"]["segment_count"] = e.report.segment_count;
        if (e.report.c_ml) ej["report"]["c_ml"] = *e.report.c_ml;
        j["entries"].push_back(ej);
    }
    j["rejected"] = nlohmann::json::array();
    for (const auto& r : rejected) j["rejected"].push_back({{"id", r.id}, {"reason", r.reason}});
    return j;
}

DatasetManifest DatasetManifest::from_json(const nlohmann::json& j) {
    DatasetManifest m;
    for (const auto& ej : j.at("entries")) {
        ManifestEntry e;
        e.id = ej.at("id").get<std::string>();
        e.linear_path = ej.at("linear").get<std::string>();
        e.seg_path = ej.at("seg").get<std::string>();
        e.ref_path = ej.at("ref").get<std::string>();
        e.split = ej.at("split").get<std::string>();
        const auto& rj = ej.at("report");
        e.report.saturation_fraction = rj.at("saturation_fraction").get<double>();
        e.report.dynamic_range = rj.at("dynamic_range").get<double>();
        e.report.segment_count = rj.at("segment_count").get<int>();
        if (rj.contains("c_ml")) e.report.c_ml = rj.at("c_ml").get<double>();
        m.entries.push_back(std::move(e));
    }
    if (j.contains("rejected"))
        for (const auto& rj : j.at("rejected"))
            m.rejected.push_back({rj.at("id").get<std::string>(),
                                  rj.at("reason").get<std::string>()});
    return m;
}

void DatasetManifest::save(const std::filesystem::path& path) const {
    std::ofstream os(path);
    if (!os) throw ValidationError("manifest: cannot write " + path.string());
    os << to_json().dump(2) << "\n";
}

DatasetManifest DatasetManifest::load(const std::filesystem::path& path) {
    std::ifstream is(path);
    if (!is) throw ValidationError("manifest: cannot read " + path.string());
    nlohmann::json j;
    try {
        is >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError("manifest: " + path.string() + " is not valid JSON: " + e.what());
    }
    return from_json(j);
}

double saturation_fraction(const ImageF& img, double cutoff) {
    if (cutoff <= 0.0 || cutoff >= 1.0)
        throw ValidationError("saturation_fraction: cutoff must be in (0,1)");
    if (img.pixel_count() == 0) throw ValidationError("saturation_fraction: empty image");
    std::size_t saturated = 0;
    for (std::size_t p = 0; p < img.pixel_count(); ++p) {
        const std::size_t base = p * img.channels;
        for (int c = 0; c < img.channels; ++c) {
            if (img.data[base + c] > cutoff) {
                ++saturated;
                break;
            }
        }
    }
    return static_cast<double>(saturated) / static_cast<double>(img.pixel_count());
}

double percentile(std::vector<double> values, double q) {
    if (values.empty()) throw ValidationError("percentile: empty input");
    std::sort(values.begin(), values.end());
    const double pos = q / 100.0 * static_cast<double>(values.size() - 1);
    const std::size_t lo = static_cast<std::size_t>(pos);
    const std::size_t hi = std::min(lo + 1, values.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    return values[lo] * (1.0 - frac) + values[hi] * frac;
}

double dynamic_range(const ImageF& img) {
    if (img.pixel_count() == 0) throw ValidationError("dynamic_range: empty image");
    std::vector<double> luma;
    luma.reserve(img.pixel_count());
    bool any_positive = false;
    for (std::size_t p = 0; p < img.pixel_count(); ++p) {
        const std::size_t base = p * img.channels;
        const double y = luma709(img.data[base], img.data[base + 1], img.data[base + 2]);
        if (y > 0.0) any_positive = true;
        luma.push_back(y);
    }
    if (!any_positive)
        throw ValidationError("dynamic_range: all-zero image has undefined range");
    constexpr double kFloor = 1.0 / 65535.0;
    const double p99 = percentile(luma, 99.0);
    const double p1 = std::max(percentile(luma, 1.0), kFloor);
    return std::log10(std::max(p99, kFloor) / p1);
}

bool segment_count_filter(const SegMap& seg, int min_labels) {
    if (seg.size() == 0) throw ValidationError("segment_count_filter: empty map");
    std::set<std::uint8_t> labels(seg.labels.begin(), seg.labels.end());
    return static_cast<int>(labels.size()) >= min_labels;
}

ResizedTriple resize_pair(const ImageF& img, const SegMap& seg, const ImageF& ref,
                          int out_w, int out_h) {
    if (img.width != ref.width || img.height != ref.height)
        throw ValidationError("resize_pair: linear " + std::to_string(img.width) + "x" +
                              std::to_string(img.height) + " vs reference " +
                              std::to_string(ref.width) + "x" + std::to_string(ref.height));
    ResizedTriple out;
    out.linear = resize_bilinear(img, out_w, out_h);
    out.ref = resize_bilinear(ref, out_w, out_h);
    out.seg = resize_nearest(seg, out_w, out_h);
    return out;
}

LabelMergeTable::LabelMergeTable() {
    to_coarse.fill(kLabelOthers);
    mapped.fill(false);
}

LabelMergeTable LabelMergeTable::load(const std::filesystem::path& path) {
    std::ifstream is(path);
    if (!is) throw ValidationError("label map: cannot read " + path.string());
    LabelMergeTable table;
    std::string line;
    int lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.resize(hash);
        std::istringstream ss(line);
        int fine, coarse;
        if (!(ss >> fine)) continue;  // blank / comment-only line
        if (!(ss >> coarse) || fine < 0 || fine > 255 || coarse < 0 ||
            coarse >= kCoarseLabelCount)
            throw ValidationError("label map: bad entry at " + path.string() + ":" +
                                  std::to_string(lineno));
        table.to_coarse[fine] = static_cast<std::uint8_t>(coarse);
        table.mapped[fine] = true;
    }
    return table;
}

SegMap merge_labels(const SegMap& fine, const LabelMergeTable& table,
                    std::size_t* unmapped_pixels) {
    SegMap out(fine.width, fine.height);
    std::size_t unmapped = 0;
    for (std::size_t p = 0; p < fine.size(); ++p) {
        const std::uint8_t f = fine.labels[p];
        out.labels[p] = table.to_coarse[f];
        if (!table.mapped[f]) ++unmapped;
    }
    if (unmapped_pixels) *unmapped_pixels = unmapped;
    return out;
}

}  // namespace gsemtmo
