// gsemtmo: command-line surface for the semantic tone-mapping pipeline.
// Subcommands: prepare, graph, train, infer, blend, eval, tonecurve,
// contrast-select. Exit code 0 on success, 1 on input/validation errors,
// 2 on runtime failures.

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <map>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "gsemtmo/blending.hpp"
#include "gsemtmo/dataset.hpp"
#include "gsemtmo/errors.hpp"
#include "gsemtmo/gcn.hpp"
#include "gsemtmo/graph.hpp"
#include "gsemtmo/imageio.hpp"
#include "gsemtmo/metrics.hpp"
#include "gsemtmo/parallel.hpp"
#include "gsemtmo/plot.hpp"
#include "gsemtmo/rng.hpp"
#include "gsemtmo/tonemap.hpp"
#include "gsemtmo/trainer.hpp"

namespace fs = std::filesystem;
using namespace gsemtmo;

namespace {

const std::vector<std::string> kImageExtensions = {".png", ".tif", ".tiff", ".PNG", ".TIF",
                                                   ".TIFF"};

std::optional<fs::path> find_by_stem(const fs::path& dir, const std::string& stem) {
    for (const auto& ext : kImageExtensions) {
        fs::path candidate = dir / (stem + ext);
        if (fs::exists(candidate)) return candidate;
    }
    return std::nullopt;
}

std::vector<fs::path> list_images(const fs::path& dir) {
    if (!fs::is_directory(dir))
        throw ValidationError("not a directory: " + dir.string());
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(dir)) {
        if (!entry.is_regular_file()) continue;
        const std::string ext = entry.path().extension().string();
        if (std::find(kImageExtensions.begin(), kImageExtensions.end(), ext) !=
            kImageExtensions.end())
            files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());
    return files;
}

std::pair<int, int> parse_size(const std::string& text) {
    const auto x = text.find('x');
    if (x == std::string::npos)
        throw ValidationError("size must look like 100x100, got: " + text);
    return {std::stoi(text.substr(0, x)), std::stoi(text.substr(x + 1))};
}

SegMap load_coarse_seg(const fs::path& path, const std::optional<fs::path>& label_map) {
    SegMap seg = load_segmentation(path);
    if (label_map) {
        const LabelMergeTable table = LabelMergeTable::load(*label_map);
        std::size_t unmapped = 0;
        seg = merge_labels(seg, table, &unmapped);
        if (unmapped > 0)
            std::cerr << "warning: " << path.filename().string() << ": " << unmapped
                      << " pixels with unmapped fine labels became 'others'\n";
    }
    for (std::uint8_t l : seg.labels)
        if (l >= kCoarseLabelCount)
            throw ValidationError(path.string() + ": label " + std::to_string(l) +
                                  " outside coarse range; pass --label-map for fine labels");
    return seg;
}

// ---------------------------------------------------------------- prepare

struct PrepareArgs {
    std::string input_dir, seg_dir, ref_dir, out_dir;
    std::string resize = "100x100";
    std::string label_map;
    double saturation_threshold = 0.03;
    double saturation_cutoff = 0.99;
    double min_dynamic_range = -1.0;  // disabled unless >= 0
    int min_segments = 0;             // disabled unless > 0
    int val_count = 0;
    int test_count = 0;
    std::uint64_t seed = 0;
    int threads = default_thread_count();
};

int run_prepare(const PrepareArgs& args) {
    const auto [out_w, out_h] = parse_size(args.resize);
    const std::optional<fs::path> label_map =
        args.label_map.empty() ? std::nullopt : std::make_optional<fs::path>(args.label_map);

    const auto inputs = list_images(args.input_dir);
    if (inputs.empty()) throw ValidationError("no images found in " + args.input_dir);

    fs::create_directories(fs::path(args.out_dir) / "linear");
    fs::create_directories(fs::path(args.out_dir) / "seg");
    fs::create_directories(fs::path(args.out_dir) / "ref");

    struct Slot {
        bool ok = false;
        bool skipped = false;
        ManifestEntry entry;
        std::string reject_reason;
        std::string id;
    };
    std::vector<Slot> slots(inputs.size());
    std::mutex log_mutex;

    parallel_for(0, static_cast<int>(inputs.size()), args.threads, [&](int i) {
        Slot& slot = slots[i];
        const std::string stem = inputs[i].stem().string();
        slot.id = stem;
        try {
            const auto seg_path = find_by_stem(args.seg_dir, stem);
            const auto ref_path = find_by_stem(args.ref_dir, stem);
            if (!seg_path || !ref_path) {
                std::lock_guard<std::mutex> lock(log_mutex);
                std::cerr << "warning: skipping " << stem << ": missing "
                          << (!seg_path ? "segmentation" : "reference") << " file\n";
                slot.skipped = true;
                return;
            }

            const ImageF linear = load_linear_image(inputs[i]);
            const ImageF ref = load_display_image(*ref_path);
            const SegMap seg = load_coarse_seg(*seg_path, label_map);

            FilterReport report;
            report.saturation_fraction = saturation_fraction(linear, args.saturation_cutoff);
            report.dynamic_range = dynamic_range(linear);
            std::set<std::uint8_t> labels(seg.labels.begin(), seg.labels.end());
            report.segment_count = static_cast<int>(labels.size());

            if (report.saturation_fraction > args.saturation_threshold) {
                slot.reject_reason = "saturation fraction " +
                                     std::to_string(report.saturation_fraction) +
                                     " above threshold " +
                                     std::to_string(args.saturation_threshold);
                slot.entry.report = report;
                return;
            }
            if (args.min_dynamic_range >= 0.0 &&
                report.dynamic_range < args.min_dynamic_range) {
                slot.reject_reason = "dynamic range " + std::to_string(report.dynamic_range) +
                                     " below threshold " +
                                     std::to_string(args.min_dynamic_range);
                slot.entry.report = report;
                return;
            }
            if (args.min_segments > 0 && report.segment_count < args.min_segments) {
                slot.reject_reason = "only " + std::to_string(report.segment_count) +
                                     " segments, need " + std::to_string(args.min_segments);
                slot.entry.report = report;
                return;
            }

            const ResizedTriple resized = resize_pair(linear, seg, ref, out_w, out_h);
            const fs::path lin_out = fs::path(args.out_dir) / "linear" / (stem + ".png");
            const fs::path seg_out = fs::path(args.out_dir) / "seg" / (stem + ".png");
            const fs::path ref_out = fs::path(args.out_dir) / "ref" / (stem + ".png");
            save_png16(lin_out, resized.linear);
            save_gray8(seg_out, resized.seg);
            save_png16(ref_out, resized.ref);

            slot.entry.id = stem;
            slot.entry.linear_path = lin_out.string();
            slot.entry.seg_path = seg_out.string();
            slot.entry.ref_path = ref_out.string();
            slot.entry.report = report;
            slot.ok = true;
        } catch (const std::exception& e) {
            std::lock_guard<std::mutex> lock(log_mutex);
            std::cerr << "warning: skipping " << stem << ": " << e.what() << "\n";
            slot.skipped = true;
        }
    });

    DatasetManifest manifest;
    for (const Slot& slot : slots) {
        if (slot.ok)
            manifest.entries.push_back(slot.entry);
        else if (!slot.skipped)
            manifest.rejected.push_back({slot.id, slot.reject_reason});
    }

    // Seeded split assignment: shuffle indices, tag from the back.
    if (args.val_count + args.test_count > static_cast<int>(manifest.entries.size()))
        throw ValidationError("val/test counts exceed the surviving entry count");
    std::vector<std::size_t> order(manifest.entries.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    Rng rng = derive_stream(args.seed, "split");
    deterministic_shuffle(order, rng);
    for (int i = 0; i < args.val_count; ++i) manifest.entries[order[i]].split = "val";
    for (int i = 0; i < args.test_count; ++i)
        manifest.entries[order[args.val_count + i]].split = "test";

    const fs::path manifest_path = fs::path(args.out_dir) / "manifest.json";
    manifest.save(manifest_path);
    std::cout << "prepared " << manifest.entries.size() << " entries ("
              << manifest.rejected.size() << " rejected) -> " << manifest_path.string()
              << "\n";
    return 0;
}

// ---------------------------------------------------------------- graph

struct GraphArgs {
    std::string image, seg, out;
    std::string label_map;
};

int run_graph(const GraphArgs& args) {
    const ImageF img = load_linear_image(args.image);
    const SegMap seg = load_coarse_seg(
        args.seg, args.label_map.empty() ? std::nullopt
                                         : std::make_optional<fs::path>(args.label_map));
    const SemanticGraph graph = build_graph(img, seg);
    const nlohmann::json j = graph_to_json(graph);
    if (args.out.empty()) {
        std::cout << j.dump(2) << "\n";
    } else {
        std::ofstream os(args.out);
        if (!os) throw ValidationError("cannot write " + args.out);
        os << j.dump(2) << "\n";
        std::cout << "graph with " << graph.node_count() << " nodes, " << graph.edges.size()
                  << " edges -> " << args.out << "\n";
    }
    return 0;
}

// ---------------------------------------------------------------- train

struct TrainArgs {
    std::string manifest, config, out_dir, resume;
    std::optional<std::uint64_t> seed_override;
    int threads = default_thread_count();
};

TrainSample load_sample(const ManifestEntry& entry) {
    return make_sample(entry.id, load_linear_image(entry.linear_path),
                       load_display_image(entry.ref_path),
                       load_segmentation(entry.seg_path));
}

int run_train(const TrainArgs& args) {
    TrainConfig cfg = TrainConfig::from_file(args.config);
    if (args.seed_override) cfg.seed = *args.seed_override;

    const DatasetManifest manifest = DatasetManifest::load(args.manifest);
    if (manifest.entries.empty()) throw ValidationError("manifest has no entries");

    // K-fold operates over the non-test entries; otherwise split tags rule.
    std::vector<const ManifestEntry*> pool;
    for (const auto& e : manifest.entries)
        if (e.split != "test") pool.push_back(&e);

    std::vector<const ManifestEntry*> train_entries, val_entries;
    if (cfg.kfold) {
        const auto [train_idx, val_idx] =
            kfold_split(pool.size(), cfg.kfold->first, cfg.kfold->second, cfg.seed);
        for (auto i : train_idx) train_entries.push_back(pool[i]);
        for (auto i : val_idx) val_entries.push_back(pool[i]);
    } else {
        for (const auto* e : pool)
            (e->split == "val" ? val_entries : train_entries).push_back(e);
    }
    if (train_entries.empty()) throw ValidationError("no training entries after the split");

    std::cout << "loading " << train_entries.size() << " train / " << val_entries.size()
              << " val images\n";
    std::vector<TrainSample> train_set(train_entries.size());
    std::vector<TrainSample> val_set(val_entries.size());
    parallel_for(0, static_cast<int>(train_entries.size()), args.threads,
                 [&](int i) { train_set[i] = load_sample(*train_entries[i]); });
    parallel_for(0, static_cast<int>(val_entries.size()), args.threads,
                 [&](int i) { val_set[i] = load_sample(*val_entries[i]); });

    TrainResult resume_state;
    const TrainResult* resume_ptr = nullptr;
    if (!args.resume.empty()) {
        const Checkpoint ckpt = load_checkpoint(args.resume);
        resume_state.params = ModelParams::from_checkpoint(ckpt, &resume_state.opt_state);
        if (resume_state.params.mode != cfg.mode)
            throw ValidationError("resume: checkpoint mode '" +
                                  std::string(ablation_mode_name(resume_state.params.mode)) +
                                  "' does not match config mode '" +
                                  ablation_mode_name(cfg.mode) + "'");
        resume_state.epochs_completed = ckpt.metadata.at("epoch").get<int>();
        resume_state.best_params = resume_state.params;
        resume_state.report.best_epoch = -1;
        resume_ptr = &resume_state;
        std::cout << "resuming from epoch " << resume_state.epochs_completed << "\n";
    }

    fs::create_directories(args.out_dir);
    const TrainResult result = train(train_set, val_set, cfg, resume_ptr, &std::cout);

    const fs::path final_path = fs::path(args.out_dir) / "checkpoint_final.bin";
    const fs::path best_path = fs::path(args.out_dir) / "checkpoint_best.bin";
    save_checkpoint(final_path,
                    result.params.to_checkpoint(cfg, result.epochs_completed,
                                                &result.opt_state));
    save_checkpoint(best_path, result.best_params.to_checkpoint(
                                   cfg, std::max(result.report.best_epoch + 1, 0)));
    result.report.save_csv(fs::path(args.out_dir) / "report.csv");

    if (!result.report.epochs.empty()) {
        PlotSeries train_series{"train", {}, {}};
        PlotSeries val_series{"val", {}, {}};
        for (const auto& e : result.report.epochs) {
            train_series.x.push_back(e.epoch);
            train_series.y.push_back(e.train_loss_mean);
            val_series.x.push_back(e.epoch);
            val_series.y.push_back(e.val_loss_mean);
        }
        save_png8(fs::path(args.out_dir) / "loss_curve.png",
                  plot_lines({train_series, val_series}));
    }

    std::cout << "checkpoints -> " << final_path.string() << ", " << best_path.string()
              << " (best epoch " << result.report.best_epoch << ", val "
              << result.report.best_val << ")\n";
    return 0;
}

// ---------------------------------------------------------------- infer

struct InferArgs {
    std::string checkpoint, image, seg, out;
    std::string label_map;
    std::string dump_debug;
    bool blend = false;
    int bit_depth = 16;
    int threads = default_thread_count();
    BlendConfig blend_cfg;
};

GcnConfig gcn_config_from_metadata(const nlohmann::json& meta) {
    GcnConfig cfg;
    if (meta.contains("leaky_slope")) cfg.leaky_slope = meta.at("leaky_slope").get<double>();
    if (meta.contains("adjacency"))
        cfg.adjacency = meta.at("adjacency").get<std::string>() == "raw"
                            ? AdjacencyMode::raw
                            : AdjacencyMode::normalized;
    return cfg;
}

int run_infer(const InferArgs& args) {
    const Checkpoint ckpt = load_checkpoint(args.checkpoint);
    const ModelParams params = ModelParams::from_checkpoint(ckpt);
    const GcnConfig gcn_cfg = gcn_config_from_metadata(ckpt.metadata);

    const ImageF img = load_linear_image(args.image);
    const SegMap seg = load_coarse_seg(
        args.seg, args.label_map.empty() ? std::nullopt
                                         : std::make_optional<fs::path>(args.label_map));
    if (seg.width != img.width || seg.height != img.height)
        throw ValidationError("segmentation " + std::to_string(seg.width) + "x" +
                              std::to_string(seg.height) + " does not match image " +
                              std::to_string(img.width) + "x" + std::to_string(img.height));
    const SemanticGraph graph = build_graph(img, seg);

    Tensor2 conditioning;  // n x k rows; empty for the 3-input mapper
    if (params.mode == AblationMode::gsemtmo)
        conditioning = gcn_eval(graph, params.gcn, gcn_cfg).hhat;
    else if (params.mode == AblationMode::local_lut)
        conditioning = graph.features;

    ImageF out;
    BlendDebug debug;
    if (args.blend) {
        BlendConfig bcfg = args.blend_cfg;
        bcfg.threads = args.threads;
        out = blend_pipeline(img, seg, graph, conditioning, params.fc, gcn_cfg.leaky_slope,
                             bcfg, args.dump_debug.empty() ? nullptr : &debug);
    } else {
        out = infer_image_conditioned(img, graph.pixel_node, conditioning, params.fc,
                                      gcn_cfg.leaky_slope, args.threads);
    }

    if (args.bit_depth == 16)
        save_png16(args.out, out);
    else if (args.bit_depth == 8)
        save_png8(args.out, out);
    else
        throw ValidationError("--bit-depth must be 8 or 16");

    if (!args.dump_debug.empty()) {
        fs::create_directories(args.dump_debug);
        for (int i = 0; i < graph.node_count(); ++i) {
            const std::string label_name = kCoarseLabelNames[graph.nodes[i].label];
            if (args.blend) {
                save_plane_png(fs::path(args.dump_debug) /
                                   ("alpha_" + std::to_string(i) + "_" + label_name + ".png"),
                               debug.alphas[i]);
                save_png8(fs::path(args.dump_debug) /
                              ("frame_" + std::to_string(i) + "_" + label_name + ".png"),
                          debug.frames[i]);
            }
            // Per-node tone curve alongside the frames.
            std::vector<double> cond_row(conditioning.cols);
            for (int j = 0; j < conditioning.cols; ++j) cond_row[j] = conditioning.at(i, j);
            const ToneCurve curve =
                per_segment_tonecurve(params.fc, cond_row, 256, gcn_cfg.leaky_slope, i);
            std::ofstream os(fs::path(args.dump_debug) /
                             ("tonecurve_" + std::to_string(i) + "_" + label_name + ".csv"));
            os << "input_gray,output_luma\n";
            os.precision(10);
            for (std::size_t k = 0; k < curve.input_gray.size(); ++k)
                os << curve.input_gray[k] << "," << curve.output_luma[k] << "\n";
        }
    }
    std::cout << "wrote " << args.out << "\n";
    return 0;
}

// ---------------------------------------------------------------- eval

struct EvalArgs {
    std::string pred_dir, ref_dir, out_dir;
    std::string transfer = "srgb";
    int bins = 20;
    int resamples = 10000;
    std::uint64_t seed = 0;
    int threads = default_thread_count();
};

int run_eval(const EvalArgs& args) {
    const TransferFn fn =
        args.transfer == "gamma22" ? TransferFn::gamma22 : TransferFn::srgb;
    const auto preds = list_images(args.pred_dir);
    if (preds.empty()) throw ValidationError("no images found in " + args.pred_dir);

    struct Row {
        std::string id;
        bool ok = false;
        double psnr_db = 0, hyab_score = 0, ms_ssim_score = 0, c_ml = 0;
    };
    std::vector<Row> rows(preds.size());
    std::mutex log_mutex;

    parallel_for(0, static_cast<int>(preds.size()), args.threads, [&](int i) {
        const std::string stem = preds[i].stem().string();
        rows[i].id = stem;
        const auto ref_path = find_by_stem(args.ref_dir, stem);
        if (!ref_path) {
            std::lock_guard<std::mutex> lock(log_mutex);
            std::cerr << "warning: no reference for " << stem << ", skipped\n";
            return;
        }
        try {
            const ImageF pred = load_display_image(preds[i]);
            const ImageF ref = load_display_image(*ref_path);
            rows[i].psnr_db = psnr(pred, ref);
            rows[i].hyab_score = hyab(pred, ref, fn);
            try {
                rows[i].ms_ssim_score = ms_ssim(pred, ref);
            } catch (const ValidationError&) {
                rows[i].ms_ssim_score = std::numeric_limits<double>::quiet_NaN();
            }
            rows[i].c_ml = multi_level_contrast(pred);
            rows[i].ok = true;
        } catch (const std::exception& e) {
            std::lock_guard<std::mutex> lock(log_mutex);
            std::cerr << "warning: " << stem << ": " << e.what() << ", skipped\n";
        }
    });

    fs::create_directories(args.out_dir);
    std::ofstream csv(fs::path(args.out_dir) / "scores.csv");
    csv << "image,psnr,hyab,ms_ssim,c_ml\n";
    csv.precision(10);
    std::vector<double> psnrs, hyabs, ssims;
    int matched = 0;
    for (const Row& r : rows) {
        if (!r.ok) continue;
        ++matched;
        csv << r.id << "," << r.psnr_db << "," << r.hyab_score << "," << r.ms_ssim_score
            << "," << r.c_ml << "\n";
        if (std::isfinite(r.psnr_db)) psnrs.push_back(r.psnr_db);
        hyabs.push_back(r.hyab_score);
        if (std::isfinite(r.ms_ssim_score)) ssims.push_back(r.ms_ssim_score);
    }
    if (matched == 0) throw ValidationError("no matching prediction/reference pairs");

    nlohmann::json summary;
    summary["pairs"] = matched;
    auto summarize = [&](const std::string& name, const std::vector<double>& scores) {
        if (scores.empty()) {
            summary[name] = nullptr;
            return;
        }
        const MedianCi ci = median_ci(scores, 0.95, args.resamples, args.seed);
        nlohmann::json m;
        m["median"] = ci.median;
        m["ci95_lo"] = ci.lo;
        m["ci95_hi"] = ci.hi;
        m["count"] = scores.size();
        // Histogram bins: edges plus counts.
        double lo = *std::min_element(scores.begin(), scores.end());
        double hi = *std::max_element(scores.begin(), scores.end());
        if (lo == hi) {
            lo -= 0.5;
            hi += 0.5;
        }
        std::vector<int> counts(args.bins, 0);
        for (double s : scores) {
            int b = static_cast<int>((s - lo) / (hi - lo) * args.bins);
            counts[std::clamp(b, 0, args.bins - 1)] += 1;
        }
        m["hist_lo"] = lo;
        m["hist_hi"] = hi;
        m["hist_counts"] = counts;
        summary[name] = m;

        save_png8(fs::path(args.out_dir) / (name + "_hist.png"),
                  plot_histogram(scores, args.bins, ci.median, ci.lo, ci.hi));
    };
    summarize("hyab", hyabs);
    summarize("psnr", psnrs);
    summarize("ms_ssim", ssims);

    std::ofstream js(fs::path(args.out_dir) / "summary.json");
    js << summary.dump(2) << "\n";
    std::cout << "evaluated " << matched << " pairs -> " << args.out_dir << "\n";
    return 0;
}

// ---------------------------------------------------------------- tonecurve

struct TonecurveArgs {
    std::string checkpoint, image, seg, out_dir;
    std::string label_map;
    int samples = 256;
};

int run_tonecurve(const TonecurveArgs& args) {
    const Checkpoint ckpt = load_checkpoint(args.checkpoint);
    const ModelParams params = ModelParams::from_checkpoint(ckpt);
    const GcnConfig gcn_cfg = gcn_config_from_metadata(ckpt.metadata);

    const ImageF img = load_linear_image(args.image);
    const SegMap seg = load_coarse_seg(
        args.seg, args.label_map.empty() ? std::nullopt
                                         : std::make_optional<fs::path>(args.label_map));
    const SemanticGraph graph = build_graph(img, seg);

    Tensor2 conditioning(graph.node_count(), 0);
    if (params.mode == AblationMode::gsemtmo)
        conditioning = gcn_eval(graph, params.gcn, gcn_cfg).hhat;
    else if (params.mode == AblationMode::local_lut)
        conditioning = graph.features;

    fs::create_directories(args.out_dir);
    std::vector<PlotSeries> series;
    for (int i = 0; i < graph.node_count(); ++i) {
        std::vector<double> cond_row(conditioning.cols);
        for (int j = 0; j < conditioning.cols; ++j) cond_row[j] = conditioning.at(i, j);
        const ToneCurve curve =
            per_segment_tonecurve(params.fc, cond_row, args.samples, gcn_cfg.leaky_slope, i);
        const std::string label_name = kCoarseLabelNames[graph.nodes[i].label];
        std::ofstream os(fs::path(args.out_dir) /
                         ("tonecurve_" + std::to_string(i) + "_" + label_name + ".csv"));
        os << "input_gray,output_luma\n";
        os.precision(10);
        for (std::size_t k = 0; k < curve.input_gray.size(); ++k)
            os << curve.input_gray[k] << "," << curve.output_luma[k] << "\n";
        series.push_back({label_name, curve.input_gray, curve.output_luma});
    }
    save_png8(fs::path(args.out_dir) / "tonecurves.png",
              plot_lines(series, 720, 480, /*log_x=*/true));
    std::cout << "wrote " << graph.node_count() << " tone curves -> " << args.out_dir << "\n";
    return 0;
}

// ------------------------------------------------------- contrast-select

struct ContrastArgs {
    std::string manifest, out;
    int count = 200;
    int levels = 5;
    int threads = default_thread_count();
};

int run_contrast_select(const ContrastArgs& args) {
    DatasetManifest manifest = DatasetManifest::load(args.manifest);
    if (manifest.entries.empty()) throw ValidationError("manifest has no entries");

    // Contrast is measured on the expert-retouched references.
    std::vector<double> c_ml(manifest.entries.size(), 0.0);
    parallel_for(0, static_cast<int>(manifest.entries.size()), args.threads, [&](int i) {
        const ImageF ref = load_display_image(manifest.entries[i].ref_path);
        c_ml[i] = multi_level_contrast(ref, args.levels);
    });
    for (std::size_t i = 0; i < c_ml.size(); ++i)
        manifest.entries[i].report.c_ml = c_ml[i];

    const auto selected = hc_select_indices(c_ml, static_cast<std::size_t>(args.count));
    DatasetManifest out;
    for (auto i : selected) out.entries.push_back(manifest.entries[i]);
    out.save(args.out);
    std::cout << "selected " << out.entries.size() << " highest-contrast entries -> "
              << args.out << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"G-SemTMO: graph-based semantic tone mapping"};
    app.require_subcommand(1);

    PrepareArgs prepare;
    auto* cmd_prepare = app.add_subcommand("prepare", "Filter, resize and index a dataset");
    cmd_prepare->add_option("--input", prepare.input_dir, "Directory of 16-bit linear images")
        ->required();
    cmd_prepare->add_option("--seg", prepare.seg_dir, "Directory of segmentation maps")
        ->required();
    cmd_prepare->add_option("--ref", prepare.ref_dir, "Directory of retouched references")
        ->required();
    cmd_prepare->add_option("--out", prepare.out_dir, "Output directory")->required();
    cmd_prepare->add_option("--resize", prepare.resize, "Target size (default 100x100)");
    cmd_prepare->add_option("--label-map", prepare.label_map,
                            "Fine-to-coarse label table for fine-label maps");
    cmd_prepare->add_option("--saturation-threshold", prepare.saturation_threshold,
                            "Reject when the saturated fraction exceeds this (default 0.03)");
    cmd_prepare->add_option("--saturation-cutoff", prepare.saturation_cutoff,
                            "Tonal value above which a pixel counts as saturated (0.99)");
    cmd_prepare->add_option("--min-dynamic-range", prepare.min_dynamic_range,
                            "Keep only images with log10 P99/P1 at or above this");
    cmd_prepare->add_option("--min-segments", prepare.min_segments,
                            "Keep only maps with at least this many distinct labels");
    cmd_prepare->add_option("--val-count", prepare.val_count, "Entries tagged 'val'");
    cmd_prepare->add_option("--test-count", prepare.test_count, "Entries tagged 'test'");
    cmd_prepare->add_option("--seed", prepare.seed, "Split assignment seed");
    cmd_prepare->add_option("--threads", prepare.threads, "Worker threads");

    GraphArgs graph_args;
    auto* cmd_graph = app.add_subcommand("graph", "Dump the semantic graph of one image");
    cmd_graph->add_option("--image", graph_args.image, "16-bit linear image")->required();
    cmd_graph->add_option("--seg", graph_args.seg, "Segmentation map")->required();
    cmd_graph->add_option("--out", graph_args.out, "Output JSON (stdout when omitted)");
    cmd_graph->add_option("--label-map", graph_args.label_map, "Fine-to-coarse label table");

    TrainArgs train_args;
    std::uint64_t train_seed = 0;
    auto* cmd_train = app.add_subcommand("train", "Train a tone-mapping network");
    cmd_train->add_option("--manifest", train_args.manifest, "Dataset manifest")->required();
    cmd_train->add_option("--config", train_args.config, "Training configuration file")
        ->required();
    cmd_train->add_option("--out", train_args.out_dir, "Output directory")->required();
    cmd_train->add_option("--resume", train_args.resume, "Checkpoint to resume from");
    auto* seed_opt =
        cmd_train->add_option("--seed", train_seed, "Override the config seed");
    cmd_train->add_option("--threads", train_args.threads, "Loader threads");

    InferArgs infer_args;
    auto* cmd_infer = app.add_subcommand("infer", "Tone map one image with a checkpoint");
    auto add_infer_options = [&](CLI::App* cmd) {
        cmd->add_option("--checkpoint", infer_args.checkpoint, "Trained checkpoint")
            ->required();
        cmd->add_option("--image", infer_args.image, "16-bit linear image")->required();
        cmd->add_option("--seg", infer_args.seg, "Segmentation map")->required();
        cmd->add_option("--out", infer_args.out, "Output PNG")->required();
        cmd->add_option("--label-map", infer_args.label_map, "Fine-to-coarse label table");
        cmd->add_option("--bit-depth", infer_args.bit_depth, "Output depth: 8 or 16");
        cmd->add_option("--dump-debug", infer_args.dump_debug,
                        "Directory for alpha/frame/tone-curve dumps");
        cmd->add_option("--threads", infer_args.threads, "Worker threads");
        cmd->add_option("--feather-radius", infer_args.blend_cfg.feather_radius,
                        "Trimap radius in pixels (default 25)");
        cmd->add_option("--bilateral-diameter", infer_args.blend_cfg.bilateral_diameter,
                        "Bilateral neighborhood diameter (default 50)");
        cmd->add_option("--bilateral-sigma-color", infer_args.blend_cfg.bilateral_sigma_color,
                        "Bilateral color sigma on the 8-bit scale (default 30)");
        cmd->add_option("--bilateral-sigma-space", infer_args.blend_cfg.bilateral_sigma_space,
                        "Bilateral spatial sigma (default 12.5)");
    };
    add_infer_options(cmd_infer);
    cmd_infer->add_flag("--blend", infer_args.blend, "Blend per-hint frames at segment seams");

    auto* cmd_blend = app.add_subcommand("blend", "Tone map with seam blending (infer --blend)");
    add_infer_options(cmd_blend);

    EvalArgs eval_args;
    auto* cmd_eval = app.add_subcommand("eval", "Score predictions against references");
    cmd_eval->add_option("--pred", eval_args.pred_dir, "Directory of predictions")->required();
    cmd_eval->add_option("--ref", eval_args.ref_dir, "Directory of references")->required();
    cmd_eval->add_option("--out", eval_args.out_dir, "Output directory")->required();
    cmd_eval->add_option("--transfer", eval_args.transfer,
                         "Decode curve for CIELAB: srgb or gamma22");
    cmd_eval->add_option("--bins", eval_args.bins, "Histogram bins (default 20)");
    cmd_eval->add_option("--resamples", eval_args.resamples,
                         "Bootstrap resamples for the median CI (default 10000)");
    cmd_eval->add_option("--seed", eval_args.seed, "Bootstrap seed");
    cmd_eval->add_option("--threads", eval_args.threads, "Worker threads");

    TonecurveArgs tc_args;
    auto* cmd_tc = app.add_subcommand("tonecurve", "Export per-segment tone curves");
    cmd_tc->add_option("--checkpoint", tc_args.checkpoint, "Trained checkpoint")->required();
    cmd_tc->add_option("--image", tc_args.image, "16-bit linear image")->required();
    cmd_tc->add_option("--seg", tc_args.seg, "Segmentation map")->required();
    cmd_tc->add_option("--out", tc_args.out_dir, "Output directory")->required();
    cmd_tc->add_option("--label-map", tc_args.label_map, "Fine-to-coarse label table");
    cmd_tc->add_option("--samples", tc_args.samples, "Curve samples (default 256)");

    ContrastArgs contrast_args;
    auto* cmd_contrast =
        app.add_subcommand("contrast-select", "Pick the highest-contrast subset");
    cmd_contrast->add_option("--manifest", contrast_args.manifest, "Input manifest")
        ->required();
    cmd_contrast->add_option("--out", contrast_args.out, "Output manifest")->required();
    cmd_contrast->add_option("--count", contrast_args.count, "Subset size (default 200)");
    cmd_contrast->add_option("--levels", contrast_args.levels,
                             "Contrast pyramid levels (default 5)");
    cmd_contrast->add_option("--threads", contrast_args.threads, "Worker threads");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        if (app.got_subcommand(cmd_prepare)) return run_prepare(prepare);
        if (app.got_subcommand(cmd_graph)) return run_graph(graph_args);
        if (app.got_subcommand(cmd_train)) {
            if (!seed_opt->empty()) train_args.seed_override = train_seed;
            return run_train(train_args);
        }
        if (app.got_subcommand(cmd_infer)) return run_infer(infer_args);
        if (app.got_subcommand(cmd_blend)) {
            infer_args.blend = true;
            return run_infer(infer_args);
        }
        if (app.got_subcommand(cmd_eval)) return run_eval(eval_args);
        if (app.got_subcommand(cmd_tc)) return run_tonecurve(tc_args);
        if (app.got_subcommand(cmd_contrast)) return run_contrast_select(contrast_args);
    } catch (const ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
