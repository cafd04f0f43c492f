#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "gsemtmo/adamw.hpp"
#include "gsemtmo/checkpoint.hpp"
#include "gsemtmo/gcn.hpp"
#include "gsemtmo/graph.hpp"
#include "gsemtmo/image.hpp"
#include "gsemtmo/tonemap.hpp"

namespace gsemtmo {

// The three training regimes: FC on raw RGB, FC with per-segment features,
// and the full graph pipeline.
enum class AblationMode { global_lut, local_lut, gsemtmo };

const char* ablation_mode_name(AblationMode mode);
AblationMode ablation_mode_from_name(const std::string& name);
int fc_input_dim(AblationMode mode);

// Piecewise-constant learning rate over epochs.
struct LrSchedule {
    std::vector<std::pair<int, double>> stages;  // (first epoch, lr), ascending from 0

    double at(int epoch) const;
    void validate() const;
    // Presets: "fivek-staged" (1e-3/1e-4/1e-5 at 0/75/150),
    // "ablation-flat" (1e-4), "hc200-staged" (1e-3/1e-4/1e-5 at 0/150/300).
    static LrSchedule preset(const std::string& name);
    std::string describe() const;
};

struct TrainConfig {
    AblationMode mode = AblationMode::gsemtmo;
    int epochs = 250;
    LrSchedule schedule = LrSchedule::preset("fivek-staged");
    double weight_decay = 5e-4;
    std::uint64_t seed = 0;
    int batch_size = 1;  // fixed; graphs vary per image
    std::optional<std::pair<int, int>> kfold;  // (K, fold)
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    GcnConfig gcn;

    void validate() const;
    // Key-value text file, one "key = value" per line, '#' comments.
    static TrainConfig from_file(const std::filesystem::path& path);
    static TrainConfig from_text(const std::string& text);
};

// All trainable state for one ablation mode.
struct ModelParams {
    AblationMode mode = AblationMode::gsemtmo;
    GcnParams gcn;  // empty weights unless mode == gsemtmo
    FcParams fc;

    std::vector<std::string> tensor_names() const;
    std::vector<Tensor2*> tensor_ptrs();
    std::vector<const Tensor2*> tensor_ptrs() const;

    Checkpoint to_checkpoint(const TrainConfig& cfg, int epochs_completed,
                             const AdamwState* opt = nullptr) const;
    static ModelParams from_checkpoint(const Checkpoint& ckpt, AdamwState* opt = nullptr);
};

// Fan-in uniform weights, zero biases, fully seeded.
ModelParams init_params(const TrainConfig& cfg, std::uint64_t seed);

// Eq.-style L1 image distance: plain sum over pixels and channels, and the
// per-value mean the optimizer consumes.
double loss_l1(const ImageF& pred, const ImageF& ref);
double loss_l1_mean(const ImageF& pred, const ImageF& ref);

struct TrainSample {
    std::string id;
    ImageF linear;
    ImageF ref;
    SegMap seg;
    SemanticGraph graph;
};

TrainSample make_sample(std::string id, ImageF linear, ImageF ref, SegMap seg);

// Deterministic K-fold partition of [0,n): fold `fold` is validation.
std::pair<std::vector<std::size_t>, std::vector<std::size_t>> kfold_split(
    std::size_t n, int k, int fold, std::uint64_t seed);

struct EpochStats {
    int epoch = 0;
    double train_loss_mean = 0.0;  // mean per-value L1, averaged over images
    double train_loss_sum = 0.0;   // plain Eq.-style sum, averaged over images
    double val_loss_mean = 0.0;
    double lr = 0.0;
    double seconds = 0.0;
};

struct TrainReport {
    std::vector<EpochStats> epochs;
    int best_epoch = -1;
    double best_val = 0.0;

    void save_csv(const std::filesystem::path& path) const;
};

struct TrainResult {
    ModelParams params;       // final
    ModelParams best_params;  // lowest validation loss
    AdamwState opt_state;
    TrainReport report;
    int epochs_completed = 0;
};

// Mean per-value L1 of the eval-mode forward pass (unclamped, mirroring the
// training objective).
double eval_loss(const TrainSample& sample, const ModelParams& params, const GcnConfig& cfg);

// The optimization loop. `resume` continues a previous run (same config);
// `log` gets one line per epoch when provided.
TrainResult train(const std::vector<TrainSample>& train_set,
                  const std::vector<TrainSample>& val_set, const TrainConfig& cfg,
                  const TrainResult* resume = nullptr, std::ostream* log = nullptr);

}  // namespace gsemtmo
