#include "gsemtmo/trainer.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <ostream>
#include <sstream>

#include "gsemtmo/errors.hpp"
#include "gsemtmo/rng.hpp"
#include "gsemtmo/tape.hpp"

namespace gsemtmo {

const char* ablation_mode_name(AblationMode mode) {
    switch (mode) {
        case AblationMode::global_lut: return "global_lut";
        case AblationMode::local_lut: return "local_lut";
        case AblationMode::gsemtmo: return "gsemtmo";
    }
    return "?";
}

AblationMode ablation_mode_from_name(const std::string& name) {
    if (name == "global_lut") return AblationMode::global_lut;
    if (name == "local_lut") return AblationMode::local_lut;
    if (name == "gsemtmo") return AblationMode::gsemtmo;
    throw ValidationError("unknown ablation mode: " + name);
}

int fc_input_dim(AblationMode mode) {
    switch (mode) {
        case AblationMode::global_lut: return 3;
        case AblationMode::local_lut: return 3 + kNodeFeatureDim;
        case AblationMode::gsemtmo: return 3 + kHhatDim;
    }
    return 3;
}

double LrSchedule::at(int epoch) const {
    if (epoch < 0) throw ValidationError("lr_at_epoch: negative epoch");
    double lr = stages.front().second;
    for (const auto& [start, value] : stages) {
        if (epoch >= start) lr = value;
    }
    return lr;
}

void LrSchedule::validate() const {
    if (stages.empty()) throw ValidationError("schedule: no stages");
    if (stages.front().first != 0) throw ValidationError("schedule: must start at epoch 0");
    for (std::size_t i = 1; i < stages.size(); ++i)
        if (stages[i].first <= stages[i - 1].first)
            throw ValidationError("schedule: epochs must be strictly increasing");
    for (const auto& [e, lr] : stages)
        if (lr <= 0.0) throw ValidationError("schedule: lr must be > 0");
}

LrSchedule LrSchedule::preset(const std::string& name) {
    if (name == "fivek-staged") return {{{0, 1e-3}, {75, 1e-4}, {150, 1e-5}}};
    if (name == "ablation-flat") return {{{0, 1e-4}}};
    if (name == "hc200-staged") return {{{0, 1e-3}, {150, 1e-4}, {300, 1e-5}}};
    throw ValidationError("unknown schedule preset: " + name);
}

std::string LrSchedule::describe() const {
    std::ostringstream ss;
    for (std::size_t i = 0; i < stages.size(); ++i) {
        if (i) ss << ",";
        ss << stages[i].first << ":" << stages[i].second;
    }
    return ss.str();
}

namespace {

LrSchedule parse_schedule(const std::string& value) {
    if (value.find(':') == std::string::npos) return LrSchedule::preset(value);
    LrSchedule s;
    std::istringstream ss(value);
    std::string part;
    while (std::getline(ss, part, ',')) {
        const auto colon = part.find(':');
        if (colon == std::string::npos)
            throw ValidationError("schedule: bad stage '" + part + "'");
        s.stages.emplace_back(std::stoi(part.substr(0, colon)),
                              std::stod(part.substr(colon + 1)));
    }
    s.validate();
    return s;
}

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

bool parse_bool(const std::string& v, const std::string& key) {
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    throw ValidationError("config: bad boolean for " + key + ": " + v);
}

}  // namespace

void TrainConfig::validate() const {
    schedule.validate();
    if (epochs < 0) throw ValidationError("config: epochs must be >= 0");
    if (batch_size != 1) throw ValidationError("config: batch_size is fixed at 1");
    if (weight_decay < 0.0) throw ValidationError("config: weight_decay must be >= 0");
    if (kfold) {
        const auto& [k, fold] = *kfold;
        if (k < 2) throw ValidationError("config: kfold K must be >= 2");
        if (fold < 0 || fold >= k) throw ValidationError("config: fold index out of range");
    }
}

TrainConfig TrainConfig::from_text(const std::string& text) {
    TrainConfig cfg;
    std::optional<int> kfold_k, kfold_fold;
    std::istringstream is(text);
    std::string line;
    int lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.resize(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ValidationError("config: line " + std::to_string(lineno) +
                                  " is not 'key = value'");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        try {
            if (key == "mode") cfg.mode = ablation_mode_from_name(value);
            else if (key == "epochs") cfg.epochs = std::stoi(value);
            else if (key == "schedule") cfg.schedule = parse_schedule(value);
            else if (key == "weight_decay") cfg.weight_decay = std::stod(value);
            else if (key == "seed") cfg.seed = std::stoull(value);
            else if (key == "beta1") cfg.beta1 = std::stod(value);
            else if (key == "beta2") cfg.beta2 = std::stod(value);
            else if (key == "eps") cfg.eps = std::stod(value);
            else if (key == "leaky_slope") cfg.gcn.leaky_slope = std::stod(value);
            else if (key == "dropedge") cfg.gcn.dropedge_p = std::stod(value);
            else if (key == "dropout_in") cfg.gcn.dropout_in = std::stod(value);
            else if (key == "dropout_out") cfg.gcn.dropout_out = std::stod(value);
            else if (key == "conv_bias") cfg.gcn.conv_bias = parse_bool(value, key);
            else if (key == "adjacency") {
                if (value == "normalized") cfg.gcn.adjacency = AdjacencyMode::normalized;
                else if (value == "raw") cfg.gcn.adjacency = AdjacencyMode::raw;
                else throw ValidationError("config: adjacency must be normalized|raw");
            }
            else if (key == "kfold_k") kfold_k = std::stoi(value);
            else if (key == "kfold_fold") kfold_fold = std::stoi(value);
            else throw ValidationError("config: unknown key '" + key + "'");
        } catch (const std::invalid_argument&) {
            throw ValidationError("config: bad value for " + key + " at line " +
                                  std::to_string(lineno));
        }
    }
    if (kfold_k.has_value() != kfold_fold.has_value())
        throw ValidationError("config: kfold_k and kfold_fold must appear together");
    if (kfold_k) cfg.kfold = std::make_pair(*kfold_k, *kfold_fold);
    cfg.validate();
    return cfg;
}

TrainConfig TrainConfig::from_file(const std::filesystem::path& path) {
    std::ifstream is(path);
    if (!is) throw ValidationError("config: cannot read " + path.string());
    std::ostringstream ss;
    ss << is.rdbuf();
    return from_text(ss.str());
}

std::vector<std::string> ModelParams::tensor_names() const {
    std::vector<std::string> names;
    if (mode == AblationMode::gsemtmo) {
        for (std::size_t l = 0; l < gcn.weights.size(); ++l)
            names.push_back("gcn.w" + std::to_string(l));
        for (std::size_t l = 0; l < gcn.biases.size(); ++l)
            names.push_back("gcn.b" + std::to_string(l));
    }
    names.insert(names.end(), {"fc.w1", "fc.b1", "fc.w2", "fc.b2", "fc.w3", "fc.b3"});
    return names;
}

std::vector<Tensor2*> ModelParams::tensor_ptrs() {
    std::vector<Tensor2*> ptrs;
    if (mode == AblationMode::gsemtmo) {
        for (auto& w : gcn.weights) ptrs.push_back(&w);
        for (auto& b : gcn.biases) ptrs.push_back(&b);
    }
    for (Tensor2* t : {&fc.w1, &fc.b1, &fc.w2, &fc.b2, &fc.w3, &fc.b3}) ptrs.push_back(t);
    return ptrs;
}

std::vector<const Tensor2*> ModelParams::tensor_ptrs() const {
    auto ptrs = const_cast<ModelParams*>(this)->tensor_ptrs();
    return {ptrs.begin(), ptrs.end()};
}

Checkpoint ModelParams::to_checkpoint(const TrainConfig& cfg, int epochs_completed,
                                      const AdamwState* opt) const {
    Checkpoint ckpt;
    ckpt.metadata["format"] = "gsemtmo-checkpoint";
    ckpt.metadata["mode"] = ablation_mode_name(mode);
    ckpt.metadata["epoch"] = epochs_completed;
    ckpt.metadata["seed"] = cfg.seed;
    ckpt.metadata["fc_input_dim"] = fc.input_dim;
    ckpt.metadata["gcn_dims"] = std::vector<int>(kGcnDims.begin(), kGcnDims.end());
    ckpt.metadata["leaky_slope"] = cfg.gcn.leaky_slope;
    ckpt.metadata["adjacency"] =
        cfg.gcn.adjacency == AdjacencyMode::normalized ? "normalized" : "raw";
    ckpt.metadata["conv_bias"] = cfg.gcn.conv_bias;
    ckpt.metadata["schedule"] = cfg.schedule.describe();
    ckpt.metadata["weight_decay"] = cfg.weight_decay;

    const auto names = tensor_names();
    const auto ptrs = tensor_ptrs();
    for (std::size_t i = 0; i < names.size(); ++i)
        ckpt.tensors.emplace_back(names[i], *ptrs[i]);
    if (opt) {
        ckpt.metadata["opt_step"] = opt->step;
        for (std::size_t i = 0; i < names.size(); ++i)
            ckpt.tensors.emplace_back("opt.m." + names[i], opt->m[i]);
        for (std::size_t i = 0; i < names.size(); ++i)
            ckpt.tensors.emplace_back("opt.v." + names[i], opt->v[i]);
    }
    return ckpt;
}

ModelParams ModelParams::from_checkpoint(const Checkpoint& ckpt, AdamwState* opt) {
    if (!ckpt.metadata.contains("mode"))
        throw ValidationError("checkpoint: missing mode metadata");
    ModelParams params;
    params.mode = ablation_mode_from_name(ckpt.metadata.at("mode").get<std::string>());
    params.fc.input_dim = ckpt.metadata.at("fc_input_dim").get<int>();

    auto take = [&](const std::string& name) -> Tensor2 {
        const Tensor2* t = ckpt.find(name);
        if (!t) throw ValidationError("checkpoint: missing tensor '" + name + "'");
        return *t;
    };

    if (params.mode == AblationMode::gsemtmo) {
        const bool biases = ckpt.find("gcn.b0") != nullptr;
        for (int l = 0; l < kGcnLayerCount; ++l)
            params.gcn.weights.push_back(take("gcn.w" + std::to_string(l)));
        if (biases)
            for (int l = 0; l < kGcnLayerCount; ++l)
                params.gcn.biases.push_back(take("gcn.b" + std::to_string(l)));
        params.gcn.validate();
    }
    params.fc.w1 = take("fc.w1");
    params.fc.b1 = take("fc.b1");
    params.fc.w2 = take("fc.w2");
    params.fc.b2 = take("fc.b2");
    params.fc.w3 = take("fc.w3");
    params.fc.b3 = take("fc.b3");
    params.fc.validate();

    if (opt) {
        if (!ckpt.metadata.contains("opt_step"))
            throw ValidationError("checkpoint: no optimizer state; cannot resume");
        opt->step = ckpt.metadata.at("opt_step").get<long>();
        const auto names = params.tensor_names();
        opt->m.clear();
        opt->v.clear();
        for (const auto& n : names) opt->m.push_back(take("opt.m." + n));
        for (const auto& n : names) opt->v.push_back(take("opt.v." + n));
    }
    return params;
}

namespace {

Tensor2 fan_in_uniform(int rows, int cols, Rng& rng) {
    Tensor2 t(rows, cols);
    const double bound = std::sqrt(1.0 / static_cast<double>(rows));
    for (auto& x : t.v) x = rng.next_uniform(-bound, bound);
    return t;
}

}  // namespace

ModelParams init_params(const TrainConfig& cfg, std::uint64_t seed) {
    Rng rng = derive_stream(seed, "init");
    ModelParams params;
    params.mode = cfg.mode;
    if (cfg.mode == AblationMode::gsemtmo) {
        for (int l = 0; l < kGcnLayerCount; ++l)
            params.gcn.weights.push_back(fan_in_uniform(kGcnDims[l], kGcnDims[l + 1], rng));
        if (cfg.gcn.conv_bias)
            for (int l = 0; l < kGcnLayerCount; ++l)
                params.gcn.biases.emplace_back(1, kGcnDims[l + 1]);
    }
    params.fc.input_dim = fc_input_dim(cfg.mode);
    params.fc.w1 = fan_in_uniform(params.fc.input_dim, kFcHiddenDim, rng);
    params.fc.b1 = Tensor2(1, kFcHiddenDim);
    params.fc.w2 = fan_in_uniform(kFcHiddenDim, kFcHiddenDim, rng);
    params.fc.b2 = Tensor2(1, kFcHiddenDim);
    params.fc.w3 = fan_in_uniform(kFcHiddenDim, 3, rng);
    params.fc.b3 = Tensor2(1, 3);
    return params;
}

double loss_l1(const ImageF& pred, const ImageF& ref) {
    if (!pred.same_size(ref))
        throw ValidationError("loss_l1: image sizes differ, " + std::to_string(pred.width) +
                              "x" + std::to_string(pred.height) + " vs " +
                              std::to_string(ref.width) + "x" + std::to_string(ref.height));
    double acc = 0.0;
    for (std::size_t i = 0; i < pred.data.size(); ++i)
        acc += std::fabs(static_cast<double>(pred.data[i]) - ref.data[i]);
    return acc;
}

double loss_l1_mean(const ImageF& pred, const ImageF& ref) {
    return loss_l1(pred, ref) / static_cast<double>(pred.data.size());
}

TrainSample make_sample(std::string id, ImageF linear, ImageF ref, SegMap seg) {
    TrainSample s;
    s.id = std::move(id);
    s.graph = build_graph(linear, seg);
    s.linear = std::move(linear);
    s.ref = std::move(ref);
    s.seg = std::move(seg);
    return s;
}

std::pair<std::vector<std::size_t>, std::vector<std::size_t>> kfold_split(
    std::size_t n, int k, int fold, std::uint64_t seed) {
    if (k < 2) throw ValidationError("kfold_split: K must be >= 2");
    if (fold < 0 || fold >= k) throw ValidationError("kfold_split: fold index out of range");
    if (n < static_cast<std::size_t>(k))
        throw ValidationError("kfold_split: dataset smaller than K");

    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    Rng rng = derive_stream(seed, "kfold");
    deterministic_shuffle(order, rng);

    // Folds 0..(n%k)-1 take one extra element.
    const std::size_t base = n / static_cast<std::size_t>(k);
    const std::size_t extra = n % static_cast<std::size_t>(k);
    std::vector<std::size_t> train, val;
    std::size_t pos = 0;
    for (int f = 0; f < k; ++f) {
        const std::size_t len = base + (static_cast<std::size_t>(f) < extra ? 1 : 0);
        for (std::size_t i = 0; i < len; ++i) {
            if (f == fold)
                val.push_back(order[pos + i]);
            else
                train.push_back(order[pos + i]);
        }
        pos += len;
    }
    return {std::move(train), std::move(val)};
}

void TrainReport::save_csv(const std::filesystem::path& path) const {
    std::ofstream os(path);
    if (!os) throw ValidationError("report: cannot write " + path.string());
    os << "epoch,train_loss_mean,train_loss_sum,val_loss_mean,lr,seconds\n";
    os.precision(12);
    for (const auto& e : epochs)
        os << e.epoch << "," << e.train_loss_mean << "," << e.train_loss_sum << ","
           << e.val_loss_mean << "," << e.lr << "," << e.seconds << "\n";
}

namespace {

Tensor2 image_matrix(const ImageF& img) {
    Tensor2 m(static_cast<int>(img.pixel_count()), 3);
    for (std::size_t i = 0; i < img.data.size(); ++i) m.v[i] = img.data[i];
    return m;
}

struct StepResult {
    double loss_mean = 0.0;
    double loss_sum = 0.0;
};

// One image through tape forward/backward plus an optimizer step.
StepResult train_step(const TrainSample& sample, ModelParams& params, AdamwState& opt,
                      const TrainConfig& cfg, double lr, Rng& rng) {
    GradTape tape;
    std::vector<GradTape::Id> param_ids;

    GradTape::Id cond = -1;
    if (cfg.mode == AblationMode::gsemtmo) {
        const GcnTapeOut gcn =
            gcn_forward(tape, sample.graph, params.gcn, cfg.gcn, RunMode::train, rng);
        param_ids = gcn.weight_ids;
        param_ids.insert(param_ids.end(), gcn.bias_ids.begin(), gcn.bias_ids.end());
        cond = gcn.hhat;
    } else if (cfg.mode == AblationMode::local_lut) {
        cond = tape.leaf(sample.graph.features);
    }

    const FcTapeOut fc = fc_pipeline(tape, image_matrix(sample.linear), cond,
                                     sample.graph.pixel_node, params.fc, cfg.gcn.leaky_slope);
    param_ids.insert(param_ids.end(), fc.param_ids.begin(), fc.param_ids.end());

    const GradTape::Id target = tape.leaf(image_matrix(sample.ref));
    const GradTape::Id sum_id = l1_loss(tape, fc.output, target);
    const double denom = static_cast<double>(sample.ref.data.size());
    const GradTape::Id mean_id = tape.scale(sum_id, 1.0 / denom);

    StepResult result;
    result.loss_sum = tape.value(sum_id).v[0];
    result.loss_mean = tape.value(mean_id).v[0];
    if (!std::isfinite(result.loss_mean))
        throw std::runtime_error("train: non-finite loss on image '" + sample.id + "'");

    tape.backward(mean_id);

    std::vector<Tensor2*> ptrs = params.tensor_ptrs();
    std::vector<Tensor2> grads;
    grads.reserve(param_ids.size());
    for (const GradTape::Id id : param_ids) grads.push_back(tape.grad(id));

    // adamw_step wants values, not pointers; move through a scratch vector.
    std::vector<Tensor2> values;
    values.reserve(ptrs.size());
    for (Tensor2* p : ptrs) values.push_back(std::move(*p));
    AdamwConfig acfg{lr, cfg.weight_decay, cfg.beta1, cfg.beta2, cfg.eps};
    adamw_step(values, grads, opt, acfg);
    for (std::size_t i = 0; i < ptrs.size(); ++i) *ptrs[i] = std::move(values[i]);

    return result;
}

}  // namespace

double eval_loss(const TrainSample& sample, const ModelParams& params, const GcnConfig& cfg) {
    Tensor2 cond;
    if (params.mode == AblationMode::gsemtmo)
        cond = gcn_eval(sample.graph, params.gcn, cfg).hhat;
    else if (params.mode == AblationMode::local_lut)
        cond = sample.graph.features;

    const std::size_t pixels = sample.linear.pixel_count();
    double acc = 0.0;
    for (std::size_t p = 0; p < pixels; ++p) {
        const std::size_t base = p * 3;
        std::span<const double> cond_row;
        if (params.fc.conditioning_dim() > 0) {
            const int node = sample.graph.pixel_node[p];
            cond_row = std::span<const double>(
                &cond.v[static_cast<std::size_t>(node) * cond.cols],
                static_cast<std::size_t>(cond.cols));
        }
        const auto out = fc_forward(
            {sample.linear.data[base], sample.linear.data[base + 1],
             sample.linear.data[base + 2]},
            cond_row, params.fc, cfg.leaky_slope, /*clamp_output=*/false);
        for (int c = 0; c < 3; ++c)
            acc += std::fabs(out[c] - static_cast<double>(sample.ref.data[base + c]));
    }
    return acc / static_cast<double>(pixels * 3);
}

TrainResult train(const std::vector<TrainSample>& train_set,
                  const std::vector<TrainSample>& val_set, const TrainConfig& cfg,
                  const TrainResult* resume, std::ostream* log) {
    cfg.validate();
    if (train_set.empty()) throw ValidationError("train: empty training set");
    for (const auto& s : train_set)
        if (s.linear.pixel_count() != s.graph.pixel_node.size())
            throw ValidationError("train: sample '" + s.id + "' has no matching graph");

    TrainResult result;
    int start_epoch = 0;
    if (resume) {
        result.params = resume->params;
        result.opt_state = resume->opt_state;
        result.report = resume->report;
        start_epoch = resume->epochs_completed;
    } else {
        result.params = init_params(cfg, cfg.seed);
        std::vector<Tensor2> shapes;
        for (const Tensor2* t : std::as_const(result.params).tensor_ptrs())
            shapes.push_back(*t);
        result.opt_state = AdamwState::like(shapes);
    }
    result.report.best_epoch = resume ? resume->report.best_epoch : -1;
    result.report.best_val = resume ? resume->report.best_val : 0.0;
    result.best_params = resume ? resume->best_params : result.params;

    // Validation falls back to the training set so best-checkpoint tracking
    // still works for overfit-style runs.
    const std::vector<TrainSample>& val = val_set.empty() ? train_set : val_set;

    std::vector<std::size_t> order(train_set.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

    for (int epoch = start_epoch; epoch < cfg.epochs; ++epoch) {
        const auto t0 = std::chrono::steady_clock::now();
        const double lr = cfg.schedule.at(epoch);

        Rng shuffle_rng = derive_stream(cfg.seed, "shuffle:" + std::to_string(epoch));
        deterministic_shuffle(order, shuffle_rng);

        double mean_acc = 0.0, sum_acc = 0.0;
        for (std::size_t step = 0; step < order.size(); ++step) {
            const TrainSample& sample = train_set[order[step]];
            Rng step_rng = derive_stream(
                cfg.seed, "step:" + std::to_string(epoch) + ":" + std::to_string(step));
            StepResult r;
            try {
                r = train_step(sample, result.params, result.opt_state, cfg, lr, step_rng);
            } catch (const std::runtime_error& e) {
                throw std::runtime_error(std::string(e.what()) + " at epoch " +
                                         std::to_string(epoch));
            }
            mean_acc += r.loss_mean;
            sum_acc += r.loss_sum;
        }

        double val_acc = 0.0;
        for (const auto& s : val) val_acc += eval_loss(s, result.params, cfg.gcn);

        EpochStats stats;
        stats.epoch = epoch;
        stats.train_loss_mean = mean_acc / static_cast<double>(order.size());
        stats.train_loss_sum = sum_acc / static_cast<double>(order.size());
        stats.val_loss_mean = val_acc / static_cast<double>(val.size());
        stats.lr = lr;
        stats.seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        result.report.epochs.push_back(stats);

        if (result.report.best_epoch < 0 || stats.val_loss_mean < result.report.best_val) {
            result.report.best_epoch = epoch;
            result.report.best_val = stats.val_loss_mean;
            result.best_params = result.params;
        }
        if (log)
            *log << "epoch " << epoch << " lr " << lr << " train " << stats.train_loss_mean
                 << " val " << stats.val_loss_mean << "\n";
    }
    result.epochs_completed = cfg.epochs;
    return result;
}

}  // namespace gsemtmo
