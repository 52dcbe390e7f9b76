#pragma once

#include "condlab/grid.hpp"
#include "condlab/nop/model.hpp"
#include "condlab/nop/spec.hpp"

#include <functional>
#include <span>
#include <vector>

namespace condlab::nop {

/// In-memory (input, target) pairs on one grid. Inputs are joint densities (exact or
/// estimated), targets the kernels, both in node order i * ny + j.
struct PairSet {
    Grid2D grid;
    std::vector<std::vector<double>> inputs;
    std::vector<std::vector<double>> targets;

    std::size_t size() const noexcept { return inputs.size(); }
    void add(std::vector<double> input, std::vector<double> target);
    PairSet subset(std::span<const std::size_t> indices) const;
};

struct EvalStats {
    std::vector<double> errors;  // per record, in record order
    double median = 0.0;         // mean of the two middle values for even counts
    double max = 0.0;
    double mean = 0.0;
};

EvalStats summarize(std::vector<double> errors);

/// Per-record relative L1 error of the model output against the targets.
EvalStats evaluate(const NOModel& model, const PairSet& data, std::size_t threads = 0);

/// Reusable per-sample gradient buffers.
class GradWorkspace {
public:
    std::vector<std::vector<double>> slots;
    std::vector<double> losses;
    void ensure(std::size_t batch, std::size_t nparams);
};

/// Mean relative-L1 loss over `batch` and its parameter gradient, written to `grads`.
/// Each sample's gradient is formed in its own buffer and the buffers are summed in
/// batch order, so the result does not depend on `threads`.
double batch_gradient(const NOModel& model, const PairSet& data, std::span<const std::size_t> batch,
                      std::span<double> grads, std::size_t threads, GradWorkspace& ws);

struct EpochRecord {
    std::size_t epoch = 0;
    double train_loss = 0.0;  // mean per-sample loss seen during the epoch
    double val_loss = 0.0;    // mean relative L1 on the validation set after the epoch
    double lr = 0.0;          // rate used during the epoch
};

struct TrainResult {
    std::vector<EpochRecord> history;
    std::size_t best_epoch = 0;
    double best_val = 0.0;
    bool stopped_early = false;
};

using EpochCallback = std::function<void(const EpochRecord&)>;

/// Shuffled minibatch Adam with a plateau scheduler driven by the validation loss.
/// The parameters with the best validation loss are restored at the end. When `val`
/// is empty the training set doubles as the validation set.
TrainResult train(NOModel& model, const PairSet& train_set, const PairSet& val, const TrainConfig& config,
                  const EpochCallback& on_epoch = {});

} // namespace condlab::nop
