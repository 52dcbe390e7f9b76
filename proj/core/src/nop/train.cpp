#include "condlab/nop/train.hpp"

#include "condlab/error.hpp"
#include "condlab/nop/loss.hpp"
#include "condlab/nop/optim.hpp"
#include "condlab/parallel.hpp"
#include "condlab/rng.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace condlab::nop {

namespace {

Mat row_of(std::span<const double> v) {
    Mat m(1, static_cast<Eigen::Index>(v.size()));
    std::copy(v.begin(), v.end(), m.data());
    return m;
}

void check_grid(const NOModel& model, const PairSet& data) {
    if (!(data.grid == model.grid())) fail(ErrorKind::invalid_argument, "dataset grid does not match the model grid");
}

} // namespace

void PairSet::add(std::vector<double> input, std::vector<double> target) {
    if (input.size() != grid.size() || target.size() != grid.size())
        fail(ErrorKind::invalid_argument, "pair does not match the set grid", static_cast<long>(inputs.size()));
    inputs.push_back(std::move(input));
    targets.push_back(std::move(target));
}

PairSet PairSet::subset(std::span<const std::size_t> indices) const {
    PairSet out{grid, {}, {}};
    for (auto k : indices) {
        if (k >= size()) fail(ErrorKind::invalid_argument, "subset index out of range", static_cast<long>(k));
        out.inputs.push_back(inputs[k]);
        out.targets.push_back(targets[k]);
    }
    return out;
}

EvalStats summarize(std::vector<double> errors) {
    EvalStats s;
    s.errors = std::move(errors);
    if (s.errors.empty()) return s;
    std::vector<double> sorted = s.errors;
    std::sort(sorted.begin(), sorted.end());
    const std::size_t n = sorted.size();
    s.median = n % 2 == 1 ? sorted[n / 2] : 0.5 * (sorted[n / 2 - 1] + sorted[n / 2]);
    s.max = sorted.back();
    double sum = 0.0;
    for (double e : s.errors) sum += e;
    s.mean = sum / static_cast<double>(n);
    return s;
}

EvalStats evaluate(const NOModel& model, const PairSet& data, std::size_t threads) {
    check_grid(model, data);
    std::vector<double> errors(data.size());
    parallel_for(data.size(), threads, [&](std::size_t k) {
        try {
            const Mat out = model.forward(row_of(data.inputs[k]));
            errors[k] = relative_l1(data.grid, std::span<const double>(out.data(), static_cast<std::size_t>(out.cols())),
                                    data.targets[k]);
        } catch (const Error& e) {
            throw Error(e.kind(), "record " + std::to_string(k) + ": " + e.what(), static_cast<long>(k));
        }
    });
    return summarize(std::move(errors));
}

void GradWorkspace::ensure(std::size_t batch, std::size_t nparams) {
    if (slots.size() < batch) slots.resize(batch);
    for (std::size_t b = 0; b < batch; ++b) slots[b].assign(nparams, 0.0);
    losses.assign(batch, 0.0);
}

double batch_gradient(const NOModel& model, const PairSet& data, std::span<const std::size_t> batch,
                      std::span<double> grads, std::size_t threads, GradWorkspace& ws) {
    check_grid(model, data);
    const std::size_t B = batch.size();
    require(B >= 1, "empty batch");
    require(grads.size() == model.num_params(), "gradient buffer size mismatch");
    ws.ensure(B, model.num_params());
    const double scale = 1.0 / static_cast<double>(B);
    parallel_for(B, threads, [&](std::size_t b) {
        const std::size_t k = batch[b];
        try {
            NOModel::Tape tape;
            const Mat out = model.forward(row_of(data.inputs[k]), &tape);
            Mat d_out(1, out.cols());
            ws.losses[b] = relative_l1_grad(
                data.grid, std::span<const double>(out.data(), static_cast<std::size_t>(out.cols())), data.targets[k],
                scale, std::span<double>(d_out.data(), static_cast<std::size_t>(d_out.cols())));
            model.backward(tape, d_out, ws.slots[b]);
        } catch (const Error& e) {
            throw Error(e.kind(), "record " + std::to_string(k) + ": " + e.what(), static_cast<long>(k));
        }
    });
    std::fill(grads.begin(), grads.end(), 0.0);
    double loss = 0.0;
    for (std::size_t b = 0; b < B; ++b) {
        const auto& g = ws.slots[b];
        for (std::size_t p = 0; p < grads.size(); ++p) grads[p] += g[p];
        loss += ws.losses[b];
    }
    return loss * scale;
}

TrainResult train(NOModel& model, const PairSet& train_set, const PairSet& val, const TrainConfig& config,
                  const EpochCallback& on_epoch) {
    config.validate();
    check_grid(model, train_set);
    require(train_set.size() >= 1, "training set is empty");
    const PairSet& val_set = val.size() > 0 ? val : train_set;
    check_grid(model, val_set);

    Adam adam(model.num_params());
    PlateauScheduler sched(config.learning_rate, config.patience, config.factor, config.threshold, config.min_lr);
    GradWorkspace ws;
    std::vector<double> grads(model.num_params());
    std::vector<double> best_params(model.params().begin(), model.params().end());

    TrainResult result;
    result.best_val = std::numeric_limits<double>::infinity();
    std::size_t since_best = 0;
    const std::size_t n = train_set.size();
    const std::size_t bs = std::min(config.batch_size, n);

    for (std::size_t epoch = 1; epoch <= config.max_epochs; ++epoch) {
        auto rng = CounterRng::stream(config.seed, epoch);
        const auto order = shuffled_indices(n, rng);
        const double lr = sched.lr();
        double loss_sum = 0.0;
        for (std::size_t start = 0; start < n; start += bs) {
            const std::size_t len = std::min(bs, n - start);
            const std::span<const std::size_t> batch(order.data() + start, len);
            const double loss = batch_gradient(model, train_set, batch, grads, config.threads, ws);
            loss_sum += loss * static_cast<double>(len);
            adam.step(model.params(), grads, lr);
        }
        EpochRecord rec;
        rec.epoch = epoch;
        rec.train_loss = loss_sum / static_cast<double>(n);
        rec.val_loss = evaluate(model, val_set, config.threads).mean;
        rec.lr = lr;
        if (!std::isfinite(rec.val_loss))
            fail(ErrorKind::numerical, "validation loss is not finite at epoch " + std::to_string(epoch));
        sched.step(rec.val_loss);
        result.history.push_back(rec);
        if (rec.val_loss < result.best_val) {
            result.best_val = rec.val_loss;
            result.best_epoch = epoch;
            std::copy(model.params().begin(), model.params().end(), best_params.begin());
            since_best = 0;
        } else {
            ++since_best;
        }
        if (on_epoch) on_epoch(rec);
        if (config.early_stop_patience > 0 && since_best >= config.early_stop_patience) {
            result.stopped_early = true;
            break;
        }
    }
    std::copy(best_params.begin(), best_params.end(), model.params().begin());
    return result;
}

} // namespace condlab::nop
