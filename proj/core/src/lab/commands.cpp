#include "condlab/lab/commands.hpp"

#include "condlab/audit/audit.hpp"
#include "condlab/binio.hpp"
#include "condlab/error.hpp"
#include "condlab/estimator.hpp"
#include "condlab/lab/dataset.hpp"
#include "condlab/nop/checkpoint.hpp"
#include "condlab/nop/loss.hpp"
#include "condlab/nop/train.hpp"
#include "condlab/parallel.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <iomanip>
#include <iostream>
#include <sstream>

namespace condlab::lab {

namespace {

std::string g17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string g6(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

void write_text(const std::filesystem::path& path, const std::string& s) {
    write_file(path, std::span<const std::uint8_t>(reinterpret_cast<const std::uint8_t*>(s.data()), s.size()));
}

std::ostream& out(const Context& c) { return c.out ? *c.out : std::cout; }
std::ostream& err(const Context& c) { return c.err ? *c.err : std::cerr; }

void warn_paper(const Context& ctx, const char* what) {
    if (ctx.config.profile == Profile::paper)
        err(ctx) << "warning: the paper profile " << what
                 << " at full scale; expect hours of CPU time and several GB of disk\n";
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string describe_grid(const Grid2D& g) {
    std::ostringstream os;
    os << g.nx() << "x" << g.ny() << " on [" << g.x().lo() << ", " << g.x().hi() << "]x[" << g.y().lo() << ", "
       << g.y().hi() << "]";
    return os.str();
}

std::string describe_checkpoint(const nop::Checkpoint& c) {
    std::ostringstream os;
    os << "CNOP v" << nop::checkpoint_version << " kind=" << (c.kind == nop::CheckpointKind::oracle ? "oracle" : "model")
       << " grid=" << describe_grid(c.grid);
    if (c.model) {
        const auto& s = c.model->spec();
        os << " depth=" << s.hidden.size() << " lifting_width=" << s.lifting_width;
        if (!s.hidden.empty())
            os << " width=" << s.hidden.front().width << " rank=" << s.hidden.front().rank
               << " basis=" << nop::to_string(s.hidden.front().basis);
        os << " params=" << c.model->num_params();
    }
    return os.str();
}

std::vector<double> plugin_errors(const Dataset& d, double delta_floor, std::size_t threads,
                                  std::vector<std::size_t>* flagged) {
    const auto& g = d.header.grid;
    std::vector<double> errs(d.records.size());
    std::vector<std::size_t> flags(d.records.size());
    parallel_for(d.records.size(), threads, [&](std::size_t k) {
        try {
            const GridDensity2D rho(GridField2D(g, d.records[k].joint));
            const auto res = plugin_conditional(rho, delta_floor);
            flags[k] = res.flagged.size();
            errs[k] = nop::relative_l1(g, res.kernel.values(), d.records[k].kernel);
        } catch (const Error& e) {
            throw Error(e.kind(), "record " + std::to_string(k) + ": " + e.what(), static_cast<long>(k));
        }
    });
    if (flagged) *flagged = std::move(flags);
    return errs;
}

void print_row(std::ostream& os, const std::string& name, const std::string& model, const nop::EvalStats& s) {
    os << std::left << std::setw(22) << name << std::setw(12) << model << std::right << std::setw(12) << g6(s.median)
       << std::setw(12) << g6(s.max) << std::setw(12) << g6(s.mean) << '\n';
}

void print_table_header(std::ostream& os) {
    os << std::left << std::setw(22) << "dataset" << std::setw(12) << "model" << std::right << std::setw(12)
       << "median" << std::setw(12) << "max" << std::setw(12) << "mean" << '\n';
}

std::pair<std::size_t, std::size_t> index_range(const Axis& a, double lo, double hi) {
    std::size_t j0 = a.size(), j1 = 0;
    for (std::size_t j = 0; j < a.size(); ++j)
        if (a.node(j) >= lo && a.node(j) <= hi) {
            j0 = std::min(j0, j);
            j1 = j + 1;
        }
    if (j0 >= j1 || j1 - j0 < 2) fail(ErrorKind::invalid_argument, "audit B range holds fewer than two grid nodes");
    return {j0, j1};
}

} // namespace

int exit_code_for(const std::exception& e) {
    if (const auto* ce = dynamic_cast<const Error*>(&e)) {
        switch (ce->kind()) {
        case ErrorKind::io:
        case ErrorKind::format: return exit_io;
        default: return exit_validation;
        }
    }
    return exit_validation;
}

int gen_data(const Context& ctx) {
    warn_paper(ctx, "generates 50000/1000/1000 records");
    for (const char* split : {"train", "val", "test"}) {
        const auto t0 = std::chrono::steady_clock::now();
        const auto h = header_for(ctx.config, split);
        const auto path = ctx.config.dataset_path(split);
        save(path, generate(h, ctx.threads));
        out(ctx) << "wrote " << path.string() << " (" << h.describe() << ") in " << g6(seconds_since(t0)) << " s\n";
    }
    return exit_ok;
}

int gen_kde(const Context& ctx) {
    warn_paper(ctx, "generates KDE inputs");
    const auto t0 = std::chrono::steady_clock::now();
    const auto h = header_for(ctx.config, "kde");
    const auto path = ctx.config.dataset_path("kde");
    save(path, generate(h, ctx.threads));
    out(ctx) << "wrote " << path.string() << " (" << h.describe() << ") in " << g6(seconds_since(t0)) << " s\n";
    return exit_ok;
}

int train(const Context& ctx) {
    warn_paper(ctx, "trains a 128-wide model on 50000 records");
    const auto& c = ctx.config;
    const auto train_data = load(c.dataset_path("train"), ctx.strict);
    const auto train_set = to_pairs(train_data, c.train.subset);
    nop::PairSet val_set{train_set.grid, {}, {}};
    if (c.train.subset == 0) {
        const auto val_data = load(c.dataset_path("val"), ctx.strict);
        if (!(val_data.header.grid == train_data.header.grid)) {
            err(ctx) << "train: " << train_data.header.describe() << "\n  val: " << val_data.header.describe() << '\n';
            fail(ErrorKind::invalid_argument, "train and val grids differ");
        }
        val_set = to_pairs(val_data);
    }
    nop::NOModel model(c.model.spec(train_data.header.grid));
    model.initialize(c.model.init_seed);
    auto tc = c.train.train;
    tc.threads = ctx.threads;
    out(ctx) << "training " << model.num_params() << " parameters on " << train_set.size() << " records ("
             << describe_grid(train_set.grid) << ")" << (c.train.subset ? ", subset mode: validating on the subset" : "")
             << '\n';
    std::ostringstream hist;
    hist << "epoch,train_loss,val_loss,lr\n";
    const auto t0 = std::chrono::steady_clock::now();
    const auto result = nop::train(model, train_set, val_set, tc, [&](const nop::EpochRecord& r) {
        hist << r.epoch << ',' << g17(r.train_loss) << ',' << g17(r.val_loss) << ',' << g17(r.lr) << '\n';
        out(ctx) << "epoch " << r.epoch << " train=" << g6(r.train_loss) << " val=" << g6(r.val_loss)
                 << " lr=" << g6(r.lr) << " (" << g6(seconds_since(t0)) << " s)\n";
    });
    write_text(c.history_path(), hist.str());
    nop::save_checkpoint(c.checkpoint_path(), nop::Checkpoint::of(std::move(model)));
    out(ctx) << "best epoch " << result.best_epoch << " val=" << g6(result.best_val)
             << (result.stopped_early ? " (stopped early)" : "") << "\nwrote " << c.checkpoint_path().string()
             << " and " << c.history_path().string() << '\n';
    return exit_ok;
}

int eval(const Context& ctx, std::optional<std::filesystem::path> checkpoint,
         std::optional<std::filesystem::path> dataset, bool oracle) {
    const auto& c = ctx.config;
    const auto data_path = dataset.value_or(c.dataset_path("test"));
    const auto data = load(data_path, ctx.strict);
    const auto ck = oracle ? nop::Checkpoint::oracle(data.header.grid)
                           : nop::load_checkpoint(checkpoint.value_or(c.checkpoint_path()));
    if (!(ck.grid == data.header.grid)) {
        err(ctx) << "checkpoint: " << describe_checkpoint(ck) << "\n   dataset: " << data.header.describe() << '\n';
        fail(ErrorKind::invalid_argument, "checkpoint and dataset grids differ; refusing to evaluate");
    }
    const auto pairs = to_pairs(data);
    nop::EvalStats stats;
    if (ck.kind == nop::CheckpointKind::oracle) {
        std::vector<double> errs(pairs.size());
        for (std::size_t k = 0; k < pairs.size(); ++k)
            errs[k] = nop::relative_l1(pairs.grid, pairs.targets[k], pairs.targets[k]);
        stats = nop::summarize(std::move(errs));
    } else {
        stats = nop::evaluate(*ck.model, pairs, ctx.threads);
    }
    std::ostringstream csv;
    csv << "record,rel_l1\n";
    for (std::size_t k = 0; k < stats.errors.size(); ++k) csv << k << ',' << g17(stats.errors[k]) << '\n';
    csv << "median," << g17(stats.median) << "\nmax," << g17(stats.max) << "\nmean," << g17(stats.mean) << '\n';
    write_text(c.eval_report_path(), csv.str());
    print_table_header(out(ctx));
    print_row(out(ctx), data_path.filename().string(), ck.kind == nop::CheckpointKind::oracle ? "oracle" : "NO", stats);
    out(ctx) << "wrote " << c.eval_report_path().string() << '\n';
    return exit_ok;
}

int audit(const Context& ctx, const std::vector<std::string>& which) {
    const auto& a = ctx.config.audit;
    const double lo = ctx.config.data.grid_min, hi = ctx.config.data.grid_max;
    const std::vector<std::string> known{"kernel_lipschitz", "l1_lipschitz", "holder_incontext", "truncation",
                                         "product_extension"};
    std::vector<std::string> names;
    for (const auto& w : which) {
        if (w == "all") {
            names = known;
            break;
        }
        if (std::find(known.begin(), known.end(), w) == known.end())
            fail(ErrorKind::invalid_argument, "unknown audit '" + w + "'");
        if (std::find(names.begin(), names.end(), w) == names.end()) names.push_back(w);
    }
    if (names.empty()) names = known;

    audit::AuditOptions opt;
    opt.trials = a.trials;
    opt.tol = a.tol;
    opt.seed = a.seed;
    opt.threads = ctx.threads;
    opt.max_attempts = a.max_attempts;

    auto sampler_on = [&](std::size_t n) {
        audit::MixtureSamplerConfig sc;
        sc.grid = make_grid(lo, hi, n, lo, hi, n);
        sc.K = a.K;
        sc.ranges = ctx.config.data.ranges;
        return audit::mixture_pair_sampler(sc);
    };

    bool violations = false, incomplete = false;
    for (const auto& name : names) {
        const auto t0 = std::chrono::steady_clock::now();
        audit::AuditReport r;
        if (name == "kernel_lipschitz") {
            r = audit::audit_kernel_lipschitz(sampler_on(a.grid_n), a.delta_min, opt);
        } else if (name == "l1_lipschitz") {
            const auto g = make_grid(lo, hi, a.grid_n, lo, hi, a.grid_n);
            const auto [j0, j1] = index_range(g.y(), a.b_min, a.b_max);
            r = audit::audit_l1_lipschitz(sampler_on(a.grid_n), a.delta_min, j0, j1, opt);
        } else if (name == "holder_incontext") {
            r = audit::audit_holder_incontext(sampler_on(a.holder_grid_n), a.alpha, a.R, a.delta_min, a.holder_pairs,
                                              opt);
        } else if (name == "truncation") {
            r = audit::audit_truncation(audit::bump_field_sampler(make_grid(lo, hi, a.grid_n, lo, hi, a.grid_n)),
                                        a.M_grid, opt);
        } else {
            const auto g = make_grid(lo, hi, a.extension_grid_n, lo, hi, a.extension_grid_n);
            r = audit::audit_product_extension(audit::product_sampler(g), MollifierSchedule(a.schedule),
                                               a.extension_threshold, opt);
        }
        const auto path = ctx.config.audit_dir() / (name + ".csv");
        audit::write_report(path, r);
        out(ctx) << audit::summary_line(r) << '\n';
        out(ctx) << "  rejected=" << r.rejected << " completed=" << r.completed() << "/" << r.requested
                 << " time=" << g6(seconds_since(t0)) << "s report=" << path.string() << '\n';
        if (r.violations() > 0) violations = true;
        if (r.completed() < r.requested) {
            incomplete = true;
            err(ctx) << "audit " << name << ": only " << r.completed() << " of " << r.requested
                     << " trials met the preconditions (rejected " << r.rejected << ")\n";
        }
    }
    if (violations) return exit_violations;
    if (incomplete) return exit_validation;
    return exit_ok;
}

int baseline_kde(const Context& ctx, std::optional<std::filesystem::path> checkpoint,
                 std::optional<std::filesystem::path> dataset) {
    const auto& c = ctx.config;
    const auto data_path = dataset.value_or(c.dataset_path("kde"));
    const auto data = load(data_path, ctx.strict);
    std::vector<std::size_t> flagged;
    const auto plug = nop::summarize(plugin_errors(data, c.eval.delta_floor, ctx.threads, &flagged));

    std::optional<nop::EvalStats> model;
    const auto ck_path = checkpoint.value_or(c.checkpoint_path());
    if (checkpoint || std::filesystem::exists(ck_path)) {
        const auto ck = nop::load_checkpoint(ck_path);
        if (!(ck.grid == data.header.grid)) {
            err(ctx) << "checkpoint: " << describe_checkpoint(ck) << "\n   dataset: " << data.header.describe() << '\n';
            fail(ErrorKind::invalid_argument, "checkpoint and dataset grids differ; refusing to evaluate");
        }
        if (ck.kind == nop::CheckpointKind::model) model = nop::evaluate(*ck.model, to_pairs(data), ctx.threads);
    }

    std::ostringstream csv;
    csv << "record,plugin_err" << (model ? ",model_err" : "") << ",flagged_slices\n";
    for (std::size_t k = 0; k < plug.errors.size(); ++k) {
        csv << k << ',' << g17(plug.errors[k]);
        if (model) csv << ',' << g17(model->errors[k]);
        csv << ',' << flagged[k] << '\n';
    }
    write_text(c.kde_report_path(), csv.str());
    print_table_header(out(ctx));
    print_row(out(ctx), data_path.filename().string(), "plug-in", plug);
    if (model) print_row(out(ctx), data_path.filename().string(), "NO", *model);
    out(ctx) << "wrote " << c.kde_report_path().string() << '\n';
    return exit_ok;
}

int dump(const Context& ctx, const std::filesystem::path& file, std::size_t index,
         std::optional<std::filesystem::path> output) {
    const auto d = load(file, ctx.strict);
    if (index >= d.records.size())
        fail(ErrorKind::invalid_argument,
             "record " + std::to_string(index) + " out of range (file holds " + std::to_string(d.records.size()) + ")");
    const auto& r = d.records[index];
    const auto& g = d.header.grid;
    std::ostringstream csv;
    for (std::size_t k = 0; k < r.params.size(); ++k) {
        const auto& p = r.params[k];
        csv << "# component " << k << ": w=" << g17(p.weight) << " mu_x=" << g17(p.mu_x) << " mu_y=" << g17(p.mu_y)
            << " sigma_x=" << g17(p.sigma_x) << " sigma_y=" << g17(p.sigma_y) << " xi=" << g17(p.xi) << '\n';
    }
    csv << "i,j,x,y,joint,kernel\n";
    for (std::size_t i = 0; i < g.nx(); ++i)
        for (std::size_t j = 0; j < g.ny(); ++j) {
            const auto n = g.index(i, j);
            csv << i << ',' << j << ',' << g17(g.x().node(i)) << ',' << g17(g.y().node(j)) << ',' << g17(r.joint[n])
                << ',' << g17(r.kernel[n]) << '\n';
        }
    if (output) {
        write_text(*output, csv.str());
        out(ctx) << "wrote " << output->string() << '\n';
    } else {
        out(ctx) << csv.str();
    }
    return exit_ok;
}

int inspect(const Context& ctx, const std::filesystem::path& file) {
    const auto bytes = read_file(file);
    auto starts = [&](const char* m) { return bytes.size() >= 4 && std::equal(m, m + 4, bytes.begin()); };
    auto& os = out(ctx);
    if (starts("CNDD")) {
        const auto d = decode(bytes, ctx.strict, file.string());
        os << d.header.describe() << "\ncrc: ok\nbytes: " << bytes.size() << '\n';
        double min_delta = INFINITY, worst_slice = 0.0;
        for (const auto& r : d.records) {
            const auto& g = d.header.grid;
            const GridField2D joint(g, r.joint);
            const auto m = marginal_y(joint);
            for (std::size_t j = 0; j < g.ny(); ++j) min_delta = std::min(min_delta, m[j]);
            const auto km = marginal_y(GridField2D(g, r.kernel));
            for (std::size_t j = 0; j < g.ny(); ++j) worst_slice = std::max(worst_slice, std::abs(km[j] - 1.0));
        }
        if (!d.records.empty())
            os << "min joint marginal: " << g6(min_delta) << "\nmax |kernel slice mass - 1|: " << g6(worst_slice)
               << '\n';
        os << "strict checks: " << (ctx.strict ? "passed" : "skipped (use --strict)") << '\n';
        return exit_ok;
    }
    if (starts("CNOP")) {
        const auto ck = nop::decode_checkpoint(bytes, file.string());
        os << describe_checkpoint(ck) << "\ncrc: ok\nbytes: " << bytes.size() << '\n';
        return exit_ok;
    }
    const std::string text(bytes.begin(), bytes.end());
    if (text.rfind("# audit=", 0) == 0) {
        const auto r = audit::from_csv(text);
        os << audit::summary_line(r) << "\nrequested=" << r.requested << " rejected=" << r.rejected
           << " tol=" << g6(r.tol) << '\n';
        for (const auto& [k, v] : r.config) os << "  " << k << " = " << v << '\n';
        return exit_ok;
    }
    fail(ErrorKind::format, file.string() + ": not a dataset, checkpoint or audit report");
}

int regenerate(const Context& ctx, const std::filesystem::path& file, std::size_t index) {
    const auto bytes = read_file(file);
    (void)verify_crc(bytes, file.string());
    const auto h = decode_header(bytes, file.string());
    if (index >= h.count)
        fail(ErrorKind::invalid_argument,
             "record " + std::to_string(index) + " out of range (file holds " + std::to_string(h.count) + ")");
    const auto fresh = encode_record(h, make_record(h, index));
    const auto off = record_offset(h, index);
    const bool same = off + fresh.size() <= bytes.size() &&
                      std::equal(fresh.begin(), fresh.end(), bytes.begin() + static_cast<std::ptrdiff_t>(off));
    out(ctx) << "record " << index << " of " << file.string() << ": regenerated "
             << fresh.size() << " bytes, " << (same ? "identical" : "DIFFERENT") << '\n';
    return same ? exit_ok : exit_validation;
}

} // namespace condlab::lab
