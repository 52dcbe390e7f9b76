#include "condlab/error.hpp"
#include "condlab/lab/commands.hpp"
#include "condlab/lab/config.hpp"

#include <CLI11.hpp>

#include <iostream>
#include <optional>
#include <string>
#include <vector>

namespace {

using condlab::lab::Context;

struct Globals {
    std::string config;
    std::string profile;
    std::optional<std::uint64_t> seed;
    bool strict = false;
    std::size_t threads = 0;
};

Context make_context(const Globals& g) {
    std::optional<condlab::lab::Profile> profile;
    if (!g.profile.empty()) profile = condlab::lab::parse_profile(g.profile);
    Context ctx;
    ctx.config = g.config.empty() ? condlab::lab::ExperimentConfig::defaults(profile.value_or(condlab::lab::Profile::desk))
                                  : condlab::lab::ExperimentConfig::load(g.config, profile);
    if (g.seed) ctx.config.override_seed(*g.seed);
    ctx.config.validate();
    ctx.threads = g.threads;
    ctx.strict = g.strict;
    ctx.out = &std::cout;
    ctx.err = &std::cerr;
    return ctx;
}

std::optional<std::filesystem::path> opt_path(const std::string& s) {
    if (s.empty()) return std::nullopt;
    return std::filesystem::path(s);
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"condlab: conditioning operators, neural-operator training and stability audits"};
    app.require_subcommand(1);
    app.fallthrough();

    Globals g;
    app.add_option("--config", g.config, "Experiment configuration file");
    app.add_option("--profile", g.profile, "Parameter profile")->check(CLI::IsMember({"desk", "paper"}));
    app.add_option("--seed", g.seed, "Override every seed (data splits use N, N+1, N+2)");
    app.add_flag("--strict", g.strict, "Validate every record on load");
    app.add_option("--threads", g.threads, "Worker threads; 0 runs the serial reference path")->capture_default_str();

    auto* gen_data = app.add_subcommand("gen-data", "Write train/val/test datasets");
    std::string regen_file;
    std::size_t regen_index = 0;
    gen_data->add_option("--regenerate", regen_file, "Rebuild one record of FILE and compare it byte-for-byte");
    gen_data->add_option("--index", regen_index, "Record index for --regenerate");

    auto* gen_kde = app.add_subcommand("gen-kde", "Write the KDE dataset (estimated joints, analytic targets)");
    auto* train = app.add_subcommand("train", "Train the neural operator");

    auto* eval = app.add_subcommand("eval", "Evaluate a checkpoint on a dataset");
    std::string eval_ck, eval_ds;
    bool eval_oracle = false;
    eval->add_option("--checkpoint", eval_ck, "Checkpoint (default from config)");
    eval->add_option("--dataset", eval_ds, "Dataset (default: the test split)");
    eval->add_flag("--oracle", eval_oracle, "Passthrough predictions equal to the stored targets");

    auto* audit = app.add_subcommand("audit", "Run stability audits");
    std::vector<std::string> audit_names;
    audit->add_option("names", audit_names,
                      "all, kernel_lipschitz, l1_lipschitz, holder_incontext, truncation, product_extension");

    auto* base = app.add_subcommand("baseline-kde", "Plug-in KDE conditional vs the trained model");
    std::string base_ck, base_ds;
    base->add_option("--checkpoint", base_ck, "Checkpoint (default from config, if present)");
    base->add_option("--dataset", base_ds, "KDE dataset (default from config)");

    auto* dump = app.add_subcommand("dump", "Export one dataset record as CSV");
    std::string dump_file, dump_out;
    std::size_t dump_index = 0;
    dump->add_option("file", dump_file, "Dataset file")->required();
    dump->add_option("--index", dump_index, "Record index");
    dump->add_option("--output", dump_out, "Output CSV (default: stdout)");

    auto* inspect = app.add_subcommand("inspect", "Describe a dataset, checkpoint or audit report");
    std::string inspect_file;
    inspect->add_option("file", inspect_file, "File to inspect")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        (void)app.exit(e);
        return condlab::lab::exit_usage;
    }

    try {
        const Context ctx = make_context(g);
        if (*gen_data) {
            if (!regen_file.empty()) return condlab::lab::regenerate(ctx, regen_file, regen_index);
            return condlab::lab::gen_data(ctx);
        }
        if (*gen_kde) return condlab::lab::gen_kde(ctx);
        if (*train) return condlab::lab::train(ctx);
        if (*eval) return condlab::lab::eval(ctx, opt_path(eval_ck), opt_path(eval_ds), eval_oracle);
        if (*audit) return condlab::lab::audit(ctx, audit_names);
        if (*base) return condlab::lab::baseline_kde(ctx, opt_path(base_ck), opt_path(base_ds));
        if (*dump) return condlab::lab::dump(ctx, dump_file, dump_index, opt_path(dump_out));
        if (*inspect) return condlab::lab::inspect(ctx, inspect_file);
    } catch (const condlab::Error& e) {
        std::cerr << "error (" << condlab::to_string(e.kind()) << "): " << e.what() << '\n';
        return condlab::lab::exit_code_for(e);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return condlab::lab::exit_code_for(e);
    }
    return condlab::lab::exit_usage;
}
