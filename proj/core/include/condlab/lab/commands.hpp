#pragma once

#include "condlab/lab/config.hpp"

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace condlab::lab {

/// Process exit codes.
enum ExitCode : int {
    exit_ok = 0,
    exit_usage = 1,
    exit_validation = 2,  // invalid values, domain violations, header mismatches, incomplete audits
    exit_io = 3,          // unreadable, unwritable or corrupted files
    exit_violations = 4,  // an audited inequality failed
};

/// Exit code for a library error kind.
int exit_code_for(const std::exception& e);

struct Context {
    ExperimentConfig config;
    std::size_t threads = 0;
    bool strict = false;
    std::ostream* out = nullptr;
    std::ostream* err = nullptr;
};

/// Writes train/val/test datasets.
int gen_data(const Context& ctx);
/// Writes the KDE dataset (estimated joints with analytic targets).
int gen_kde(const Context& ctx);
/// Trains on train (optionally its first `subset` records) with val for scheduling and
/// checkpoint selection; writes the checkpoint and the history CSV.
int train(const Context& ctx);
/// Evaluates a checkpoint on a dataset (default: the test split) and writes the
/// per-record report CSV. With `oracle` set, predictions are the stored targets.
int eval(const Context& ctx, std::optional<std::filesystem::path> checkpoint,
         std::optional<std::filesystem::path> dataset, bool oracle = false);
/// Runs the named audits ("all" or any of kernel_lipschitz, l1_lipschitz,
/// holder_incontext, truncation, product_extension).
int audit(const Context& ctx, const std::vector<std::string>& which);
/// Plug-in conditional on the KDE dataset, alongside the model when a checkpoint exists.
int baseline_kde(const Context& ctx, std::optional<std::filesystem::path> checkpoint,
                 std::optional<std::filesystem::path> dataset);
/// One record of a dataset as CSV (i, j, x, y, joint, kernel).
int dump(const Context& ctx, const std::filesystem::path& file, std::size_t index,
         std::optional<std::filesystem::path> output);
/// Header and integrity summary of a dataset, checkpoint or audit report.
int inspect(const Context& ctx, const std::filesystem::path& file);
/// Rebuilds one record from a dataset header and compares it byte-for-byte with the file.
int regenerate(const Context& ctx, const std::filesystem::path& file, std::size_t index);

} // namespace condlab::lab
