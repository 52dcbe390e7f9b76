#pragma once

#include "condlab/grid.hpp"
#include "condlab/mixture.hpp"
#include "condlab/nop/spec.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace condlab::lab {

enum class Profile { desk, paper };
const char* to_string(Profile p);
Profile parse_profile(const std::string& s);

enum class Family : std::uint32_t { gmm_k1 = 0, gmm_k3 = 1, kde = 2 };
const char* to_string(Family f);

struct DataConfig {
    std::size_t K = 1;
    std::size_t n_train = 2000, n_val = 200, n_test = 200;
    double grid_min = -6.0, grid_max = 6.0;
    std::size_t grid_n = 32;
    ParamRanges ranges;
    std::uint64_t seed_train = 0, seed_val = 1, seed_test = 2;
    std::size_t kde_records = 200;
    std::size_t kde_samples = 2000;
    std::uint64_t kde_seed = 2;
    std::filesystem::path out_dir;  // empty: $CONDLAB_DATA_DIR, else ./condlab-data

    Grid2D grid() const;
};

struct ModelConfig {
    std::size_t width = 16, modes = 8, depth = 4, projection_width = 32;
    nop::Activation activation = nop::Activation::gelu;
    std::uint64_t init_seed = 0;

    nop::ModelSpec spec(const Grid2D& grid) const;
};

struct TrainSection {
    nop::TrainConfig train;
    std::size_t subset = 0;  // train on the first `subset` records only; 0 = all
    std::filesystem::path checkpoint;  // empty: <out_dir>/model.cnop
    std::filesystem::path history;     // empty: <out_dir>/history.csv
};

struct EvalConfig {
    std::filesystem::path report;       // empty: <out_dir>/eval.csv
    std::filesystem::path kde_report;   // empty: <out_dir>/baseline_kde.csv
    double delta_floor = 1e-6;
};

struct AuditConfig {
    std::size_t trials = 1000;
    double tol = 1e-9;
    std::uint64_t seed = 0;
    std::size_t max_attempts = 50;
    std::size_t K = 3;
    std::size_t grid_n = 32;
    double delta_min = 1e-3;
    double b_min = -3.0, b_max = 3.0;
    std::size_t holder_grid_n = 24;
    double alpha = 1.0;
    double R = 10.0;
    std::size_t holder_pairs = 0;
    std::vector<double> M_grid{0.5, 1.0, 2.0, 4.0};
    std::size_t extension_grid_n = 64;
    double extension_threshold = 5e-3;
    std::vector<double> schedule{0.5, 0.2, 0.1, 0.05, 0.02};
    std::filesystem::path report_dir;  // empty: <out_dir>/audit
};

struct ExperimentConfig {
    Profile profile = Profile::desk;
    DataConfig data;
    ModelConfig model;
    TrainSection train;
    EvalConfig eval;
    AuditConfig audit;

    static ExperimentConfig defaults(Profile p);

    /// Applies `key = value` settings from INI-style text on top of the profile
    /// defaults. The profile is taken from `profile_override` when given, else from a
    /// `profile` key in [model], else desk. Errors name the offending line.
    static ExperimentConfig parse(const std::string& text, const std::string& source,
                                  std::optional<Profile> profile_override = std::nullopt);
    static ExperimentConfig load(const std::filesystem::path& path,
                                 std::optional<Profile> profile_override = std::nullopt);

    void validate() const;

    std::filesystem::path out_dir() const;
    std::filesystem::path dataset_path(const std::string& split) const;  // train, val, test, kde
    std::filesystem::path checkpoint_path() const;
    std::filesystem::path history_path() const;
    std::filesystem::path eval_report_path() const;
    std::filesystem::path kde_report_path() const;
    std::filesystem::path audit_dir() const;

    /// --seed override: data seeds become N, N+1, N+2 (KDE N+2); train, init and audit seeds N.
    void override_seed(std::uint64_t seed);

    /// key = value lines for every setting, grouped by section.
    std::string dump() const;
};

} // namespace condlab::lab
