#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

namespace condlab::audit {

/// One inequality instance: lhs <= rhs is certified when ratio = lhs / rhs <= 1 + tol.
/// `delta` is the marginal lower bound used in the bound (0 where none applies).
struct TrialRecord {
    std::size_t trial = 0;
    double lhs = 0.0;
    double rhs = 0.0;
    double ratio = 0.0;
    double delta = 0.0;

    bool operator==(const TrialRecord&) const = default;
};

struct AuditReport {
    std::string name;
    double tol = 1e-9;
    std::size_t requested = 0;
    std::size_t rejected = 0;  // sampled instances discarded for failing preconditions
    std::vector<std::pair<std::string, std::string>> config;  // echo of the settings used
    std::vector<TrialRecord> trials;                           // sorted by trial id

    std::size_t completed() const noexcept { return trials.size(); }
    std::size_t violations() const noexcept;
    double max_ratio() const noexcept;
    bool operator==(const AuditReport&) const = default;
};

/// `audit <name>: trials=<n> violations=<v> max_ratio=<r>`
std::string summary_line(const AuditReport& r);

/// CSV with `# key=value` preamble lines and one row per trial; doubles use %.17g so a
/// read-back reproduces every value exactly.
std::string to_csv(const AuditReport& r);
AuditReport from_csv(const std::string& text);
void write_report(const std::filesystem::path& path, const AuditReport& r);
AuditReport read_report(const std::filesystem::path& path);

} // namespace condlab::audit
