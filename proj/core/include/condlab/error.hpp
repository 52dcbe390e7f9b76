#pragma once

#include <optional>
#include <stdexcept>
#include <string>

namespace condlab {

enum class ErrorKind {
    invalid_argument,
    domain_violation,   // marginal below the declared delta
    out_of_domain,      // query outside the grid
    degenerate_query,   // mollified marginal vanished at the query
    degenerate_sample,  // zero-variance sample set
    numerical,          // non-finite intermediate
    io,
    format,             // malformed / corrupted file
};

const char* to_string(ErrorKind kind);

/// Single exception type for the library. `index` carries the offending
/// slice, record or layer index when one exists.
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what, std::optional<long> index = std::nullopt)
        : std::runtime_error(what), kind_(kind), index_(index) {}

    ErrorKind kind() const noexcept { return kind_; }
    std::optional<long> index() const noexcept { return index_; }

private:
    ErrorKind kind_;
    std::optional<long> index_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what,
                              std::optional<long> index = std::nullopt) {
    throw Error(kind, what, index);
}

inline void require(bool cond, const std::string& what) {
    if (!cond) fail(ErrorKind::invalid_argument, what);
}

} // namespace condlab
