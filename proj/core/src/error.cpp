#include "condlab/error.hpp"

namespace condlab {

const char* to_string(ErrorKind kind) {
    switch (kind) {
    case ErrorKind::invalid_argument: return "invalid-argument";
    case ErrorKind::domain_violation: return "domain-violation";
    case ErrorKind::out_of_domain: return "out-of-domain";
    case ErrorKind::degenerate_query: return "degenerate-query";
    case ErrorKind::degenerate_sample: return "degenerate-sample";
    case ErrorKind::numerical: return "numerical";
    case ErrorKind::io: return "io";
    case ErrorKind::format: return "format";
    }
    return "unknown";
}

} // namespace condlab
