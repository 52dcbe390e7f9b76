#include "condlab/audit/report.hpp"

#include "condlab/binio.hpp"
#include "condlab/error.hpp"

#include <algorithm>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <sstream>

namespace condlab::audit {

namespace {

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

double parse_double(const std::string& s, std::size_t line) {
    try {
        std::size_t pos = 0;
        const double v = std::stod(s, &pos);
        if (pos != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        fail(ErrorKind::format, "report line " + std::to_string(line) + ": bad number '" + s + "'");
    }
}

std::size_t parse_size(const std::string& s, std::size_t line) {
    try {
        std::size_t pos = 0;
        const auto v = std::stoull(s, &pos);
        if (pos != s.size()) throw std::invalid_argument(s);
        return static_cast<std::size_t>(v);
    } catch (const std::exception&) {
        fail(ErrorKind::format, "report line " + std::to_string(line) + ": bad count '" + s + "'");
    }
}

} // namespace

std::size_t AuditReport::violations() const noexcept {
    return static_cast<std::size_t>(std::count_if(trials.begin(), trials.end(), [&](const TrialRecord& t) {
        return !(t.ratio <= 1.0 + tol);
    }));
}

double AuditReport::max_ratio() const noexcept {
    double m = 0.0;
    for (const auto& t : trials) m = std::isnan(t.ratio) ? t.ratio : std::max(m, t.ratio);
    return m;
}

std::string summary_line(const AuditReport& r) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6g", r.max_ratio());
    return "audit " + r.name + ": trials=" + std::to_string(r.completed()) +
           " violations=" + std::to_string(r.violations()) + " max_ratio=" + buf;
}

std::string to_csv(const AuditReport& r) {
    std::ostringstream os;
    os << "# audit=" << r.name << '\n';
    os << "# tol=" << fmt(r.tol) << '\n';
    os << "# requested=" << r.requested << '\n';
    os << "# rejected=" << r.rejected << '\n';
    for (const auto& [k, v] : r.config) os << "# config." << k << '=' << v << '\n';
    os << "trial,lhs,rhs,ratio,delta\n";
    for (const auto& t : r.trials)
        os << t.trial << ',' << fmt(t.lhs) << ',' << fmt(t.rhs) << ',' << fmt(t.ratio) << ',' << fmt(t.delta) << '\n';
    return os.str();
}

AuditReport from_csv(const std::string& text) {
    AuditReport r;
    std::istringstream is(text);
    std::string line;
    std::size_t ln = 0;
    bool header = false;
    while (std::getline(is, line)) {
        ++ln;
        if (line.empty()) continue;
        if (line.rfind("# ", 0) == 0) {
            const auto eq = line.find('=');
            if (eq == std::string::npos) fail(ErrorKind::format, "report line " + std::to_string(ln) + ": expected key=value");
            const std::string key = line.substr(2, eq - 2);
            const std::string val = line.substr(eq + 1);
            if (key == "audit") r.name = val;
            else if (key == "tol") r.tol = parse_double(val, ln);
            else if (key == "requested") r.requested = parse_size(val, ln);
            else if (key == "rejected") r.rejected = parse_size(val, ln);
            else if (key.rfind("config.", 0) == 0) r.config.emplace_back(key.substr(7), val);
            else fail(ErrorKind::format, "report line " + std::to_string(ln) + ": unknown key '" + key + "'");
            continue;
        }
        if (!header) {
            if (line != "trial,lhs,rhs,ratio,delta")
                fail(ErrorKind::format, "report line " + std::to_string(ln) + ": unexpected header");
            header = true;
            continue;
        }
        std::vector<std::string> cells;
        std::stringstream ls(line);
        std::string cell;
        while (std::getline(ls, cell, ',')) cells.push_back(cell);
        if (cells.size() != 5) fail(ErrorKind::format, "report line " + std::to_string(ln) + ": expected 5 columns");
        r.trials.push_back({parse_size(cells[0], ln), parse_double(cells[1], ln), parse_double(cells[2], ln),
                            parse_double(cells[3], ln), parse_double(cells[4], ln)});
    }
    if (!header) fail(ErrorKind::format, "report has no header row");
    return r;
}

void write_report(const std::filesystem::path& path, const AuditReport& r) {
    const std::string s = to_csv(r);
    write_file(path, std::span<const std::uint8_t>(reinterpret_cast<const std::uint8_t*>(s.data()), s.size()));
}

AuditReport read_report(const std::filesystem::path& path) {
    const auto bytes = read_file(path);
    return from_csv(std::string(bytes.begin(), bytes.end()));
}

} // namespace condlab::audit
