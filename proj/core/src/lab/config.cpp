#include "condlab/lab/config.hpp"

#include "condlab/binio.hpp"
#include "condlab/error.hpp"

#include <algorithm>

#include <cstdlib>
#include <functional>
#include <map>
#include <sstream>

namespace condlab::lab {

namespace {

struct ParseError {
    std::string message;
};

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

double to_double(const std::string& v) {
    std::size_t pos = 0;
    double d = 0.0;
    try {
        d = std::stod(v, &pos);
    } catch (const std::exception&) {
        throw ParseError{"expected a number, got '" + v + "'"};
    }
    if (pos != v.size()) throw ParseError{"expected a number, got '" + v + "'"};
    return d;
}

std::uint64_t to_u64(const std::string& v) {
    if (v.empty() || v.find_first_not_of("0123456789") != std::string::npos)
        throw ParseError{"expected a nonnegative integer, got '" + v + "'"};
    try {
        return std::stoull(v);
    } catch (const std::exception&) {
        throw ParseError{"integer out of range: '" + v + "'"};
    }
}

bool to_bool(const std::string& v) {
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    throw ParseError{"expected true or false, got '" + v + "'"};
}

std::vector<double> to_list(const std::string& v) {
    std::vector<double> out;
    std::istringstream is(v);
    std::string tok;
    while (is >> tok) {
        if (!tok.empty() && tok.back() == ',') tok.pop_back();
        if (!tok.empty()) out.push_back(to_double(tok));
    }
    if (out.empty()) throw ParseError{"expected a list of numbers"};
    return out;
}

std::string fmt(double v) {
    std::ostringstream os;
    os.precision(17);
    os << v;
    return os.str();
}

std::string fmt_list(const std::vector<double>& v) {
    std::string s;
    for (std::size_t k = 0; k < v.size(); ++k) s += (k ? " " : "") + fmt(v[k]);
    return s;
}

struct Entry {
    std::function<void(const std::string&)> set;
    std::function<std::string()> get;
};

using Table = std::map<std::string, std::map<std::string, Entry>>;

template <class T>
Entry size_entry(T& field) {
    return {[&field](const std::string& v) { field = static_cast<T>(to_u64(v)); },
            [&field] { return std::to_string(field); }};
}
Entry real_entry(double& field) {
    return {[&field](const std::string& v) { field = to_double(v); }, [&field] { return fmt(field); }};
}
Entry path_entry(std::filesystem::path& field) {
    return {[&field](const std::string& v) { field = v; }, [&field] { return field.string(); }};
}
Entry list_entry(std::vector<double>& field) {
    return {[&field](const std::string& v) { field = to_list(v); }, [&field] { return fmt_list(field); }};
}

Table make_table(ExperimentConfig& c) {
    Table t;
    auto& d = t["data"];
    d["K"] = size_entry(c.data.K);
    d["n_train"] = size_entry(c.data.n_train);
    d["n_val"] = size_entry(c.data.n_val);
    d["n_test"] = size_entry(c.data.n_test);
    d["grid_min"] = real_entry(c.data.grid_min);
    d["grid_max"] = real_entry(c.data.grid_max);
    d["grid_n"] = size_entry(c.data.grid_n);
    d["mean_min"] = real_entry(c.data.ranges.mean.lo);
    d["mean_max"] = real_entry(c.data.ranges.mean.hi);
    d["sigma_min"] = real_entry(c.data.ranges.sigma.lo);
    d["sigma_max"] = real_entry(c.data.ranges.sigma.hi);
    d["corr_min"] = real_entry(c.data.ranges.corr.lo);
    d["corr_max"] = real_entry(c.data.ranges.corr.hi);
    d["seed_train"] = size_entry(c.data.seed_train);
    d["seed_val"] = size_entry(c.data.seed_val);
    d["seed_test"] = size_entry(c.data.seed_test);
    d["kde_records"] = size_entry(c.data.kde_records);
    d["kde_samples"] = size_entry(c.data.kde_samples);
    d["kde_seed"] = size_entry(c.data.kde_seed);
    d["out_dir"] = path_entry(c.data.out_dir);

    auto& m = t["model"];
    m["profile"] = {[](const std::string&) {}, [&c] { return std::string(to_string(c.profile)); }};
    m["width"] = size_entry(c.model.width);
    m["modes"] = size_entry(c.model.modes);
    m["depth"] = size_entry(c.model.depth);
    m["projection_width"] = size_entry(c.model.projection_width);
    m["activation"] = {[&c](const std::string& v) {
                           try {
                               c.model.activation = nop::parse_activation(v);
                           } catch (const Error& e) {
                               throw ParseError{e.what()};
                           }
                       },
                       [&c] { return std::string(nop::to_string(c.model.activation)); }};
    m["init_seed"] = size_entry(c.model.init_seed);

    auto& tr = t["train"];
    auto& tc = c.train.train;
    tr["learning_rate"] = real_entry(tc.learning_rate);
    tr["batch_size"] = size_entry(tc.batch_size);
    tr["max_epochs"] = size_entry(tc.max_epochs);
    tr["patience"] = size_entry(tc.patience);
    tr["factor"] = real_entry(tc.factor);
    tr["min_lr"] = real_entry(tc.min_lr);
    tr["threshold"] = real_entry(tc.threshold);
    tr["early_stop_patience"] = size_entry(tc.early_stop_patience);
    tr["seed"] = size_entry(tc.seed);
    tr["verbose"] = {[&tc](const std::string& v) { tc.verbose = to_bool(v); },
                     [&tc] { return std::string(tc.verbose ? "true" : "false"); }};
    tr["subset"] = size_entry(c.train.subset);
    tr["checkpoint"] = path_entry(c.train.checkpoint);
    tr["history"] = path_entry(c.train.history);

    auto& ev = t["eval"];
    ev["report"] = path_entry(c.eval.report);
    ev["kde_report"] = path_entry(c.eval.kde_report);
    ev["delta_floor"] = real_entry(c.eval.delta_floor);

    auto& a = t["audit"];
    a["trials"] = size_entry(c.audit.trials);
    a["tol"] = real_entry(c.audit.tol);
    a["seed"] = size_entry(c.audit.seed);
    a["max_attempts"] = size_entry(c.audit.max_attempts);
    a["K"] = size_entry(c.audit.K);
    a["grid_n"] = size_entry(c.audit.grid_n);
    a["delta_min"] = real_entry(c.audit.delta_min);
    a["b_min"] = real_entry(c.audit.b_min);
    a["b_max"] = real_entry(c.audit.b_max);
    a["holder_grid_n"] = size_entry(c.audit.holder_grid_n);
    a["alpha"] = real_entry(c.audit.alpha);
    a["R"] = real_entry(c.audit.R);
    a["holder_pairs"] = size_entry(c.audit.holder_pairs);
    a["M_grid"] = list_entry(c.audit.M_grid);
    a["extension_grid_n"] = size_entry(c.audit.extension_grid_n);
    a["extension_threshold"] = real_entry(c.audit.extension_threshold);
    a["schedule"] = list_entry(c.audit.schedule);
    a["report_dir"] = path_entry(c.audit.report_dir);
    return t;
}

struct Line {
    std::size_t number;
    std::string section, key, value;
};

std::vector<Line> tokenize(const std::string& text, const std::string& source) {
    std::vector<Line> out;
    std::istringstream is(text);
    std::string raw, section;
    std::size_t n = 0;
    auto error = [&](const std::string& msg) {
        fail(ErrorKind::invalid_argument, source + ":" + std::to_string(n) + ": " + msg);
    };
    while (std::getline(is, raw)) {
        ++n;
        std::string line = raw;
        const auto hash = line.find_first_of("#;");
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']') error("unterminated section header");
            section = trim(line.substr(1, line.size() - 2));
            if (section.empty()) error("empty section name");
            static const char* const known[] = {"data", "model", "train", "eval", "audit"};
            if (std::find(std::begin(known), std::end(known), section) == std::end(known))
                error("unknown section [" + section + "]");
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) error("expected 'key = value'");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty()) error("missing key");
        if (section.empty()) error("key '" + key + "' appears before any [section]");
        out.push_back({n, section, key, value});
    }
    return out;
}

} // namespace

const char* to_string(Profile p) { return p == Profile::desk ? "desk" : "paper"; }

Profile parse_profile(const std::string& s) {
    if (s == "desk") return Profile::desk;
    if (s == "paper") return Profile::paper;
    fail(ErrorKind::invalid_argument, "unknown profile '" + s + "' (expected desk or paper)");
}

const char* to_string(Family f) {
    switch (f) {
    case Family::gmm_k1: return "gmm_k1";
    case Family::gmm_k3: return "gmm_k3";
    case Family::kde: return "kde";
    }
    return "?";
}

Grid2D DataConfig::grid() const { return make_grid(grid_min, grid_max, grid_n, grid_min, grid_max, grid_n); }

nop::ModelSpec ModelConfig::spec(const Grid2D& grid) const {
    auto s = nop::ModelSpec::spectral(grid, width, modes, depth, projection_width);
    s.lifting.activation = activation;
    s.projection.activation = activation;
    for (std::size_t l = 0; l + 1 < s.hidden.size(); ++l) s.hidden[l].activation = activation;
    return s;
}

ExperimentConfig ExperimentConfig::defaults(Profile p) {
    ExperimentConfig c;
    c.profile = p;
    if (p == Profile::paper) {
        c.data.n_train = 50000;
        c.data.n_val = 1000;
        c.data.n_test = 1000;
        c.data.grid_n = 64;
        c.data.kde_records = 1000;
        c.model.width = 128;
        c.model.modes = 16;
        c.model.projection_width = 128;
        c.audit.grid_n = 64;
        c.audit.holder_grid_n = 64;
        c.audit.holder_pairs = 1000000;
    } else {
        c.train.train.learning_rate = 1e-2;
        c.train.train.batch_size = 16;
    }
    return c;
}

ExperimentConfig ExperimentConfig::parse(const std::string& text, const std::string& source,
                                         std::optional<Profile> profile_override) {
    const auto lines = tokenize(text, source);
    Profile profile = Profile::desk;
    for (const auto& l : lines)
        if (l.section == "model" && l.key == "profile") {
            try {
                profile = parse_profile(l.value);
            } catch (const Error& e) {
                fail(ErrorKind::invalid_argument, source + ":" + std::to_string(l.number) + ": " + e.what());
            }
        }
    if (profile_override) profile = *profile_override;
    ExperimentConfig c = defaults(profile);
    auto table = make_table(c);
    std::map<std::pair<std::string, std::string>, std::size_t> seen;
    for (const auto& l : lines) {
        const std::string where = source + ":" + std::to_string(l.number) + ": ";
        auto sec = table.find(l.section);
        if (sec == table.end()) fail(ErrorKind::invalid_argument, where + "unknown section [" + l.section + "]");
        auto ent = sec->second.find(l.key);
        if (ent == sec->second.end())
            fail(ErrorKind::invalid_argument, where + "unknown key '" + l.key + "' in [" + l.section + "]");
        auto [it, fresh] = seen.emplace(std::make_pair(l.section, l.key), l.number);
        if (!fresh)
            fail(ErrorKind::invalid_argument,
                 where + "duplicate key '" + l.key + "' (first set on line " + std::to_string(it->second) + ")");
        try {
            ent->second.set(l.value);
        } catch (const ParseError& e) {
            fail(ErrorKind::invalid_argument, where + l.key + ": " + e.message);
        }
    }
    try {
        c.validate();
    } catch (const Error& e) {
        fail(ErrorKind::invalid_argument, source + ": " + e.what());
    }
    return c;
}

ExperimentConfig ExperimentConfig::load(const std::filesystem::path& path, std::optional<Profile> profile_override) {
    const auto bytes = read_file(path);
    return parse(std::string(bytes.begin(), bytes.end()), path.string(), profile_override);
}

void ExperimentConfig::validate() const {
    require(data.K == 1 || data.K == 3, "data.K must be 1 or 3");
    require(data.grid_min < data.grid_max, "data.grid_min must be below data.grid_max");
    require(data.grid_n >= 2, "data.grid_n must be at least 2");
    data.ranges.validate();
    require(data.n_train >= 1, "data.n_train must be positive");
    require(data.kde_samples >= 1, "data.kde_samples must be positive");
    require(model.width >= 1 && model.modes >= 1 && model.projection_width >= 1, "model sizes must be positive");
    train.train.validate();
    require(eval.delta_floor > 0.0, "eval.delta_floor must be positive");
    require(audit.trials >= 1, "audit.trials must be positive");
    require(audit.tol >= 0.0, "audit.tol must be nonnegative");
    require(audit.K >= 1, "audit.K must be positive");
    require(audit.grid_n >= 2 && audit.holder_grid_n >= 2 && audit.extension_grid_n >= 2,
            "audit grid sizes must be at least 2");
    require(audit.delta_min > 0.0, "audit.delta_min must be positive");
    require(audit.b_min < audit.b_max, "audit.b_min must be below audit.b_max");
    require(audit.alpha > 0.0 && audit.alpha <= 1.0, "audit.alpha must lie in (0, 1]");
    require(audit.R > 0.0, "audit.R must be positive");
    require(audit.extension_threshold > 0.0, "audit.extension_threshold must be positive");
    for (std::size_t k = 0; k < audit.M_grid.size(); ++k)
        require(audit.M_grid[k] > 0.0 && (k == 0 || audit.M_grid[k] > audit.M_grid[k - 1]),
                "audit.M_grid must be positive and increasing");
}

std::filesystem::path ExperimentConfig::out_dir() const {
    if (!data.out_dir.empty()) return data.out_dir;
    if (const char* env = std::getenv("CONDLAB_DATA_DIR"); env != nullptr && *env != '\0') return env;
    return "condlab-data";
}

std::filesystem::path ExperimentConfig::dataset_path(const std::string& split) const {
    return out_dir() / (split + ".cndd");
}

std::filesystem::path ExperimentConfig::checkpoint_path() const {
    return train.checkpoint.empty() ? out_dir() / "model.cnop" : train.checkpoint;
}
std::filesystem::path ExperimentConfig::history_path() const {
    return train.history.empty() ? out_dir() / "history.csv" : train.history;
}
std::filesystem::path ExperimentConfig::eval_report_path() const {
    return eval.report.empty() ? out_dir() / "eval.csv" : eval.report;
}
std::filesystem::path ExperimentConfig::kde_report_path() const {
    return eval.kde_report.empty() ? out_dir() / "baseline_kde.csv" : eval.kde_report;
}
std::filesystem::path ExperimentConfig::audit_dir() const {
    return audit.report_dir.empty() ? out_dir() / "audit" : audit.report_dir;
}

void ExperimentConfig::override_seed(std::uint64_t seed) {
    data.seed_train = seed;
    data.seed_val = seed + 1;
    data.seed_test = seed + 2;
    data.kde_seed = seed + 2;
    model.init_seed = seed;
    train.train.seed = seed;
    audit.seed = seed;
}

std::string ExperimentConfig::dump() const {
    auto copy = *this;
    auto table = make_table(copy);
    std::ostringstream os;
    for (const char* sec : {"data", "model", "train", "eval", "audit"}) {
        os << '[' << sec << "]\n";
        for (const auto& [k, e] : table.at(sec)) os << k << " = " << e.get() << '\n';
    }
    return os.str();
}

} // namespace condlab::lab
