#include "lagctl/config.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numbers>
#include <set>
#include <sstream>

namespace lagctl {

namespace {

std::string trim(std::string_view s) {
    std::size_t a = 0, b = s.size();
    while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
    while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
    return std::string(s.substr(a, b - a));
}

std::string join(const std::vector<std::string>& parts, const std::string& sep) {
    std::string out;
    for (std::size_t i = 0; i < parts.size(); ++i) out += (i ? sep : "") + parts[i];
    return out;
}

}  // namespace

// ------------------------------------------------------------ parsing

ConfigFile parse_config(const std::string& text) {
    ConfigFile file;
    file.text = text;
    file.sections[""];
    std::string section;
    std::istringstream in(text);
    std::string raw;
    int line = 0;
    while (std::getline(in, raw)) {
        ++line;
        // Strip comments outside quotes.
        bool quoted = false;
        std::size_t cut = raw.size();
        for (std::size_t i = 0; i < raw.size(); ++i) {
            if (raw[i] == '"') quoted = !quoted;
            if (!quoted && (raw[i] == '#' || raw[i] == ';')) {
                cut = i;
                break;
            }
        }
        const std::string body = trim(std::string_view(raw).substr(0, cut));
        if (body.empty()) continue;
        if (body.front() == '[') {
            if (body.back() != ']') throw ParseError("unterminated section header", static_cast<std::size_t>(line));
            section = trim(std::string_view(body).substr(1, body.size() - 2));
            if (section.empty()) throw ParseError("empty section name", static_cast<std::size_t>(line));
            file.sections[section];
            continue;
        }
        const auto eq = body.find('=');
        if (eq == std::string::npos) throw ParseError("expected 'key = value'", static_cast<std::size_t>(line));
        const std::string key = trim(std::string_view(body).substr(0, eq));
        std::string value = trim(std::string_view(body).substr(eq + 1));
        if (key.empty()) throw ParseError("missing key", static_cast<std::size_t>(line));
        ConfigEntry entry;
        entry.line = line;
        if (!value.empty() && value.front() == '"') {
            if (value.size() < 2 || value.back() != '"')
                throw ParseError("unterminated string", static_cast<std::size_t>(line));
            value = value.substr(1, value.size() - 2);
            entry.quoted = true;
        }
        entry.value = value;
        auto& sec = file.sections[section];
        if (sec.count(key))
            throw ParseError("duplicate key '" + key + "' in section [" + section + "]", static_cast<std::size_t>(line));
        sec[key] = entry;
    }
    return file;
}

ConfigFile read_config(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ValidationError("cannot read config file '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str());
}

ConfigErrors::ConfigErrors(std::vector<std::string> messages)
    : ValidationError("invalid configuration:\n  " + join(messages, "\n  ")), messages_(std::move(messages)) {}

std::optional<Task> parse_task(const std::string& name) {
    static const std::map<std::string, Task> tasks{{"reduce", Task::Reduce}, {"synthesize", Task::Synthesize},
                                                   {"simulate", Task::Simulate}, {"sweep", Task::Sweep},
                                                   {"check", Task::Check}, {"shoot", Task::Shoot}};
    auto it = tasks.find(name);
    if (it == tasks.end()) return std::nullopt;
    return it->second;
}

std::string task_name(Task task) {
    switch (task) {
        case Task::Reduce: return "reduce";
        case Task::Synthesize: return "synthesize";
        case Task::Simulate: return "simulate";
        case Task::Sweep: return "sweep";
        case Task::Check: return "check";
        case Task::Shoot: return "shoot";
    }
    return "?";
}

// ------------------------------------------------------------ validation

namespace {

/// Typed access with error collection and unknown-key detection.
class Reader {
public:
    explicit Reader(const ConfigFile& file) : file_(file) {}

    bool has_section(const std::string& s) const { return file_.sections.count(s) > 0; }

    std::vector<std::string> keys(const std::string& s) const {
        std::vector<std::string> out;
        auto it = file_.sections.find(s);
        if (it != file_.sections.end())
            for (const auto& [k, v] : it->second) out.push_back(k);
        return out;
    }

    const ConfigEntry* find(const std::string& s, const std::string& key) {
        auto sec = file_.sections.find(s);
        if (sec == file_.sections.end()) return nullptr;
        auto it = sec->second.find(key);
        if (it == sec->second.end()) return nullptr;
        used_.insert(s + "\x1f" + key);
        return &it->second;
    }

    void error(const std::string& s, const std::string& key, const std::string& what) {
        errors.push_back(where(s, key) + ": " + what);
    }
    void missing(const std::string& s, const std::string& key) { error(s, key, "required field is missing"); }

    std::optional<double> number(const std::string& s, const std::string& key) {
        const auto* e = find(s, key);
        if (!e) return std::nullopt;
        auto v = to_double(e->value);
        if (!v) error(s, key, "expected a number, got '" + e->value + "'");
        return v;
    }

    double number_or(const std::string& s, const std::string& key, double fallback) {
        return number(s, key).value_or(fallback);
    }

    std::optional<long long> integer(const std::string& s, const std::string& key) {
        const auto* e = find(s, key);
        if (!e) return std::nullopt;
        long long v = 0;
        const auto* end = e->value.data() + e->value.size();
        auto [ptr, ec] = std::from_chars(e->value.data(), end, v);
        if (ec != std::errc() || ptr != end) {
            error(s, key, "expected an integer, got '" + e->value + "'");
            return std::nullopt;
        }
        return v;
    }

    std::optional<std::vector<double>> list(const std::string& s, const std::string& key) {
        const auto* e = find(s, key);
        if (!e) return std::nullopt;
        std::vector<double> out;
        std::string tok;
        std::istringstream in(replace_commas(e->value));
        while (in >> tok) {
            auto v = to_double(tok);
            if (!v) {
                error(s, key, "expected a list of numbers, got '" + e->value + "'");
                return std::nullopt;
            }
            out.push_back(*v);
        }
        return out;
    }

    std::optional<Vector> vector(const std::string& s, const std::string& key, int dim) {
        auto l = list(s, key);
        if (!l) return std::nullopt;
        if (static_cast<int>(l->size()) != dim) {
            error(s, key, "expected " + std::to_string(dim) + " components, got " + std::to_string(l->size()));
            return std::nullopt;
        }
        return Eigen::Map<const Vector>(l->data(), dim);
    }

    std::optional<bool> boolean(const std::string& s, const std::string& key) {
        const auto* e = find(s, key);
        if (!e) return std::nullopt;
        if (e->value == "true" || e->value == "yes" || e->value == "1") return true;
        if (e->value == "false" || e->value == "no" || e->value == "0") return false;
        error(s, key, "expected true or false, got '" + e->value + "'");
        return std::nullopt;
    }

    /// Indexed keys prefix.1 .. prefix.count; missing ones are reported.
    std::vector<const ConfigEntry*> indexed(const std::string& s, const std::string& prefix, int count, bool required) {
        std::vector<const ConfigEntry*> out;
        for (int i = 1; i <= count; ++i) {
            const std::string key = prefix + "." + std::to_string(i);
            const auto* e = find(s, key);
            if (!e && required) missing(s, key);
            out.push_back(e);
        }
        return out;
    }

    void mark_used(const std::string& s, const std::string& key) { used_.insert(s + "\x1f" + key); }

    void report_unknown() {
        for (const auto& [s, entries] : file_.sections)
            for (const auto& [key, entry] : entries)
                if (!used_.count(s + "\x1f" + key)) error(s, key, "unknown key (line " + std::to_string(entry.line) + ")");
    }

    std::vector<std::string> errors;

private:
    static std::string where(const std::string& s, const std::string& key) {
        return s.empty() ? key : "[" + s + "] " + key;
    }
    static std::string replace_commas(std::string v) {
        std::replace(v.begin(), v.end(), ',', ' ');
        return v;
    }
    static std::optional<double> to_double(const std::string& text) {
        const std::string t = trim(text);
        if (t.empty()) return std::nullopt;
        char* end = nullptr;
        const double v = std::strtod(t.c_str(), &end);
        if (end != t.c_str() + t.size() || !std::isfinite(v)) return std::nullopt;
        return v;
    }

    const ConfigFile& file_;
    std::set<std::string> used_;
};

}  // namespace

SymbolTable system_symbols(const SystemConfig& sys) {
    std::vector<std::string> names;
    for (const auto& [k, v] : sys.params) names.push_back(k);
    SymbolTable table = SymbolTable::mechanical(sys.n, sys.m, names);
    for (std::size_t i = 0; i < sys.names.size(); ++i) {
        const std::string target = static_cast<int>(i) < sys.n ? "q" + std::to_string(i + 1)
                                                                : "u" + std::to_string(i + 1 - sys.n);
        table.alias(sys.names[i], target);
    }
    return table;
}

namespace {

SymbolTable variable_symbols(const std::string& variable, const std::map<std::string, double>& params) {
    SymbolTable table;
    table.add(variable);
    for (const auto& [k, v] : params)
        if (k != variable) table.add(k);
    return table;
}

std::map<std::string, double> with_horizon(std::map<std::string, double> params, double T) {
    params["T"] = T;
    return params;
}

void read_system(Reader& r, RunConfig& cfg) {
    const bool mech = r.has_section("mechanical");
    const bool direct = r.has_section("direct");
    if (mech == direct) {
        r.errors.push_back(mech ? "exactly one of [mechanical] and [direct] may be present"
                                : "missing system block: add [mechanical] or [direct]");
        return;
    }
    const std::string s = mech ? "mechanical" : "direct";
    SystemConfig& sys = cfg.system;
    sys.mechanical = mech;
    const auto n = r.integer(s, "n");
    const auto m = r.integer(s, "m");
    if (!n) {
        if (!r.find(s, "n")) r.missing(s, "n");
    } else if (*n < 1 || *n > 64) {
        r.error(s, "n", "must be between 1 and 64");
    }
    if (!m) {
        if (!r.find(s, "m")) r.missing(s, "m");
    } else if (*m < 1 || *m > 64) {
        r.error(s, "m", "must be between 1 and 64");
    }
    if (const auto* e = r.find(s, "names")) {
        std::istringstream in(e->value);
        std::string tok;
        while (in >> tok) sys.names.push_back(tok);
    }

    for (const auto& key : r.keys(s)) {
        if (key.rfind("param.", 0) == 0) {
            const std::string name = key.substr(6);
            if (name.empty()) {
                r.error(s, key, "empty parameter name");
                continue;
            }
            if (auto v = r.number(s, key)) sys.params[name] = *v;
        }
    }
    if (!sys.params.count("pi")) sys.params["pi"] = std::numbers::pi;
    if (!n || !m || *n < 1 || *m < 1 || *n > 64 || *m > 64) return;
    sys.n = static_cast<int>(*n);
    sys.m = static_cast<int>(*m);
    if (!sys.names.empty() && static_cast<int>(sys.names.size()) != sys.n + sys.m)
        r.error(s, "names", "expected " + std::to_string(sys.n + sys.m) + " names (q then u)");

    SymbolTable table;
    try {
        if (static_cast<int>(sys.names.size()) != sys.n + sys.m) sys.names.clear();
        table = system_symbols(sys);
    } catch (const ValidationError& e) {
        r.error(s, "names", e.what());
        sys.names.clear();
        table = system_symbols(sys);
    }

    auto take = [&](const std::string& block, int rows, int cols, bool upper, bool require_diag) {
        for (int i = 1; i <= rows; ++i) {
            for (int j = 1; j <= cols; ++j) {
                const std::string key = block + "." + std::to_string(i) + "." + std::to_string(j);
                const auto* e = r.find(s, key);
                if (upper && j < i) {
                    if (e) r.error(s, key, "only the upper triangle (i <= j) may be given");
                    continue;
                }
                if (!e) {
                    if (require_diag && i == j) r.missing(s, key);
                    continue;
                }
                if (!e->quoted) r.error(s, key, "expressions must be quoted");
                try {
                    (void)parse_expression(e->value, table);
                    sys.entries[key] = e->value;
                } catch (const ValidationError& ex) {
                    r.error(s, key, ex.what());
                }
            }
        }
    };
    if (mech) {
        take("G", sys.n + sys.m, sys.n + sys.m, true, true);
    } else {
        take("A", sys.n, sys.n, true, true);
        take("K", sys.n, sys.m, false, false);
        take("E", sys.m, sys.m, true, false);
    }
}


IntegratorConfig read_integrator(Reader& r, const std::string& s, IntegratorConfig cfg) {
    cfg.rtol = r.number_or(s, "rtol", cfg.rtol);
    cfg.atol = r.number_or(s, "atol", cfg.atol);
    cfg.max_step = r.number_or(s, "max_step", cfg.max_step);
    if (auto v = r.integer(s, "steps_per_period")) cfg.steps_per_period = static_cast<int>(*v);
    if (auto v = r.integer(s, "stride")) cfg.stride = static_cast<int>(*v);
    if (auto v = r.integer(s, "max_steps")) cfg.max_steps = static_cast<std::size_t>(std::max(0LL, *v));
    try {
        cfg.validate();
    } catch (const ValidationError& e) {
        r.errors.push_back("[" + s + "] " + e.what());
    }
    return cfg;
}

// Quoted expressions in `variable`, or sample lists on a shared grid.
void read_path(Reader& r, RunConfig& cfg) {
    const std::string s = "path";
    PathConfig& path = cfg.path;
    path.present = true;
    const int m = cfg.system.m;
    path.eps0 = r.number_or(s, "eps0", path.eps0);
    if (!(path.eps0 > 0.0 && path.eps0 < 0.5)) r.error(s, "eps0", "must lie in (0, 0.5)");
    path.cutoff = r.boolean(s, "cutoff").value_or(true);
    if (auto g = r.list(s, "grid")) path.grid = *g;

    const auto table = variable_symbols("s", cfg.system.params);
    int quoted = 0, lists = 0;
    for (const char* block : {"u", "w"}) {
        for (const auto* e : r.indexed(s, block, m, true)) {
            if (!e) continue;
            if (e->quoted) {
                ++quoted;
                try {
                    (void)parse_expression(e->value, table);
                } catch (const ValidationError& ex) {
                    r.errors.push_back(std::string("[path] ") + block + ": " + ex.what());
                }
                (block[0] == 'u' ? path.u_expr : path.w_expr).push_back(e->value);
            } else {
                ++lists;
                std::vector<double> values;
                std::istringstream in(e->value);
                double x;
                while (in >> x) values.push_back(x);
                if (!in.eof()) r.errors.push_back(std::string("[path] ") + block + ": expected numbers");
                (block[0] == 'u' ? path.u_samples : path.w_samples).push_back(values);
            }
        }
    }
    if (quoted && lists) r.errors.push_back("[path] u.* and w.* must all be expressions or all be sample lists");
    if (lists && !quoted) {
        if (path.grid.size() < 2) r.missing(s, "grid");
        for (const auto* rows : {&path.u_samples, &path.w_samples})
            for (const auto& row : *rows)
                if (row.size() != path.grid.size())
                    r.errors.push_back("[path] every sample list needs " + std::to_string(path.grid.size()) + " values");
    }
}

void read_dictionary(Reader& r, RunConfig& cfg) {
    const std::string s = "dictionary";
    DictionaryConfig& d = cfg.dictionary;
    d.present = true;
    const int n = cfg.system.n, m = cfg.system.m;
    if (auto e = r.number(s, "epsilon")) d.epsilon = *e;
    else if (!r.find(s, "epsilon")) r.missing(s, "epsilon");
    if (!(d.epsilon > 0.0)) r.error(s, "epsilon", "must be positive");
    for (int i = 1;; ++i) {
        const std::string key = "w." + std::to_string(i);
        if (!r.find(s, key)) break;
        if (auto v = r.vector(s, key, m)) d.vectors.push_back(*v);
    }
    if (!d.vectors.empty()) return;
    if (auto v = r.integer(s, "samples")) {
        if (*v < 1) r.error(s, "samples", "must be positive");
        else d.samples = static_cast<std::size_t>(*v);
    }
    auto box = [&](const char* key, int dim, Vector& out) {
        if (auto v = r.vector(s, key, dim)) out = *v;
        else if (!r.find(s, key)) r.missing(s, key);
    };
    box("q_lo", n, d.q_lo);
    box("q_hi", n, d.q_hi);
    box("u_lo", m, d.u_lo);
    box("u_hi", m, d.u_hi);
    d.w_radius = r.number_or(s, "w_radius", d.w_radius);
    if (auto v = r.integer(s, "max_generators")) d.max_generators = static_cast<std::size_t>(std::max(1LL, *v));
    if (auto v = r.integer(s, "directions")) d.directions = static_cast<int>(std::max(1LL, *v));
}

std::vector<std::string> read_time_expressions(Reader& r, const std::string& s, const char* block, int count,
                                               const SymbolTable& table) {
    std::vector<std::string> out;
    int i = 0;
    for (const auto* e : r.indexed(s, block, count, true)) {
        ++i;
        if (!e) continue;
        const std::string key = std::string(block) + "." + std::to_string(i);
        if (!e->quoted) r.error(s, key, "expressions must be quoted");
        try {
            (void)parse_expression(e->value, table);
        } catch (const ValidationError& ex) {
            r.error(s, key, ex.what());
        }
        out.push_back(e->value);
    }
    return out;
}

}  // namespace

RunConfig validate_config(const ConfigFile& file, Task task, std::optional<std::uint64_t> seed_override) {
    Reader r(file);
    RunConfig cfg;
    cfg.task = task;

    if (const auto* e = r.find("", "task")) {
        const auto t = parse_task(e->value);
        if (!t) r.error("", "task", "unknown task '" + e->value + "'");
        else if (*t != task) r.error("", "task", "config declares '" + e->value + "' but '" + task_name(task) + "' was requested");
    }
    if (auto v = r.integer("", "seed")) {
        if (*v < 0) r.error("", "seed", "must be nonnegative");
        else cfg.seed = static_cast<std::uint64_t>(*v);
    }
    if (seed_override) cfg.seed = *seed_override;

    read_system(r, cfg);
    const bool dims = cfg.system.n > 0 && cfg.system.m > 0;
    const int n = cfg.system.n, m = cfg.system.m;

    cfg.integrator = read_integrator(r, "integrator", IntegratorConfig{});
    IntegratorConfig ref;
    ref.rtol = 1e-10;
    ref.atol = 1e-12;
    cfg.reference_integrator = read_integrator(r, "reference", ref);

    const bool needs_path = task == Task::Synthesize || task == Task::Sweep || task == Task::Shoot;
    const bool needs_q0 = task == Task::Simulate || task == Task::Sweep || task == Task::Shoot;
    const bool needs_T = task == Task::Synthesize || task == Task::Simulate || task == Task::Shoot;

    if (dims) {
        if (r.has_section("path")) read_path(r, cfg);
        else if (needs_path) r.errors.push_back("missing [path] section");

        if (auto v = r.vector("initial", "q", n)) cfg.q0 = *v;
        else if (needs_q0 && !r.find("initial", "q")) r.missing("initial", "q");
        cfg.p0 = Vector::Zero(n);
        if (auto v = r.vector("initial", "p", n)) cfg.p0 = *v;
        if (auto v = r.vector("initial", "u", m)) cfg.u0 = *v;

        if (r.has_section("control")) {
            auto params = with_horizon(cfg.system.params, 1.0);
            cfg.control_expr = read_time_expressions(r, "control", "u", m, variable_symbols("t", params));
        }
        if (task == Task::Simulate && cfg.control_expr.empty() && !cfg.path.present)
            r.errors.push_back("simulate needs a [control] section or a [path] section");

        if (r.has_section("dictionary")) read_dictionary(r, cfg);
        else if (task == Task::Check) r.errors.push_back("missing [dictionary] section");

        if (task == Task::Check) {
            const auto table = variable_symbols("t", cfg.system.params);
            cfg.check.q_expr = read_time_expressions(r, "check", "q", n, table);
            cfg.check.u_expr = read_time_expressions(r, "check", "u", m, table);
            cfg.check.t0 = r.number_or("check", "t0", cfg.check.t0);
            cfg.check.t1 = r.number_or("check", "t1", cfg.check.t1);
            if (!(cfg.check.t1 > cfg.check.t0)) r.error("check", "t1", "must exceed t0");
            if (auto v = r.integer("check", "points")) {
                if (*v < 3) r.error("check", "points", "must be at least 3");
                else cfg.check.points = static_cast<std::size_t>(*v);
            }
            cfg.check.tol = r.number_or("check", "tol", cfg.check.tol);
            if (const auto* e = r.find("check", "rates")) {
                if (e->value == "difference") cfg.check.difference_rates = true;
                else if (e->value != "analytic") r.error("check", "rates", "expected 'analytic' or 'difference'");
            }
            cfg.check.probe_q = r.vector("check", "probe_q", n);
            cfg.check.probe_u = r.vector("check", "probe_u", m);
            cfg.check.probe_dq = r.vector("check", "probe_dq", n);
            cfg.check.probe_du = r.vector("check", "probe_du", m);
            const int probes = !!cfg.check.probe_q + !!cfg.check.probe_u + !!cfg.check.probe_dq + !!cfg.check.probe_du;
            if (probes != 0 && probes != 4)
                r.errors.push_back("[check] probe_q, probe_u, probe_dq and probe_du must be given together");
        }

        if (task == Task::Shoot) {
            const std::string s = "shoot";
            if (auto v = r.vector(s, "target_q", n)) cfg.shoot.target_q = *v;
            else if (!r.find(s, "target_q")) r.missing(s, "target_q");
            if (auto v = r.vector(s, "target_u", m)) cfg.shoot.target_u = *v;
            else if (!r.find(s, "target_u")) r.missing(s, "target_u");
            auto& o = cfg.shoot.options;
            o.tol = r.number_or(s, "tol", o.tol);
            if (auto v = r.integer(s, "max_iter")) o.max_iter = static_cast<int>(*v);
            o.fd_step = r.number_or(s, "fd_step", o.fd_step);
            if (auto v = r.integer(s, "max_halvings")) o.max_halvings = static_cast<int>(*v);
            cfg.shoot.radius = r.number_or(s, "radius", cfg.shoot.radius);
            cfg.shoot.h = r.number_or(s, "h", cfg.shoot.h);
            if (!(o.tol > 0.0)) r.error(s, "tol", "must be positive");
            if (o.max_iter < 0) r.error(s, "max_iter", "must be nonnegative");
            if (!(o.fd_step > 0.0)) r.error(s, "fd_step", "must be positive");
            if (o.max_halvings < 0) r.error(s, "max_halvings", "must be nonnegative");
            if (!(cfg.shoot.radius > 0.0)) r.error(s, "radius", "must be positive");
            if (!(cfg.shoot.h > 0.0)) r.error(s, "h", "must be positive");
        }
    }

    if (auto v = r.number("horizon", "T")) cfg.T = *v;
    else if (needs_T && !r.find("horizon", "T")) r.missing("horizon", "T");
    if (!(cfg.T > 0.0)) r.error("horizon", "T", "must be positive");
    if (auto v = r.list("horizon", "T_list")) cfg.T_list = *v;
    if (task == Task::Sweep) {
        if (cfg.T_list.size() < 2) r.error("horizon", "T_list", "a sweep needs at least two increasing horizons");
        for (std::size_t i = 0; i < cfg.T_list.size(); ++i)
            if (!(cfg.T_list[i] > 0.0) || (i > 0 && !(cfg.T_list[i] > cfg.T_list[i - 1])))
                r.error("horizon", "T_list", "horizons must be positive and strictly increasing");
    }
    cfg.freq_override = r.number("horizon", "freq_override");
    cfg.freq_scale = r.number("horizon", "freq_scale");
    if (cfg.freq_override && cfg.freq_scale) r.errors.push_back("[horizon] freq_override and freq_scale are exclusive");
    if (cfg.freq_override && !(*cfg.freq_override > 0.0)) r.error("horizon", "freq_override", "must be positive");
    if (cfg.freq_scale && !(*cfg.freq_scale > 0.0)) r.error("horizon", "freq_scale", "must be positive");
    if (auto v = r.integer("horizon", "samples")) {
        if (*v < 2) r.error("horizon", "samples", "must be at least 2");
        else cfg.samples = static_cast<std::size_t>(*v);
    }

    r.report_unknown();
    if (r.errors.empty() && cfg.path.present) {
        try {
            build_path(cfg).validate();
        } catch (const Error& e) {
            r.errors.push_back(std::string("[path] ") + e.what());
        }
    }
    if (!r.errors.empty()) throw ConfigErrors(std::move(r.errors));
    cfg.shoot.options.freq_override = cfg.freq_override;
    cfg.shoot.options.freq_scale = cfg.freq_scale;
    return cfg;
}

std::vector<std::pair<std::string, std::string>> RunConfig::effective() const {
    std::vector<std::pair<std::string, std::string>> out;
    auto num = [](double x) { return csv_number(x); };
    auto vec = [&](const Vector& v) {
        std::string s;
        for (Index i = 0; i < v.size(); ++i) s += (i ? " " : "") + num(v[i]);
        return s;
    };
    auto add = [&](std::string k, std::string v) { out.emplace_back(std::move(k), std::move(v)); };
    add("task", task_name(task));
    add("seed", std::to_string(seed));
    add("system.kind", system.mechanical ? "mechanical" : "direct");
    add("system.n", std::to_string(system.n));
    add("system.m", std::to_string(system.m));
    for (const auto& [k, v] : system.params) add("system.param." + k, num(v));
    for (const auto& [k, v] : system.entries) add("system." + k, v);
    auto integ = [&](const std::string& p, const IntegratorConfig& c) {
        add(p + ".method", "dopri5");
        add(p + ".rtol", num(c.rtol));
        add(p + ".atol", num(c.atol));
        add(p + ".max_step", num(c.max_step));
        add(p + ".steps_per_period", std::to_string(c.steps_per_period));
        add(p + ".stride", std::to_string(c.stride));
        add(p + ".max_steps", std::to_string(c.max_steps));
    };
    integ("integrator", integrator);
    integ("reference", reference_integrator);
    if (path.present) {
        add("path.eps0", num(path.eps0));
        add("path.cutoff", path.cutoff ? "true" : "false");
        for (std::size_t i = 0; i < path.u_expr.size(); ++i) add("path.u." + std::to_string(i + 1), path.u_expr[i]);
        for (std::size_t i = 0; i < path.w_expr.size(); ++i) add("path.w." + std::to_string(i + 1), path.w_expr[i]);
        if (!path.grid.empty()) add("path.grid_points", std::to_string(path.grid.size()));
    }
    for (std::size_t i = 0; i < control_expr.size(); ++i) add("control.u." + std::to_string(i + 1), control_expr[i]);
    if (q0.size()) add("initial.q", vec(q0));
    if (p0.size()) add("initial.p", vec(p0));
    if (u0) add("initial.u", vec(*u0));
    add("horizon.T", num(T));
    if (!T_list.empty()) {
        std::string s;
        for (std::size_t i = 0; i < T_list.size(); ++i) s += (i ? " " : "") + num(T_list[i]);
        add("horizon.T_list", s);
    }
    add("horizon.frequency", freq_override ? "override " + num(*freq_override)
                                           : freq_scale ? "scale " + num(*freq_scale) + " * alpha^3" : "alpha^3");
    add("horizon.samples", std::to_string(samples));
    add("tracking.points_per_period", "10");
    if (dictionary.present) {
        add("dictionary.epsilon", num(dictionary.epsilon));
        if (!dictionary.vectors.empty()) {
            for (std::size_t i = 0; i < dictionary.vectors.size(); ++i)
                add("dictionary.w." + std::to_string(i + 1), vec(dictionary.vectors[i]));
        } else {
            add("dictionary.samples", std::to_string(dictionary.samples));
            add("dictionary.q_lo", vec(dictionary.q_lo));
            add("dictionary.q_hi", vec(dictionary.q_hi));
            add("dictionary.u_lo", vec(dictionary.u_lo));
            add("dictionary.u_hi", vec(dictionary.u_hi));
            add("dictionary.w_radius", num(dictionary.w_radius));
            add("dictionary.max_generators", std::to_string(dictionary.max_generators));
            add("dictionary.directions", std::to_string(dictionary.directions));
        }
    }
    if (task == Task::Check) {
        add("check.t0", num(check.t0));
        add("check.t1", num(check.t1));
        add("check.points", std::to_string(check.points));
        add("check.tol", num(check.tol));
        add("check.rates", check.difference_rates ? "difference" : "analytic");
        add("check.continuity_threshold", "0.1");
    }
    if (task == Task::Shoot) {
        add("shoot.target_q", vec(shoot.target_q));
        add("shoot.target_u", vec(shoot.target_u));
        add("shoot.tol", num(shoot.options.tol));
        add("shoot.max_iter", std::to_string(shoot.options.max_iter));
        add("shoot.fd_step", num(shoot.options.fd_step));
        add("shoot.max_halvings", std::to_string(shoot.options.max_halvings));
        add("shoot.radius", num(shoot.radius));
        add("shoot.h", num(shoot.h));
    }
    return out;
}

// ------------------------------------------------------------ builders

namespace {

std::vector<std::vector<Expr>> matrix(const SystemConfig& sys, const SymbolTable& table, const std::string& block,
                                      int rows, int cols, bool symmetric) {
    std::vector<std::vector<Expr>> M(static_cast<std::size_t>(rows), std::vector<Expr>(static_cast<std::size_t>(cols)));
    for (int i = 0; i < rows; ++i) {
        for (int j = 0; j < cols; ++j) {
            const int a = symmetric ? std::min(i, j) : i;
            const int b = symmetric ? std::max(i, j) : j;
            auto it = sys.entries.find(block + "." + std::to_string(a + 1) + "." + std::to_string(b + 1));
            if (it != sys.entries.end()) M[i][j] = parse_expression(it->second, table);
        }
    }
    return M;
}

PathPtr expression_path(const std::vector<std::string>& texts, const std::string& variable,
                        const std::map<std::string, double>& params) {
    const auto table = variable_symbols(variable, params);
    std::vector<Expr> comps;
    for (const auto& t : texts) comps.push_back(parse_expression(t, table));
    return std::make_shared<ExpressionPath>(comps, table, variable, params);
}

}  // namespace

MechanicalSpec build_mechanical(const SystemConfig& sys) {
    if (!sys.mechanical) throw ValidationError("system is not mechanical");
    const auto table = system_symbols(sys);
    std::map<std::pair<int, int>, Expr> upper;
    for (int i = 1; i <= sys.n + sys.m; ++i)
        for (int j = i; j <= sys.n + sys.m; ++j) {
            auto it = sys.entries.find("G." + std::to_string(i) + "." + std::to_string(j));
            upper[{i, j}] = it == sys.entries.end() ? Expr::constant(0.0) : parse_expression(it->second, table);
        }
    return MechanicalSpec::from_upper(sys.n, sys.m, table, sys.params, upper);
}

DynamicsPtr build_dynamics(const SystemConfig& sys) {
    if (sys.mechanical) return reduce(build_mechanical(sys));
    const auto table = system_symbols(sys);
    return std::make_shared<DirectDynamics>(sys.n, sys.m, table, sys.params, matrix(sys, table, "A", sys.n, sys.n, true),
                                            matrix(sys, table, "K", sys.n, sys.m, false),
                                            matrix(sys, table, "E", sys.m, sys.m, true));
}

PathControl build_path(const RunConfig& cfg) {
    const PathConfig& p = cfg.path;
    if (!p.present) throw ValidationError("no [path] section");
    PathControl out;
    out.eps0 = p.eps0;
    if (!p.u_expr.empty()) {
        out.u_star = expression_path(p.u_expr, "s", cfg.system.params);
        out.w_star = expression_path(p.w_expr, "s", cfg.system.params);
        if (p.cutoff) out.w_star = vanishing_start(out.w_star, p.eps0);
        return out;
    }
    PathSamples samples;
    samples.grid = p.grid;
    samples.eps0 = p.eps0;
    const int m = cfg.system.m;
    for (std::size_t k = 0; k < p.grid.size(); ++k) {
        Vector u(m), w(m);
        for (int i = 0; i < m; ++i) {
            u[i] = p.u_samples[static_cast<std::size_t>(i)][k];
            w[i] = p.w_samples[static_cast<std::size_t>(i)][k];
        }
        samples.u.push_back(u);
        samples.w.push_back(w);
    }
    return path_control_from_samples(samples);
}

PathPtr build_control_path(const RunConfig& cfg) {
    return expression_path(cfg.control_expr, "t", with_horizon(cfg.system.params, cfg.T));
}

PathPtr build_check_path(const RunConfig& cfg, bool q) {
    return expression_path(q ? cfg.check.q_expr : cfg.check.u_expr, "t", cfg.system.params);
}

Dictionary build_config_dictionary(const RunConfig& cfg, const ReducedDynamics& dyn) {
    const DictionaryConfig& d = cfg.dictionary;
    if (!d.vectors.empty()) {
        Dictionary dict;
        dict.vectors = d.vectors;
        dict.epsilon = d.epsilon;
        dict.domain = "explicit";
        return dict;
    }
    SampleBox box{d.q_lo, d.q_hi, d.u_lo, d.u_hi, d.w_radius};
    const auto samples = sample_domain(dyn, box, d.samples, cfg.seed);
    DictionaryOptions opt;
    opt.max_generators = d.max_generators;
    opt.directions = d.directions;
    return build_dictionary(dyn, samples, d.epsilon, opt);
}

std::string sha256_hex(const std::string& bytes) {
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1)
        throw Error("SHA-256 computation failed");
    static const char* hex = "0123456789abcdef";
    std::string out;
    for (unsigned int i = 0; i < len; ++i) {
        out += hex[digest[i] >> 4];
        out += hex[digest[i] & 15];
    }
    return out;
}

}  // namespace lagctl
