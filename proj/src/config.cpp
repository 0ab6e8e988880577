#include "phasesim/config.hpp"

#include <charconv>
#include <fstream>
#include <set>
#include <sstream>

#include "phasesim/csv.hpp"

namespace phasesim {

namespace {

std::string_view trim(std::string_view sv) {
    while (!sv.empty() && (sv.front() == ' ' || sv.front() == '\t' || sv.front() == '\r')) {
        sv.remove_prefix(1);
    }
    while (!sv.empty() && (sv.back() == ' ' || sv.back() == '\t' || sv.back() == '\r')) {
        sv.remove_suffix(1);
    }
    return sv;
}

[[noreturn]] void fail(int line, const std::string& msg) {
    throw ConfigError("line " + std::to_string(line) + ": " + msg);
}

double parse_double_at(std::string_view text, int line, const std::string& key) {
    double out = 0.0;
    const char* first = text.data();
    const char* last = text.data() + text.size();
    const auto [ptr, ec] = std::from_chars(first, last, out);
    if (ec != std::errc{} || ptr != last) {
        fail(line, key + " expects a number, got '" + std::string(text) + "'");
    }
    return out;
}

long long parse_ll_at(std::string_view text, int line, const std::string& key) {
    long long out = 0;
    const char* first = text.data();
    const char* last = text.data() + text.size();
    const auto [ptr, ec] = std::from_chars(first, last, out);
    if (ec != std::errc{} || ptr != last) {
        fail(line, key + " expects an integer, got '" + std::string(text) + "'");
    }
    return out;
}

std::uint64_t parse_u64_at(std::string_view text, int line, const std::string& key) {
    std::uint64_t out = 0;
    const char* first = text.data();
    const char* last = text.data() + text.size();
    const auto [ptr, ec] = std::from_chars(first, last, out);
    if (ec != std::errc{} || ptr != last) {
        fail(line, key + " expects an unsigned integer, got '" + std::string(text) + "'");
    }
    return out;
}

bool parse_bool_at(std::string_view text, int line, const std::string& key) {
    if (text == "true") return true;
    if (text == "false") return false;
    fail(line, key + " expects true or false, got '" + std::string(text) + "'");
}

std::vector<std::string_view> split_ws(std::string_view text) {
    std::vector<std::string_view> out;
    size_t i = 0;
    while (i < text.size()) {
        while (i < text.size() && (text[i] == ' ' || text[i] == '\t')) ++i;
        size_t j = i;
        while (j < text.size() && text[j] != ' ' && text[j] != '\t') ++j;
        if (j > i) out.push_back(text.substr(i, j - i));
        i = j;
    }
    return out;
}

std::vector<double> parse_doubles_at(std::string_view text, int line, const std::string& key) {
    std::vector<double> out;
    for (const auto part : split_ws(text)) {
        out.push_back(parse_double_at(part, line, key));
    }
    if (out.empty()) fail(line, key + " expects at least one number");
    return out;
}

std::vector<long long> parse_lls_at(std::string_view text, int line, const std::string& key) {
    std::vector<long long> out;
    for (const auto part : split_ws(text)) {
        out.push_back(parse_ll_at(part, line, key));
    }
    if (out.empty()) fail(line, key + " expects at least one integer");
    return out;
}

void require_increasing_times(const std::vector<double>& times, int line,
                              const std::string& key) {
    for (size_t k = 0; k < times.size(); ++k) {
        if (times[k] < 0.0 || (k > 0 && times[k] <= times[k - 1])) {
            fail(line, key + " must be strictly increasing and >= 0");
        }
    }
}

const std::set<std::string, std::less<>> kSections = {
    "scenario", "state", "hamiltonian", "time",     "grid",    "solver",
    "evolve",   "ensemble", "measurement", "converge", "compose"};

}  // namespace

std::string to_string(ScenarioKind kind) {
    switch (kind) {
        case ScenarioKind::Evolve: return "evolve";
        case ScenarioKind::Moments: return "moments";
        case ScenarioKind::Ensemble: return "ensemble";
        case ScenarioKind::Measure: return "measure";
        case ScenarioKind::Converge: return "converge";
        case ScenarioKind::Compose: return "compose";
    }
    throw ValidationError("unknown scenario kind value");
}

ScenarioKind parse_scenario_kind(std::string_view text) {
    if (text == "evolve") return ScenarioKind::Evolve;
    if (text == "moments") return ScenarioKind::Moments;
    if (text == "ensemble") return ScenarioKind::Ensemble;
    if (text == "measure") return ScenarioKind::Measure;
    if (text == "converge") return ScenarioKind::Converge;
    if (text == "compose") return ScenarioKind::Compose;
    throw ConfigError("unknown scenario kind '" + std::string(text) +
                      "' (expected evolve, moments, ensemble, measure, converge, or compose)");
}

ScenarioConfig parse_config(std::string_view text) {
    ScenarioConfig cfg;
    std::string section;
    std::set<std::string> seen;
    bool has_interval_a = false, has_interval_b = false;
    bool has_momentum_var = false;

    int line_no = 0;
    size_t pos = 0;
    while (pos <= text.size()) {
        const size_t eol = text.find('\n', pos);
        std::string_view raw = text.substr(pos, eol == std::string_view::npos ? text.size() - pos
                                                                              : eol - pos);
        pos = eol == std::string_view::npos ? text.size() + 1 : eol + 1;
        ++line_no;

        const size_t hash = raw.find('#');
        if (hash != std::string_view::npos) raw = raw.substr(0, hash);
        const std::string_view body = trim(raw);
        if (body.empty()) continue;

        if (body.front() == '[') {
            if (body.back() != ']') fail(line_no, "unterminated section header");
            const std::string_view name = trim(body.substr(1, body.size() - 2));
            if (kSections.find(name) == kSections.end()) {
                fail(line_no, "unknown section [" + std::string(name) + "]");
            }
            section = std::string(name);
            continue;
        }

        const size_t eq = body.find('=');
        if (eq == std::string_view::npos) {
            fail(line_no, "expected key = value");
        }
        if (section.empty()) {
            fail(line_no, "key outside of any section");
        }
        const std::string key(trim(body.substr(0, eq)));
        const std::string_view value = trim(body.substr(eq + 1));
        if (key.empty()) fail(line_no, "empty key");
        if (value.empty()) fail(line_no, "empty value for " + key);
        if (!seen.insert(section + "." + key).second) {
            fail(line_no, "duplicate key '" + key + "' in [" + section + "]");
        }

        const auto unknown = [&]() -> void {
            fail(line_no, "unknown key '" + key + "' in [" + section + "]");
        };
        if (section == "scenario") {
            if (key == "kind") {
                try {
                    cfg.kind = parse_scenario_kind(value);
                } catch (const ConfigError& e) {
                    fail(line_no, e.what());
                }
            } else if (key == "seed") {
                cfg.seed = parse_u64_at(value, line_no, key);
            } else if (key == "output_dir") {
                cfg.output_dir = std::string(value);
            } else {
                unknown();
            }
        } else if (section == "state") {
            if (key == "q0") {
                cfg.q0 = parse_double_at(value, line_no, key);
            } else if (key == "p0") {
                cfg.p0 = parse_double_at(value, line_no, key);
            } else if (key == "a") {
                cfg.a = parse_double_at(value, line_no, key);
                if (!(cfg.a > 0.0)) fail(line_no, "a must be > 0");
            } else if (key == "b") {
                cfg.b = parse_double_at(value, line_no, key);
                if (!(cfg.b > 0.0)) fail(line_no, "b must be > 0");
            } else {
                unknown();
            }
        } else if (section == "hamiltonian") {
            if (key == "mass") {
                cfg.mass = parse_double_at(value, line_no, key);
                if (!(cfg.mass > 0.0)) fail(line_no, "mass must be > 0");
            } else if (key == "potential") {
                cfg.potential = parse_doubles_at(value, line_no, key);
                if (cfg.potential.size() > 7) {
                    fail(line_no, "potential supports at most degree 6 (7 coefficients)");
                }
            } else {
                unknown();
            }
        } else if (section == "time") {
            if (key == "horizon") {
                cfg.horizon = parse_double_at(value, line_no, key);
                if (cfg.horizon < 0.0) fail(line_no, "horizon must be >= 0");
            } else if (key == "dt") {
                cfg.dt = parse_double_at(value, line_no, key);
                if (!(cfg.dt > 0.0)) fail(line_no, "dt must be > 0");
            } else {
                unknown();
            }
        } else if (section == "grid") {
            if (key == "q_min") {
                cfg.q_min = parse_double_at(value, line_no, key);
            } else if (key == "q_max") {
                cfg.q_max = parse_double_at(value, line_no, key);
            } else if (key == "p_min") {
                cfg.p_min = parse_double_at(value, line_no, key);
            } else if (key == "p_max") {
                cfg.p_max = parse_double_at(value, line_no, key);
            } else if (key == "nq") {
                cfg.nq = static_cast<int>(parse_ll_at(value, line_no, key));
                if (cfg.nq < 2) fail(line_no, "nq must be >= 2");
            } else if (key == "np") {
                cfg.np = static_cast<int>(parse_ll_at(value, line_no, key));
                if (cfg.np < 2) fail(line_no, "np must be >= 2");
            } else {
                unknown();
            }
        } else if (section == "solver") {
            if (key == "scheme") {
                if (value == "leapfrog") {
                    cfg.scheme = IntegratorScheme::Leapfrog;
                } else if (value == "rk4") {
                    cfg.scheme = IntegratorScheme::Rk4;
                } else {
                    fail(line_no, "scheme expects leapfrog or rk4");
                }
            } else if (key == "interpolation") {
                if (value == "cubic") {
                    cfg.interpolation = Interpolation::CubicClamped;
                } else if (value == "bilinear") {
                    cfg.interpolation = Interpolation::Bilinear;
                } else {
                    fail(line_no, "interpolation expects cubic or bilinear");
                }
            } else if (key == "renormalize") {
                cfg.renormalize = parse_bool_at(value, line_no, key);
            } else if (key == "mass_leak_tolerance") {
                cfg.mass_leak_tolerance = parse_double_at(value, line_no, key);
                if (!(cfg.mass_leak_tolerance > 0.0) || cfg.mass_leak_tolerance > 0.1) {
                    fail(line_no, "mass_leak_tolerance must lie in (0, 0.1]");
                }
            } else {
                unknown();
            }
        } else if (section == "evolve") {
            if (key == "snapshots") {
                cfg.snapshot_times = parse_doubles_at(value, line_no, key);
                require_increasing_times(cfg.snapshot_times, line_no, key);
            } else if (key == "record_every") {
                cfg.record_every = parse_ll_at(value, line_no, key);
                if (cfg.record_every < 0) fail(line_no, "record_every must be >= 0");
            } else {
                unknown();
            }
        } else if (section == "ensemble") {
            if (key == "particles") {
                cfg.particles = parse_ll_at(value, line_no, key);
                if (cfg.particles < 100) fail(line_no, "particles must be >= 100");
            } else if (key == "shards") {
                cfg.shards = static_cast<int>(parse_ll_at(value, line_no, key));
                if (cfg.shards < 0) fail(line_no, "shards must be >= 0");
            } else if (key == "times") {
                cfg.report_times = parse_doubles_at(value, line_no, key);
                require_increasing_times(cfg.report_times, line_no, key);
            } else {
                unknown();
            }
        } else if (section == "measurement") {
            if (key == "step") {
                try {
                    cfg.step = RationalStep::parse(value);
                } catch (const ValidationError& e) {
                    fail(line_no, std::string("step: ") + e.what());
                }
            } else if (key == "sigma_syst") {
                cfg.sigma_syst = parse_double_at(value, line_no, key);
                if (cfg.sigma_syst < 0.0) fail(line_no, "sigma_syst must be >= 0");
            } else if (key == "sigma_rand") {
                cfg.sigma_rand = parse_double_at(value, line_no, key);
                if (cfg.sigma_rand < 0.0) fail(line_no, "sigma_rand must be >= 0");
            } else if (key == "offset") {
                if (value == "random") {
                    cfg.offset_random = true;
                    cfg.offset = 0.0;
                } else {
                    cfg.offset_random = false;
                    cfg.offset = parse_double_at(value, line_no, key);
                }
            } else if (key == "x_true") {
                cfg.x_true = parse_double_at(value, line_no, key);
            } else if (key == "samples") {
                cfg.samples = parse_ll_at(value, line_no, key);
                if (cfg.samples < 1) fail(line_no, "samples must be >= 1");
            } else {
                unknown();
            }
        } else if (section == "converge") {
            if (key == "n_schedule") {
                cfg.n_schedule = parse_lls_at(value, line_no, key);
                for (size_t k = 0; k < cfg.n_schedule.size(); ++k) {
                    if (cfg.n_schedule[k] < 2 ||
                        (k > 0 && cfg.n_schedule[k] <= cfg.n_schedule[k - 1])) {
                        fail(line_no, "n_schedule must be strictly increasing and >= 2");
                    }
                }
            } else if (key == "trials") {
                cfg.trials = parse_ll_at(value, line_no, key);
                if (cfg.trials < 1) fail(line_no, "trials must be >= 1");
            } else if (key == "interval_a") {
                cfg.interval_a = parse_double_at(value, line_no, key);
                has_interval_a = true;
            } else if (key == "interval_b") {
                cfg.interval_b = parse_double_at(value, line_no, key);
                has_interval_b = true;
            } else {
                unknown();
            }
        } else if (section == "compose") {
            if (key == "momentum_mean") {
                cfg.momentum_mean = parse_double_at(value, line_no, key);
            } else if (key == "momentum_var") {
                cfg.momentum_var = parse_double_at(value, line_no, key);
                if (!(cfg.momentum_var > 0.0)) fail(line_no, "momentum_var must be > 0");
                has_momentum_var = true;
            } else {
                unknown();
            }
        }
    }

    if (has_interval_a != has_interval_b) {
        throw ConfigError("interval_a and interval_b must be given together");
    }
    cfg.has_interval = has_interval_a;
    cfg.has_momentum_model = has_momentum_var;

    if (!(cfg.q_min < cfg.q_max) || !(cfg.p_min < cfg.p_max)) {
        throw ConfigError("grid bounds must satisfy q_min < q_max and p_min < p_max");
    }
    if (cfg.has_interval && !(cfg.interval_a <= cfg.interval_b)) {
        throw ConfigError("interval_a must be <= interval_b");
    }
    if (cfg.kind == ScenarioKind::Converge && !cfg.has_interval) {
        throw ConfigError("converge scenarios need interval_a and interval_b in [converge]");
    }
    if (cfg.kind == ScenarioKind::Compose && !cfg.has_momentum_model) {
        throw ConfigError("compose scenarios need momentum_var in [compose]");
    }
    if (cfg.kind == ScenarioKind::Measure && cfg.samples < 2) {
        throw ConfigError("measure scenarios need samples >= 2");
    }
    if ((cfg.kind == ScenarioKind::Measure || cfg.kind == ScenarioKind::Converge ||
         cfg.kind == ScenarioKind::Compose) &&
        !(cfg.sigma_syst * cfg.sigma_syst + cfg.sigma_rand * cfg.sigma_rand > 0.0)) {
        throw ConfigError("measurement scenarios need sigma_syst^2 + sigma_rand^2 > 0");
    }
    return cfg;
}

ScenarioConfig load_config(const std::filesystem::path& path) {
    std::ifstream stream(path, std::ios::binary);
    if (!stream) {
        throw IoError("cannot read config file " + path.string());
    }
    std::ostringstream buffer;
    buffer << stream.rdbuf();
    if (stream.bad()) {
        throw IoError("failed while reading " + path.string());
    }
    return parse_config(buffer.str());
}

namespace {

std::string join_doubles(const std::vector<double>& values) {
    std::string out;
    for (size_t i = 0; i < values.size(); ++i) {
        if (i > 0) out += ' ';
        out += format_double(values[i]);
    }
    return out;
}

std::string join_lls(const std::vector<long long>& values) {
    std::string out;
    for (size_t i = 0; i < values.size(); ++i) {
        if (i > 0) out += ' ';
        out += std::to_string(values[i]);
    }
    return out;
}

}  // namespace

std::string render_config(const ScenarioConfig& cfg) {
    std::string out;
    out += "[scenario]\n";
    out += "kind = " + to_string(cfg.kind) + "\n";
    out += "seed = " + std::to_string(cfg.seed) + "\n";
    out += "output_dir = " + cfg.output_dir + "\n";
    out += "\n[state]\n";
    out += "q0 = " + format_double(cfg.q0) + "\n";
    out += "p0 = " + format_double(cfg.p0) + "\n";
    out += "a = " + format_double(cfg.a) + "\n";
    out += "b = " + format_double(cfg.b) + "\n";
    out += "\n[hamiltonian]\n";
    out += "mass = " + format_double(cfg.mass) + "\n";
    out += "potential = " + join_doubles(cfg.potential) + "\n";
    out += "\n[time]\n";
    out += "horizon = " + format_double(cfg.horizon) + "\n";
    out += "dt = " + format_double(cfg.dt) + "\n";
    out += "\n[grid]\n";
    out += "q_min = " + format_double(cfg.q_min) + "\n";
    out += "q_max = " + format_double(cfg.q_max) + "\n";
    out += "p_min = " + format_double(cfg.p_min) + "\n";
    out += "p_max = " + format_double(cfg.p_max) + "\n";
    out += "nq = " + std::to_string(cfg.nq) + "\n";
    out += "np = " + std::to_string(cfg.np) + "\n";
    out += "\n[solver]\n";
    out += std::string("scheme = ") +
           (cfg.scheme == IntegratorScheme::Leapfrog ? "leapfrog" : "rk4") + "\n";
    out += std::string("interpolation = ") +
           (cfg.interpolation == Interpolation::CubicClamped ? "cubic" : "bilinear") + "\n";
    out += std::string("renormalize = ") + (cfg.renormalize ? "true" : "false") + "\n";
    out += "mass_leak_tolerance = " + format_double(cfg.mass_leak_tolerance) + "\n";
    out += "\n[evolve]\n";
    if (!cfg.snapshot_times.empty()) {
        out += "snapshots = " + join_doubles(cfg.snapshot_times) + "\n";
    }
    out += "record_every = " + std::to_string(cfg.record_every) + "\n";
    out += "\n[ensemble]\n";
    out += "particles = " + std::to_string(cfg.particles) + "\n";
    out += "shards = " + std::to_string(cfg.shards) + "\n";
    if (!cfg.report_times.empty()) {
        out += "times = " + join_doubles(cfg.report_times) + "\n";
    }
    out += "\n[measurement]\n";
    out += "step = " + cfg.step.to_string() + "\n";
    out += "sigma_syst = " + format_double(cfg.sigma_syst) + "\n";
    out += "sigma_rand = " + format_double(cfg.sigma_rand) + "\n";
    out += std::string("offset = ") +
           (cfg.offset_random ? "random" : format_double(cfg.offset)) + "\n";
    out += "x_true = " + format_double(cfg.x_true) + "\n";
    out += "samples = " + std::to_string(cfg.samples) + "\n";
    out += "\n[converge]\n";
    out += "n_schedule = " + join_lls(cfg.n_schedule) + "\n";
    out += "trials = " + std::to_string(cfg.trials) + "\n";
    if (cfg.has_interval) {
        out += "interval_a = " + format_double(cfg.interval_a) + "\n";
        out += "interval_b = " + format_double(cfg.interval_b) + "\n";
    }
    if (cfg.has_momentum_model) {
        out += "\n[compose]\n";
        out += "momentum_mean = " + format_double(cfg.momentum_mean) + "\n";
        out += "momentum_var = " + format_double(cfg.momentum_var) + "\n";
    }
    return out;
}

}  // namespace phasesim
