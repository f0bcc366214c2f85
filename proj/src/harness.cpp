#include "matprop/harness.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <istream>
#include <limits>
#include <mutex>
#include <ostream>
#include <sstream>
#include <thread>

#include "matprop/error.hpp"
#include "matprop/matrix_io.hpp"
#include "matprop/oracle.hpp"

namespace matprop {

namespace {

constexpr double kDerived = std::numeric_limits<double>::quiet_NaN();

template <class T>
bool parse_number(const std::string& tok, T& out) {
    const char* first = tok.data();
    const char* last = first + tok.size();
    auto [ptr, ec] = std::from_chars(first, last, out);
    return ec == std::errc{} && ptr == last && first != last;
}

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

[[noreturn]] void bad(const std::string& key, const std::string& what) { throw ConfigError(key + ": " + what); }

double real_value(const std::string& key, const std::string& v) {
    double x = 0.0;
    if (!parse_number(v, x) || !std::isfinite(x)) bad(key, "expected a number, got '" + v + "'");
    return x;
}

template <class T>
T count_value(const std::string& key, const std::string& v) {
    T x{};
    if (!parse_number(v, x)) bad(key, "expected a non-negative integer, got '" + v + "'");
    return x;
}

bool bool_value(const std::string& key, const std::string& v) {
    if (v == "1" || v == "true" || v == "yes" || v == "on") return true;
    if (v == "0" || v == "false" || v == "no" || v == "off") return false;
    bad(key, "expected true or false, got '" + v + "'");
}

const ConstantInfo* find_constant(const std::string& name) {
    for (const auto& c : constant_registry()) {
        if (c.name == name) return &c;
    }
    return nullptr;
}

double get(const Overrides& o, const std::string& name) {
    if (auto it = o.find(name); it != o.end()) return it->second;
    return find_constant(name)->default_value;
}

std::size_t get_count(const Overrides& o, const std::string& name) {
    return static_cast<std::size_t>(get(o, name));
}

StageConstants stage_constants(const Overrides& o) {
    StageConstants k;
    k.k0 = get(o, "k0");
    k.k1 = get(o, "k1");
    k.C0 = get(o, "C0");
    k.c1 = get(o, "c1");
    k.tau_factor = get(o, "tau_factor");
    if (auto it = o.find("tau"); it != o.end()) k.tau_override = it->second;
    k.pool_retries = static_cast<int>(get(o, "pool_retries"));
    return k;
}

bool is_integer(double d) { return d >= 1.0 && std::floor(d) == d; }

Field parse_field_setting(const std::string& v) {
    try {
        return Field::parse(v);
    } catch (const Error& e) {
        bad("field", e.what());
    }
}

std::string csv_field(std::istream& row) {
    std::string s;
    std::getline(row, s, ',');
    return s;
}

}  // namespace

// ---- names -------------------------------------------------------------------------

std::string to_string(Tester t) {
    switch (t) {
        case Tester::Rank: return "rank";
        case Tester::RankSensing: return "rank-sensing";
        case Tester::StableRank: return "stable-rank";
        case Tester::StableRankSensing: return "stable-rank-sensing";
        case Tester::Schatten: return "schatten";
    }
    return "?";
}

Tester parse_tester(const std::string& name) {
    for (Tester t : {Tester::Rank, Tester::RankSensing, Tester::StableRank, Tester::StableRankSensing,
                     Tester::Schatten}) {
        if (to_string(t) == name) return t;
    }
    throw ConfigError("unknown tester '" + name + "'");
}

// ---- constants -------------------------------------------------------------------

const std::vector<ConstantInfo>& constant_registry() {
    static const std::vector<ConstantInfo> registry = {
        {"c_pattern", 4.0, false, "rank pattern size multiplier"},
        {"amplification", 1.0, true, "independent rank patterns per test (H1 if any says H1)"},
        {"k0", 20.0, false, "Frobenius sample multiplier"},
        {"k1", 8.0, false, "screen block size multiplier"},
        {"C0", 0.5, false, "screen threshold multiplier"},
        {"c1", 100.0, false, "screen stable-rank slack"},
        {"tau_factor", 0.25, false, "stage-3 accuracy multiplier"},
        {"tau", kDerived, false, "fixed stage-3 accuracy (derived from eps when unset)"},
        {"pool_retries", 32.0, true, "fresh draws when a sampling pool comes out empty"},
        {"pool_factor", 2.0, false, "row/column pool rate times n tau"},
        {"probe_factor", 2.0, false, "probes per pooled row times tau"},
        {"resample_factor", 4.0, false, "importance resamples times tau^2 / (d_hint ln n)"},
        {"d_hint", 1.0, false, "stable-rank hint of the sampling estimator"},
        {"N_cycles", 1000.0, true, "cycles averaged by the cycle and sketch estimators"},
        {"q_cycle", 2.0, true, "cycle length"},
        {"k_sketch", 8.0, true, "Gaussian sketch size"},
    };
    return registry;
}

void set_override(Overrides& o, const std::string& name, const std::string& value) {
    const ConstantInfo* info = find_constant(name);
    if (!info) bad(name, "unknown constant");
    const double v = real_value(name, value);
    if (!(v > 0.0)) bad(name, "must be positive");
    if (info->integral && !is_integer(v)) bad(name, "must be a positive integer");
    o[name] = v;
}

SamplerParams make_sampler_params(const Overrides& o) {
    SamplerParams sp;
    if (auto it = o.find("tau"); it != o.end()) sp.tau = it->second;
    sp.d_hint = get(o, "d_hint");
    sp.pool_factor = get(o, "pool_factor");
    sp.probe_factor = get(o, "probe_factor");
    sp.resample_factor = get(o, "resample_factor");
    sp.N_cycles = get_count(o, "N_cycles");
    sp.q_cycle = get_count(o, "q_cycle");
    sp.k_sketch = get_count(o, "k_sketch");
    return sp;
}

RankTestConfig make_rank_config(std::size_t d, double eps, std::uint64_t seed, const Overrides& o) {
    RankTestConfig cfg;
    cfg.d = d;
    cfg.eps = eps;
    cfg.seed = seed;
    cfg.c_pattern = get(o, "c_pattern");
    cfg.amplification = get_count(o, "amplification");
    return cfg;
}

StableRankConfig make_stable_rank_config(double d, double eps, QueryModel mode, std::uint64_t seed,
                                         const Overrides& o) {
    StableRankConfig cfg;
    cfg.d = d;
    cfg.eps = eps;
    cfg.mode = mode;
    cfg.seed = seed;
    cfg.k = stage_constants(o);
    cfg.sampler = make_sampler_params(o);
    return cfg;
}

SchattenConfig make_schatten_config(double p, double c_threshold, double eps, std::uint64_t seed,
                                    const Overrides& o) {
    SchattenConfig cfg;
    cfg.p = p;
    cfg.c_threshold = c_threshold;
    cfg.eps = eps;
    cfg.seed = seed;
    cfg.k = stage_constants(o);
    cfg.sampler = make_sampler_params(o);
    return cfg;
}

// ---- configuration ------------------------------------------------------------------

void ExperimentConfig::validate() const {
    if (trials < 1) bad("trials", "must be >= 1");
    for (const auto& [name, value] : overrides) {
        const ConstantInfo* info = find_constant(name);
        if (!info) bad(name, "unknown constant");
        if (!(value > 0.0) || (info->integral && !is_integer(value))) bad(name, "bad value");
    }
    try {
        instance.validate();
    } catch (const ConfigError&) {
        throw;
    } catch (const Error& e) {
        throw ConfigError(std::string("instance: ") + e.what());
    }
    const bool staged = tester == Tester::StableRank || tester == Tester::StableRankSensing ||
                        tester == Tester::Schatten;
    if (staged && instance.p != 0) bad("field", to_string(tester) + " needs a real matrix");
    if (staged && instance.family == Family::StableRankPair) {
        bad("family", "stable-rank-pair matrices are not square");
    }
    try {
        switch (tester) {
            case Tester::Rank:
            case Tester::RankSensing:
                if (!is_integer(d)) bad("d", "rank tests need an integer d >= 1");
                if (tester == Tester::Rank) make_rank_config(static_cast<std::size_t>(d), eps, seed, overrides).validate();
                break;
            case Tester::StableRank:
            case Tester::StableRankSensing:
                make_stable_rank_config(d, eps, QueryModel::Sampling, seed, overrides).validate();
                break;
            case Tester::Schatten:
                make_schatten_config(schatten_p, c_threshold, eps, seed, overrides).validate();
                break;
        }
    } catch (const ConfigError&) {
        throw;
    } catch (const Error& e) {
        throw ConfigError(std::string("tester: ") + e.what());
    }
}

void apply_setting(ExperimentConfig& cfg, const std::string& key, const std::string& value) {
    auto& inst = cfg.instance;
    if (key == "tester") {
        try {
            cfg.tester = parse_tester(value);
        } catch (const ConfigError& e) {
            bad(key, e.what());
        }
    } else if (key == "trials") {
        cfg.trials = count_value<std::size_t>(key, value);
    } else if (key == "seed") {
        cfg.seed = count_value<std::uint64_t>(key, value);
    } else if (key == "output") {
        cfg.output = value;
    } else if (key == "timing") {
        cfg.timing = bool_value(key, value);
    } else if (key == "d") {
        cfg.d = real_value(key, value);
    } else if (key == "eps") {
        cfg.eps = real_value(key, value);
    } else if (key == "schatten_p") {
        cfg.schatten_p = real_value(key, value);
    } else if (key == "c") {
        cfg.c_threshold = real_value(key, value);
    } else if (key == "family") {
        try {
            inst.family = parse_family(value);
        } catch (const Error& e) {
            bad(key, e.what());
        }
    } else if (key == "n") {
        inst.n = count_value<std::size_t>(key, value);
    } else if (key == "field") {
        const Field f = parse_field_setting(value);
        inst.p = f.is_real() ? 0 : static_cast<std::uint32_t>(f.modulus());
    } else if (key == "instance.d") {
        inst.d = count_value<std::size_t>(key, value);
    } else if (key == "instance.eps") {
        inst.eps = real_value(key, value);
    } else if (key == "eta") {
        inst.eta = real_value(key, value);
    } else if (key == "trunc_C") {
        inst.trunc_C = real_value(key, value);
    } else if (key == "member") {
        inst.member = count_value<int>(key, value);
    } else if (key == "noise_exponent") {
        inst.noise_exponent = real_value(key, value);
    } else {
        set_override(cfg.overrides, key, value);
    }
}

void apply_config_text(ExperimentConfig& cfg, std::istream& in, const std::string& source) {
    std::string line;
    for (std::size_t lineno = 1; std::getline(in, line); ++lineno) {
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const std::string where = source + ":" + std::to_string(lineno) + ": ";
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw ConfigError(where + "expected key=value");
        const std::string key = trim(line.substr(0, eq));
        if (key.empty()) throw ConfigError(where + "missing key");
        try {
            apply_setting(cfg, key, trim(line.substr(eq + 1)));
        } catch (const ConfigError& e) {
            throw ConfigError(where + e.what());
        }
    }
}

void apply_config_file(ExperimentConfig& cfg, const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError(path + ": cannot open config file");
    apply_config_text(cfg, in, path);
}

// ---- trials ------------------------------------------------------------------------

namespace {

EntryOracle make_entry_oracle(const InstanceSpec& spec) {
    // Constant families stay implicit so large n costs nothing.
    if (spec.family == Family::Zero || spec.family == Family::AllOnes) {
        const double v = spec.family == Family::AllOnes ? 1.0 : 0.0;
        return EntryOracle(ImplicitMatrix{spec.n, spec.n, spec.field(), [v](std::size_t, std::size_t) { return v; }});
    }
    return EntryOracle(generate(spec));
}

}  // namespace

TrialRecord run_trial(const ExperimentConfig& cfg, std::size_t trial) {
    const auto start = std::chrono::steady_clock::now();
    TrialRecord rec;
    rec.trial = trial;
    rec.seed = derive_seed(cfg.seed, trial);
    InstanceSpec spec = cfg.instance;
    spec.seed = derive_seed(rec.seed, 0);
    Rng rng(rec.seed, 1);

    Verdict v;
    switch (cfg.tester) {
        case Tester::Rank: {
            EntryOracle oracle = make_entry_oracle(spec);
            v = test_rank(oracle, make_rank_config(static_cast<std::size_t>(cfg.d), cfg.eps, rec.seed, cfg.overrides), rng);
            break;
        }
        case Tester::RankSensing: {
            SensingOracle oracle(generate(spec));
            v = test_rank_sensing(oracle, static_cast<std::size_t>(cfg.d), rng);
            break;
        }
        case Tester::StableRank: {
            EntryOracle oracle = make_entry_oracle(spec);
            v = test_stable_rank(oracle, make_stable_rank_config(cfg.d, cfg.eps, QueryModel::Sampling, rec.seed, cfg.overrides), rng);
            break;
        }
        case Tester::StableRankSensing: {
            SensingOracle oracle(generate(spec));
            v = test_stable_rank(oracle, make_stable_rank_config(cfg.d, cfg.eps, QueryModel::Sensing, rec.seed, cfg.overrides), rng);
            break;
        }
        case Tester::Schatten: {
            EntryOracle oracle = make_entry_oracle(spec);
            v = test_schatten(oracle, make_schatten_config(cfg.schatten_p, cfg.c_threshold, cfg.eps, rec.seed, cfg.overrides), rng);
            break;
        }
    }
    rec.verdict = v.decision;
    rec.queries = v.queries_used;
    rec.statistic = v.statistic;
    rec.stage = v.stage;
    if (cfg.timing) {
        rec.ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    }
    return rec;
}

std::size_t default_workers() {
    if (const char* env = std::getenv("MATPROP_WORKERS"); env && *env) {
        std::size_t w = 0;
        if (!parse_number(std::string(env), w) || w == 0) {
            throw ConfigError(std::string("MATPROP_WORKERS: expected a positive integer, got '") + env + "'");
        }
        return w;
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

ExperimentResult run_experiment(const ExperimentConfig& cfg, std::size_t workers) {
    cfg.validate();
    if (workers == 0) workers = default_workers();
    workers = std::min(workers, cfg.trials);

    ExperimentResult result;
    result.records.resize(cfg.trials);
    std::atomic<std::size_t> next{0};
    std::mutex error_mutex;
    std::size_t error_trial = cfg.trials;
    std::exception_ptr error;

    auto work = [&] {
        for (std::size_t t; (t = next.fetch_add(1)) < cfg.trials;) {
            try {
                result.records[t] = run_trial(cfg, t);
            } catch (...) {
                // Report the lowest failing trial so the error is worker-independent.
                std::lock_guard lock(error_mutex);
                if (t < error_trial) {
                    error_trial = t;
                    error = std::current_exception();
                }
            }
        }
    };
    if (workers <= 1) {
        work();
    } else {
        std::vector<std::jthread> pool;
        for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work);
    }
    if (error) std::rethrow_exception(error);
    result.summary = summarize(result.records);
    return result;
}

// ---- summary ----------------------------------------------------------------------------

Interval wilson_interval(std::size_t successes, std::size_t n, double z) {
    if (n == 0) return {0.0, 1.0};
    const double nn = static_cast<double>(n);
    const double p = static_cast<double>(successes) / nn;
    const double z2 = z * z;
    const double denom = 1.0 + z2 / nn;
    const double center = (p + z2 / (2.0 * nn)) / denom;
    const double half = z / denom * std::sqrt(p * (1.0 - p) / nn + z2 / (4.0 * nn * nn));
    return {std::max(0.0, center - half), std::min(1.0, center + half)};
}

ExperimentSummary summarize(const std::vector<TrialRecord>& records) {
    ExperimentSummary s;
    s.trials = records.size();
    double total = 0.0;
    for (const auto& r : records) {
        if (r.verdict == Decision::H1) ++s.detections;
        total += static_cast<double>(r.queries);
        s.max_queries = std::max(s.max_queries, r.queries);
    }
    if (s.trials) {
        s.detection_rate = static_cast<double>(s.detections) / static_cast<double>(s.trials);
        s.mean_queries = total / static_cast<double>(s.trials);
    }
    s.wilson95 = wilson_interval(s.detections, s.trials);
    return s;
}

void write_summary(std::ostream& out, const ExperimentSummary& s) {
    out << "trials=" << s.trials << " detections=" << s.detections
        << " detection_rate=" << format_real(s.detection_rate) << " wilson95=[" << format_real(s.wilson95.lo) << ','
        << format_real(s.wilson95.hi) << "] mean_queries=" << format_real(s.mean_queries)
        << " max_queries=" << s.max_queries << '\n';
}

// ---- CSV ------------------------------------------------------------------------------

void write_csv(std::ostream& out, const std::vector<TrialRecord>& records) {
    out << kCsvHeader << '\n';
    for (const auto& r : records) {
        out << r.trial << ',' << r.seed << ',' << to_string(r.verdict) << ',' << r.queries << ','
            << format_real(r.statistic) << ',' << r.stage << ',' << format_real(r.ms) << '\n';
    }
}

std::vector<TrialRecord> read_csv(std::istream& in) {
    auto fail = [](std::size_t line, const std::string& what) -> void {
        throw FormatError("line " + std::to_string(line) + ": " + what);
    };
    std::string line;
    if (!std::getline(in, line)) fail(1, "empty input");
    if (trim(line) != kCsvHeader) fail(1, std::string("expected header '") + kCsvHeader + "'");
    std::vector<TrialRecord> out;
    for (std::size_t lineno = 2; std::getline(in, line); ++lineno) {
        line = trim(line);
        if (line.empty()) continue;
        if (std::count(line.begin(), line.end(), ',') != 6) fail(lineno, "expected 7 fields");
        std::istringstream row(line);
        TrialRecord r;
        const std::string head[] = {csv_field(row), csv_field(row), csv_field(row)};
        if (!parse_number(head[0], r.trial)) fail(lineno, "bad trial");
        if (!parse_number(head[1], r.seed)) fail(lineno, "bad seed");
        if (head[2] == "H0") {
            r.verdict = Decision::H0;
        } else if (head[2] == "H1") {
            r.verdict = Decision::H1;
        } else {
            fail(lineno, "verdict must be H0 or H1");
        }
        if (!parse_number(csv_field(row), r.queries)) fail(lineno, "bad queries");
        if (!parse_number(csv_field(row), r.statistic)) fail(lineno, "bad statistic");
        if (!parse_number(csv_field(row), r.stage)) fail(lineno, "bad stage");
        if (!parse_number(csv_field(row), r.ms)) fail(lineno, "bad ms");
        out.push_back(r);
    }
    return out;
}

}  // namespace matprop
