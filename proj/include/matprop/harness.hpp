#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "matprop/instances.hpp"
#include "matprop/rank_tester.hpp"
#include "matprop/spectral_testers.hpp"
#include "matprop/verdict.hpp"

namespace matprop {

enum class Tester { Rank, RankSensing, StableRank, StableRankSensing, Schatten };

/// "rank", "rank-sensing", "stable-rank", "stable-rank-sensing", "schatten".
std::string to_string(Tester t);
Tester parse_tester(const std::string& name);

// ---- tunable constants -----------------------------------------------------------

/// Named tester and estimator constants that configs may override.
using Overrides = std::map<std::string, double>;

struct ConstantInfo {
    std::string name;
    double default_value;
    bool integral;
    std::string help;
};

/// Every overridable constant, in documentation order.
const std::vector<ConstantInfo>& constant_registry();

/// Parses `value` and stores it under `name`. Throws ConfigError for unknown
/// names, unparsable values, non-positive values and non-integers where an
/// integer count is expected.
void set_override(Overrides& o, const std::string& name, const std::string& value);

RankTestConfig make_rank_config(std::size_t d, double eps, std::uint64_t seed, const Overrides& o);
StableRankConfig make_stable_rank_config(double d, double eps, QueryModel mode, std::uint64_t seed,
                                         const Overrides& o);
SchattenConfig make_schatten_config(double p, double c_threshold, double eps, std::uint64_t seed,
                                    const Overrides& o);
SamplerParams make_sampler_params(const Overrides& o);

// ---- experiments -------------------------------------------------------------------

struct ExperimentConfig {
    Tester tester = Tester::Rank;
    InstanceSpec instance;
    std::size_t trials = 1;
    std::uint64_t seed = 0;
    // tester parameters
    double d = 1.0;
    double eps = 0.1;
    double schatten_p = 4.0;
    double c_threshold = 0.5;
    Overrides overrides;
    /// CSV destination; empty means standard output.
    std::string output;
    /// Fill the ms column; off by default so reruns are byte-identical.
    bool timing = false;

    /// Throws ConfigError naming the offending field.
    void validate() const;
};

/// Applies one `key=value` setting. Keys: tester, trials, seed, output,
/// timing, d, eps, schatten_p, c, family, n, field, instance.d, instance.eps,
/// eta, trunc_C, member, noise_exponent, plus any registry constant.
/// Throws ConfigError("<key>: ...").
void apply_setting(ExperimentConfig& cfg, const std::string& key, const std::string& value);

/// `key=value` lines; blank lines and `#` comments skipped. Errors read
/// "<source>:<line>: <key>: ...".
void apply_config_text(ExperimentConfig& cfg, std::istream& in, const std::string& source = "config");
void apply_config_file(ExperimentConfig& cfg, const std::string& path);

struct TrialRecord {
    std::size_t trial = 0;
    std::uint64_t seed = 0;
    Decision verdict = Decision::H0;
    std::size_t queries = 0;
    double statistic = 0.0;
    int stage = 1;
    double ms = 0.0;

    bool operator==(const TrialRecord&) const = default;
};

struct Interval {
    double lo = 0.0;
    double hi = 0.0;
};

/// Wilson score interval for `successes` out of `n`; z = 1.96 gives 95%.
Interval wilson_interval(std::size_t successes, std::size_t n, double z = 1.959963984540054);

struct ExperimentSummary {
    std::size_t trials = 0;
    std::size_t detections = 0;  // H1 verdicts
    double detection_rate = 0.0;
    Interval wilson95;
    double mean_queries = 0.0;
    std::size_t max_queries = 0;
};

ExperimentSummary summarize(const std::vector<TrialRecord>& records);

struct ExperimentResult {
    std::vector<TrialRecord> records;  // sorted by trial id
    ExperimentSummary summary;
};

/// Trial t uses seed derive_seed(cfg.seed, t): the instance is generated from
/// derive_seed(seed, 0) and the tester draws from Rng(seed, 1). Results do not
/// depend on the number of workers.
TrialRecord run_trial(const ExperimentConfig& cfg, std::size_t trial);

/// workers == 0 means default_workers().
ExperimentResult run_experiment(const ExperimentConfig& cfg, std::size_t workers = 0);

/// MATPROP_WORKERS if set (positive integer, else ConfigError), otherwise the
/// number of logical cores.
std::size_t default_workers();

// ---- CSV -------------------------------------------------------------------------

inline constexpr const char* kCsvHeader = "trial,seed,verdict,queries,statistic,stage,ms";

void write_csv(std::ostream& out, const std::vector<TrialRecord>& records);
/// Throws FormatError("line N: ...").
std::vector<TrialRecord> read_csv(std::istream& in);

void write_summary(std::ostream& out, const ExperimentSummary& s);

}  // namespace matprop
