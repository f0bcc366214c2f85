#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include "matprop/estimators.hpp"
#include "matprop/oracle.hpp"
#include "matprop/random.hpp"
#include "matprop/verdict.hpp"

namespace matprop {

enum class QueryModel { Sampling, Sensing };

/// Shared constants of the three-stage testers.
struct StageConstants {
    double k0 = 20.0;   // Frobenius sample multiplier
    double k1 = 8.0;    // screen size multiplier
    double C0 = 0.5;    // screen threshold multiplier
    double c1 = 100.0;  // screen stable-rank slack
    double tau_factor = 0.25;
    std::optional<double> tau_override;
    /// Retries of the stage-3 plan when a Bernoulli pool comes out empty.
    int pool_retries = 32;
};

struct StableRankConfig {
    double d = 2.0;
    double eps = 0.1;
    QueryModel mode = QueryModel::Sampling;
    StageConstants k;
    /// Stage-3 knobs; tau and d_hint are overwritten from d, eps and n.
    SamplerParams sampler;
    std::uint64_t seed = 0;

    void validate() const;
};

struct SchattenConfig {
    double p = 4.0;
    double c_threshold = 0.5;
    double eps = 0.1;
    StageConstants k;
    SamplerParams sampler;
    std::uint64_t seed = 0;

    void validate() const;
};

// ---- sizes and thresholds ------------------------------------------------------

std::size_t stable_rank_q0(const StableRankConfig& cfg);
std::size_t stable_rank_screen_size(const StableRankConfig& cfg, std::size_t n);
double stable_rank_tau(const StableRankConfig& cfg, std::size_t n);
/// Stage 1 answers H0 when X is at most this.
double stable_rank_mass_floor(const StableRankConfig& cfg, std::size_t n);

std::size_t schatten_q0(const SchattenConfig& cfg);
std::size_t schatten_screen_size(const SchattenConfig& cfg, std::size_t n);
double schatten_tau(const SchattenConfig& cfg);
/// Singular values of the rescaled sample above this count toward the mass.
double schatten_sigma_cut(const SchattenConfig& cfg, std::size_t n);
/// Sum of sigma^p over sigma > schatten_sigma_cut.
double thresholded_mass(const std::vector<double>& sigma, const SchattenConfig& cfg, std::size_t n);

/// Screen fires (H1) when ||block|| <= C0 sqrt(X / slack) q / n.
bool screen_fires(double block_norm, double X, double slack, std::size_t q, std::size_t n, double C0);

// ---- decision logic on given statistics ---------------------------------------

/// Statistics the stable-rank tester looks at. screen_norm is the operator
/// norm of a screen_size x screen_size block; opnorm estimates ||A||.
struct StableRankStats {
    double X = 0.0;
    double screen_norm = 0.0;
    std::size_t screen_size = 0;
    double opnorm = 0.0;
};

struct SchattenStats {
    double X = 0.0;
    double screen_norm = 0.0;
    std::size_t screen_size = 0;
    std::vector<double> sample_sigma;
};

Verdict decide_stable_rank(const StableRankStats& s, std::size_t n, const StableRankConfig& cfg);
Verdict decide_schatten(const SchattenStats& s, std::size_t n, const SchattenConfig& cfg);

/// Noise-free hooks: exact ||A||_F^2, the full matrix as screen block, and
/// the exact spectrum in place of every estimate.
Verdict exact_stable_rank_verdict(const DenseMatrix& a, const StableRankConfig& cfg);
Verdict exact_schatten_verdict(const DenseMatrix& a, const SchattenConfig& cfg);

// ---- testers -------------------------------------------------------------------

/// Three stages: Frobenius mass, uniform screen, operator-norm estimate;
/// H0 iff the estimated stable rank is at most d. In sampling mode all stage
/// queries are drawn up front and the oracle is sealed on their union.
Verdict test_stable_rank(EntryOracle& oracle, const StableRankConfig& cfg, Rng& rng);
/// Sensing mode; stages 1-2 use unit probes, stage 3 the bilinear sketch.
Verdict test_stable_rank(SensingOracle& oracle, const StableRankConfig& cfg, Rng& rng);
Verdict test_stable_rank(EntryOracle& oracle, const StableRankConfig& cfg);

/// Frobenius mass, screen, then the thresholded Schatten-p mass of the
/// rescaled sample against c n^p. H0 iff that mass reaches c n^p.
Verdict test_schatten(EntryOracle& oracle, const SchattenConfig& cfg, Rng& rng);
Verdict test_schatten(EntryOracle& oracle, const SchattenConfig& cfg);

}  // namespace matprop
