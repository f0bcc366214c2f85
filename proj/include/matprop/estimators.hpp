#pragma once

#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "matprop/matrix.hpp"
#include "matprop/oracle.hpp"
#include "matprop/random.hpp"

namespace matprop {

struct EstimatorReport {
    double estimate = 0.0;
    /// Distinct oracle queries issued by this call.
    std::size_t queries_used = 0;
    /// Samples drawn, counting repeats.
    std::size_t nominal_samples = 0;
    std::map<std::string, double> aux;
};

/// Knobs of the estimators. A zero count means "derive from tau and n".
struct SamplerParams {
    std::size_t q0 = 0;
    std::size_t q = 0;
    std::size_t q_row = 0;
    std::size_t q_col = 0;
    double tau = 0.2;
    double d_hint = 1.0;
    std::size_t N_cycles = 1000;
    std::size_t q_cycle = 2;
    std::size_t k_sketch = 8;

    /// Row/column pool rate = pool_factor / (n tau), capped at 1.
    double pool_factor = 2.0;
    /// Probes per pooled row = ceil(probe_factor / tau).
    double probe_factor = 2.0;
    /// q_row = q_col = ceil(resample_factor * d_hint * ln n / tau^2).
    double resample_factor = 4.0;

    void validate() const;
};

// ---- Frobenius norm ---------------------------------------------------------

/// X = (rows * cols / q0) * sum of q0 uniformly drawn squared entries, drawn with
/// replacement. Unbiased for ||A||_F^2.
EstimatorReport estimate_frobenius(EntryOracle& oracle, std::size_t q0, Rng& rng);

/// Same statistic for explicitly given draw positions.
EstimatorReport estimate_frobenius_at(EntryOracle& oracle, std::span<const Index> draws);
/// Sensing model: each draw costs one unit probe.
EstimatorReport estimate_frobenius_at(SensingOracle& oracle, std::span<const Index> draws);

/// Draw positions used by estimate_frobenius.
std::vector<Index> plan_frobenius(std::size_t rows, std::size_t cols, std::size_t q0, Rng& rng);

// ---- operator-norm screen -------------------------------------------------

struct ScreenPlan {
    std::vector<std::size_t> rows;
    std::vector<std::size_t> cols;
    std::vector<Index> queries() const;
};

/// q rows and q columns without replacement (each capped at the dimension).
ScreenPlan plan_screen(std::size_t rows, std::size_t cols, std::size_t q, Rng& rng);

/// sigma_1 of a uniformly sampled q x q submatrix, without rescaling.
EstimatorReport opnorm_screen(EntryOracle& oracle, std::size_t q, Rng& rng);
EstimatorReport run_screen(EntryOracle& oracle, const ScreenPlan& plan);
EstimatorReport run_screen(SensingOracle& oracle, const ScreenPlan& plan);

// ---- row-norm sampling operator-norm estimator --------------------------------

/// Everything drawn before the first read: the Bernoulli pools, the row-stage
/// probe positions, and a private stream for the value-dependent resampling.
/// All later reads fall inside superset().
struct OpnormSamplingPlan {
    std::size_t rows = 0;
    std::size_t cols = 0;
    double tau = 0.0;
    std::size_t probes = 0;
    std::size_t q_row = 0;
    std::size_t q_col = 0;
    std::vector<std::size_t> pool_rows;
    std::vector<std::vector<std::size_t>> row_probes;  // per pooled row
    std::vector<std::size_t> pool_cols;
    Rng resample{0};

    std::vector<Index> superset() const;
};

/// Rescaled sample A0: rows and columns of A picked by importance sampling,
/// duplicates merged (k copies with scale s become one copy with scale s*sqrt(k)).
struct RescaledSample {
    DenseMatrix matrix;
    std::vector<std::size_t> rows;
    std::vector<std::size_t> cols;
    std::vector<double> row_scale;
    std::vector<double> col_scale;
    std::size_t nominal_samples = 0;
    double row_mass = 0.0;
    double col_mass = 0.0;
};

/// Throws EmptyPool if either Bernoulli pool comes out empty.
OpnormSamplingPlan plan_opnorm_sampling(std::size_t rows, std::size_t cols, const SamplerParams& params, Rng& rng);
RescaledSample run_opnorm_sampling(EntryOracle& oracle, OpnormSamplingPlan& plan);

/// ||A0||, an estimate of ||A||. Seals the oracle on the plan's superset when
/// the oracle is still fresh.
EstimatorReport estimate_opnorm_sampling(EntryOracle& oracle, const SamplerParams& params, Rng& rng);

// ---- cycle estimator -------------------------------------------------------

/// Index cycle ((i_1..i_q), (j_1..j_q)).
struct Cycle {
    std::vector<std::size_t> i;
    std::vector<std::size_t> j;
};

/// prod_l A[i_l, j_l] * A[i_{l+1}, j_l] with i_{q+1} = i_1.
double cycle_value(const DenseMatrix& a, const Cycle& c);

/// Mean of cycle_value over all (rows * cols)^q cycles; equals
/// sum sigma^(2q) / (rows * cols)^q. Exponential; tiny matrices only.
double cycle_mean_exhaustive(const DenseMatrix& a, std::size_t q);

std::vector<Cycle> plan_cycles(std::size_t rows, std::size_t cols, std::size_t q, std::size_t N, Rng& rng);

/// Z = mean over N uniform cycles (indices with replacement); returns
/// max(Z, 0)^(1/(2q)) * sqrt(rows * cols). aux["Z"] holds the raw mean.
EstimatorReport estimate_opnorm_cycles(EntryOracle& oracle, std::size_t q_cycle, std::size_t N, Rng& rng);

// ---- sensing sketch estimator -------------------------------------------------

/// Mean of sketch_lambda over cycles whose row indices are pairwise distinct
/// and whose column indices are pairwise distinct. Enumerates every such cycle
/// when there are at most kExhaustiveCycleLimit of them, otherwise averages N
/// uniformly drawn ones. aux-style counters are returned through `cycles_used`.
double distinct_cycle_mean(const DenseMatrix& sketch, std::size_t q, std::size_t N, Rng& rng,
                           std::size_t* cycles_used = nullptr);

inline constexpr std::size_t kExhaustiveCycleLimit = 200000;

/// Sketch G A H^T from k^2 outer-product probes (row i of G against row j of
/// H), then Y = distinct_cycle_mean; returns max(Y, 0)^(1/(2q)).
/// Throws InsufficientSketch if k < q, ShapeMismatch if G, H do not fit A.
EstimatorReport estimate_opnorm_sensing(SensingOracle& oracle, const SamplerParams& params, Rng& rng);
EstimatorReport estimate_opnorm_sensing_with(SensingOracle& oracle, const DenseMatrix& G, const DenseMatrix& H,
                                             std::size_t q_cycle, std::size_t N, Rng& rng);

}  // namespace matprop
