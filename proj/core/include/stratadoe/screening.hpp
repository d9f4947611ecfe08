#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "stratadoe/strata.hpp"

namespace stratadoe {

struct ScreeningConfig {
  double alpha = 0.10;
  int mc_replicates = 100000;
  std::uint64_t seed = 987654321;
  int min_stratum_df = 7;  // no PSE below this
};

struct EffectEstimate {
  std::string label;   // class display label
  Word image = kIdentity;
  double estimate = 0.0;  // difference of means, high minus low
  bool active = false;
};

struct EffectEstimateSet {
  std::string stratum;
  std::vector<EffectEstimate> effects;  // sorted by |estimate| descending
  std::optional<double> pse;            // absent when df < min_stratum_df
  std::optional<double> critical;
};

// Mean response per design run over the selected plate rows (1-based ids).
// values[i][j] is the response of run-table row i, plate row j; a missing
// value inside a selected row raises MissingInSelectedRows.
std::vector<double> row_average(
    const std::vector<std::vector<std::optional<double>>>& values,
    const std::vector<int>& selected_rows);

// Lenth PSE(50): s0 = 1.5 * median|e|; PSE = 1.5 * median of the |e| below
// 2.5 * s0. Zero when all estimates are zero; TooFewEffects below 7.
double pse50(const std::vector<double>& estimates);

// (1 - alpha) quantile of |e|/PSE(50) pooled over Monte-Carlo replicates of
// m iid standard normal effects. Seed-deterministic (per-replicate counter).
double critical_multiplier(int m, double alpha, const ScreeningConfig& cfg);

// Difference-of-means estimates for every alias class, grouped by stratum,
// with PSE thresholds where the stratum is large enough. `values` aligned
// with rt.rows.
std::vector<EffectEstimateSet> estimate_effects(const std::vector<double>& values,
                                                const RunTable& rt,
                                                const StratumReport& report,
                                                const ScreeningConfig& cfg);

// CSV: stratum,effect,estimate,pse,critical,active.
std::string emit_screening_report(const std::vector<EffectEstimateSet>& sets);

}  // namespace stratadoe
