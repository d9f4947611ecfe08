#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "stratadoe/design.hpp"
#include "stratadoe/strata.hpp"

namespace stratadoe {

constexpr int kRowsPerPlate = 8;

struct ChipRecord {
  int week = 0, plate = 0, row = 0, column = 0, tube = 0;
  std::vector<int> levels;  // +1/-1 per factor letter, from the run
  std::optional<double> response;
};

struct ChipDataset {
  int n_factors = 0;
  std::vector<ChipRecord> chips;  // run-major, then plate row 1..8
};

// The empty chip grid implied by a run table (kRowsPerPlate rows per run).
ChipDataset chip_grid(const RunTable& rt);

// Variance components on the five unit groupings plus residual.
struct VarianceComponents {
  double week = 0, plate = 0, tube = 0, column = 0, row = 0, error = 0;
};

// Draws additive-mixed-model data: one normal draw per unit of each grouping plus a
// residual per chip. `beta` maps effect words to regression coefficients
// (half the difference-of-means effect size). Deterministic per seed.
ChipDataset simulate_response(const RunTable& rt,
                              const std::map<Word, double>& beta,
                              double intercept, const VarianceComponents& vc,
                              std::uint64_t seed);

// Marks `n_missing` distinct chips as missing, chosen by the seeded RNG.
void inject_missing(ChipDataset& ds, int n_missing, std::uint64_t seed);

// CSV: week,plate,row,column,tube,<letters...>,response (empty = missing).
std::string emit_chip_csv(const ChipDataset& ds);
ChipDataset parse_chip_csv(const std::string& csv);

// A fixed model term. Word terms produce one +/-1 column per word; the
// special kinds expand the 8 column positions / plate rows into 7 contrasts.
struct ModelTerm {
  std::string name;
  std::vector<Word> words;
  enum class Kind { kWords, kColumnPseudo, kRowPseudo } kind = Kind::kWords;
};

struct MixedModelSpec {
  std::vector<ModelTerm> fixed;  // intercept is implicit
  // Random-effect groupings in reporting order: name and the grouping names
  // required for a fixed term's testability are matched through
  // `term_dependence`.
  std::vector<std::string> random_groups;  // subset of week/plate/tube/column/row
  std::map<std::string, std::vector<std::string>> term_dependence;
};

// The fixed terms of the paper preset's analysis: a,c,d,g,h,ah,cd,gh plus the seven column and
// seven row position contrasts; all five random groupings. `column_pseudos`
// are the blocking words p1..p7 in index order, as base-image words.
// `us` supplies each word's stratum for the testability mapping.
MixedModelSpec paper_model_spec(const RegularDesign& d,
                                const std::vector<Word>& column_pseudos,
                                const UnitStructure& us,
                                const std::map<std::size_t, std::string>& stratum_to_group);

struct FitOptions {
  double tol = 1e-8;
  int max_iter = 500;
};

struct VarianceEstimate {
  std::string group;   // week/plate/tube/column/row/error
  bool estimable = true;
  double estimate = 0.0;
  double std_error = 0.0;
};

struct FTestRow {
  std::string term;
  bool testable = true;
  int num_df = 0;
  double den_df = 0.0;
  double f_stat = 0.0;
  double p_value = 1.0;
};

struct MeansTable {
  std::string term;
  std::vector<std::string> level_names;
  std::vector<double> means;
  double sed = 0.0;             // largest pairwise SE of a difference
  std::optional<double> lsd;    // absent when the stratum variance is not estimable
};

class FittedModel {
public:
  // REML by Fisher scoring with step halving; non-estimable components are
  // detected up front (rank test) and excluded from the optimization.
  static FittedModel fit(const ChipDataset& ds, const MixedModelSpec& spec,
                         const FitOptions& opts = {});

  const std::vector<VarianceEstimate>& variance_components() const;
  const std::vector<std::pair<std::string, double>>& coefficients() const;
  const std::vector<std::string>& dropped_columns() const;
  double reml_loglik() const;
  int iterations() const;

  // Wald F with Satterthwaite denominator df for every fixed term.
  std::vector<FTestRow> f_tests() const;

  // Model-based means over the full chip grid for a term name ("gh", "cd",
  // "column", "row", ...); throws UnknownTerm.
  MeansTable means(const std::string& term, double alpha) const;

  // CSV emitters.
  std::string emit_variance_csv() const;
  std::string emit_ftest_csv() const;
  static std::string emit_means_csv(const MeansTable& mt);

  ~FittedModel();
  FittedModel(FittedModel&&) noexcept;
  FittedModel& operator=(FittedModel&&) noexcept;

private:
  FittedModel();
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace stratadoe
