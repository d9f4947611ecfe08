#pragma once

#include <map>
#include <string>
#include <vector>

#include "stratadoe/design.hpp"

namespace stratadoe {

// A randomization unit factor: its subgroup (over base images, identity
// included implicitly) contains every treatment word that is constant on
// its units.
struct UnitFactor {
  std::string name;
  WordSubgroup subgroup;  // over base-image words
};

enum class Relation { kNestedIn, kCrossedWith };

struct UnitRelation {
  std::size_t a = 0, b = 0;  // indices into UnitStructure::strata
  Relation kind = Relation::kNestedIn;
  std::size_t parent = 0;    // common parent, for crossed pairs
};

class UnitStructure {
public:
  // Strata ordered coarsest to finest; the last must span the full effect
  // space. Throws InconsistentLattice when a declared relation fails its
  // containment check.
  static UnitStructure build(std::vector<UnitFactor> strata,
                             const std::vector<UnitRelation>& relations,
                             int n_base);

  const std::vector<UnitFactor>& strata() const { return strata_; }
  int n_base() const { return n_base_; }

  // The stratum whose subgroup is the minimal one containing the class's
  // base image; the finest stratum always matches.
  std::size_t assign_stratum(Word image) const;

private:
  std::vector<UnitFactor> strata_;
  int n_base_ = 0;
};

struct StratumEntry {
  Word image = kIdentity;      // base image of the alias class
  AliasClass alias;            // over full letters
  std::string display;         // report label, e.g. "p4 + bg + df + eh"
};

struct Stratum {
  std::string name;
  std::vector<StratumEntry> entries;
  int df = 0;
};

struct StratumReport {
  std::vector<Stratum> strata;
  int total_df = 0;
};

// Allocates every nonidentity alias class to a stratum. pseudo_names maps a
// base image to a pseudo-factor name ("p1".."p7"). Display rule: pseudo
// names in the class, then members of length <= 2; when both are empty, the
// single shortest-then-lexicographic representative. Entries are ordered
// main effects, then pseudo-factors, then the rest by representative.
StratumReport stratum_report(const RegularDesign& d, const UnitStructure& us,
                             const std::map<Word, std::string>& pseudo_names);

// CSV: stratum,label,stratum_df (one row per class).
std::string emit_stratum_report_csv(const StratumReport& rep);
// Aligned text table, one column block per stratum.
std::string emit_stratum_report_text(const StratumReport& rep);

}  // namespace stratadoe
