#pragma once

#include <map>
#include <string>
#include <vector>

#include "stratadoe/design.hpp"
#include "stratadoe/mixed_model.hpp"
#include "stratadoe/strata.hpp"

namespace stratadoe {

// Everything the CLI and the tests need about one built-in design scenario.
// Presets are code-defined fixtures; user scenarios come in through a config
// file and produce the same structure.
struct PresetArtifacts {
  std::string id;
  RegularDesign base;       // fraction before the week/plate factors are named
  RegularDesign design;     // all letters, incl. the two extension factors
  BlockingScheme blocking;  // top-ranked scheme for the base fraction
  BlockAssignment blocks;   // pseudo-factor sign pattern -> column position
  std::map<Word, std::string> pseudo_names;  // base image -> "p1".."p7"
  std::vector<Word> column_pseudos;          // p words in index order
  UnitAssignmentSpec units;
  UnitStructure structure;  // Week / Plate / (Tube) / Unit lattice
  std::map<std::size_t, std::string> stratum_groups;  // stratum -> grouping name
  RunTable run_table;
  StratumReport strata;
};

std::vector<std::string> preset_ids();

// Builds a preset end to end (fraction, blocking search, unit assignment,
// stratum report); throws ValidationError subclasses on any inconsistency.
PresetArtifacts build_preset(const std::string& id);

// The analysis model for a preset: the screening-selected fixed terms plus column
// and row position contrasts, with term testability wired to the preset's
// strata.
MixedModelSpec preset_model_spec(const PresetArtifacts& pa);

// Builds PresetArtifacts from a declarative JSON scenario description; see
// the README for the schema. Throws IoError on malformed JSON and
// ValidationError subclasses on inconsistent content.
PresetArtifacts build_scenario_from_config(const std::string& json_text);

}  // namespace stratadoe
