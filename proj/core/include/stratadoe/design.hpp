#pragma once

#include <array>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "stratadoe/words.hpp"

namespace stratadoe {

// A regular 2^(k-p) fraction. Base factors are letters a.. (k-p of them);
// added factors are defined by generator words over the base letters.
class RegularDesign {
public:
  // generators[i] defines added factor number n_base + i.
  static RegularDesign fraction(int k, int p, const std::vector<Word>& generators);

  int n_base() const { return n_base_; }
  int n_factors() const { return n_factors_; }
  int n_runs() const { return 1 << n_base_; }

  // Substitutes added letters by their generator words; result is a word
  // over base letters only. Words with image 0 are aliased with the mean.
  Word base_image(Word w) const;

  // Defining contrast subgroup over all n_factors letters.
  const DefiningRelation& relation() const { return rel_; }
  int resolution() const { return stratadoe::resolution(rel_); }

  // +1/-1 level of word w in run r (runs indexed 0..n_runs-1; base factor i
  // level is +1 when bit i of r is set).
  int sign(int run, Word w) const;
  std::vector<int> column(Word w) const;

  // The alias class of all full-letter words sharing w's base image.
  AliasClass class_of(Word w) const;
  // Same, keyed directly by a base image (must be a base-letter word).
  AliasClass class_of_image(Word image) const;

  // All nonidentity alias classes, one per nonzero base image, sorted by rep.
  std::vector<AliasClass> alias_classes() const;

private:
  int n_base_ = 0;
  int n_factors_ = 0;
  std::array<Word, kMaxFactors> gen_img_{};  // letter index -> base image
  DefiningRelation rel_;
};

// A candidate arrangement of the runs into 2^b equal blocks, defined by a
// b-dimensional subgroup of base-image words.
struct BlockingScheme {
  WordSubgroup subgroup;           // over base images
  int n_blocks = 0;
  // Ranking keys, exposed for reporting and testing.
  int n_2fi_classes = 0;           // alias classes with a length-2 rep confounded
  int n_3fi_classes = 0;
  std::array<int, 3> word_counts{};  // full-letter words of length 2,3,4 confounded
  std::vector<std::string> canonical_generators;  // greedy generating set, labels
  std::vector<std::string> rep_labels;            // all class reps, sorted
};

// Exhaustive search over b-dimensional subgroups of interaction words (no
// main effects sacrificed), ranked best first. Key: fewest 2fi classes
// confounded, then 3fi classes, then confounded word counts by length,
// then canonical generator labels, then the sorted class-rep labels.
std::vector<BlockingScheme> search_blocking(const RegularDesign& d, int n_blocks);

// Fixed lookup from the sign pattern of the independent pseudo-factors to a
// block id in 1..2^b. `lookup[idx]` with idx = sum over i of bit(i) << (b-1-i),
// bit = 1 when the pseudo-factor level is +1.
struct BlockAssignment {
  std::vector<Word> pseudo_factors;  // b independent full-letter words
  std::vector<int> lookup;           // size 2^b, a permutation of 1..2^b
};

// Natural order: idx + 1.
BlockAssignment natural_block_assignment(const std::vector<Word>& pseudo_factors);

int block_of(const RegularDesign& d, int run, const BlockAssignment& ba);
std::vector<int> assign_blocks(const RegularDesign& d, const BlockAssignment& ba);

// One equivalence class of ways to add an orthogonal four-level factor:
// a 2-dimensional subgroup {w1, w2, w1w2} of admissible alias classes.
struct FourLevelExtension {
  std::array<Word, 3> triple{};                 // canonical member, base images
  std::vector<std::array<Word, 3>> members;     // all member triples
  int n_class_members = 0;
  // 2fi aliases unavoidably hitting the two main-effect roles (the word with
  // the most 2fi aliases is given the product role).
  int n_2fi_on_roles = 0;
};

// Enumerates subgroups whose three words are not aliased with main effects
// and not confounded with blocks, grouped into label-free equivalence
// classes and ranked best first.
std::vector<FourLevelExtension> enumerate_four_level_extensions(
    const RegularDesign& d, const WordSubgroup& blocking);

struct RunRecord {
  int week = 0;    // 1..2
  int plate = 0;   // absolute plate id, 1..(2*weeks)
  int column = 0;  // block id / column position
  int tube = 0;
  int run = 0;     // row index into the design's run table
  std::vector<int> levels;  // +1/-1 per factor letter
};

struct RunTable {
  int n_factors = 0;
  int n_columns = 0;       // column positions per plate
  std::vector<RunRecord> rows;  // sorted by (week, plate, column)
};

struct UnitAssignmentSpec {
  Word week_word = kIdentity;    // full-letter word whose sign splits weeks
  Word plate_word = kIdentity;   // splits plates within a week
  std::vector<int> tube_factors; // letter indices identifying a tube
  int tubes_per_week = 0;        // validated; TubeCountViolation otherwise
  BlockAssignment blocks;
};

// Assigns weeks, plates, columns and tube numbers. Tubes are numbered within
// each week by sorting the distinct tube-factor sign tuples lexicographically
// (-1 before +1, first factor slowest), continuing across weeks.
RunTable assign_units(const RegularDesign& d, const UnitAssignmentSpec& spec);

// CSV with header Week,Plate,Column,Tube,<letters...>; +1/-1 literals, LF.
std::string emit_run_table(const RunTable& rt);
RunTable parse_run_table(const std::string& csv);

}  // namespace stratadoe
