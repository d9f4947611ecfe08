#pragma once

#include <bit>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "stratadoe/errors.hpp"

namespace stratadoe {

// A factorial effect word: bit i set means factor letter 'a'+i is present.
// The identity word (intercept) is 0. At most 16 factors.
using Word = std::uint16_t;

constexpr int kMaxFactors = 16;
constexpr Word kIdentity = 0;

inline int word_length(Word w) { return std::popcount(w); }

inline Word word_product(Word u, Word v) { return static_cast<Word>(u ^ v); }

// "acf" for bits {0,2,5}; "I" for the identity.
std::string word_label(Word w);

// Parses a label like "acf" over n_factors letters; "I" or "" gives identity.
Word parse_word(std::string_view label, int n_factors);

// Canonical order: shorter first, then label-lexicographic.
bool word_less(Word u, Word v);

// A subgroup of the effect-word group, stored without the identity.
class WordSubgroup {
public:
  WordSubgroup() = default;

  // Closes over the generators; throws DependentGenerators when one of them
  // lies in the span of the previous ones.
  static WordSubgroup closure(const std::vector<Word>& generators);

  // Closure of a set that is not required to be independent.
  static WordSubgroup span(const std::vector<Word>& words);

  const std::vector<Word>& generators() const { return gens_; }
  // Nonidentity elements, sorted by word_less; size 2^b - 1.
  const std::vector<Word>& elements() const { return elems_; }
  int dimension() const { return static_cast<int>(gens_.size()); }
  std::size_t size() const { return elems_.size(); }
  bool contains(Word w) const;

private:
  std::vector<Word> gens_;
  std::vector<Word> elems_;
};

// Defining contrast subgroup of a regular fraction; all signs positive.
class DefiningRelation {
public:
  DefiningRelation() = default;  // empty relation: full factorial
  explicit DefiningRelation(WordSubgroup sub) : sub_(std::move(sub)) {}

  const std::vector<Word>& words() const { return sub_.elements(); }
  bool empty() const { return sub_.size() == 0; }

private:
  WordSubgroup sub_;
};

struct AliasClass {
  Word rep = kIdentity;             // shortest member, ties lexicographic
  std::vector<Word> members;        // sorted by word_less, includes rep
  // Members of length <= max_len (the display truncation of alias reports).
  std::vector<Word> truncated(int max_len = 3) const;
  std::string truncated_label(int max_len = 3) const;  // "p-less" joined form
};

// The coset {w * d : d in rel} together with w; throws IdentityWord.
AliasClass alias_class(Word w, const DefiningRelation& rel);

// A_i counts for i = 0..max_len over the given words (A[0], A[1], A[2] are
// normally zero for a sane relation but are reported as found).
std::vector<int> wordlength_pattern(const std::vector<Word>& words, int max_len);

// Length of the shortest defining word; 0 means unbounded (empty relation).
int resolution(const DefiningRelation& rel);

}  // namespace stratadoe
