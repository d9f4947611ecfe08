#include "stratadoe/words.hpp"

#include <algorithm>
#include <array>

namespace stratadoe {

std::string word_label(Word w) {
  if (w == kIdentity) return "I";
  std::string s;
  for (int i = 0; i < kMaxFactors; ++i)
    if (w >> i & 1) s.push_back(static_cast<char>('a' + i));
  return s;
}

Word parse_word(std::string_view label, int n_factors) {
  if (label.empty() || label == "I") return kIdentity;
  Word w = 0;
  for (char ch : label) {
    int i = ch - 'a';
    if (i < 0 || i >= n_factors)
      throw ValidationError("BadWordLabel",
                            "letter '" + std::string(1, ch) + "' out of range");
    w = static_cast<Word>(w | (Word{1} << i));
  }
  return w;
}

bool word_less(Word u, Word v) {
  int lu = word_length(u), lv = word_length(v);
  if (lu != lv) return lu < lv;
  // Same length: label order equals comparing letters from the low end.
  while (u != 0 && v != 0) {
    int bu = std::countr_zero(u), bv = std::countr_zero(v);
    if (bu != bv) return bu < bv;
    u = static_cast<Word>(u & (u - 1));
    v = static_cast<Word>(v & (v - 1));
  }
  return false;
}

WordSubgroup WordSubgroup::closure(const std::vector<Word>& generators) {
  WordSubgroup g;
  std::vector<Word> span{kIdentity};
  for (Word gen : generators) {
    if (std::find(span.begin(), span.end(), gen) != span.end())
      throw DependentGenerators("generator " + word_label(gen) +
                                " is a product of earlier generators");
    std::size_t n = span.size();
    for (std::size_t i = 0; i < n; ++i)
      span.push_back(word_product(span[i], gen));
    g.gens_.push_back(gen);
  }
  g.elems_.assign(span.begin() + 1, span.end());
  std::sort(g.elems_.begin(), g.elems_.end(), word_less);
  return g;
}

WordSubgroup WordSubgroup::span(const std::vector<Word>& words) {
  std::vector<Word> independent;
  std::vector<Word> cur{kIdentity};
  for (Word w : words) {
    if (w == kIdentity) continue;
    if (std::find(cur.begin(), cur.end(), w) != cur.end()) continue;
    std::size_t n = cur.size();
    for (std::size_t i = 0; i < n; ++i) cur.push_back(word_product(cur[i], w));
    independent.push_back(w);
  }
  return closure(independent);
}

bool WordSubgroup::contains(Word w) const {
  if (w == kIdentity) return true;
  return std::binary_search(elems_.begin(), elems_.end(), w, word_less);
}

std::vector<Word> AliasClass::truncated(int max_len) const {
  std::vector<Word> out;
  for (Word w : members)
    if (word_length(w) <= max_len) out.push_back(w);
  return out;
}

std::string AliasClass::truncated_label(int max_len) const {
  std::string s;
  for (Word w : truncated(max_len)) {
    if (!s.empty()) s += " + ";
    s += word_label(w);
  }
  return s;
}

AliasClass alias_class(Word w, const DefiningRelation& rel) {
  if (w == kIdentity) throw IdentityWord("alias class of the identity word");
  AliasClass c;
  c.members.push_back(w);
  for (Word d : rel.words()) c.members.push_back(word_product(w, d));
  std::sort(c.members.begin(), c.members.end(), word_less);
  c.rep = c.members.front();
  return c;
}

std::vector<int> wordlength_pattern(const std::vector<Word>& words, int max_len) {
  std::vector<int> a(static_cast<std::size_t>(max_len) + 1, 0);
  for (Word w : words) {
    int l = word_length(w);
    if (l <= max_len) ++a[static_cast<std::size_t>(l)];
  }
  return a;
}

int resolution(const DefiningRelation& rel) {
  if (rel.empty()) return 0;
  int r = kMaxFactors + 1;
  for (Word w : rel.words()) r = std::min(r, word_length(w));
  return r;
}

}  // namespace stratadoe
