#include <doctest.h>

#include "stratadoe/words.hpp"

using namespace stratadoe;

TEST_CASE("word labels and parsing round-trip") {
  CHECK(word_label(kIdentity) == "I");
  Word acf = parse_word("acf", 6);
  CHECK(word_label(acf) == "acf");
  CHECK(word_length(acf) == 3);
  CHECK(parse_word("I", 6) == kIdentity);
  CHECK(parse_word("", 6) == kIdentity);
  CHECK_THROWS_AS(parse_word("az", 6), ValidationError);
}

TEST_CASE("word product is the symmetric difference") {
  Word ab = parse_word("ab", 6), bc = parse_word("bc", 6);
  CHECK(word_label(word_product(ab, bc)) == "ac");
  CHECK(word_product(ab, ab) == kIdentity);
}

TEST_CASE("word order is length first, then label") {
  CHECK(word_less(parse_word("ce", 6), parse_word("abc", 6)));
  CHECK(word_less(parse_word("ab", 6), parse_word("ce", 6)));
  CHECK(word_less(parse_word("acf", 6), parse_word("bde", 6)));
  CHECK_FALSE(word_less(parse_word("bde", 6), parse_word("acf", 6)));
}

TEST_CASE("closure spans 2^b - 1 nonidentity elements") {
  auto sub = WordSubgroup::closure(
      {parse_word("ab", 6), parse_word("ce", 6), parse_word("acf", 6)});
  CHECK(sub.dimension() == 3);
  CHECK(sub.size() == 7);
  CHECK(sub.contains(parse_word("abce", 6)));
  CHECK_FALSE(sub.contains(parse_word("a", 6)));
}

TEST_CASE("dependent generators are rejected") {
  CHECK_THROWS_AS(WordSubgroup::closure({parse_word("ab", 6), parse_word("cd", 6),
                                         parse_word("abcd", 6)}),
                  DependentGenerators);
}

TEST_CASE("alias class of a word under a defining relation") {
  DefiningRelation rel(WordSubgroup::closure({parse_word("abcdef", 6)}));
  auto ac = alias_class(parse_word("acf", 6), rel);
  CHECK(word_label(ac.rep) == "acf");
  REQUIRE(ac.members.size() == 2);
  CHECK(ac.truncated_label() == "acf + bde");
  CHECK_THROWS_AS(alias_class(kIdentity, rel), IdentityWord);
}

TEST_CASE("alias class truncation drops long members") {
  DefiningRelation rel(WordSubgroup::closure({parse_word("abcdef", 6)}));
  auto ac = alias_class(parse_word("ab", 6), rel);
  REQUIRE(ac.members.size() == 2);  // ab, cdef
  CHECK(ac.truncated_label() == "ab");
}

TEST_CASE("wordlength pattern and resolution") {
  DefiningRelation rel(WordSubgroup::closure({parse_word("abcdef", 6)}));
  auto wlp = wordlength_pattern(rel.words(), 6);
  CHECK(wlp[6] == 1);
  CHECK(wlp[3] == 0);
  CHECK(resolution(rel) == 6);
  CHECK(resolution(DefiningRelation{}) == 0);
}
