#include <doctest.h>

#include <set>

#include "stratadoe/scenarios.hpp"
#include "stratadoe/strata.hpp"

using namespace stratadoe;

namespace {

UnitStructure paper_structure(const RegularDesign& d) {
  Word h_img = d.base_image(parse_word("h", 8));
  Word g_img = d.base_image(parse_word("g", 8));
  std::vector<Word> letters;
  for (int i = 0; i < 5; ++i) letters.push_back(static_cast<Word>(1 << i));
  std::vector<UnitFactor> strata{
      {"Week", WordSubgroup::span({h_img})},
      {"Plate", WordSubgroup::span({h_img, g_img})},
      {"Tube", WordSubgroup::span({1, 2, 4, 8, h_img})},
      {"Unit", WordSubgroup::span(letters)},
  };
  std::vector<UnitRelation> rels{
      {1, 0, Relation::kNestedIn, 0},
      {2, 0, Relation::kNestedIn, 0},
      {2, 1, Relation::kCrossedWith, 0},
      {3, 1, Relation::kNestedIn, 1},
      {3, 2, Relation::kNestedIn, 2},
  };
  return UnitStructure::build(std::move(strata), rels, 5);
}

}  // namespace

TEST_CASE("paper unit lattice validates and assigns strata") {
  auto pa = build_preset("paper");
  auto us = paper_structure(pa.design);
  auto img = [&](const char* lab) {
    return pa.design.base_image(parse_word(lab, 8));
  };
  CHECK(us.strata()[us.assign_stratum(img("h"))].name == "Week");
  CHECK(us.strata()[us.assign_stratum(img("g"))].name == "Plate");
  CHECK(us.strata()[us.assign_stratum(img("be"))].name == "Plate");  // gh alias
  CHECK(us.strata()[us.assign_stratum(img("a"))].name == "Tube");
  CHECK(us.strata()[us.assign_stratum(img("e"))].name == "Unit");
  // class {p4, bg, df, eh} sits in the finest stratum
  CHECK(us.strata()[us.assign_stratum(img("bg"))].name == "Unit");
}

TEST_CASE("nesting violations are rejected") {
  std::vector<UnitFactor> strata{
      {"Week", WordSubgroup::span({parse_word("abc", 5)})},
      // Plate subgroup missing the week word
      {"Plate", WordSubgroup::span({parse_word("ace", 5)})},
      {"Unit", WordSubgroup::span({1, 2, 4, 8, 16})},
  };
  std::vector<UnitRelation> rels{{1, 0, Relation::kNestedIn, 0},
                                 {2, 1, Relation::kNestedIn, 1}};
  CHECK_THROWS_AS(UnitStructure::build(std::move(strata), rels, 5),
                  InconsistentLattice);
}

TEST_CASE("stratum report df sums to N - 1 for every preset") {
  for (const auto& id : preset_ids()) {
    auto pa = build_preset(id);
    int total = 0;
    for (const auto& s : pa.strata.strata) total += s.df;
    CHECK(total == 31);
    CHECK(pa.strata.total_df == 31);
  }
}

TEST_CASE("paper stratum df split is 1/2/14/14") {
  auto pa = build_preset("paper");
  REQUIRE(pa.strata.strata.size() == 4);
  CHECK(pa.strata.strata[0].df == 1);
  CHECK(pa.strata.strata[1].df == 2);
  CHECK(pa.strata.strata[2].df == 14);
  CHECK(pa.strata.strata[3].df == 14);
}

TEST_CASE("each alias class lands in exactly one stratum") {
  auto pa = build_preset("paper");
  std::set<Word> seen;
  for (const auto& s : pa.strata.strata)
    for (const auto& e : s.entries) CHECK(seen.insert(e.image).second);
  CHECK(seen.size() == 31);
}

TEST_CASE("stratum assignment matches the run-table constancy oracle") {
  // A class belongs to stratum S iff its contrast is constant within every
  // unit of S and varies within units of every coarser stratum.
  auto pa = build_preset("paper");
  auto unit_key = [&](const std::string& s, const RunRecord& r) {
    if (s == "Week") return r.week * 100;
    if (s == "Plate") return r.plate * 100;
    if (s == "Tube") return r.week * 100 + r.tube;
    return r.run;  // Unit: every run its own unit
  };
  auto constant_within = [&](Word image, const std::string& s) {
    std::map<int, std::set<int>> signs;
    for (const auto& r : pa.run_table.rows)
      signs[unit_key(s, r)].insert(pa.design.sign(r.run, image));
    for (const auto& [u, sg] : signs)
      if (sg.size() > 1) return false;
    return true;
  };
  std::vector<std::string> order{"Week", "Plate", "Tube", "Unit"};
  for (std::size_t si = 0; si < pa.strata.strata.size(); ++si) {
    for (const auto& e : pa.strata.strata[si].entries) {
      CHECK(constant_within(e.image, order[si]));
      for (std::size_t coarser = 0; coarser < si; ++coarser)
        CHECK_FALSE(constant_within(e.image, order[coarser]));
    }
  }
}

TEST_CASE("scenario 2 merges the tube stratum into the unit stratum") {
  auto pa = build_preset("alt2");
  REQUIRE(pa.strata.strata.size() == 3);
  CHECK(pa.strata.strata[0].name == "Week");
  CHECK(pa.strata.strata[1].name == "Plate");
  CHECK(pa.strata.strata[2].name == "Unit");
  CHECK(pa.strata.strata[2].df == 28);
}

TEST_CASE("scenario 1 moves df from tubes to units") {
  auto pa = build_preset("alt1");
  REQUIRE(pa.strata.strata.size() == 4);
  CHECK(pa.strata.strata[2].df == 12);
  CHECK(pa.strata.strata[3].df == 16);
}

TEST_CASE("scenario 1 tube partition groups four tubes per plate") {
  auto pa = build_preset("alt1");
  std::map<int, std::set<int>> tubes_by_plate;
  for (const auto& r : pa.run_table.rows) tubes_by_plate[r.plate].insert(r.tube);
  CHECK(tubes_by_plate.size() == 4);
  std::set<int> all;
  for (const auto& [p, t] : tubes_by_plate) {
    CHECK(t.size() == 4);
    all.insert(t.begin(), t.end());
  }
  CHECK(all.size() == 16);
}
