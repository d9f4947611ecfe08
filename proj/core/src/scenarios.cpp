#include "stratadoe/scenarios.hpp"

#include <algorithm>
#include <json.hpp>

namespace stratadoe {

namespace {

// Raw knobs of one scenario; presets fill this in code, user scenarios from
// a config file.
struct ScenarioParams {
  std::string id;
  int k = 0, p = 0;
  std::vector<std::string> generators;            // base fraction
  std::vector<std::string> extension_generators;  // 0..2 extra letters
  int n_blocks = 0;
  // Independent blocking words in pseudo-factor naming order. The order is
  // part of the fixture (it fixes the p1.. labels) and is not always the
  // canonical sorted order. Empty: take the top-ranked search result.
  std::vector<std::string> pseudo_factors;
  std::vector<int> block_lookup;  // empty: natural order
  std::string week_word, plate_word;
  std::string tube_factors;  // letter string, e.g. "abcd"
  int tubes_per_week = 0;
};

Word parse_in(const std::string& lab, const RegularDesign& d) {
  return parse_word(lab, d.n_factors());
}

// p1..p(2^b-1): the generators, then their products with subset indices
// ordered by (size, numeric value), matching the usual catalog listing.
std::vector<Word> expand_pseudo_words(const std::vector<Word>& gens) {
  std::vector<unsigned> subsets;
  for (unsigned s = 1; s < (1u << gens.size()); ++s) subsets.push_back(s);
  std::sort(subsets.begin(), subsets.end(), [](unsigned a, unsigned b) {
    int la = std::popcount(a), lb = std::popcount(b);
    return la != lb ? la < lb : a < b;
  });
  std::vector<Word> out;
  for (unsigned s : subsets) {
    Word w = kIdentity;
    for (std::size_t i = 0; i < gens.size(); ++i)
      if (s >> i & 1) w = word_product(w, gens[i]);
    out.push_back(w);
  }
  return out;
}

PresetArtifacts build_from_params(const ScenarioParams& sp) {
  PresetArtifacts pa;
  pa.id = sp.id;

  std::vector<Word> base_gens;
  for (const auto& g : sp.generators)
    base_gens.push_back(parse_word(g, sp.k - sp.p));
  pa.base = RegularDesign::fraction(sp.k, sp.p, base_gens);

  if (sp.extension_generators.empty()) {
    pa.design = pa.base;
  } else {
    std::vector<Word> all_gens = base_gens;
    for (const auto& g : sp.extension_generators)
      all_gens.push_back(parse_word(g, sp.k - sp.p));
    int k_ext = sp.k + static_cast<int>(sp.extension_generators.size());
    pa.design = RegularDesign::fraction(
        k_ext, sp.p + static_cast<int>(sp.extension_generators.size()), all_gens);
  }

  auto schemes = search_blocking(pa.base, sp.n_blocks);
  pa.blocking = schemes.front();

  std::vector<Word> pgens;
  if (sp.pseudo_factors.empty()) {
    for (const auto& lab : pa.blocking.canonical_generators)
      pgens.push_back(parse_in(lab, pa.design));
  } else {
    for (const auto& lab : sp.pseudo_factors)
      pgens.push_back(parse_in(lab, pa.design));
  }
  // The named pseudo-factors must generate the searched subgroup.
  {
    WordSubgroup named = WordSubgroup::closure([&] {
      std::vector<Word> imgs;
      for (Word w : pgens) imgs.push_back(pa.design.base_image(w));
      return imgs;
    }());
    if (named.elements() != pa.blocking.subgroup.elements())
      throw InfeasibleBlocking("pseudo-factor words do not generate the top-ranked blocking subgroup");
  }
  pa.column_pseudos = expand_pseudo_words(pgens);
  for (std::size_t i = 0; i < pa.column_pseudos.size(); ++i)
    pa.pseudo_names[pa.design.base_image(pa.column_pseudos[i])] =
        "p" + std::to_string(i + 1);

  pa.blocks = natural_block_assignment(pgens);
  if (!sp.block_lookup.empty()) pa.blocks.lookup = sp.block_lookup;

  pa.units.week_word = parse_in(sp.week_word, pa.design);
  pa.units.plate_word = parse_in(sp.plate_word, pa.design);
  for (char c : sp.tube_factors) pa.units.tube_factors.push_back(c - 'a');
  pa.units.tubes_per_week = sp.tubes_per_week;
  pa.units.blocks = pa.blocks;
  pa.run_table = assign_units(pa.design, pa.units);

  // Unit lattice: Week > Plate, Week > Tube (crossed with Plate unless it
  // contains it), everything > Unit. Tube is dropped when its subgroup
  // already spans the whole effect space (no tube-only contrasts).
  Word week_img = pa.design.base_image(pa.units.week_word);
  Word plate_img = pa.design.base_image(pa.units.plate_word);
  WordSubgroup week_sub = WordSubgroup::span({week_img});
  WordSubgroup plate_sub = WordSubgroup::span({week_img, plate_img});
  std::vector<Word> tube_imgs{week_img};
  for (int f : pa.units.tube_factors)
    tube_imgs.push_back(pa.design.base_image(static_cast<Word>(1 << f)));
  WordSubgroup tube_sub = WordSubgroup::span(tube_imgs);
  std::vector<Word> full_letters;
  for (int i = 0; i < pa.base.n_base(); ++i)
    full_letters.push_back(static_cast<Word>(1 << i));
  WordSubgroup full_sub = WordSubgroup::span(full_letters);

  bool has_tube = tube_sub.size() < full_sub.size();
  std::vector<UnitFactor> strata;
  strata.push_back({"Week", week_sub});
  strata.push_back({"Plate", plate_sub});
  if (has_tube) strata.push_back({"Tube", tube_sub});
  strata.push_back({"Unit", full_sub});

  std::vector<UnitRelation> rels;
  rels.push_back({1, 0, Relation::kNestedIn, 0});
  std::size_t unit_idx = has_tube ? 3 : 2;
  if (has_tube) {
    bool tube_in_plate = true;
    for (Word w : plate_sub.elements())
      if (!tube_sub.contains(w)) tube_in_plate = false;
    if (tube_in_plate) {
      rels.push_back({2, 1, Relation::kNestedIn, 1});
    } else {
      rels.push_back({2, 0, Relation::kNestedIn, 0});
      rels.push_back({2, 1, Relation::kCrossedWith, 0});
    }
    rels.push_back({unit_idx, 2, Relation::kNestedIn, 2});
  }
  rels.push_back({unit_idx, 1, Relation::kNestedIn, 1});
  pa.structure = UnitStructure::build(std::move(strata), rels, pa.base.n_base());

  std::size_t si = 0;
  pa.stratum_groups[si++] = "week";
  pa.stratum_groups[si++] = "plate";
  if (has_tube) pa.stratum_groups[si++] = "tube";
  pa.stratum_groups[si++] = "column";

  pa.strata = stratum_report(pa.design, pa.structure, pa.pseudo_names);
  return pa;
}

ScenarioParams preset_params(const std::string& id) {
  ScenarioParams sp;
  sp.id = id;
  if (id == "paper" || id == "alt1" || id == "alt2") {
    sp.k = 6;
    sp.p = 1;
    sp.generators = {"abcde"};
    sp.extension_generators = {"ace", "abc"};  // g, h
    sp.n_blocks = 8;
    sp.pseudo_factors = {"ab", "ce", "acf"};
    sp.block_lookup = {3, 2, 1, 4, 5, 6, 7, 8};
    if (id == "alt2") {
      sp.week_word = "g";
      sp.plate_word = "h";
      sp.tube_factors = "abcd";
      sp.tubes_per_week = 16;
    } else {
      sp.week_word = "h";
      sp.plate_word = "g";
      sp.tube_factors = id == "alt1" ? "abce" : "abcd";
      sp.tubes_per_week = 8;
    }
  } else if (id == "alt3") {
    sp.k = 8;
    sp.p = 3;
    sp.generators = {"abcd", "abe", "ace"};  // f, g, h
    sp.n_blocks = 8;
    sp.pseudo_factors = {"abc", "ad", "ae"};
    sp.week_word = "abd";  // the second four-level pseudo-factor
    sp.plate_word = "ade"; // the first one
    sp.tube_factors = "abcd";
    sp.tubes_per_week = 8;
  } else if (id == "alt4") {
    sp.k = 6;
    sp.p = 1;
    sp.generators = {"abcde"};
    sp.extension_generators = {"abe", "abc"};  // g, h
    sp.n_blocks = 4;
    sp.pseudo_factors = {"ab", "acd"};
    sp.week_word = "h";
    sp.plate_word = "g";
    sp.tube_factors = "abcd";
    sp.tubes_per_week = 8;
  } else {
    throw ValidationError("UnknownPreset", "no preset named '" + id + "'");
  }
  return sp;
}

}  // namespace

std::vector<std::string> preset_ids() {
  return {"paper", "alt1", "alt2", "alt3", "alt4"};
}

PresetArtifacts build_preset(const std::string& id) {
  return build_from_params(preset_params(id));
}

MixedModelSpec preset_model_spec(const PresetArtifacts& pa) {
  return paper_model_spec(pa.design, pa.column_pseudos, pa.structure,
                          pa.stratum_groups);
}

PresetArtifacts build_scenario_from_config(const std::string& json_text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::exception& e) {
    throw IoError(std::string("scenario config is not valid JSON: ") + e.what());
  }
  ScenarioParams sp;
  try {
    sp.id = j.at("id").get<std::string>();
    sp.k = j.at("k").get<int>();
    sp.p = j.at("p").get<int>();
    sp.generators = j.at("generators").get<std::vector<std::string>>();
    if (j.contains("extension_generators"))
      sp.extension_generators =
          j.at("extension_generators").get<std::vector<std::string>>();
    sp.n_blocks = j.at("n_blocks").get<int>();
    if (j.contains("pseudo_factors"))
      sp.pseudo_factors = j.at("pseudo_factors").get<std::vector<std::string>>();
    if (j.contains("block_lookup"))
      sp.block_lookup = j.at("block_lookup").get<std::vector<int>>();
    sp.week_word = j.at("week_word").get<std::string>();
    sp.plate_word = j.at("plate_word").get<std::string>();
    sp.tube_factors = j.at("tube_factors").get<std::string>();
    sp.tubes_per_week = j.at("tubes_per_week").get<int>();
  } catch (const nlohmann::json::exception& e) {
    throw IoError(std::string("scenario config is missing or mistypes a field: ") +
                  e.what());
  }
  return build_from_params(sp);
}

}  // namespace stratadoe
