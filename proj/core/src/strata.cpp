#include "stratadoe/strata.hpp"

#include <algorithm>
#include <iomanip>
#include <set>
#include <sstream>

namespace stratadoe {

namespace {

std::set<Word> with_identity(const WordSubgroup& s) {
  std::set<Word> out(s.elements().begin(), s.elements().end());
  out.insert(kIdentity);
  return out;
}

bool subgroup_contains_all(const WordSubgroup& big, const WordSubgroup& small) {
  for (Word w : small.elements())
    if (!big.contains(w)) return false;
  return true;
}

}  // namespace

UnitStructure UnitStructure::build(std::vector<UnitFactor> strata,
                                   const std::vector<UnitRelation>& relations,
                                   int n_base) {
  UnitStructure us;
  us.n_base_ = n_base;
  if (strata.empty()) throw InconsistentLattice("no strata declared");
  const std::size_t full = (std::size_t{1} << n_base) - 1;
  if (strata.back().subgroup.size() != full)
    throw InconsistentLattice("finest stratum '" + strata.back().name +
                              "' does not span the full effect space");
  for (const auto& r : relations) {
    const auto& a = strata.at(r.a);
    const auto& b = strata.at(r.b);
    if (r.kind == Relation::kNestedIn) {
      // a nested in b: units of a subdivide units of b, so a's subgroup
      // contains b's.
      if (!subgroup_contains_all(a.subgroup, b.subgroup))
        throw InconsistentLattice("'" + a.name + "' is declared nested in '" +
                                  b.name + "' but lacks part of its subgroup");
    } else {
      const auto& p = strata.at(r.parent);
      std::set<Word> ea = with_identity(a.subgroup);
      std::set<Word> inter;
      for (Word w : b.subgroup.elements())
        if (ea.count(w)) inter.insert(w);
      std::set<Word> ep(p.subgroup.elements().begin(), p.subgroup.elements().end());
      if (inter != ep)
        throw InconsistentLattice("crossed units '" + a.name + "' and '" +
                                  b.name + "' do not intersect in '" + p.name +
                                  "'");
    }
  }
  us.strata_ = std::move(strata);
  return us;
}

std::size_t UnitStructure::assign_stratum(Word image) const {
  std::size_t best = strata_.size();
  std::size_t best_size = 0;
  for (std::size_t i = 0; i < strata_.size(); ++i) {
    if (!strata_[i].subgroup.contains(image)) continue;
    if (best == strata_.size() || strata_[i].subgroup.size() < best_size) {
      best = i;
      best_size = strata_[i].subgroup.size();
    }
  }
  if (best == strata_.size())
    throw InconsistentLattice("no stratum contains image " + word_label(image));
  return best;
}

namespace {

std::string display_label(const AliasClass& cls,
                          const std::map<Word, std::string>& pseudo_names,
                          Word image) {
  std::vector<std::string> parts;
  auto it = pseudo_names.find(image);
  if (it != pseudo_names.end()) parts.push_back(it->second);
  for (Word w : cls.truncated(2)) parts.push_back(word_label(w));
  if (parts.empty()) parts.push_back(word_label(cls.rep));
  std::string out;
  for (const auto& p : parts) {
    if (!out.empty()) out += " + ";
    out += p;
  }
  return out;
}

int entry_category(const StratumEntry& e,
                   const std::map<Word, std::string>& pseudo_names) {
  if (word_length(e.alias.rep) == 1) return 0;
  if (pseudo_names.count(e.image)) return 1;
  return 2;
}

}  // namespace

StratumReport stratum_report(const RegularDesign& d, const UnitStructure& us,
                             const std::map<Word, std::string>& pseudo_names) {
  StratumReport rep;
  for (const auto& uf : us.strata()) {
    Stratum s;
    s.name = uf.name;
    rep.strata.push_back(std::move(s));
  }
  for (Word img = 1; img < (Word{1} << d.n_base()); ++img) {
    StratumEntry e;
    e.image = img;
    e.alias = d.class_of_image(img);
    e.display = display_label(e.alias, pseudo_names, img);
    rep.strata[us.assign_stratum(img)].entries.push_back(std::move(e));
  }
  for (auto& s : rep.strata) {
    std::sort(s.entries.begin(), s.entries.end(),
              [&](const StratumEntry& a, const StratumEntry& b) {
                int ca = entry_category(a, pseudo_names);
                int cb = entry_category(b, pseudo_names);
                if (ca != cb) return ca < cb;
                if (ca == 1) {
                  return pseudo_names.at(a.image) < pseudo_names.at(b.image);
                }
                return word_less(a.alias.rep, b.alias.rep);
              });
    s.df = static_cast<int>(s.entries.size());
    rep.total_df += s.df;
  }
  return rep;
}

std::string emit_stratum_report_csv(const StratumReport& rep) {
  std::ostringstream os;
  os << "stratum,label,stratum_df\n";
  for (const auto& s : rep.strata)
    for (const auto& e : s.entries)
      os << s.name << ",\"" << e.display << "\"," << s.df << '\n';
  return os.str();
}

std::string emit_stratum_report_text(const StratumReport& rep) {
  std::vector<std::size_t> widths;
  std::size_t n_rows = 0;
  for (const auto& s : rep.strata) {
    std::size_t w = s.name.size();
    for (const auto& e : s.entries) w = std::max(w, e.display.size());
    w = std::max(w, std::to_string(s.df).size() + 3);
    widths.push_back(w + 2);
    n_rows = std::max(n_rows, s.entries.size());
  }
  std::ostringstream os;
  auto cell = [&](const std::string& text, std::size_t col) {
    os << std::left << std::setw(static_cast<int>(widths[col])) << text;
  };
  for (std::size_t c = 0; c < rep.strata.size(); ++c) cell(rep.strata[c].name, c);
  os << '\n';
  for (std::size_t r = 0; r < n_rows; ++r) {
    for (std::size_t c = 0; c < rep.strata.size(); ++c) {
      const auto& entries = rep.strata[c].entries;
      cell(r < entries.size() ? entries[r].display : "", c);
    }
    os << '\n';
  }
  for (std::size_t c = 0; c < rep.strata.size(); ++c)
    cell(std::to_string(rep.strata[c].df) + " df", c);
  os << '\n';
  return os.str();
}

}  // namespace stratadoe
