#include "stratadoe/design.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <sstream>
#include <tuple>

namespace stratadoe {

RegularDesign RegularDesign::fraction(int k, int p,
                                      const std::vector<Word>& generators) {
  if (k <= 0 || p < 0 || p >= k || k > kMaxFactors)
    throw ValidationError("BadFractionSize", "invalid k or p");
  if (static_cast<int>(generators.size()) != p)
    throw InvalidGenerator("expected " + std::to_string(p) + " generators");
  RegularDesign d;
  d.n_base_ = k - p;
  d.n_factors_ = k;
  if ((1 << d.n_base_) < k)
    throw ValidationError("BadFractionSize", "fewer runs than factors");
  const Word base_mask = static_cast<Word>((1 << d.n_base_) - 1);
  for (int i = 0; i < d.n_base_; ++i) d.gen_img_[i] = static_cast<Word>(1 << i);

  std::set<Word> images;
  for (int i = 0; i < d.n_base_; ++i) images.insert(static_cast<Word>(1 << i));
  std::vector<Word> defining_gens;
  for (int i = 0; i < p; ++i) {
    Word g = generators[static_cast<std::size_t>(i)];
    int letter = d.n_base_ + i;
    if (g == kIdentity || (g & ~base_mask) != 0)
      throw InvalidGenerator("generator " + word_label(g) +
                             " must be a nonempty word over base letters");
    if (!images.insert(g).second)
      throw InvalidGenerator("generator " + word_label(g) +
                             " duplicates an existing column");
    d.gen_img_[letter] = g;
    defining_gens.push_back(static_cast<Word>(g | (Word{1} << letter)));
  }
  if (!defining_gens.empty())
    d.rel_ = DefiningRelation(WordSubgroup::closure(defining_gens));
  return d;
}

Word RegularDesign::base_image(Word w) const {
  Word img = 0;
  for (int i = 0; i < n_factors_; ++i)
    if (w >> i & 1) img = word_product(img, gen_img_[i]);
  return img;
}

int RegularDesign::sign(int run, Word w) const {
  Word img = base_image(w);
  int minus = std::popcount(static_cast<unsigned>(img & ~static_cast<unsigned>(run)));
  return (minus % 2 == 0) ? 1 : -1;
}

std::vector<int> RegularDesign::column(Word w) const {
  std::vector<int> col(static_cast<std::size_t>(n_runs()));
  for (int r = 0; r < n_runs(); ++r) col[static_cast<std::size_t>(r)] = sign(r, w);
  return col;
}

AliasClass RegularDesign::class_of(Word w) const { return alias_class(w, rel_); }

AliasClass RegularDesign::class_of_image(Word image) const {
  if (image == kIdentity) throw IdentityWord("class of the identity image");
  // A base-image word is its own preimage, so its coset is the class.
  return alias_class(image, rel_);
}

std::vector<AliasClass> RegularDesign::alias_classes() const {
  std::vector<AliasClass> out;
  for (Word img = 1; img < (Word{1} << n_base_); ++img)
    out.push_back(class_of_image(img));
  std::sort(out.begin(), out.end(),
            [](const AliasClass& a, const AliasClass& b) {
              return word_less(a.rep, b.rep);
            });
  return out;
}

namespace {

std::vector<Word> main_images(const RegularDesign& d) {
  std::vector<Word> out;
  for (int i = 0; i < d.n_factors(); ++i)
    out.push_back(d.base_image(static_cast<Word>(Word{1} << i)));
  return out;
}

// Words of length 2..4 over all letters whose image falls in the subgroup.
std::array<int, 3> confounded_word_counts(const RegularDesign& d,
                                          const WordSubgroup& sub) {
  std::array<int, 3> counts{};
  for (Word w = 1; w < (Word{1} << d.n_factors()); ++w) {
    int l = word_length(w);
    if (l < 2 || l > 4) continue;
    Word img = d.base_image(w);
    if (img != kIdentity && sub.contains(img)) ++counts[static_cast<std::size_t>(l - 2)];
  }
  return counts;
}

void fill_scheme_keys(const RegularDesign& d, BlockingScheme& s) {
  std::vector<std::pair<std::string, Word>> reps;
  for (Word img : s.subgroup.elements()) {
    AliasClass c = d.class_of_image(img);
    reps.emplace_back(word_label(c.rep), img);
    int l = word_length(c.rep);
    if (l == 2) ++s.n_2fi_classes;
    if (l == 3) ++s.n_3fi_classes;
  }
  s.word_counts = confounded_word_counts(d, s.subgroup);
  std::sort(reps.begin(), reps.end(), [](const auto& a, const auto& b) {
    return std::make_pair(a.first.size(), a.first) <
           std::make_pair(b.first.size(), b.first);
  });
  // Greedy canonical generator set: walk class reps by (length, label) and
  // keep each element that is independent of the span so far.
  std::set<Word> span{kIdentity};
  for (const auto& [lab, img] : reps) {
    if (span.count(img)) continue;
    s.canonical_generators.push_back(lab);
    std::set<Word> next = span;
    for (Word x : span) next.insert(word_product(x, img));
    span = std::move(next);
  }
  std::sort(s.canonical_generators.begin(), s.canonical_generators.end());
  for (const auto& [lab, img] : reps) s.rep_labels.push_back(lab);
  std::sort(s.rep_labels.begin(), s.rep_labels.end());
}

auto scheme_key(const BlockingScheme& s) {
  return std::make_tuple(s.n_2fi_classes, s.n_3fi_classes, s.word_counts,
                         s.canonical_generators, s.rep_labels);
}

}  // namespace

std::vector<BlockingScheme> search_blocking(const RegularDesign& d, int n_blocks) {
  int b = 0;
  while ((1 << (b + 1)) <= n_blocks) ++b;
  if ((1 << b) != n_blocks || n_blocks < 2 || n_blocks >= d.n_runs())
    throw InfeasibleBlocking("block count must be a power of two below the run count");

  auto mains = main_images(d);
  std::set<Word> main_set(mains.begin(), mains.end());
  std::vector<Word> cand;
  for (Word img = 1; img < (Word{1} << d.n_base()); ++img)
    if (!main_set.count(img)) cand.push_back(img);

  std::set<std::vector<Word>> seen;
  std::vector<BlockingScheme> out;
  std::vector<Word> combo(static_cast<std::size_t>(b));
  auto consider = [&](const std::vector<Word>& gens) {
    WordSubgroup sub;
    try {
      sub = WordSubgroup::closure(gens);
    } catch (const DependentGenerators&) {
      return;
    }
    for (Word e : sub.elements())
      if (main_set.count(e)) return;
    std::vector<Word> key = sub.elements();
    if (!seen.insert(key).second) return;
    BlockingScheme s;
    s.subgroup = std::move(sub);
    s.n_blocks = n_blocks;
    fill_scheme_keys(d, s);
    out.push_back(std::move(s));
  };
  // Plain combination enumeration; candidate counts are tiny (< 2^n_base).
  std::vector<std::size_t> idx(static_cast<std::size_t>(b));
  auto rec = [&](auto&& self, std::size_t pos, std::size_t start) -> void {
    if (pos == static_cast<std::size_t>(b)) {
      consider(combo);
      return;
    }
    for (std::size_t i = start; i < cand.size(); ++i) {
      combo[pos] = cand[i];
      self(self, pos + 1, i + 1);
    }
  };
  rec(rec, 0, 0);
  if (out.empty()) throw InfeasibleBlocking("no valid blocking scheme exists");
  std::stable_sort(out.begin(), out.end(),
                   [](const BlockingScheme& a, const BlockingScheme& b2) {
                     return scheme_key(a) < scheme_key(b2);
                   });
  return out;
}

BlockAssignment natural_block_assignment(const std::vector<Word>& pseudo_factors) {
  BlockAssignment ba;
  ba.pseudo_factors = pseudo_factors;
  int n = 1 << pseudo_factors.size();
  ba.lookup.resize(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) ba.lookup[static_cast<std::size_t>(i)] = i + 1;
  return ba;
}

int block_of(const RegularDesign& d, int run, const BlockAssignment& ba) {
  int b = static_cast<int>(ba.pseudo_factors.size());
  int idx = 0;
  for (int i = 0; i < b; ++i)
    if (d.sign(run, ba.pseudo_factors[static_cast<std::size_t>(i)]) > 0)
      idx |= 1 << (b - 1 - i);
  return ba.lookup[static_cast<std::size_t>(idx)];
}

std::vector<int> assign_blocks(const RegularDesign& d, const BlockAssignment& ba) {
  std::vector<int> out(static_cast<std::size_t>(d.n_runs()));
  for (int r = 0; r < d.n_runs(); ++r) out[static_cast<std::size_t>(r)] = block_of(d, r, ba);
  return out;
}

namespace {

using Profile = std::vector<int>;

Profile pair_profile(const std::vector<Word>& mi, const std::vector<Word>& mj) {
  Profile p;
  for (Word u : mi)
    for (Word v : mj) p.push_back(std::popcount(static_cast<unsigned>(u & v)));
  std::sort(p.begin(), p.end());
  return p;
}

// Relabeling-invariant signature of one extension subgroup: per word, the
// truncated member-length multiset, profiles against the other two words,
// and profiles against every blocking class.
std::string iso_signature(const RegularDesign& d, const std::array<Word, 3>& triple,
                          const std::vector<std::vector<Word>>& blocking_members) {
  std::array<std::vector<Word>, 3> mems;
  for (int i = 0; i < 3; ++i) mems[static_cast<std::size_t>(i)] = d.class_of_image(triple[static_cast<std::size_t>(i)]).truncated();
  std::vector<std::string> parts;
  for (int i = 0; i < 3; ++i) {
    std::ostringstream os;
    std::vector<int> lens;
    for (Word w : mems[static_cast<std::size_t>(i)]) lens.push_back(word_length(w));
    std::sort(lens.begin(), lens.end());
    os << "L";
    for (int l : lens) os << l;
    std::vector<Profile> others;
    for (int j = 0; j < 3; ++j)
      if (j != i) others.push_back(pair_profile(mems[static_cast<std::size_t>(i)], mems[static_cast<std::size_t>(j)]));
    std::sort(others.begin(), others.end());
    os << "|O";
    for (const Profile& pr : others) {
      for (int x : pr) os << x;
      os << ";";
    }
    std::vector<Profile> blocks;
    for (const auto& bm : blocking_members) blocks.push_back(pair_profile(mems[static_cast<std::size_t>(i)], bm));
    std::sort(blocks.begin(), blocks.end());
    os << "|B";
    for (const Profile& pr : blocks) {
      for (int x : pr) os << x;
      os << ";";
    }
    parts.push_back(os.str());
  }
  std::sort(parts.begin(), parts.end());
  return parts[0] + "//" + parts[1] + "//" + parts[2];
}

std::vector<std::string> triple_labels(const RegularDesign& d,
                                       const std::array<Word, 3>& t) {
  std::vector<std::string> labs;
  for (Word img : t) labs.push_back(d.class_of_image(img).truncated_label());
  std::sort(labs.begin(), labs.end());
  return labs;
}

int role_key(const RegularDesign& d, const std::array<Word, 3>& t) {
  int total = 0, mx = 0;
  for (Word img : t) {
    int n2 = 0;
    for (Word w : d.class_of_image(img).truncated())
      if (word_length(w) == 2) ++n2;
    total += n2;
    mx = std::max(mx, n2);
  }
  return total - mx;  // the word with the most 2fi aliases takes the gh role
}

}  // namespace

std::vector<FourLevelExtension> enumerate_four_level_extensions(
    const RegularDesign& d, const WordSubgroup& blocking) {
  auto mains = main_images(d);
  std::set<Word> excluded(mains.begin(), mains.end());
  for (Word w : blocking.elements()) excluded.insert(w);
  std::vector<Word> adm;
  for (Word img = 1; img < (Word{1} << d.n_base()); ++img)
    if (!excluded.count(img)) adm.push_back(img);
  std::set<Word> adm_set(adm.begin(), adm.end());

  std::set<std::array<Word, 3>> subs;
  for (std::size_t i = 0; i < adm.size(); ++i)
    for (std::size_t j = i + 1; j < adm.size(); ++j) {
      Word w3 = word_product(adm[i], adm[j]);
      if (!adm_set.count(w3)) continue;
      std::array<Word, 3> t{adm[i], adm[j], w3};
      std::sort(t.begin(), t.end());
      subs.insert(t);
    }

  std::vector<std::vector<Word>> blocking_members;
  for (Word img : blocking.elements())
    blocking_members.push_back(d.class_of_image(img).truncated());

  std::map<std::string, FourLevelExtension> groups;
  for (const auto& t : subs) {
    std::string sig = iso_signature(d, t, blocking_members);
    auto& g = groups[sig];
    g.members.push_back(t);
  }
  std::vector<FourLevelExtension> out;
  for (auto& [sig, g] : groups) {
    g.n_class_members = static_cast<int>(g.members.size());
    std::sort(g.members.begin(), g.members.end(),
              [&](const auto& a, const auto& b) {
                return triple_labels(d, a) < triple_labels(d, b);
              });
    g.triple = g.members.front();
    g.n_2fi_on_roles = role_key(d, g.triple);
    out.push_back(std::move(g));
  }
  std::sort(out.begin(), out.end(),
            [&](const FourLevelExtension& a, const FourLevelExtension& b) {
              return std::make_pair(a.n_2fi_on_roles, triple_labels(d, a.triple)) <
                     std::make_pair(b.n_2fi_on_roles, triple_labels(d, b.triple));
            });
  return out;
}

RunTable assign_units(const RegularDesign& d, const UnitAssignmentSpec& spec) {
  RunTable rt;
  rt.n_factors = d.n_factors();
  rt.n_columns = static_cast<int>(spec.blocks.lookup.size());
  const int n = d.n_runs();

  // Distinct tube-factor tuples per week, ordered lexicographically.
  std::map<int, std::set<std::vector<int>>> week_tuples;
  std::vector<int> weeks(static_cast<std::size_t>(n));
  std::vector<std::vector<int>> tuples(static_cast<std::size_t>(n));
  for (int r = 0; r < n; ++r) {
    weeks[static_cast<std::size_t>(r)] = d.sign(r, spec.week_word) < 0 ? 1 : 2;
    std::vector<int> t;
    for (int f : spec.tube_factors)
      t.push_back(d.sign(r, static_cast<Word>(Word{1} << f)));
    week_tuples[weeks[static_cast<std::size_t>(r)]].insert(t);
    tuples[static_cast<std::size_t>(r)] = std::move(t);
  }
  std::map<int, std::map<std::vector<int>, int>> tube_id;
  int next = 1;
  for (auto& [wk, set] : week_tuples) {
    if (static_cast<int>(set.size()) != spec.tubes_per_week)
      throw TubeCountViolation("week " + std::to_string(wk) + " uses " +
                               std::to_string(set.size()) + " tubes, expected " +
                               std::to_string(spec.tubes_per_week));
    for (const auto& t : set) tube_id[wk][t] = next++;
  }

  for (int r = 0; r < n; ++r) {
    RunRecord rec;
    rec.run = r;
    rec.week = weeks[static_cast<std::size_t>(r)];
    int pw = d.sign(r, spec.plate_word) < 0 ? 1 : 2;
    rec.plate = (rec.week - 1) * 2 + pw;
    rec.column = block_of(d, r, spec.blocks);
    rec.tube = tube_id[rec.week][tuples[static_cast<std::size_t>(r)]];
    for (int f = 0; f < d.n_factors(); ++f)
      rec.levels.push_back(d.sign(r, static_cast<Word>(Word{1} << f)));
    rt.rows.push_back(std::move(rec));
  }
  std::sort(rt.rows.begin(), rt.rows.end(),
            [](const RunRecord& a, const RunRecord& b) {
              return std::make_tuple(a.week, a.plate, a.column, a.tube) <
                     std::make_tuple(b.week, b.plate, b.column, b.tube);
            });
  // Each (week, plate) must spread its runs evenly over the column
  // positions (one run per column for 8 positions, two for 4).
  {
    std::map<std::pair<int, int>, std::map<int, int>> counts;
    for (const auto& rec : rt.rows) counts[{rec.week, rec.plate}][rec.column]++;
    int runs_per_plate = n / 4;
    if (rt.n_columns == 0 || runs_per_plate % rt.n_columns != 0)
      throw ValidationError("ColumnCollision",
                            "column count does not divide the plate size");
    int expected = runs_per_plate / rt.n_columns;
    for (const auto& [plate, percol] : counts)
      for (const auto& [col, cnt] : percol)
        if (cnt != expected)
          throw ValidationError("ColumnCollision",
                                "uneven run counts over column positions");
  }
  return rt;
}

std::string emit_run_table(const RunTable& rt) {
  std::ostringstream os;
  os << "Week,Plate,Column,Tube";
  for (int f = 0; f < rt.n_factors; ++f)
    os << ',' << static_cast<char>('a' + f);
  os << '\n';
  for (const auto& r : rt.rows) {
    os << r.week << ',' << r.plate << ',' << r.column << ',' << r.tube;
    for (int v : r.levels) os << ',' << (v > 0 ? "+1" : "-1");
    os << '\n';
  }
  return os.str();
}

RunTable parse_run_table(const std::string& csv) {
  std::istringstream is(csv);
  std::string line;
  if (!std::getline(is, line)) throw IoError("empty run table");
  int n_factors = 0;
  for (char c : line)
    if (c == ',') ++n_factors;
  n_factors -= 3;
  if (n_factors <= 0) throw IoError("run table header lacks factor columns");
  RunTable rt;
  rt.n_factors = n_factors;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string cell;
    RunRecord rec;
    auto next_int = [&]() {
      if (!std::getline(ls, cell, ',')) throw IoError("short run table row");
      return std::stoi(cell);
    };
    rec.week = next_int();
    rec.plate = next_int();
    rec.column = next_int();
    rec.tube = next_int();
    for (int f = 0; f < n_factors; ++f) rec.levels.push_back(next_int());
    rt.n_columns = std::max(rt.n_columns, rec.column);
    rt.rows.push_back(std::move(rec));
  }
  return rt;
}

}  // namespace stratadoe
