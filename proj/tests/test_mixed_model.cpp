#include <doctest.h>

#include <cmath>
#include <random>

#include "stratadoe/mixed_model.hpp"
#include "stratadoe/scenarios.hpp"

using namespace stratadoe;

namespace {

// A bare dataset with one random grouping carried by the tube id; the other
// unit ids are constant so only "tube" and the residual act.
ChipDataset one_way(int groups, int per_group, std::uint64_t seed,
                    double sigma_g, double sigma_e) {
  ChipDataset ds;
  ds.n_factors = 1;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n01;
  for (int g = 0; g < groups; ++g) {
    double u = sigma_g * n01(rng);
    for (int i = 0; i < per_group; ++i) {
      ChipRecord c;
      c.week = 1;
      c.plate = 1;
      c.row = 1 + (i % kRowsPerPlate);
      c.column = g * per_group + i + 1;
      c.tube = g + 1;
      c.levels.assign(kMaxFactors, 1);
      c.response = 10.0 + u + sigma_e * n01(rng);
      ds.chips.push_back(c);
    }
  }
  return ds;
}

MixedModelSpec one_way_spec() {
  MixedModelSpec spec;
  spec.random_groups = {"tube"};
  return spec;
}

}  // namespace

TEST_CASE("REML on a balanced one-way layout equals the ANOVA estimators") {
  const int g = 8, n = 6;
  auto ds = one_way(g, n, 12345, 3.0, 1.5);
  auto fm = FittedModel::fit(ds, one_way_spec());

  // Closed-form: sigma_e = MSW, sigma_g = (MSB - MSW) / n.
  std::vector<double> gmean(g, 0.0);
  double grand = 0.0;
  for (const auto& c : ds.chips) {
    gmean[static_cast<std::size_t>(c.tube - 1)] += *c.response / n;
    grand += *c.response / (g * n);
  }
  double ssw = 0.0, ssb = 0.0;
  for (const auto& c : ds.chips)
    ssw += std::pow(*c.response - gmean[static_cast<std::size_t>(c.tube - 1)], 2);
  for (int i = 0; i < g; ++i)
    ssb += n * std::pow(gmean[static_cast<std::size_t>(i)] - grand, 2);
  double msw = ssw / (g * (n - 1)), msb = ssb / (g - 1);
  double sg = (msb - msw) / n;
  REQUIRE(sg > 0.0);  // interior optimum, where REML == ANOVA

  const auto& vc = fm.variance_components();
  REQUIRE(vc.size() == 2);
  CHECK(vc[0].group == "tube");
  CHECK(vc[0].estimate == doctest::Approx(sg).epsilon(1e-6));
  CHECK(vc[1].estimate == doctest::Approx(msw).epsilon(1e-6));
  CHECK(fm.coefficients().front().second == doctest::Approx(grand).epsilon(1e-8));
}

TEST_CASE("REML on a balanced split-plot equals the nested ANOVA estimators") {
  // 8 whole plots (tubes) of 4 chips; whole-plot factor 'a' fixed.
  const int g = 8, n = 4;
  auto ds = one_way(g, n, 99, 2.0, 1.0);
  for (auto& c : ds.chips) c.levels[0] = (c.tube <= g / 2) ? -1 : 1;
  for (auto& c : ds.chips) *c.response += 1.5 * c.levels[0];
  MixedModelSpec spec = one_way_spec();
  ModelTerm a;
  a.name = "a";
  a.words = {Word{1}};
  spec.fixed.push_back(a);
  spec.term_dependence["a"] = {"tube"};
  auto fm = FittedModel::fit(ds, spec);

  // Closed form with the treatment mean removed per half.
  std::vector<double> gmean(g, 0.0);
  double mlo = 0.0, mhi = 0.0;
  for (const auto& c : ds.chips) {
    gmean[static_cast<std::size_t>(c.tube - 1)] += *c.response / n;
    (c.levels[0] < 0 ? mlo : mhi) += *c.response / (g * n / 2);
  }
  double ssw = 0.0, ssb = 0.0;
  for (const auto& c : ds.chips)
    ssw += std::pow(*c.response - gmean[static_cast<std::size_t>(c.tube - 1)], 2);
  for (int i = 0; i < g; ++i)
    ssb += n * std::pow(gmean[static_cast<std::size_t>(i)] - (i < g / 2 ? mlo : mhi), 2);
  double msw = ssw / (g * (n - 1)), msb = ssb / (g - 2);
  double sg = (msb - msw) / n;
  REQUIRE(sg > 0.0);

  const auto& vc = fm.variance_components();
  CHECK(vc[0].estimate == doctest::Approx(sg).epsilon(1e-6));
  CHECK(vc[1].estimate == doctest::Approx(msw).epsilon(1e-6));
  // Balanced and orthogonal, so GLS reproduces the difference of means.
  for (const auto& [name, b] : fm.coefficients())
    if (name == "a") CHECK(b == doctest::Approx((mhi - mlo) / 2).epsilon(1e-8));
}

TEST_CASE("GLS fixed effects equal OLS on the balanced paper design") {
  auto pa = build_preset("paper");
  std::map<Word, double> beta{{parse_word("cd", 8), -2.7},
                              {parse_word("a", 8), -2.4}};
  VarianceComponents vc;
  vc.tube = 2.5;
  vc.column = 6.2;
  vc.row = 1.9;
  vc.error = 179.8;
  auto ds = simulate_response(pa.run_table, beta, 329.0, vc, 777);
  auto spec = preset_model_spec(pa);
  auto fm = FittedModel::fit(ds, spec);

  // OLS on an orthogonal X: each coefficient is a scaled column dot product.
  // The X columns here are +/-1 contrasts, orthogonal by construction.
  auto sign_of = [&](const ChipRecord& c, Word w) {
    int s = 1;
    for (int f = 0; f < 8; ++f)
      if (w >> f & 1) s *= c.levels[static_cast<std::size_t>(f)];
    return s;
  };
  for (const auto& [name, b] : fm.coefficients()) {
    if (name == "(intercept)" || name[0] == 'p' || name[0] == 'q') continue;
    Word w = parse_word(name, 8);
    double ols = 0.0;
    for (const auto& c : ds.chips) ols += sign_of(c, w) * *c.response;
    ols /= static_cast<double>(ds.chips.size());
    CHECK(b == doctest::Approx(ols).epsilon(1e-8));
  }
}

TEST_CASE("week and plate variances are flagged non-estimable on the paper design") {
  auto pa = build_preset("paper");
  VarianceComponents vc;
  vc.tube = 2.5;
  vc.column = 6.2;
  vc.row = 1.9;
  vc.error = 179.8;
  auto ds = simulate_response(pa.run_table, {}, 329.0, vc, 4242);
  auto fm = FittedModel::fit(ds, preset_model_spec(pa));
  std::map<std::string, bool> est;
  for (const auto& v : fm.variance_components()) est[v.group] = v.estimable;
  CHECK_FALSE(est.at("week"));
  CHECK_FALSE(est.at("plate"));
  CHECK(est.at("tube"));
  CHECK(est.at("column"));
  CHECK(est.at("row"));
  CHECK(est.at("error"));
}

TEST_CASE("g, h and gh are flagged non-testable; lsd follows estimability") {
  auto pa = build_preset("paper");
  VarianceComponents vc;
  vc.tube = 4.0;
  vc.column = 2.0;
  vc.row = 1.0;
  vc.error = 100.0;
  auto ds = simulate_response(pa.run_table, {}, 329.0, vc, 31337);
  auto fm = FittedModel::fit(ds, preset_model_spec(pa));
  std::map<std::string, bool> testable;
  for (const auto& r : fm.f_tests()) testable[r.term] = r.testable;
  CHECK_FALSE(testable.at("g"));
  CHECK_FALSE(testable.at("h"));
  CHECK_FALSE(testable.at("gh"));
  CHECK(testable.at("a"));
  CHECK(testable.at("cd"));
  CHECK(testable.at("column"));
  CHECK(testable.at("row"));

  auto mt_gh = fm.means("gh", 0.10);
  CHECK(mt_gh.means.size() == 4);
  CHECK_FALSE(mt_gh.lsd.has_value());  // plate variance not estimable
  auto mt_cd = fm.means("cd", 0.10);
  CHECK(mt_cd.means.size() == 4);
  CHECK(mt_cd.lsd.has_value());
  CHECK(*mt_cd.lsd > 0.0);
  CHECK_THROWS_AS(fm.means("zz", 0.10), UnknownTerm);
}

TEST_CASE("simulation is deterministic per seed and missing injection works") {
  auto pa = build_preset("paper");
  VarianceComponents vc;
  vc.error = 10.0;
  auto d1 = simulate_response(pa.run_table, {}, 0.0, vc, 5);
  auto d2 = simulate_response(pa.run_table, {}, 0.0, vc, 5);
  auto d3 = simulate_response(pa.run_table, {}, 0.0, vc, 6);
  REQUIRE(d1.chips.size() == 256);
  CHECK(*d1.chips[7].response == *d2.chips[7].response);
  CHECK(*d1.chips[7].response != *d3.chips[7].response);
  inject_missing(d1, 17, 9);
  int missing = 0;
  for (const auto& c : d1.chips)
    if (!c.response) ++missing;
  CHECK(missing == 17);
  CHECK_THROWS_AS(inject_missing(d1, 50000, 1), ValidationError);
}

TEST_CASE("chip CSV round-trips, including missing values") {
  auto pa = build_preset("paper");
  VarianceComponents vc;
  vc.error = 10.0;
  auto ds = simulate_response(pa.run_table, {}, 100.0, vc, 5);
  inject_missing(ds, 17, 9);
  auto ds2 = parse_chip_csv(emit_chip_csv(ds));
  REQUIRE(ds2.chips.size() == ds.chips.size());
  for (std::size_t i = 0; i < ds.chips.size(); ++i) {
    CHECK(ds2.chips[i].tube == ds.chips[i].tube);
    CHECK(ds2.chips[i].response.has_value() == ds.chips[i].response.has_value());
    if (ds.chips[i].response)
      CHECK(*ds2.chips[i].response ==
            doctest::Approx(*ds.chips[i].response).epsilon(1e-9));
  }
}

TEST_CASE("a fit with missing chips converges and keeps full-grid means") {
  auto pa = build_preset("paper");
  std::map<Word, double> beta{{parse_word("cd", 8), -2.7}};
  VarianceComponents vc;
  vc.tube = 2.5;
  vc.column = 6.2;
  vc.row = 1.9;
  vc.error = 179.8;
  auto ds = simulate_response(pa.run_table, beta, 329.0, vc, 2024);
  inject_missing(ds, 17, 2025);
  auto fm = FittedModel::fit(ds, preset_model_spec(pa));
  CHECK(fm.iterations() >= 1);
  auto mt = fm.means("cd", 0.10);
  CHECK(mt.means.size() == 4);
  for (double m : mt.means) CHECK(std::fabs(m - 329.0) < 30.0);
}

TEST_CASE("an empty dataset is rejected") {
  ChipDataset ds;
  ds.n_factors = 1;
  CHECK_THROWS_AS(FittedModel::fit(ds, one_way_spec()), DegenerateData);
}
