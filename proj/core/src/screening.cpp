#include "stratadoe/screening.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <random>
#include <sstream>

namespace stratadoe {

namespace {

double median_sorted(std::vector<double>& v) {
  std::sort(v.begin(), v.end());
  std::size_t n = v.size();
  if (n % 2 == 1) return v[n / 2];
  return 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t counter) {
  // splitmix64 step keyed by the replicate counter.
  std::uint64_t z = seed + counter * 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace

std::vector<double> row_average(
    const std::vector<std::vector<std::optional<double>>>& values,
    const std::vector<int>& selected_rows) {
  if (selected_rows.empty())
    throw ValidationError("NoRowsSelected", "no plate rows selected");
  std::vector<double> out;
  std::string missing;
  for (std::size_t i = 0; i < values.size(); ++i) {
    double sum = 0.0;
    for (int r : selected_rows) {
      if (r < 1 || static_cast<std::size_t>(r) > values[i].size())
        throw ValidationError("BadRowId", "row id " + std::to_string(r) +
                                              " out of range");
      const auto& v = values[i][static_cast<std::size_t>(r - 1)];
      if (!v) {
        missing += (missing.empty() ? "" : ", ") + std::string("run ") +
                   std::to_string(i + 1) + " row " + std::to_string(r);
        continue;
      }
      sum += *v;
    }
    out.push_back(sum / static_cast<double>(selected_rows.size()));
  }
  if (!missing.empty())
    throw MissingInSelectedRows("missing chips in selected rows: " + missing);
  return out;
}

double pse50(const std::vector<double>& estimates) {
  if (estimates.size() < 7)
    throw TooFewEffects("PSE(50) needs at least 7 effects, got " +
                        std::to_string(estimates.size()));
  std::vector<double> abs;
  for (double e : estimates) abs.push_back(std::fabs(e));
  std::vector<double> tmp = abs;
  double s0 = 1.5 * median_sorted(tmp);
  if (s0 == 0.0) return 0.0;
  std::vector<double> kept;
  for (double a : abs)
    if (a < 2.5 * s0) kept.push_back(a);
  if (kept.empty()) return 0.0;
  return 1.5 * median_sorted(kept);
}

double critical_multiplier(int m, double alpha, const ScreeningConfig& cfg) {
  if (m < 7) throw TooFewEffects("critical multiplier needs m >= 7");
  if (alpha <= 0.0 || alpha >= 1.0)
    throw ValidationError("BadAlpha", "alpha must lie in (0, 1)");
  std::vector<double> pooled;
  pooled.reserve(static_cast<std::size_t>(cfg.mc_replicates) * static_cast<std::size_t>(m));
  std::vector<double> e(static_cast<std::size_t>(m));
  for (int rep = 0; rep < cfg.mc_replicates; ++rep) {
    std::mt19937_64 rng(mix_seed(cfg.seed, static_cast<std::uint64_t>(rep)));
    std::normal_distribution<double> normal(0.0, 1.0);
    for (auto& x : e) x = normal(rng);
    double pse = pse50(e);
    if (pse <= 0.0) continue;
    for (double x : e) pooled.push_back(std::fabs(x) / pse);
  }
  std::sort(pooled.begin(), pooled.end());
  std::size_t idx =
      static_cast<std::size_t>((1.0 - alpha) * static_cast<double>(pooled.size() - 1));
  return pooled[idx];
}

std::vector<EffectEstimateSet> estimate_effects(const std::vector<double>& values,
                                                const RunTable& rt,
                                                const StratumReport& report,
                                                const ScreeningConfig& cfg) {
  if (values.size() != rt.rows.size())
    throw LengthMismatch("got " + std::to_string(values.size()) +
                         " values for " + std::to_string(rt.rows.size()) +
                         " runs");
  auto image_sign = [&](const RunRecord& rec, Word image) {
    int s = 1;
    for (int f = 0; f < rt.n_factors; ++f)
      if (image >> f & 1) s *= rec.levels[static_cast<std::size_t>(f)];
    return s;
  };
  std::map<int, double> multiplier_cache;
  std::vector<EffectEstimateSet> out;
  for (const auto& stratum : report.strata) {
    EffectEstimateSet set;
    set.stratum = stratum.name;
    std::vector<double> ests;
    for (const auto& entry : stratum.entries) {
      double hi = 0.0, lo = 0.0;
      int nhi = 0, nlo = 0;
      for (std::size_t i = 0; i < rt.rows.size(); ++i) {
        if (image_sign(rt.rows[i], entry.image) > 0) {
          hi += values[i];
          ++nhi;
        } else {
          lo += values[i];
          ++nlo;
        }
      }
      EffectEstimate e;
      e.label = entry.display;
      e.image = entry.image;
      e.estimate = hi / nhi - lo / nlo;
      ests.push_back(e.estimate);
      set.effects.push_back(std::move(e));
    }
    if (stratum.df >= cfg.min_stratum_df) {
      double pse = pse50(ests);
      set.pse = pse;
      auto it = multiplier_cache.find(stratum.df);
      if (it == multiplier_cache.end())
        it = multiplier_cache
                 .emplace(stratum.df, critical_multiplier(stratum.df, cfg.alpha, cfg))
                 .first;
      set.critical = it->second * pse;
      for (auto& e : set.effects)
        e.active = *set.critical > 0.0 && std::fabs(e.estimate) > *set.critical;
    }
    std::stable_sort(set.effects.begin(), set.effects.end(),
                     [](const EffectEstimate& a, const EffectEstimate& b) {
                       return std::fabs(a.estimate) > std::fabs(b.estimate);
                     });
    out.push_back(std::move(set));
  }
  return out;
}

std::string emit_screening_report(const std::vector<EffectEstimateSet>& sets) {
  std::ostringstream os;
  os << "stratum,effect,estimate,pse,critical,active\n";
  char buf[64];
  auto num = [&](double v) {
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return std::string(buf);
  };
  for (const auto& s : sets) {
    for (const auto& e : s.effects) {
      os << s.stratum << ",\"" << e.label << "\"," << num(e.estimate) << ',';
      if (s.pse) os << num(*s.pse);
      os << ',';
      if (s.critical) os << num(*s.critical);
      os << ',' << (s.pse ? (e.active ? "1" : "0") : "") << '\n';
    }
  }
  return os.str();
}

}  // namespace stratadoe
