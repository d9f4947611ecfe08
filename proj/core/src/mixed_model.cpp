#include "stratadoe/mixed_model.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <boost/math/distributions/fisher_f.hpp>
#include <boost/math/distributions/students_t.hpp>
#include <cmath>
#include <cstdio>
#include <map>
#include <random>
#include <set>
#include <sstream>

namespace stratadoe {

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

int word_sign(const ChipRecord& chip, Word w) {
  int s = 1;
  for (int f = 0; f < kMaxFactors; ++f)
    if (w >> f & 1) s *= chip.levels[static_cast<std::size_t>(f)];
  return s;
}

// Seven row-position contrasts in pseudo-factor order {1},{2},{3},{12},...
std::array<int, 7> row_contrasts(int row) {
  int r = row - 1;
  int z1 = (r >> 2 & 1) ? 1 : -1;
  int z2 = (r >> 1 & 1) ? 1 : -1;
  int z3 = (r & 1) ? 1 : -1;
  return {z1, z2, z3, z1 * z2, z1 * z3, z2 * z3, z1 * z2 * z3};
}

std::string fmt_num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return std::string(buf);
}

}  // namespace

ChipDataset chip_grid(const RunTable& rt) {
  ChipDataset ds;
  ds.n_factors = rt.n_factors;
  for (const auto& run : rt.rows)
    for (int r = 1; r <= kRowsPerPlate; ++r) {
      ChipRecord c;
      c.week = run.week;
      c.plate = run.plate;
      c.row = r;
      c.column = run.column;
      c.tube = run.tube;
      c.levels = run.levels;
      c.levels.resize(kMaxFactors, 1);
      ds.chips.push_back(std::move(c));
    }
  return ds;
}

ChipDataset simulate_response(const RunTable& rt,
                              const std::map<Word, double>& beta,
                              double intercept, const VarianceComponents& vc,
                              std::uint64_t seed) {
  ChipDataset ds = chip_grid(rt);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  auto draw_levels = [&](auto key_of, double sd) {
    std::map<decltype(key_of(ds.chips.front())), double> draws;
    for (const auto& c : ds.chips) draws.emplace(key_of(c), 0.0);
    for (auto& [k, v] : draws) v = sd * normal(rng);
    return draws;
  };
  auto weeks = draw_levels([](const ChipRecord& c) { return c.week; },
                           std::sqrt(vc.week));
  auto plates = draw_levels([](const ChipRecord& c) { return c.plate; },
                            std::sqrt(vc.plate));
  auto tubes = draw_levels([](const ChipRecord& c) { return c.tube; },
                           std::sqrt(vc.tube));
  auto cols = draw_levels(
      [](const ChipRecord& c) { return std::make_pair(c.plate, c.column); },
      std::sqrt(vc.column));
  auto rows_u = draw_levels(
      [](const ChipRecord& c) { return std::make_pair(c.plate, c.row); },
      std::sqrt(vc.row));
  double sd_e = std::sqrt(vc.error);
  for (auto& c : ds.chips) {
    double y = intercept;
    for (const auto& [w, b] : beta) y += b * word_sign(c, w);
    y += weeks.at(c.week) + plates.at(c.plate) + tubes.at(c.tube) +
         cols.at(std::make_pair(c.plate, c.column)) +
         rows_u.at(std::make_pair(c.plate, c.row)) + sd_e * normal(rng);
    c.response = y;
  }
  return ds;
}

void inject_missing(ChipDataset& ds, int n_missing, std::uint64_t seed) {
  if (n_missing < 0 || static_cast<std::size_t>(n_missing) > ds.chips.size())
    throw ValidationError("BadMissingCount", "missing count out of range");
  std::vector<std::size_t> idx(ds.chips.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  std::mt19937_64 rng(seed);
  for (int i = 0; i < n_missing; ++i) {
    std::uniform_int_distribution<std::size_t> pick(static_cast<std::size_t>(i),
                                                    idx.size() - 1);
    std::swap(idx[static_cast<std::size_t>(i)], idx[pick(rng)]);
    ds.chips[idx[static_cast<std::size_t>(i)]].response.reset();
  }
}

std::string emit_chip_csv(const ChipDataset& ds) {
  std::ostringstream os;
  os << "week,plate,row,column,tube";
  for (int f = 0; f < ds.n_factors; ++f) os << ',' << static_cast<char>('a' + f);
  os << ",response\n";
  for (const auto& c : ds.chips) {
    os << c.week << ',' << c.plate << ',' << c.row << ',' << c.column << ','
       << c.tube;
    for (int f = 0; f < ds.n_factors; ++f)
      os << ',' << (c.levels[static_cast<std::size_t>(f)] > 0 ? "+1" : "-1");
    os << ',';
    if (c.response) os << fmt_num(*c.response);
    os << '\n';
  }
  return os.str();
}

ChipDataset parse_chip_csv(const std::string& csv) {
  std::istringstream is(csv);
  std::string line;
  if (!std::getline(is, line)) throw IoError("empty chip data");
  int n_cols = 1;
  for (char c : line)
    if (c == ',') ++n_cols;
  int n_factors = n_cols - 6;
  if (n_factors <= 0) throw IoError("chip data header lacks factor columns");
  ChipDataset ds;
  ds.n_factors = n_factors;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string cell;
    ChipRecord c;
    auto next = [&]() {
      if (!std::getline(ls, cell, ',')) throw IoError("short chip data row");
      return cell;
    };
    c.week = std::stoi(next());
    c.plate = std::stoi(next());
    c.row = std::stoi(next());
    c.column = std::stoi(next());
    c.tube = std::stoi(next());
    for (int f = 0; f < n_factors; ++f) c.levels.push_back(std::stoi(next()));
    c.levels.resize(kMaxFactors, 1);
    std::getline(ls, cell, ',');
    if (!cell.empty()) c.response = std::stod(cell);
    ds.chips.push_back(std::move(c));
  }
  return ds;
}

MixedModelSpec paper_model_spec(
    const RegularDesign& d, const std::vector<Word>& column_pseudos,
    const UnitStructure& us,
    const std::map<std::size_t, std::string>& stratum_to_group) {
  MixedModelSpec spec;
  auto word_of = [&](const std::string& lab) {
    return parse_word(lab, d.n_factors());
  };
  for (const char* lab : {"a", "c", "d", "g", "h", "ah", "cd", "gh"}) {
    ModelTerm t;
    t.name = lab;
    t.words = {word_of(lab)};
    spec.fixed.push_back(std::move(t));
  }
  ModelTerm col;
  col.name = "column";
  col.words = column_pseudos;
  col.kind = ModelTerm::Kind::kColumnPseudo;
  spec.fixed.push_back(std::move(col));
  ModelTerm row;
  row.name = "row";
  row.kind = ModelTerm::Kind::kRowPseudo;
  spec.fixed.push_back(std::move(row));
  spec.random_groups = {"week", "plate", "tube", "column", "row"};
  for (const auto& t : spec.fixed) {
    std::set<std::string> deps;
    if (t.kind == ModelTerm::Kind::kRowPseudo) {
      deps.insert("row");
    } else {
      for (Word w : t.words)
        deps.insert(stratum_to_group.at(us.assign_stratum(d.base_image(w))));
    }
    spec.term_dependence[t.name] =
        std::vector<std::string>(deps.begin(), deps.end());
  }
  return spec;
}

struct FittedModel::Impl {
  MixedModelSpec spec;
  ChipDataset chips;  // full grid, including missing rows
  std::vector<std::string> col_names;
  std::vector<std::pair<std::string, std::pair<int, int>>> term_cols;  // name -> [first, count)
  std::vector<std::string> dropped;

  VectorXd y;
  MatrixXd x;        // observed rows, kept columns
  MatrixXd x_full;   // all grid rows, kept columns
  std::vector<std::string> groups;     // estimable random groups, spec order
  std::vector<std::string> all_groups;
  std::map<std::string, bool> estimable;
  std::vector<MatrixXd> z;             // observed-row indicator matrices

  VectorXd sigma;          // estimable groups then error
  MatrixXd vinv, p;
  VectorXd py, beta;
  MatrixXd sigma_beta;     // (X' Vinv X)^-1
  MatrixXd vcov_sigma;     // inverse observed information
  std::vector<double> sigma_se;
  double loglik = 0.0;
  int iterations = 0;
  double alpha_default = 0.10;

  std::vector<std::pair<std::string, double>> coef_table;
  std::vector<VarianceEstimate> var_table;

  int n() const { return static_cast<int>(y.size()); }

  double loglik_at(const VectorXd& s, MatrixXd* vinv_out, MatrixXd* p_out,
                   VectorXd* py_out, MatrixXd* sigma_beta_out) const {
    const int nn = n();
    MatrixXd v = MatrixXd::Zero(nn, nn);
    for (std::size_t g = 0; g < z.size(); ++g)
      v.noalias() += s[static_cast<Eigen::Index>(g)] * (z[g] * z[g].transpose());
    v.diagonal().array() += s[s.size() - 1];
    Eigen::LLT<MatrixXd> llt(v);
    if (llt.info() != Eigen::Success) return -std::numeric_limits<double>::infinity();
    double logdet_v = 2.0 * llt.matrixLLT().diagonal().array().log().sum();
    MatrixXd vi = llt.solve(MatrixXd::Identity(nn, nn));
    MatrixXd xtvx = x.transpose() * vi * x;
    Eigen::LLT<MatrixXd> lltx(xtvx);
    if (lltx.info() != Eigen::Success) return -std::numeric_limits<double>::infinity();
    double logdet_x = 2.0 * lltx.matrixLLT().diagonal().array().log().sum();
    MatrixXd sb = lltx.solve(MatrixXd::Identity(static_cast<Eigen::Index>(x.cols()),
                                                static_cast<Eigen::Index>(x.cols())));
    MatrixXd vix = vi * x;
    MatrixXd pp = vi - vix * sb * vix.transpose();
    VectorXd pyv = pp * y;
    double ll = -0.5 * (logdet_v + logdet_x + y.dot(pyv));
    if (vinv_out) *vinv_out = std::move(vi);
    if (p_out) *p_out = std::move(pp);
    if (py_out) *py_out = std::move(pyv);
    if (sigma_beta_out) *sigma_beta_out = std::move(sb);
    return ll;
  }

  // Gradient of c' SigmaBeta c with respect to each variance parameter.
  VectorXd satterthwaite_grad(const VectorXd& c) const {
    VectorXd u = vinv * (x * (sigma_beta * c));
    VectorXd grad(sigma.size());
    for (std::size_t g = 0; g < z.size(); ++g)
      grad[static_cast<Eigen::Index>(g)] = (z[g].transpose() * u).squaredNorm();
    grad[grad.size() - 1] = u.squaredNorm();
    return grad;
  }

  double satterthwaite_df(const VectorXd& c) const {
    double f = c.dot(sigma_beta * c);
    VectorXd grad = satterthwaite_grad(c);
    double var_f = grad.dot(vcov_sigma * grad);
    if (var_f <= 0.0) return 1e7;
    double nu = 2.0 * f * f / var_f;
    return nu;
  }
};

FittedModel::FittedModel() : impl_(new Impl) {}
FittedModel::~FittedModel() = default;
FittedModel::FittedModel(FittedModel&&) noexcept = default;
FittedModel& FittedModel::operator=(FittedModel&&) noexcept = default;

namespace {

// Appends a term's columns for one chip.
void term_values(const ModelTerm& t, const ChipRecord& c, std::vector<double>& out) {
  if (t.kind == ModelTerm::Kind::kRowPseudo) {
    for (int v : row_contrasts(c.row)) out.push_back(v);
  } else {
    for (Word w : t.words) out.push_back(word_sign(c, w));
  }
}

int term_width(const ModelTerm& t) {
  return t.kind == ModelTerm::Kind::kRowPseudo ? 7
                                               : static_cast<int>(t.words.size());
}

std::vector<std::string> term_col_names(const ModelTerm& t) {
  std::vector<std::string> names;
  if (t.kind == ModelTerm::Kind::kRowPseudo) {
    for (int i = 1; i <= 7; ++i) names.push_back("q" + std::to_string(i));
  } else if (t.kind == ModelTerm::Kind::kColumnPseudo) {
    for (std::size_t i = 1; i <= t.words.size(); ++i)
      names.push_back("p" + std::to_string(i));
  } else {
    for (Word w : t.words) names.push_back(word_label(w));
  }
  return names;
}

int rank_of(const MatrixXd& m) {
  Eigen::ColPivHouseholderQR<MatrixXd> qr(m);
  qr.setThreshold(1e-8);
  return static_cast<int>(qr.rank());
}

}  // namespace

FittedModel FittedModel::fit(const ChipDataset& ds, const MixedModelSpec& spec,
                             const FitOptions& opts) {
  FittedModel fm;
  Impl& im = *fm.impl_;
  im.spec = spec;
  im.chips = ds;

  std::vector<std::size_t> obs;
  for (std::size_t i = 0; i < ds.chips.size(); ++i)
    if (ds.chips[i].response) obs.push_back(i);
  if (obs.empty()) throw DegenerateData("no observed responses");

  // Design matrix over all grid rows, then restricted to observed rows.
  int width = 1;
  std::vector<std::string> names{"(intercept)"};
  for (const auto& t : spec.fixed) {
    im.term_cols.emplace_back(t.name, std::make_pair(width, term_width(t)));
    for (const auto& n : term_col_names(t)) names.push_back(n);
    width += term_width(t);
  }
  MatrixXd x_full(static_cast<Eigen::Index>(ds.chips.size()), width);
  {
    std::vector<double> rowv;
    for (std::size_t i = 0; i < ds.chips.size(); ++i) {
      rowv.clear();
      rowv.push_back(1.0);
      for (const auto& t : spec.fixed) term_values(t, ds.chips[i], rowv);
      for (int j = 0; j < width; ++j)
        x_full(static_cast<Eigen::Index>(i), j) = rowv[static_cast<std::size_t>(j)];
    }
  }
  MatrixXd x_obs(static_cast<Eigen::Index>(obs.size()), width);
  VectorXd y(static_cast<Eigen::Index>(obs.size()));
  for (std::size_t i = 0; i < obs.size(); ++i) {
    x_obs.row(static_cast<Eigen::Index>(i)) = x_full.row(static_cast<Eigen::Index>(obs[i]));
    y[static_cast<Eigen::Index>(i)] = *ds.chips[obs[i]].response;
  }

  // Drop non-identifiable columns, keeping the pivoted-QR leading set.
  Eigen::ColPivHouseholderQR<MatrixXd> qr(x_obs);
  qr.setThreshold(1e-8);
  int rank = static_cast<int>(qr.rank());
  std::vector<int> kept;
  {
    auto perm = qr.colsPermutation().indices();
    std::vector<int> lead(perm.data(), perm.data() + rank);
    std::sort(lead.begin(), lead.end());
    kept = lead;
  }
  std::set<int> kept_set(kept.begin(), kept.end());
  for (int j = 0; j < width; ++j)
    if (!kept_set.count(j)) im.dropped.push_back(names[static_cast<std::size_t>(j)]);
  MatrixXd xk(x_obs.rows(), rank), xfk(x_full.rows(), rank);
  std::vector<std::string> kept_names;
  std::map<int, int> col_map;
  for (int jj = 0; jj < rank; ++jj) {
    xk.col(jj) = x_obs.col(kept[static_cast<std::size_t>(jj)]);
    xfk.col(jj) = x_full.col(kept[static_cast<std::size_t>(jj)]);
    kept_names.push_back(names[static_cast<std::size_t>(kept[static_cast<std::size_t>(jj)])]);
    col_map[kept[static_cast<std::size_t>(jj)]] = jj;
  }
  // Remap term column ranges to kept-column indices.
  std::vector<std::pair<std::string, std::pair<int, int>>> remapped;
  for (auto& [name, range] : im.term_cols) {
    int first = -1, count = 0;
    for (int j = range.first; j < range.first + range.second; ++j)
      if (col_map.count(j)) {
        if (first < 0) first = col_map[j];
        ++count;
      }
    remapped.emplace_back(name, std::make_pair(first, count));
  }
  im.term_cols = std::move(remapped);
  im.col_names = kept_names;
  im.x = std::move(xk);
  im.x_full = std::move(xfk);
  im.y = std::move(y);

  if (static_cast<int>(obs.size()) - rank <= 0)
    throw DegenerateData("no residual degrees of freedom");

  // Random groupings: level index per observed chip.
  auto group_levels = [&](const std::string& g) {
    std::map<std::pair<int, int>, int> lut;
    std::vector<int> lev;
    for (std::size_t i : obs) {
      const auto& c = ds.chips[i];
      std::pair<int, int> key;
      if (g == "week") key = {c.week, 0};
      else if (g == "plate") key = {c.plate, 0};
      else if (g == "tube") key = {c.tube, 0};
      else if (g == "column") key = {c.plate, c.column};
      else if (g == "row") key = {c.plate, c.row};
      else throw UnknownTerm("unknown random group '" + g + "'");
      auto it = lut.emplace(key, static_cast<int>(lut.size())).first;
      lev.push_back(it->second);
    }
    MatrixXd zz = MatrixXd::Zero(static_cast<Eigen::Index>(lev.size()),
                                 static_cast<Eigen::Index>(lut.size()));
    for (std::size_t i = 0; i < lev.size(); ++i)
      zz(static_cast<Eigen::Index>(i), lev[i]) = 1.0;
    return zz;
  };

  im.all_groups = spec.random_groups;
  for (const auto& g : spec.random_groups) {
    MatrixXd zz = group_levels(g);
    bool est;
    if (zz.cols() <= 1) {
      est = false;  // a single group carries no replication
    } else {
      MatrixXd aug(im.x.rows(), im.x.cols() + zz.cols());
      aug << im.x, zz;
      est = rank_of(aug) > rank;
    }
    im.estimable[g] = est;
    if (est) {
      im.groups.push_back(g);
      im.z.push_back(std::move(zz));
    }
  }

  const int k = static_cast<int>(im.z.size());
  VectorXd s(k + 1);
  double mean_y = im.y.mean();
  double var_y = (im.y.array() - mean_y).square().sum() /
                 std::max(1, im.n() - 1);
  if (var_y <= 0.0) var_y = 1.0;
  s.setConstant(var_y / (2.0 * std::max(1, k)));
  s[k] = var_y / 2.0;

  double ll = im.loglik_at(s, &im.vinv, &im.p, &im.py, &im.sigma_beta);
  if (!std::isfinite(ll)) throw NonConvergence("initial likelihood not finite");
  bool converged = false;
  int iter = 0;
  for (; iter < opts.max_iter; ++iter) {
    // Score and expected information at the current point.
    VectorXd score(k + 1);
    MatrixXd info(k + 1, k + 1);
    std::vector<MatrixXd> w;  // P * Zg
    for (int g = 0; g < k; ++g) w.push_back(im.p * im.z[static_cast<std::size_t>(g)]);
    for (int g = 0; g < k; ++g) {
      double tr = (im.z[static_cast<std::size_t>(g)].array() * w[static_cast<std::size_t>(g)].array()).sum();
      double quad = (im.z[static_cast<std::size_t>(g)].transpose() * im.py).squaredNorm();
      score[g] = -0.5 * (tr - quad);
    }
    score[k] = -0.5 * (im.p.trace() - im.py.squaredNorm());
    for (int g = 0; g < k; ++g) {
      for (int h = g; h < k; ++h) {
        double v = 0.5 * (im.z[static_cast<std::size_t>(g)].transpose() * w[static_cast<std::size_t>(h)]).squaredNorm();
        info(g, h) = info(h, g) = v;
      }
      double v = 0.5 * w[static_cast<std::size_t>(g)].squaredNorm();
      info(g, k) = info(k, g) = v;
    }
    info(k, k) = 0.5 * im.p.squaredNorm();

    VectorXd delta = info.ldlt().solve(score);
    double t = 1.0;
    double new_ll = -std::numeric_limits<double>::infinity();
    VectorXd cand;
    for (int half = 0; half < 40; ++half) {
      cand = (s + t * delta).cwiseMax(0.0);
      cand[k] = std::max(cand[k], 1e-10 * var_y);
      new_ll = im.loglik_at(cand, nullptr, nullptr, nullptr, nullptr);
      if (new_ll >= ll - 1e-12) break;
      t *= 0.5;
    }
    if (new_ll < ll - 1e-12) {
      converged = true;  // no ascent direction left
      break;
    }
    double change = std::fabs(new_ll - ll) / (1.0 + std::fabs(ll));
    s = cand;
    ll = im.loglik_at(s, &im.vinv, &im.p, &im.py, &im.sigma_beta);
    if (change < opts.tol) {
      converged = true;
      ++iter;
      break;
    }
  }
  if (!converged) throw NonConvergence("REML did not converge in " +
                                       std::to_string(opts.max_iter) +
                                       " iterations");
  im.sigma = s;
  im.loglik = ll;
  im.iterations = iter;
  im.beta = im.sigma_beta * (im.x.transpose() * (im.vinv * im.y));
  im.py = im.p * im.y;

  // Observed information for variance standard errors.
  MatrixXd h(k + 1, k + 1);
  std::vector<MatrixXd> w;
  std::vector<VectorXd> zy;
  for (int g = 0; g < k; ++g) {
    w.push_back(im.p * im.z[static_cast<std::size_t>(g)]);
    zy.push_back(im.z[static_cast<std::size_t>(g)].transpose() * im.py);
  }
  for (int g = 0; g <= k; ++g) {
    for (int hh = g; hh <= k; ++hh) {
      double tr, quad;
      if (g < k && hh < k) {
        MatrixXd m = im.z[static_cast<std::size_t>(g)].transpose() * w[static_cast<std::size_t>(hh)];
        tr = m.squaredNorm();
        quad = zy[static_cast<std::size_t>(g)].dot(m * zy[static_cast<std::size_t>(hh)]);
      } else if (g < k) {  // hh == k (residual)
        tr = w[static_cast<std::size_t>(g)].squaredNorm();
        quad = zy[static_cast<std::size_t>(g)].dot(im.z[static_cast<std::size_t>(g)].transpose() * (im.p * im.py));
      } else {  // g == hh == k
        tr = im.p.squaredNorm();
        quad = im.py.dot(im.p * im.py);
      }
      h(g, hh) = h(hh, g) = quad - 0.5 * tr;
    }
  }
  Eigen::FullPivLU<MatrixXd> lu(h);
  if (lu.isInvertible()) {
    im.vcov_sigma = lu.inverse();
  } else {
    // Fall back to the expected information when the observed one is singular.
    MatrixXd info(k + 1, k + 1);
    for (int g = 0; g <= k; ++g)
      for (int hh = g; hh <= k; ++hh) {
        double v;
        if (g < k && hh < k)
          v = 0.5 * (im.z[static_cast<std::size_t>(g)].transpose() * w[static_cast<std::size_t>(hh)]).squaredNorm();
        else if (g < k)
          v = 0.5 * w[static_cast<std::size_t>(g)].squaredNorm();
        else
          v = 0.5 * im.p.squaredNorm();
        info(g, hh) = info(hh, g) = v;
      }
    im.vcov_sigma = info.ldlt().solve(MatrixXd::Identity(k + 1, k + 1));
  }
  for (int g = 0; g <= k; ++g)
    im.sigma_se.push_back(std::sqrt(std::max(0.0, im.vcov_sigma(g, g))));

  for (std::size_t j = 0; j < im.col_names.size(); ++j)
    im.coef_table.emplace_back(im.col_names[j], im.beta[static_cast<Eigen::Index>(j)]);
  int gi = 0;
  for (const auto& g : im.all_groups) {
    VarianceEstimate ve;
    ve.group = g;
    ve.estimable = im.estimable[g];
    if (ve.estimable) {
      ve.estimate = im.sigma[gi];
      ve.std_error = im.sigma_se[static_cast<std::size_t>(gi)];
      ++gi;
    }
    im.var_table.push_back(ve);
  }
  VarianceEstimate err;
  err.group = "error";
  err.estimate = im.sigma[k];
  err.std_error = im.sigma_se[static_cast<std::size_t>(k)];
  im.var_table.push_back(err);
  return fm;
}

const std::vector<VarianceEstimate>& FittedModel::variance_components() const {
  return impl_->var_table;
}
const std::vector<std::pair<std::string, double>>& FittedModel::coefficients() const {
  return impl_->coef_table;
}
const std::vector<std::string>& FittedModel::dropped_columns() const {
  return impl_->dropped;
}
double FittedModel::reml_loglik() const { return impl_->loglik; }
int FittedModel::iterations() const { return impl_->iterations; }

std::vector<FTestRow> FittedModel::f_tests() const {
  const Impl& im = *impl_;
  std::vector<FTestRow> out;
  for (const auto& [name, range] : im.term_cols) {
    FTestRow row;
    row.term = name;
    auto dep = im.spec.term_dependence.find(name);
    if (dep != im.spec.term_dependence.end())
      for (const auto& g : dep->second)
        if (!im.estimable.at(g)) row.testable = false;
    row.num_df = range.second;
    if (!row.testable || range.second == 0) {
      row.testable = false;
      out.push_back(row);
      continue;
    }
    int q = range.second;
    VectorXd bc(q);
    MatrixXd m(q, q);
    for (int i = 0; i < q; ++i) {
      bc[i] = im.beta[range.first + i];
      for (int j = 0; j < q; ++j)
        m(i, j) = im.sigma_beta(range.first + i, range.first + j);
    }
    Eigen::SelfAdjointEigenSolver<MatrixXd> eig(m);
    VectorXd binv = eig.eigenvectors().transpose() * bc;
    double f = 0.0;
    double e_sum = 0.0;
    for (int i = 0; i < q; ++i) {
      double d = eig.eigenvalues()[i];
      if (d <= 0) continue;
      f += binv[i] * binv[i] / d;
      VectorXd c = VectorXd::Zero(im.beta.size());
      for (int j = 0; j < q; ++j)
        c[range.first + j] = eig.eigenvectors()(j, i);
      double nu = im.satterthwaite_df(c);
      if (nu > 2.0) e_sum += nu / (nu - 2.0);
    }
    f /= q;
    double den_df = (e_sum > q) ? 2.0 * e_sum / (e_sum - q) : 1e7;
    row.f_stat = f;
    row.den_df = den_df;
    boost::math::fisher_f dist(q, den_df);
    row.p_value = boost::math::cdf(boost::math::complement(dist, std::max(0.0, f)));
    out.push_back(row);
  }
  return out;
}

MeansTable FittedModel::means(const std::string& term, double alpha) const {
  const Impl& im = *impl_;
  auto it = std::find_if(im.spec.fixed.begin(), im.spec.fixed.end(),
                         [&](const ModelTerm& t) { return t.name == term; });
  if (it == im.spec.fixed.end())
    throw UnknownTerm("term '" + term + "' is not in the model");

  // Cell key per chip: letter sign combination, or the position id.
  std::vector<int> letters;
  auto cell_of = [&](const ChipRecord& c) -> std::pair<int, std::string> {
    if (it->kind == ModelTerm::Kind::kRowPseudo)
      return {c.row, "row " + std::to_string(c.row)};
    if (it->kind == ModelTerm::Kind::kColumnPseudo)
      return {c.column, "column " + std::to_string(c.column)};
    int key = 0;
    std::string name;
    for (std::size_t li = 0; li < letters.size(); ++li) {
      int sign = c.levels[static_cast<std::size_t>(letters[li])];
      key = key * 2 + (sign > 0 ? 1 : 0);
      if (!name.empty()) name += ",";
      name += std::string(1, static_cast<char>('a' + letters[li])) +
              (sign > 0 ? "=+1" : "=-1");
    }
    return {key, name};
  };
  if (it->kind == ModelTerm::Kind::kWords) {
    Word w = it->words.front();
    for (int f = 0; f < kMaxFactors; ++f)
      if (w >> f & 1) letters.push_back(f);
  }

  std::map<int, std::pair<std::string, std::vector<std::size_t>>> cells;
  for (std::size_t i = 0; i < im.chips.chips.size(); ++i) {
    auto [key, name] = cell_of(im.chips.chips[i]);
    auto& cell = cells[key];
    cell.first = name;
    cell.second.push_back(i);
  }

  MeansTable mt;
  mt.term = term;
  std::vector<VectorXd> xbars;
  for (const auto& [key, cell] : cells) {
    VectorXd xb = VectorXd::Zero(im.x_full.cols());
    for (std::size_t i : cell.second) xb += im.x_full.row(static_cast<Eigen::Index>(i)).transpose();
    xb /= static_cast<double>(cell.second.size());
    mt.level_names.push_back(cell.first);
    mt.means.push_back(xb.dot(im.beta));
    xbars.push_back(std::move(xb));
  }

  bool lsd_available = true;
  auto dep = im.spec.term_dependence.find(term);
  if (dep != im.spec.term_dependence.end())
    for (const auto& g : dep->second)
      if (!im.estimable.at(g)) lsd_available = false;

  double worst_sed = 0.0;
  VectorXd worst_c;
  for (std::size_t i = 0; i < xbars.size(); ++i)
    for (std::size_t j = i + 1; j < xbars.size(); ++j) {
      VectorXd c = xbars[i] - xbars[j];
      double v = c.dot(im.sigma_beta * c);
      if (v > worst_sed * worst_sed) {
        worst_sed = std::sqrt(std::max(0.0, v));
        worst_c = c;
      }
    }
  mt.sed = worst_sed;
  if (lsd_available && worst_sed > 0.0) {
    double nu = im.satterthwaite_df(worst_c);
    boost::math::students_t tdist(std::max(1.0, nu));
    mt.lsd = boost::math::quantile(tdist, 1.0 - alpha / 2.0) * worst_sed;
  }
  return mt;
}

std::string FittedModel::emit_variance_csv() const {
  std::ostringstream os;
  os << "group,estimable,estimate,std_error\n";
  for (const auto& v : variance_components()) {
    os << v.group << ',' << (v.estimable ? 1 : 0) << ',';
    if (v.estimable) os << fmt_num(v.estimate) << ',' << fmt_num(v.std_error);
    else os << ',';
    os << '\n';
  }
  return os.str();
}

std::string FittedModel::emit_ftest_csv() const {
  std::ostringstream os;
  os << "term,testable,num_df,den_df,f,p\n";
  for (const auto& r : f_tests()) {
    os << r.term << ',' << (r.testable ? 1 : 0) << ',';
    if (r.testable)
      os << r.num_df << ',' << fmt_num(r.den_df) << ',' << fmt_num(r.f_stat)
         << ',' << fmt_num(r.p_value);
    else os << ",,,";
    os << '\n';
  }
  return os.str();
}

std::string FittedModel::emit_means_csv(const MeansTable& mt) {
  std::ostringstream os;
  os << "term,level,mean,sed,lsd\n";
  for (std::size_t i = 0; i < mt.means.size(); ++i) {
    os << mt.term << ",\"" << mt.level_names[i] << "\"," << fmt_num(mt.means[i])
       << ',' << fmt_num(mt.sed) << ',';
    if (mt.lsd) os << fmt_num(*mt.lsd);
    os << '\n';
  }
  return os.str();
}

}  // namespace stratadoe
