#include "fairloop/recommender.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>

#include "fairloop/metrics.hpp"
#include "fairloop/rng.hpp"

namespace fairloop {

using Eigen::MatrixXd;
using Eigen::VectorXd;

std::string_view model_kind_name(ModelKind k) {
  return k == ModelKind::Ials ? "ials" : "bpr";
}

ModelKind parse_model_kind(std::string_view name) {
  if (name == "ials") return ModelKind::Ials;
  if (name == "bpr") return ModelKind::Bpr;
  throw ParseError("unknown model kind '" + std::string(name) + "'");
}

namespace {

constexpr double kInitSigma = 0.1;

MatrixXd gaussian_init(int rows, int cols, uint64_t seed) {
  MatrixXd m(rows, cols);
  Rng rng(seed);
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c) m(r, c) = kInitSigma * rng.gaussian();
  return m;
}

// One ALS half-sweep: exact regularized least-squares solve for each row of
// `out` against the fixed `other` factors.
void als_solve_side(const std::vector<SparseRow>& rows, const MatrixXd& other,
                    double reg, double alpha, MatrixXd& out) {
  const int d = static_cast<int>(other.cols());
  const MatrixXd gram = other.transpose() * other;
  MatrixXd a(d, d);
  VectorXd b(d);
  for (size_t e = 0; e < rows.size(); ++e) {
    a = gram;
    a.diagonal().array() += reg;
    b.setZero();
    for (const auto& [j, w] : rows[e]) {
      const double c = 1.0 + alpha * w;
      a.selfadjointView<Eigen::Lower>().rankUpdate(other.row(j).transpose(),
                                                   c - 1.0);
      b += c * other.row(j).transpose();
    }
    out.row(e) = a.selfadjointView<Eigen::Lower>().ldlt().solve(b).transpose();
  }
}

}  // namespace

double ials_objective(const InteractionLog& log, const IalsConfig& cfg,
                      const MatrixXd& user_factors,
                      const MatrixXd& item_factors) {
  // sum over ALL pairs of c (p - s)^2, via the Gram identity
  //   sum_all s^2 = sum_u x_u' (Y'Y) x_u
  // plus per-observation corrections c(1-s)^2 - s^2.
  const MatrixXd gram = item_factors.transpose() * item_factors;
  double obj = (user_factors * gram).cwiseProduct(user_factors).sum();
  const auto rows = log.by_user();
  for (size_t u = 0; u < rows.size(); ++u) {
    for (const auto& [i, w] : rows[u]) {
      const double s = user_factors.row(u).dot(item_factors.row(i));
      const double c = 1.0 + cfg.alpha * w;
      obj += c * (1.0 - s) * (1.0 - s) - s * s;
    }
  }
  obj += cfg.reg *
         (user_factors.squaredNorm() + item_factors.squaredNorm());
  return obj;
}

FactorModel train_ials(const InteractionLog& log, const IalsConfig& cfg,
                       TrainTrace* trace, const FactorModel* warm) {
  if (log.empty()) throw ValidationError("train_ials: empty log");
  if (cfg.d < 1 || cfg.reg <= 0 || cfg.alpha <= 0 || cfg.sweeps < 1)
    throw ValidationError("train_ials: bad config");

  const int n_users = log.user_count();
  const int n_items = log.artist_count();
  const auto urows = log.by_user();
  const auto irows = log.by_artist();

  FactorModel model;
  model.kind = ModelKind::Ials;
  if (warm) {
    model.user_factors = warm->user_factors;
    model.item_factors = warm->item_factors;
  } else {
    model.user_factors = MatrixXd::Zero(n_users, cfg.d);
    model.item_factors =
        gaussian_init(n_items, cfg.d, mix64(cfg.init_seed, 0x69616c73ULL));
  }

  for (int sweep = 0; sweep < cfg.sweeps; ++sweep) {
    als_solve_side(urows, model.item_factors, cfg.reg, cfg.alpha,
                   model.user_factors);
    als_solve_side(irows, model.user_factors, cfg.reg, cfg.alpha,
                   model.item_factors);
    const double obj =
        ials_objective(log, cfg, model.user_factors, model.item_factors);
    if (!std::isfinite(obj))
      throw TrainError("train_ials: non-finite objective at sweep " +
                       std::to_string(sweep));
    if (trace) trace->objective.push_back(obj);
  }
  return model;
}

// ---------------------------------------------------------------------------
// BPR

namespace {

double stable_sigmoid_neg(double z) {
  // sigmoid(-z) = 1 / (1 + e^z), computed without overflow
  if (z >= 0) {
    const double e = std::exp(-z);
    return e / (1.0 + e);
  }
  return 1.0 / (1.0 + std::exp(z));
}

double softplus(double t) {  // ln(1 + e^t)
  return std::max(t, 0.0) + std::log1p(std::exp(-std::abs(t)));
}

}  // namespace

BprTripleEval bpr_triple_eval(const VectorXd& xu, const VectorXd& yi,
                              const VectorXd& yj, double reg) {
  const double z = xu.dot(yi - yj);
  const double g = stable_sigmoid_neg(z);  // d ln sigmoid(z) / dz
  BprTripleEval ev;
  ev.objective = -softplus(-z) -
                 reg * (xu.squaredNorm() + yi.squaredNorm() + yj.squaredNorm());
  ev.grad_user = g * (yi - yj) - 2.0 * reg * xu;
  ev.grad_pos = g * xu - 2.0 * reg * yi;
  ev.grad_neg = -g * xu - 2.0 * reg * yj;
  return ev;
}

FactorModel train_bpr(const InteractionLog& log, const BprConfig& cfg,
                      TrainTrace* trace, const FactorModel* warm) {
  if (log.empty()) throw ValidationError("train_bpr: empty log");
  if (cfg.d < 1 || cfg.lr <= 0 || cfg.reg < 0 || cfg.epochs < 1)
    throw ValidationError("train_bpr: bad config");

  const int n_users = log.user_count();
  const int n_items = log.artist_count();
  const auto urows = log.by_user();

  std::vector<std::pair<int32_t, int32_t>> positives;
  std::vector<std::vector<int32_t>> seen(n_users);
  for (int32_t u = 0; u < n_users; ++u) {
    seen[u].reserve(urows[u].size());
    for (const auto& [i, w] : urows[u]) {
      positives.emplace_back(u, i);
      seen[u].push_back(i);  // already sorted by artist index
    }
  }

  FactorModel model;
  model.kind = ModelKind::Bpr;
  if (warm) {
    model.user_factors = warm->user_factors;
    model.item_factors = warm->item_factors;
  } else {
    model.user_factors =
        gaussian_init(n_users, cfg.d, mix64(cfg.init_seed, 0x62707255ULL));
    model.item_factors =
        gaussian_init(n_items, cfg.d, mix64(cfg.init_seed, 0x62707249ULL));
  }

  Rng srng(mix64(cfg.sample_seed, 0x627072ULL));
  std::vector<size_t> order(positives.size());
  std::iota(order.begin(), order.end(), 0);
  VectorXd xu_old(cfg.d), diff(cfg.d);

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    for (size_t i = order.size(); i > 1; --i)
      std::swap(order[i - 1], order[srng.below(static_cast<int64_t>(i))]);

    double loss = 0.0;
    size_t counted = 0;
    for (size_t t : order) {
      const auto [u, pos] = positives[t];
      if (static_cast<int>(seen[u].size()) >= n_items) continue;  // no negatives
      int32_t neg;
      do {
        neg = static_cast<int32_t>(srng.below(n_items));
      } while (std::binary_search(seen[u].begin(), seen[u].end(), neg));

      xu_old = model.user_factors.row(u).transpose();
      diff = (model.item_factors.row(pos) - model.item_factors.row(neg))
                 .transpose();
      const double z = xu_old.dot(diff);
      const double g = stable_sigmoid_neg(z);
      loss += softplus(-z);
      ++counted;

      model.user_factors.row(u) +=
          cfg.lr * (g * diff.transpose() -
                    2.0 * cfg.reg * model.user_factors.row(u));
      model.item_factors.row(pos) +=
          cfg.lr * (g * xu_old.transpose() -
                    2.0 * cfg.reg * model.item_factors.row(pos));
      model.item_factors.row(neg) +=
          cfg.lr * (-g * xu_old.transpose() -
                    2.0 * cfg.reg * model.item_factors.row(neg));
    }
    if (counted > 0) loss /= static_cast<double>(counted);
    if (!std::isfinite(loss) || !model.user_factors.allFinite() ||
        !model.item_factors.allFinite())
      throw TrainError("train_bpr: non-finite parameters at epoch " +
                       std::to_string(epoch));
    if (trace) trace->objective.push_back(loss);
  }
  return model;
}

FactorModel train_model(const InteractionLog& log, const ModelConfig& cfg,
                        TrainTrace* trace, const FactorModel* warm) {
  return cfg.kind == ModelKind::Ials
             ? train_ials(log, cfg.ials, trace, warm)
             : train_bpr(log, cfg.bpr, trace, warm);
}

// ---------------------------------------------------------------------------
// ranking

namespace {

RankedList rank_one(const FactorModel& model, const SparseRow& seen_row,
                    const std::vector<int32_t>& lex, int32_t user, int R) {
  const int n_items = static_cast<int>(model.item_factors.rows());
  const VectorXd scores =
      model.item_factors * model.user_factors.row(user).transpose();

  std::vector<char> excluded(n_items, 0);
  for (const auto& [i, w] : seen_row) excluded[i] = 1;

  std::vector<int32_t> cand;
  cand.reserve(n_items);
  for (int32_t i = 0; i < n_items; ++i)
    if (!excluded[i]) cand.push_back(i);

  auto better = [&](int32_t a, int32_t b) {
    if (scores[a] != scores[b]) return scores[a] > scores[b];
    return lex[a] < lex[b];
  };
  const size_t keep = std::min<size_t>(R, cand.size());
  std::partial_sort(cand.begin(), cand.begin() + keep, cand.end(), better);
  cand.resize(keep);

  RankedList list;
  list.user = user;
  list.produced_by = std::string(model_kind_name(model.kind));
  list.flagged_short = static_cast<int>(keep) < R;
  list.items.reserve(keep);
  for (int32_t i : cand) list.items.push_back({i, scores[i]});
  return list;
}

}  // namespace

RankedList rank_top_r(const FactorModel& model, const InteractionLog& log,
                      int32_t user, int R) {
  if (user < 0 || user >= model.user_factors.rows())
    throw ValidationError("rank_top_r: user not in model");
  if (R < 0) throw ValidationError("rank_top_r: R must be >= 0");
  SparseRow seen_row;
  for (const Event& e : log.events())
    if (e.user == user) seen_row.emplace_back(e.artist, e.weight);
  std::sort(seen_row.begin(), seen_row.end());
  return rank_one(model, seen_row, log.artist_lex_ranks(), user, R);
}

std::vector<RankedList> rank_all(const FactorModel& model,
                                 const InteractionLog& log, int R) {
  const auto rows = log.by_user();
  const auto lex = log.artist_lex_ranks();
  std::vector<RankedList> out;
  out.reserve(rows.size());
  for (int32_t u = 0; u < static_cast<int32_t>(rows.size()); ++u)
    out.push_back(rank_one(model, rows[u], lex, u, R));
  return out;
}

// ---------------------------------------------------------------------------
// checkpoint

void save_model(const FactorModel& model, const InteractionLog& log,
                const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write '" + path + "'");
  const int d = model.d();
  out << "fairloop-model\t1\n";
  out << "kind\t" << model_kind_name(model.kind) << "\n";
  out << "d\t" << d << "\n";
  out << "users\t" << model.user_factors.rows() << "\n";
  out << "items\t" << model.item_factors.rows() << "\n";
  char buf[32];
  auto write_rows = [&](const char* tag, const MatrixXd& m, const IdIndex& ids) {
    for (int r = 0; r < m.rows(); ++r) {
      out << tag << '\t' << ids.id(r);
      for (int c = 0; c < d; ++c) {
        std::snprintf(buf, sizeof buf, "%.17g", m(r, c));
        out << '\t' << buf;
      }
      out << '\n';
    }
  };
  write_rows("u", model.user_factors, log.users());
  write_rows("i", model.item_factors, log.artists());
}

ModelCheckpoint load_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open '" + path + "'");
  std::string line;
  auto next_kv = [&](const char* key) {
    if (!std::getline(in, line))
      throw ParseError(path + ": truncated checkpoint");
    auto tab = line.find('\t');
    if (tab == std::string::npos || line.substr(0, tab) != key)
      throw ParseError(path + ": expected '" + key + "' line");
    return line.substr(tab + 1);
  };
  if (next_kv("fairloop-model") != "1")
    throw ParseError(path + ": unsupported checkpoint version");
  ModelCheckpoint cp;
  cp.model.kind = parse_model_kind(next_kv("kind"));
  const int d = std::stoi(next_kv("d"));
  const int n_users = std::stoi(next_kv("users"));
  const int n_items = std::stoi(next_kv("items"));
  cp.model.user_factors.resize(n_users, d);
  cp.model.item_factors.resize(n_items, d);

  auto read_rows = [&](const char* tag, MatrixXd& m,
                       std::vector<std::string>& ids) {
    for (int r = 0; r < m.rows(); ++r) {
      if (!std::getline(in, line))
        throw ParseError(path + ": truncated factor rows");
      std::stringstream ss(line);
      std::string field;
      std::getline(ss, field, '\t');
      if (field != tag) throw ParseError(path + ": bad row tag '" + field + "'");
      std::getline(ss, field, '\t');
      ids.push_back(field);
      for (int c = 0; c < d; ++c) {
        if (!std::getline(ss, field, '\t'))
          throw ParseError(path + ": short factor row");
        m(r, c) = std::strtod(field.c_str(), nullptr);
      }
    }
  };
  read_rows("u", cp.model.user_factors, cp.user_ids);
  read_rows("i", cp.model.item_factors, cp.artist_ids);
  return cp;
}

// ---------------------------------------------------------------------------
// random search

namespace {

double log_uniform(Rng& rng, double lo, double hi) {
  return lo * std::exp(rng.uniform() * std::log(hi / lo));
}

ModelConfig sample_config(ModelKind kind, Rng& rng, uint64_t seed, int trial) {
  ModelConfig cfg;
  cfg.kind = kind;
  const int d = std::clamp(
      static_cast<int>(std::lround(log_uniform(rng, 16.0, 128.0))), 16, 128);
  if (kind == ModelKind::Ials) {
    cfg.ials.d = d;
    cfg.ials.reg = log_uniform(rng, 1e-4, 1.0);
    cfg.ials.alpha = log_uniform(rng, 1.0, 100.0);
    cfg.ials.init_seed = mix64(seed, trial, 1);
  } else {
    cfg.bpr.d = d;
    cfg.bpr.lr = log_uniform(rng, 1e-3, 0.3);
    cfg.bpr.reg = log_uniform(rng, 1e-5, 0.1);
    cfg.bpr.init_seed = mix64(seed, trial, 1);
    cfg.bpr.sample_seed = mix64(seed, trial, 2);
  }
  return cfg;
}

}  // namespace

TuneResult mrr_tune(const InteractionLog& train, const InteractionLog& test,
                    ModelKind kind, int budget, uint64_t seed, int depth) {
  if (budget < 1) throw ValidationError("mrr_tune: budget must be >= 1");
  TuneResult result;
  int best = -1;
  for (int t = 0; t < budget; ++t) {
    Rng rng(mix64(seed, 0x74756e65ULL, t));  // "tune"
    TuneTrial trial;
    trial.index = t;
    trial.config = sample_config(kind, rng, seed, t);
    try {
      const FactorModel model = train_model(train, trial.config);
      trial.mrr = mrr(model, train, test, depth);
      trial.status = "ok";
      if (best < 0 || trial.mrr > result.trials[best].mrr) best = t;
    } catch (const Error& e) {
      trial.mrr = -1.0;
      trial.status = std::string("failed: ") + e.what();
    }
    result.trials.push_back(std::move(trial));
  }
  if (best < 0) throw TrainError("mrr_tune: every trial failed");
  result.best = result.trials[best].config;
  result.best_mrr = result.trials[best].mrr;
  return result;
}

}  // namespace fairloop
