#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "fairloop/types.hpp"

namespace fairloop {

enum class ModelKind { Ials, Bpr };

std::string_view model_kind_name(ModelKind k);
ModelKind parse_model_kind(std::string_view name);

/// Implicit-feedback ALS. Confidence c_ui = 1 + alpha * r_ui, preference
/// p_ui = 1 for observed pairs; minimizes
///   sum_{u,i} c_ui (p_ui - x_u . y_i)^2 + reg * (|X|^2 + |Y|^2).
struct IalsConfig {
  int d = 64;
  double reg = 0.01;
  double alpha = 40.0;
  int sweeps = 20;
  uint64_t init_seed = 1;
};

/// Pairwise-rank matrix factorization: stochastic gradient ascent on
///   sum ln sigmoid(x_u . y_i - x_u . y_j) - reg * |theta|^2
/// over (user, positive, sampled negative) triples. One triple per positive
/// (user, artist) pair per epoch; negatives uniform over non-interacted items.
struct BprConfig {
  int d = 64;
  double lr = 0.05;
  double reg = 0.002;
  int epochs = 30;
  uint64_t sample_seed = 2;
  uint64_t init_seed = 1;
};

struct FactorModel {
  ModelKind kind = ModelKind::Ials;
  Eigen::MatrixXd user_factors;  // |U| x d
  Eigen::MatrixXd item_factors;  // |I| x d
  int d() const { return static_cast<int>(user_factors.cols()); }
};

/// Per-sweep (IALS) or per-epoch (BPR) objective trace. For IALS this is the
/// full regularized weighted squared loss; for BPR the mean -ln sigmoid(z)
/// over the epoch's triples, measured before each update.
struct TrainTrace {
  std::vector<double> objective;
};

/// `warm` continues from existing factors instead of a fresh seeded init.
FactorModel train_ials(const InteractionLog& log, const IalsConfig& cfg,
                       TrainTrace* trace = nullptr,
                       const FactorModel* warm = nullptr);
FactorModel train_bpr(const InteractionLog& log, const BprConfig& cfg,
                      TrainTrace* trace = nullptr,
                      const FactorModel* warm = nullptr);

/// IALS objective for the given factors (used by the monotonicity tests).
double ials_objective(const InteractionLog& log, const IalsConfig& cfg,
                      const Eigen::MatrixXd& user_factors,
                      const Eigen::MatrixXd& item_factors);

/// Value and gradients of one BPR triple objective
///   ln sigmoid(xu . (yi - yj)) - reg (|xu|^2 + |yi|^2 + |yj|^2).
struct BprTripleEval {
  double objective = 0.0;
  Eigen::VectorXd grad_user, grad_pos, grad_neg;
};
BprTripleEval bpr_triple_eval(const Eigen::VectorXd& xu,
                              const Eigen::VectorXd& yi,
                              const Eigen::VectorXd& yj, double reg);

/// Top-R scoring for one user: x_u . y_i over every item in the model, items
/// the user has interacted with excluded (any origin iteration), ties broken
/// by artist id ascending. Returns fewer than R items flagged short when the
/// candidate pool is exhausted.
RankedList rank_top_r(const FactorModel& model, const InteractionLog& log,
                      int32_t user, int R);

/// Batch variant; aggregates the log once. Same output as rank_top_r per user.
std::vector<RankedList> rank_all(const FactorModel& model,
                                 const InteractionLog& log, int R);

// --- checkpointing ---------------------------------------------------------

struct ModelCheckpoint {
  FactorModel model;
  std::vector<std::string> user_ids;
  std::vector<std::string> artist_ids;
};

/// Versioned text dump of the factor matrices with their id mappings.
/// Doubles are written with 17 significant digits, so a load reproduces the
/// matrices bit for bit.
void save_model(const FactorModel& model, const InteractionLog& log,
                const std::string& path);
ModelCheckpoint load_model(const std::string& path);

// --- hyperparameter search --------------------------------------------------

/// Union config actually trained in a simulation or tuning trial.
struct ModelConfig {
  ModelKind kind = ModelKind::Ials;
  IalsConfig ials;
  BprConfig bpr;
  std::string label() const { return std::string(model_kind_name(kind)); }
};

FactorModel train_model(const InteractionLog& log, const ModelConfig& cfg,
                        TrainTrace* trace = nullptr,
                        const FactorModel* warm = nullptr);

struct TuneTrial {
  int index = 0;
  ModelConfig config;
  double mrr = 0.0;
  std::string status;  // "ok" or "failed: ..."
};

struct TuneResult {
  ModelConfig best;
  double best_mrr = 0.0;
  std::vector<TuneTrial> trials;
};

/// Random search over documented log-uniform ranges (d in [16,128],
/// IALS reg in [1e-4,1] and alpha in [1,100]; BPR lr in [1e-3,0.3] and reg in
/// [1e-5,0.1]); evaluates MRR at `depth` on the test log and returns the
/// argmax with the full trial table. Failed trainings mark the trial failed.
TuneResult mrr_tune(const InteractionLog& train, const InteractionLog& test,
                    ModelKind kind, int budget, uint64_t seed,
                    int depth = 1000);

}  // namespace fairloop
