#pragma once

#include <string>
#include <vector>

#include "fairloop/types.hpp"

namespace fairloop {

enum class StrategyKind { None, MoveUp, LambdaShift, Fair };

/// Post-processing strategy selector. `lambda` applies to LambdaShift;
/// (target_p, alpha) to Fair.
struct RerankStrategy {
  StrategyKind kind = StrategyKind::None;
  int lambda = 5;
  double target_p = 0.5;
  double alpha = 0.1;

  /// Accepts "none", "moveup", "lambda:<int>", "fair".
  static RerankStrategy parse(std::string_view text);
  std::string label() const;  // e.g. "lambda5"
};

/// Minimum protected counts per prefix: m[k-1] is the smallest m with
/// BinomialCDF(m; k, p) >= alpha. Non-decreasing, steps of at most 1.
std::vector<int> compute_mtable(int K, double p, double alpha);

/// Move the first item by a female artist to the front (insertion; items in
/// between shift down one). Identity when no female item exists.
RankedList move_up(const RankedList& list, const GenderTable& genders);

/// Stable sort by key (input position + lambda for male items, input position
/// otherwise). Within male and within non-male items the original order is
/// preserved.
RankedList lambda_shift(const RankedList& list, const GenderTable& genders,
                        int lambda);

/// Greedy fair top-K: at each position place the best remaining protected
/// item if the prefix would otherwise fall below the mtable minimum, else the
/// best remaining item overall. Protected = non-male. If the protected pool
/// runs out while the constraint still binds, the list is flagged infeasible
/// and filled with the best remaining items.
RankedList fair_rerank(const RankedList& list, const GenderTable& genders,
                       double p, double alpha);

/// Strategy dispatch; None is the identity. Output is always a permutation of
/// the input items.
RankedList rerank(const RankedList& list, const GenderTable& genders,
                  const RerankStrategy& strategy);

}  // namespace fairloop
