#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fairloop/recommender.hpp"
#include "fairloop/types.hpp"

namespace fairloop {

/// 0-based position of the first female artist within the top d_eval of the
/// list; d_eval when none is present (sentinel, counted separately by the
/// aggregation).
int pfa(const RankedList& list, const GenderTable& genders, int d_eval);

/// Attention-weighted rank fairness: protected (non-male) share of the
/// log-discounted exposure mass over the top d_eval, minus `target`. 0 is
/// fair; negative means male artists are overexposed. Empty list -> 0.
double awrf(const RankedList& list, const GenderTable& genders, int d_eval,
            double target = 0.5);

/// Recommendation counts within the top k, indexed by the log's dense artist
/// index; zero rows are meaningful (never-recommended artists).
struct ExposureTable {
  std::vector<int64_t> counts;
};

/// Gini concentration of the counts: 0 = equal exposure, -> 1 = all exposure
/// on one artist. Zero-sum tables give 0.
double gini(std::span<const int64_t> counts);

/// Gini over the artists of one gender (or all when `filter` is empty).
/// `zero_inclusive` keeps never-recommended artists in the population.
double gini(const ExposureTable& table, const GenderTable& genders,
            std::optional<Gender> filter, bool zero_inclusive = true);

/// Mean reciprocal rank of each test user's first test-positive artist in a
/// depth-length ranking over the train log (train items excluded); users whose
/// positives never appear contribute 0.
double mrr(const FactorModel& model, const InteractionLog& train,
           const InteractionLog& test, int depth);

/// One row of the results table: metrics over the lists served in one
/// simulation iteration for one configuration.
struct MetricReport {
  int iteration = 0;
  std::string model;
  std::string strategy;
  std::string choice;
  double pfa = 0.0;
  double awrf = 0.0;
  double gini_all = 0.0;
  double gini_female = 0.0;
  double gini_male = 0.0;
  int64_t events_injected = 0;
  int short_lists = 0;
  int sentinel_pfa_count = 0;
  uint64_t seed = 0;
  // bookkeeping outside the CSV schema
  int empty_lists = 0;
  double gini_nonbinary = std::numeric_limits<double>::quiet_NaN();
};

}  // namespace fairloop
