#include "fairloop/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_set>

namespace fairloop {

int pfa(const RankedList& list, const GenderTable& genders, int d_eval) {
  if (d_eval < 1) throw ValidationError("pfa: d_eval must be >= 1");
  const int n = std::min<int>(d_eval, static_cast<int>(list.items.size()));
  for (int i = 0; i < n; ++i)
    if (genders.of(list.items[i].artist) == Gender::Female) return i;
  return d_eval;
}

double awrf(const RankedList& list, const GenderTable& genders, int d_eval,
            double target) {
  if (d_eval < 1) throw ValidationError("awrf: d_eval must be >= 1");
  const int n = std::min<int>(d_eval, static_cast<int>(list.items.size()));
  if (n == 0) return 0.0;
  double total = 0.0, protected_mass = 0.0;
  for (int i = 0; i < n; ++i) {
    const double w = 1.0 / std::log2(static_cast<double>(i) + 2.0);
    total += w;
    if (is_protected(genders.of(list.items[i].artist))) protected_mass += w;
  }
  return protected_mass / total - target;
}

double gini(std::span<const int64_t> counts) {
  if (counts.empty()) throw ValidationError("gini: empty table");
  std::vector<int64_t> x(counts.begin(), counts.end());
  std::sort(x.begin(), x.end());
  const double n = static_cast<double>(x.size());
  double sum = 0.0, weighted = 0.0;
  for (size_t i = 0; i < x.size(); ++i) {
    sum += static_cast<double>(x[i]);
    weighted += (2.0 * (static_cast<double>(i) + 1.0) - n - 1.0) *
                static_cast<double>(x[i]);
  }
  if (sum == 0.0) return 0.0;
  return weighted / (n * sum);
}

double gini(const ExposureTable& table, const GenderTable& genders,
            std::optional<Gender> filter, bool zero_inclusive) {
  std::vector<int64_t> x;
  x.reserve(table.counts.size());
  for (size_t i = 0; i < table.counts.size(); ++i) {
    if (filter && genders.of(static_cast<int32_t>(i)) != *filter) continue;
    if (!zero_inclusive && table.counts[i] == 0) continue;
    x.push_back(table.counts[i]);
  }
  if (x.empty()) return 0.0;
  return gini(x);
}

double mrr(const FactorModel& model, const InteractionLog& train,
           const InteractionLog& test, int depth) {
  if (depth < 1) throw ValidationError("mrr: depth must be >= 1");
  if (test.user_count() == 0) return 0.0;

  // test positives keyed by the *train* log's dense indices
  std::vector<std::unordered_set<int32_t>> positives(train.user_count());
  std::vector<int32_t> test_users;
  for (int32_t tu = 0; tu < test.user_count(); ++tu) {
    auto u = train.users().find(test.users().id(tu));
    if (u) test_users.push_back(*u);
  }
  std::sort(test_users.begin(), test_users.end());
  test_users.erase(std::unique(test_users.begin(), test_users.end()),
                   test_users.end());
  for (const Event& e : test.events()) {
    auto u = train.users().find(test.users().id(e.user));
    auto a = train.artists().find(test.artists().id(e.artist));
    if (u && a) positives[*u].insert(*a);
  }

  const std::vector<RankedList> lists = rank_all(model, train, depth);
  double total = 0.0;
  for (int32_t u : test_users) {
    const RankedList& list = lists[u];
    for (size_t r = 0; r < list.items.size(); ++r) {
      if (positives[u].count(list.items[r].artist)) {
        total += 1.0 / static_cast<double>(r + 1);
        break;
      }
    }
  }
  return total / static_cast<double>(test.user_count());
}

}  // namespace fairloop
