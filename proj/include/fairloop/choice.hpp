#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "fairloop/types.hpp"

namespace fairloop {

enum class ChoiceKind { Det, Rnd, InspectAbandon, Biased };

/// User choice model over the top `depth` recommended items.
///   Det: consume everything inspected.
///   Rnd: consume each item independently with p_listen.
///   InspectAbandon: cascade; at each position consume with p_listen, then
///     abandon the list with p_abandon.
///   Biased: InspectAbandon with the listen probability multiplied by
///     male_multiplier for male artists.
struct ChoiceModel {
  ChoiceKind kind = ChoiceKind::Det;
  double p_listen = 0.5;
  double p_abandon = 0.3;
  double male_multiplier = 1.1;
  int depth = 10;

  static ChoiceModel parse(std::string_view text);  // det|rnd|ia|biased
  std::string label() const;
  /// Listen probability for one item of the given gender.
  double listen_prob(Gender g) const;
};

/// Consumed positions are strictly increasing; every consumed position is
/// below inspected_prefix, which never exceeds min(depth, list length).
struct ChoiceOutcome {
  int32_t user = 0;
  std::vector<std::pair<int, int32_t>> consumed;  // (position, artist)
  int inspected_prefix = 0;
};

/// Simulate one user's choices; deterministic in (list, model, seed).
ChoiceOutcome choose(const RankedList& list, const GenderTable& genders,
                     const ChoiceModel& model, uint64_t seed);

/// Exact per-position consumption probabilities for a slate with the given
/// gender sequence (analytic counterpart of choose, used as a test oracle).
std::vector<double> expected_consumption(const ChoiceModel& model,
                                         std::span<const Gender> genders);

}  // namespace fairloop
