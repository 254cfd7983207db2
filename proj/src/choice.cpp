#include "fairloop/choice.hpp"

#include <algorithm>

#include "fairloop/rng.hpp"

namespace fairloop {

ChoiceModel ChoiceModel::parse(std::string_view text) {
  ChoiceModel m;
  if (text == "det") m.kind = ChoiceKind::Det;
  else if (text == "rnd") m.kind = ChoiceKind::Rnd;
  else if (text == "ia") m.kind = ChoiceKind::InspectAbandon;
  else if (text == "biased") m.kind = ChoiceKind::Biased;
  else
    throw ParseError("unknown choice model '" + std::string(text) +
                     "' (expected det|rnd|ia|biased)");
  return m;
}

std::string ChoiceModel::label() const {
  switch (kind) {
    case ChoiceKind::Det: return "det";
    case ChoiceKind::Rnd: return "rnd";
    case ChoiceKind::InspectAbandon: return "ia";
    case ChoiceKind::Biased: return "biased";
  }
  return "?";
}

double ChoiceModel::listen_prob(Gender g) const {
  double p = p_listen;
  if (kind == ChoiceKind::Biased && g == Gender::Male)
    p = std::min(1.0, p * male_multiplier);
  return p;
}

ChoiceOutcome choose(const RankedList& list, const GenderTable& genders,
                     const ChoiceModel& model, uint64_t seed) {
  if (model.depth < 1) throw ValidationError("choose: depth must be >= 1");
  ChoiceOutcome out;
  out.user = list.user;
  const int n = std::min<int>(model.depth, static_cast<int>(list.items.size()));
  if (n == 0) return out;
  Rng rng(seed);

  switch (model.kind) {
    case ChoiceKind::Det:
      for (int i = 0; i < n; ++i) out.consumed.emplace_back(i, list.items[i].artist);
      out.inspected_prefix = n;
      break;
    case ChoiceKind::Rnd:
      for (int i = 0; i < n; ++i)
        if (rng.bernoulli(model.p_listen))
          out.consumed.emplace_back(i, list.items[i].artist);
      out.inspected_prefix = n;
      break;
    case ChoiceKind::InspectAbandon:
    case ChoiceKind::Biased:
      for (int i = 0; i < n; ++i) {
        const double p = model.listen_prob(genders.of(list.items[i].artist));
        if (rng.bernoulli(p)) out.consumed.emplace_back(i, list.items[i].artist);
        out.inspected_prefix = i + 1;
        // abandonment is checked after the listen decision, at every
        // inspected position
        if (rng.bernoulli(model.p_abandon)) break;
      }
      break;
  }
  return out;
}

std::vector<double> expected_consumption(const ChoiceModel& model,
                                         std::span<const Gender> genders) {
  std::vector<double> probs(genders.size());
  double reach = 1.0;  // probability position i is inspected
  for (size_t i = 0; i < genders.size(); ++i) {
    switch (model.kind) {
      case ChoiceKind::Det:
        probs[i] = 1.0;
        break;
      case ChoiceKind::Rnd:
        probs[i] = model.p_listen;
        break;
      case ChoiceKind::InspectAbandon:
      case ChoiceKind::Biased:
        probs[i] = model.listen_prob(genders[i]) * reach;
        reach *= 1.0 - model.p_abandon;
        break;
    }
  }
  return probs;
}

}  // namespace fairloop
