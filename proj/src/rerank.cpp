#include "fairloop/rerank.hpp"

#include <algorithm>
#include <charconv>

namespace fairloop {

RerankStrategy RerankStrategy::parse(std::string_view text) {
  RerankStrategy s;
  if (text == "none") {
    s.kind = StrategyKind::None;
  } else if (text == "moveup") {
    s.kind = StrategyKind::MoveUp;
  } else if (text == "fair") {
    s.kind = StrategyKind::Fair;
  } else if (text.starts_with("lambda:")) {
    s.kind = StrategyKind::LambdaShift;
    const auto num = text.substr(7);
    int v = 0;
    auto [p, ec] = std::from_chars(num.data(), num.data() + num.size(), v);
    if (ec != std::errc() || p != num.data() + num.size() || v < 1)
      throw ParseError("bad lambda in strategy '" + std::string(text) + "'");
    s.lambda = v;
  } else {
    throw ParseError("unknown strategy '" + std::string(text) +
                     "' (expected none|moveup|lambda:<int>|fair)");
  }
  return s;
}

std::string RerankStrategy::label() const {
  switch (kind) {
    case StrategyKind::None: return "none";
    case StrategyKind::MoveUp: return "moveup";
    case StrategyKind::LambdaShift: return "lambda" + std::to_string(lambda);
    case StrategyKind::Fair: return "fair";
  }
  return "?";
}

std::vector<int> compute_mtable(int K, double p, double alpha) {
  if (K < 1) throw ValidationError("compute_mtable: K must be >= 1");
  if (!(p > 0.0 && p < 1.0) || !(alpha > 0.0 && alpha < 1.0))
    throw ValidationError("compute_mtable: p and alpha must lie in (0, 1)");
  std::vector<int> m(K);
  const double odds = p / (1.0 - p);
  for (int k = 1; k <= K; ++k) {
    // walk the binomial pmf until the CDF clears alpha
    double pmf = std::pow(1.0 - p, k);
    double cdf = pmf;
    int count = 0;
    while (cdf < alpha && count < k) {
      ++count;
      pmf *= odds * static_cast<double>(k - count + 1) / count;
      cdf += pmf;
    }
    m[k - 1] = count;
  }
  return m;
}

namespace {

RankedList shell_of(const RankedList& list, const char* tag) {
  RankedList out;
  out.user = list.user;
  out.produced_by =
      list.produced_by.empty() ? tag : list.produced_by + "+" + tag;
  out.flagged_short = list.flagged_short;
  out.flagged_infeasible = list.flagged_infeasible;
  return out;
}

}  // namespace

RankedList move_up(const RankedList& list, const GenderTable& genders) {
  RankedList out = shell_of(list, "moveup");
  out.items = list.items;
  auto first_female = std::find_if(
      out.items.begin(), out.items.end(),
      [&](const ScoredItem& it) { return genders.of(it.artist) == Gender::Female; });
  if (first_female != out.items.end())
    std::rotate(out.items.begin(), first_female, first_female + 1);
  return out;
}

RankedList lambda_shift(const RankedList& list, const GenderTable& genders,
                        int lambda) {
  if (lambda < 1) throw ValidationError("lambda_shift: lambda must be >= 1");
  const int n = static_cast<int>(list.items.size());
  std::vector<std::pair<int, int>> keyed(n);  // (key, input position)
  for (int i = 0; i < n; ++i) {
    const bool male = genders.of(list.items[i].artist) == Gender::Male;
    keyed[i] = {i + (male ? lambda : 0), i};
  }
  std::sort(keyed.begin(), keyed.end());
  RankedList out = shell_of(list, ("lambda" + std::to_string(lambda)).c_str());
  out.items.reserve(n);
  for (const auto& [key, i] : keyed) out.items.push_back(list.items[i]);
  return out;
}

RankedList fair_rerank(const RankedList& list, const GenderTable& genders,
                       double p, double alpha) {
  const int n = static_cast<int>(list.items.size());
  RankedList out = shell_of(list, "fair");
  if (n == 0) return out;

  const std::vector<int> mtable = compute_mtable(n, p, alpha);
  std::vector<int> prot, unprot;  // input positions, original order
  for (int i = 0; i < n; ++i) {
    (is_protected(genders.of(list.items[i].artist)) ? prot : unprot)
        .push_back(i);
  }

  out.items.reserve(n);
  size_t pi = 0, ui = 0;
  int placed_protected = 0;
  for (int k = 1; k <= n; ++k) {
    const bool must_protect = placed_protected < mtable[k - 1];
    int pick;
    if (must_protect && pi < prot.size()) {
      pick = prot[pi++];
      ++placed_protected;
    } else {
      if (must_protect) out.flagged_infeasible = true;
      // best remaining overall = smaller original position
      if (pi < prot.size() && (ui >= unprot.size() || prot[pi] < unprot[ui])) {
        pick = prot[pi++];
        ++placed_protected;
      } else {
        pick = unprot[ui++];
      }
    }
    out.items.push_back(list.items[pick]);
  }
  return out;
}

RankedList rerank(const RankedList& list, const GenderTable& genders,
                  const RerankStrategy& strategy) {
  switch (strategy.kind) {
    case StrategyKind::None: {
      RankedList out = shell_of(list, "none");
      out.items = list.items;
      // validate catalog coverage even for the identity strategy
      for (const ScoredItem& it : out.items) genders.of(it.artist);
      return out;
    }
    case StrategyKind::MoveUp:
      return move_up(list, genders);
    case StrategyKind::LambdaShift:
      return lambda_shift(list, genders, strategy.lambda);
    case StrategyKind::Fair:
      return fair_rerank(list, genders, strategy.target_p, strategy.alpha);
  }
  throw Error("rerank: unreachable strategy kind");
}

}  // namespace fairloop
