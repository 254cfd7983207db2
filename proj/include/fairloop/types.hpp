#pragma once

#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

namespace fairloop {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input data (bad row, bad token); carries a message that names
/// the offending line where applicable.
class ParseError : public Error {
 public:
  using Error::Error;
};

/// Structurally valid input that violates a contract (uncataloged artist,
/// conflicting labels, infeasible parameters).
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// Non-finite values or other failures during model training.
class TrainError : public Error {
 public:
  using Error::Error;
};

enum class Gender : uint8_t { Female = 0, Male = 1, Nonbinary = 2 };

/// Case-insensitive parse of {female, male, nonbinary}. Throws ParseError on
/// any other token.
Gender parse_gender(std::string_view token);
std::string_view gender_name(Gender g);

/// Protected group for exposure fairness: everyone who is not male.
inline bool is_protected(Gender g) { return g != Gender::Male; }

inline constexpr int64_t kNoTimestamp = std::numeric_limits<int64_t>::min();

/// One listening observation, with ids resolved to dense indices of the
/// owning log. weight >= 1; timestamp == kNoTimestamp when absent;
/// origin_iteration 0 for original data, k for events injected at simulation
/// iteration k.
struct Event {
  int32_t user = 0;
  int32_t artist = 0;
  int64_t weight = 1;
  int64_t timestamp = kNoTimestamp;
  int32_t origin_iteration = 0;
};

/// Dense bijection between opaque string ids and [0, size) indices, in order
/// of first appearance.
class IdIndex {
 public:
  int32_t intern(std::string_view id);
  std::optional<int32_t> find(std::string_view id) const;
  const std::string& id(int32_t index) const { return ids_.at(index); }
  int32_t size() const { return static_cast<int32_t>(ids_.size()); }
  const std::vector<std::string>& ids() const { return ids_; }

 private:
  std::vector<std::string> ids_;
  std::unordered_map<std::string, int32_t> lookup_;
};

/// Aggregated per-entity interaction row: (partner index, summed weight),
/// sorted by partner index.
using SparseRow = std::vector<std::pair<int32_t, double>>;

/// Multiset of listening events plus the dense user/artist renumbering used
/// for matrix math. Events keep insertion order; origin_iteration is monotone
/// with it.
class InteractionLog {
 public:
  int32_t intern_user(std::string_view id) { return users_.intern(id); }
  int32_t intern_artist(std::string_view id) { return artists_.intern(id); }

  /// Append an event given string ids (interning them as needed).
  void add(std::string_view user, std::string_view artist, int64_t weight,
           int64_t timestamp = kNoTimestamp, int32_t origin_iteration = 0);
  /// Append an event with already-resolved indices.
  void add(const Event& e);

  const std::vector<Event>& events() const { return events_; }
  const IdIndex& users() const { return users_; }
  const IdIndex& artists() const { return artists_; }
  int32_t user_count() const { return users_.size(); }
  int32_t artist_count() const { return artists_.size(); }
  bool empty() const { return events_.empty(); }

  bool all_timestamped() const;

  /// Aggregated (user, artist) weights, user-major. Rows sorted by artist.
  std::vector<SparseRow> by_user() const;
  /// Aggregated (artist, user) weights, artist-major. Rows sorted by user.
  std::vector<SparseRow> by_artist() const;

  /// For each artist index, its rank in the lexicographic order of artist
  /// ids. Used as the deterministic tie-break in rankings.
  std::vector<int32_t> artist_lex_ranks() const;

 private:
  std::vector<Event> events_;
  IdIndex users_;
  IdIndex artists_;
};

/// Artist id -> gender. Ordered map so iteration (and file output) is
/// deterministic.
class ArtistCatalog {
 public:
  /// Throws ValidationError if the artist exists with a different label.
  void add(std::string_view artist, Gender g);

  bool contains(std::string_view artist) const;
  Gender gender_of(std::string_view artist) const;  // throws if absent

  int64_t size() const { return static_cast<int64_t>(entries_.size()); }
  int64_t count(Gender g) const;

  const std::map<std::string, Gender, std::less<>>& entries() const {
    return entries_;
  }

 private:
  std::map<std::string, Gender, std::less<>> entries_;
};

/// Catalog projected onto a log's dense artist index for O(1) lookups in the
/// per-user hot path. Construction fails if any indexed artist is missing
/// from the catalog, which is where "uncataloged item" errors surface.
class GenderTable {
 public:
  GenderTable() = default;
  GenderTable(const ArtistCatalog& catalog, const IdIndex& artists);

  Gender of(int32_t artist) const {
    if (artist < 0 || artist >= static_cast<int32_t>(by_index_.size()))
      throw ValidationError("artist index " + std::to_string(artist) +
                            " not covered by gender table");
    return by_index_[artist];
  }
  std::span<const Gender> view() const { return by_index_; }

 private:
  std::vector<Gender> by_index_;
};

struct ScoredItem {
  int32_t artist = 0;
  double score = 0.0;
};

/// Per-user ordered recommendation slate. `produced_by` records the model
/// kind and any re-ranker applied. flagged_short: fewer candidates than the
/// requested length. flagged_infeasible: a fairness constraint could not be
/// satisfied (see fair_rerank).
struct RankedList {
  int32_t user = 0;
  std::vector<ScoredItem> items;
  std::string produced_by;
  bool flagged_short = false;
  bool flagged_infeasible = false;

  size_t size() const { return items.size(); }
};

}  // namespace fairloop
