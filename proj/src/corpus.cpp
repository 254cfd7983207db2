#include "fairloop/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <deque>
#include <fstream>
#include <numeric>
#include <sstream>
#include <unordered_set>

#include "fairloop/rng.hpp"

namespace fairloop {

// ---------------------------------------------------------------------------
// Domain types

Gender parse_gender(std::string_view token) {
  std::string t(token);
  std::transform(t.begin(), t.end(), t.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  if (t == "female") return Gender::Female;
  if (t == "male") return Gender::Male;
  if (t == "nonbinary") return Gender::Nonbinary;
  throw ParseError("unknown gender token '" + std::string(token) + "'");
}

std::string_view gender_name(Gender g) {
  switch (g) {
    case Gender::Female: return "female";
    case Gender::Male: return "male";
    case Gender::Nonbinary: return "nonbinary";
  }
  return "?";
}

int32_t IdIndex::intern(std::string_view id) {
  auto it = lookup_.find(std::string(id));
  if (it != lookup_.end()) return it->second;
  int32_t index = static_cast<int32_t>(ids_.size());
  ids_.emplace_back(id);
  lookup_.emplace(ids_.back(), index);
  return index;
}

std::optional<int32_t> IdIndex::find(std::string_view id) const {
  auto it = lookup_.find(std::string(id));
  if (it == lookup_.end()) return std::nullopt;
  return it->second;
}

void InteractionLog::add(std::string_view user, std::string_view artist,
                         int64_t weight, int64_t timestamp,
                         int32_t origin_iteration) {
  Event e;
  e.user = users_.intern(user);
  e.artist = artists_.intern(artist);
  e.weight = weight;
  e.timestamp = timestamp;
  e.origin_iteration = origin_iteration;
  add(e);
}

void InteractionLog::add(const Event& e) {
  if (e.weight < 1) throw ValidationError("event weight must be >= 1");
  if (e.user < 0 || e.user >= users_.size() || e.artist < 0 ||
      e.artist >= artists_.size())
    throw ValidationError("event references an unindexed user or artist");
  events_.push_back(e);
}

bool InteractionLog::all_timestamped() const {
  return std::all_of(events_.begin(), events_.end(),
                     [](const Event& e) { return e.timestamp != kNoTimestamp; });
}

namespace {

std::vector<SparseRow> aggregate(const std::vector<Event>& events, int32_t rows,
                                 bool user_major) {
  std::vector<SparseRow> out(rows);
  for (const Event& e : events) {
    if (user_major)
      out[e.user].emplace_back(e.artist, static_cast<double>(e.weight));
    else
      out[e.artist].emplace_back(e.user, static_cast<double>(e.weight));
  }
  for (SparseRow& row : out) {
    std::sort(row.begin(), row.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    size_t w = 0;
    for (size_t r = 0; r < row.size(); ++r) {
      if (w > 0 && row[w - 1].first == row[r].first) {
        row[w - 1].second += row[r].second;
      } else {
        row[w++] = row[r];
      }
    }
    row.resize(w);
  }
  return out;
}

}  // namespace

std::vector<SparseRow> InteractionLog::by_user() const {
  return aggregate(events_, users_.size(), true);
}

std::vector<SparseRow> InteractionLog::by_artist() const {
  return aggregate(events_, artists_.size(), false);
}

std::vector<int32_t> InteractionLog::artist_lex_ranks() const {
  std::vector<int32_t> order(artists_.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int32_t a, int32_t b) {
    return artists_.id(a) < artists_.id(b);
  });
  std::vector<int32_t> rank(artists_.size());
  for (int32_t r = 0; r < static_cast<int32_t>(order.size()); ++r)
    rank[order[r]] = r;
  return rank;
}

void ArtistCatalog::add(std::string_view artist, Gender g) {
  auto [it, inserted] = entries_.emplace(std::string(artist), g);
  if (!inserted && it->second != g)
    throw ValidationError("conflicting gender labels for artist '" +
                          std::string(artist) + "'");
}

bool ArtistCatalog::contains(std::string_view artist) const {
  return entries_.find(artist) != entries_.end();
}

Gender ArtistCatalog::gender_of(std::string_view artist) const {
  auto it = entries_.find(artist);
  if (it == entries_.end())
    throw ValidationError("artist '" + std::string(artist) +
                          "' not in catalog");
  return it->second;
}

int64_t ArtistCatalog::count(Gender g) const {
  return std::count_if(entries_.begin(), entries_.end(),
                       [g](const auto& kv) { return kv.second == g; });
}

GenderTable::GenderTable(const ArtistCatalog& catalog, const IdIndex& artists) {
  by_index_.resize(artists.size());
  std::vector<std::string> missing;
  for (int32_t i = 0; i < artists.size(); ++i) {
    const std::string& id = artists.id(i);
    if (!catalog.contains(id)) {
      missing.push_back(id);
      continue;
    }
    by_index_[i] = catalog.gender_of(id);
  }
  if (!missing.empty()) {
    std::string msg = "artists missing from catalog:";
    for (size_t i = 0; i < missing.size() && i < 10; ++i)
      msg += " " + missing[i];
    if (missing.size() > 10)
      msg += " (+" + std::to_string(missing.size() - 10) + " more)";
    throw ValidationError(msg);
  }
}

// ---------------------------------------------------------------------------
// TSV ingestion

namespace {

std::vector<std::string> split_line(const std::string& line, char delim) {
  std::vector<std::string> fields;
  size_t start = 0;
  while (true) {
    size_t pos = line.find(delim, start);
    if (pos == std::string::npos) {
      fields.push_back(line.substr(start));
      break;
    }
    fields.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
  // tolerate trailing \r from CRLF files
  if (!fields.empty() && !fields.back().empty() && fields.back().back() == '\r')
    fields.back().pop_back();
  return fields;
}

int64_t parse_int64(const std::string& s, size_t line_no, const char* what) {
  try {
    size_t used = 0;
    long long v = std::stoll(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ParseError("line " + std::to_string(line_no) + ": bad " +
                     std::string(what) + " '" + s + "'");
  }
}

std::ifstream open_or_throw(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open '" + path + "'");
  return in;
}

}  // namespace

ArtistCatalog ingest_genders(const std::string& path, TsvFormat fmt) {
  std::ifstream in = open_or_throw(path);
  std::string line;
  size_t line_no = 0;
  ArtistCatalog catalog;
  bool saw_header = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    auto fields = split_line(line, fmt.delimiter);
    if (!saw_header) {
      if (fields.size() < 2 || fields[0] != "artist_id" ||
          fields[1] != "gender")
        throw ParseError(path + ": expected header 'artist_id" +
                         std::string(1, fmt.delimiter) + "gender'");
      saw_header = true;
      continue;
    }
    if (fields.size() != 2 || fields[0].empty())
      throw ParseError("line " + std::to_string(line_no) + ": expected 2 fields");
    Gender g;
    try {
      g = parse_gender(fields[1]);
    } catch (const ParseError& e) {
      throw ParseError("line " + std::to_string(line_no) + ": " + e.what());
    }
    catalog.add(fields[0], g);
  }
  if (!saw_header && line_no > 0)
    throw ParseError(path + ": missing header row");
  return catalog;
}

InteractionLog ingest_interactions(const std::string& path,
                                   const ArtistCatalog& catalog,
                                   TsvFormat fmt) {
  std::ifstream in = open_or_throw(path);
  std::string line;
  size_t line_no = 0;
  bool saw_header = false;
  bool has_timestamp = false;

  InteractionLog log;
  // (user index, artist index, timestamp) -> event slot, for aggregation
  std::map<std::tuple<int32_t, int32_t, int64_t>, size_t> slots;
  std::vector<Event> events;
  std::vector<std::string> uncataloged;
  std::unordered_set<std::string> uncataloged_seen;

  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    auto fields = split_line(line, fmt.delimiter);
    if (!saw_header) {
      if (fields.size() == 4 && fields[0] == "user_id" &&
          fields[1] == "artist_id" && fields[2] == "count" &&
          fields[3] == "timestamp") {
        has_timestamp = true;
      } else if (fields.size() == 3 && fields[0] == "user_id" &&
                 fields[1] == "artist_id" && fields[2] == "count") {
        has_timestamp = false;
      } else {
        throw ParseError(path +
                         ": expected header 'user_id/artist_id/count[/timestamp]'");
      }
      saw_header = true;
      continue;
    }
    size_t expected = has_timestamp ? 4 : 3;
    if (fields.size() != expected || fields[0].empty() || fields[1].empty())
      throw ParseError("line " + std::to_string(line_no) + ": expected " +
                       std::to_string(expected) + " fields");
    int64_t weight = parse_int64(fields[2], line_no, "count");
    if (weight < 1)
      throw ParseError("line " + std::to_string(line_no) +
                       ": count must be >= 1, got " + fields[2]);
    int64_t ts = kNoTimestamp;
    if (has_timestamp) ts = parse_int64(fields[3], line_no, "timestamp");

    if (!catalog.contains(fields[1])) {
      if (uncataloged_seen.insert(fields[1]).second)
        uncataloged.push_back(fields[1]);
      continue;
    }

    Event e;
    e.user = log.intern_user(fields[0]);
    e.artist = log.intern_artist(fields[1]);
    e.weight = weight;
    e.timestamp = ts;
    auto key = std::make_tuple(e.user, e.artist, e.timestamp);
    auto it = slots.find(key);
    if (it != slots.end()) {
      events[it->second].weight += weight;
    } else {
      slots.emplace(key, events.size());
      events.push_back(e);
    }
  }
  if (!saw_header && line_no > 0)
    throw ParseError(path + ": missing header row");

  if (!uncataloged.empty()) {
    std::sort(uncataloged.begin(), uncataloged.end());
    std::string msg = path + ": artists absent from catalog:";
    for (size_t i = 0; i < uncataloged.size() && i < 10; ++i)
      msg += " " + uncataloged[i];
    if (uncataloged.size() > 10)
      msg += " (+" + std::to_string(uncataloged.size() - 10) + " more)";
    throw ValidationError(msg);
  }

  for (const Event& e : events) log.add(e);
  return log;
}

void write_interactions(const InteractionLog& log, const std::string& path,
                        TsvFormat fmt) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write '" + path + "'");
  const char d = fmt.delimiter;
  const bool ts = log.all_timestamped();
  out << "user_id" << d << "artist_id" << d << "count";
  if (ts) out << d << "timestamp";
  out << "\n";
  for (const Event& e : log.events()) {
    out << log.users().id(e.user) << d << log.artists().id(e.artist) << d
        << e.weight;
    if (ts) out << d << e.timestamp;
    out << "\n";
  }
}

void write_genders(const ArtistCatalog& catalog, const std::string& path,
                   TsvFormat fmt) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write '" + path + "'");
  out << "artist_id" << fmt.delimiter << "gender\n";
  for (const auto& [id, g] : catalog.entries())
    out << id << fmt.delimiter << gender_name(g) << "\n";
}

// ---------------------------------------------------------------------------
// k-core

InteractionLog k_core_filter(const InteractionLog& log, int k) {
  if (k < 1) throw ValidationError("k-core requires k >= 1");

  // distinct-partner adjacency
  auto urows = log.by_user();
  auto arows = log.by_artist();
  std::vector<int> udeg(urows.size()), adeg(arows.size());
  for (size_t u = 0; u < urows.size(); ++u) udeg[u] = static_cast<int>(urows[u].size());
  for (size_t a = 0; a < arows.size(); ++a) adeg[a] = static_cast<int>(arows[a].size());

  std::vector<char> ukeep(urows.size(), 1), akeep(arows.size(), 1);
  std::deque<std::pair<bool, int32_t>> queue;  // (is_user, index)
  for (size_t u = 0; u < urows.size(); ++u)
    if (udeg[u] < k) { ukeep[u] = 0; queue.emplace_back(true, u); }
  for (size_t a = 0; a < arows.size(); ++a)
    if (adeg[a] < k) { akeep[a] = 0; queue.emplace_back(false, a); }

  while (!queue.empty()) {
    auto [is_user, idx] = queue.front();
    queue.pop_front();
    if (is_user) {
      for (const auto& [a, w] : urows[idx]) {
        if (!akeep[a]) continue;
        if (--adeg[a] < k) { akeep[a] = 0; queue.emplace_back(false, a); }
      }
    } else {
      for (const auto& [u, w] : arows[idx]) {
        if (!ukeep[u]) continue;
        if (--udeg[u] < k) { ukeep[u] = 0; queue.emplace_back(true, u); }
      }
    }
  }

  InteractionLog out;
  for (const Event& e : log.events()) {
    if (!ukeep[e.user] || !akeep[e.artist]) continue;
    out.add(log.users().id(e.user), log.artists().id(e.artist), e.weight,
            e.timestamp, e.origin_iteration);
  }
  return out;
}

// ---------------------------------------------------------------------------
// time split

std::pair<InteractionLog, InteractionLog> time_split(const InteractionLog& log,
                                                     double train_fraction) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0))
    throw ValidationError("train_fraction must be in (0, 1)");
  if (!log.all_timestamped())
    throw ValidationError("time_split requires timestamps on every event");

  std::vector<size_t> order(log.events().size());
  std::iota(order.begin(), order.end(), 0);
  const auto& ev = log.events();
  std::sort(order.begin(), order.end(), [&](size_t a, size_t b) {
    const Event& x = ev[a];
    const Event& y = ev[b];
    if (x.timestamp != y.timestamp) return x.timestamp < y.timestamp;
    const std::string& xu = log.users().id(x.user);
    const std::string& yu = log.users().id(y.user);
    if (xu != yu) return xu < yu;
    return log.artists().id(x.artist) < log.artists().id(y.artist);
  });

  size_t n = ev.size();
  size_t n_train = static_cast<size_t>(
      std::ceil(train_fraction * static_cast<double>(n)));
  n_train = std::min(n_train, n);

  InteractionLog train;
  std::unordered_set<std::string> train_users;
  for (size_t i = 0; i < n_train; ++i) {
    const Event& e = ev[order[i]];
    const std::string& uid = log.users().id(e.user);
    train.add(uid, log.artists().id(e.artist), e.weight, e.timestamp,
              e.origin_iteration);
    train_users.insert(uid);
  }
  InteractionLog test;
  for (size_t i = n_train; i < n; ++i) {
    const Event& e = ev[order[i]];
    const std::string& uid = log.users().id(e.user);
    if (!train_users.count(uid)) continue;  // no training ratings -> dropped
    test.add(uid, log.artists().id(e.artist), e.weight, e.timestamp,
             e.origin_iteration);
  }
  return {std::move(train), std::move(test)};
}

// ---------------------------------------------------------------------------
// synthetic corpus

std::pair<InteractionLog, ArtistCatalog> synth_generate(const SynthSpec& spec) {
  if (spec.n_users < 1 || spec.n_artists < 1 || spec.events_per_user < 1)
    throw ValidationError("synth: counts must be >= 1");
  if (spec.female_share < 0 || spec.female_share > 1 ||
      spec.nonbinary_share < 0 || spec.nonbinary_share > 1 ||
      spec.female_share + spec.nonbinary_share > 1.0)
    throw ValidationError("synth: gender shares must lie in [0,1] and sum to <= 1");
  if (spec.male_exposure_boost < 0)
    throw ValidationError("synth: male_exposure_boost must be >= 0");

  const int n = spec.n_artists;
  // nearest integer, ties away from zero
  int n_female = static_cast<int>(std::llround(spec.female_share * n));
  int n_nonbinary = static_cast<int>(std::llround(spec.nonbinary_share * n));
  if (n_female + n_nonbinary > n)
    throw ValidationError("synth: rounded gender counts exceed artist count");

  std::vector<Gender> genders(n, Gender::Male);
  std::fill(genders.begin(), genders.begin() + n_female, Gender::Female);
  std::fill(genders.begin() + n_female,
            genders.begin() + n_female + n_nonbinary, Gender::Nonbinary);

  Rng rng(mix64(spec.seed, 0x73796e7468ULL));  // "synth"
  // Fisher-Yates so gender is independent of the popularity rank
  for (int i = n - 1; i > 0; --i) {
    int j = static_cast<int>(rng.below(i + 1));
    std::swap(genders[i], genders[j]);
  }

  auto artist_id = [&](int i) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "a%06d", i);
    return std::string(buf);
  };
  auto user_id = [&](int i) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "u%06d", i);
    return std::string(buf);
  };

  ArtistCatalog catalog;
  for (int i = 0; i < n; ++i) catalog.add(artist_id(i), genders[i]);

  // popularity ~ (rank+1)^-skew, male mass multiplied by the boost
  std::vector<double> cdf(n);
  double total = 0.0;
  for (int i = 0; i < n; ++i) {
    double w = std::pow(static_cast<double>(i + 1), -spec.popularity_skew);
    if (genders[i] == Gender::Male) w *= spec.male_exposure_boost;
    total += w;
    cdf[i] = total;
  }
  if (total <= 0.0)
    throw ValidationError("synth: degenerate popularity distribution");
  for (double& c : cdf) c /= total;
  cdf[n - 1] = 1.0;

  InteractionLog log;
  for (int u = 0; u < spec.n_users; ++u) log.intern_user(user_id(u));

  const int64_t total_events =
      static_cast<int64_t>(spec.n_users) * spec.events_per_user;
  for (int64_t t = 0; t < total_events; ++t) {
    int u = static_cast<int>(t % spec.n_users);
    double r = rng.uniform();
    int a = static_cast<int>(
        std::lower_bound(cdf.begin(), cdf.end(), r) - cdf.begin());
    log.add(user_id(u), artist_id(a), 1, t, 0);
  }
  return {std::move(log), std::move(catalog)};
}

}  // namespace fairloop
