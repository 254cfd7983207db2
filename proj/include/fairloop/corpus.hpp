#pragma once

#include <cstdint>
#include <string>
#include <utility>

#include "fairloop/types.hpp"

namespace fairloop {

struct TsvFormat {
  char delimiter = '\t';
};

/// Read a gender TSV (header `artist_id<TAB>gender`). Duplicate rows with
/// identical labels are idempotent; conflicting labels are an error.
ArtistCatalog ingest_genders(const std::string& path, TsvFormat fmt = {});

/// Read an interactions TSV (header `user_id<TAB>artist_id<TAB>count` with an
/// optional trailing `timestamp` column). Rows that repeat the same
/// (user, artist, timestamp) are aggregated by weight sum. Every artist must
/// be present in the catalog.
InteractionLog ingest_interactions(const std::string& path,
                                   const ArtistCatalog& catalog,
                                   TsvFormat fmt = {});

void write_interactions(const InteractionLog& log, const std::string& path,
                        TsvFormat fmt = {});
void write_genders(const ArtistCatalog& catalog, const std::string& path,
                   TsvFormat fmt = {});

/// Maximal k-core of the user-artist bipartite graph: iteratively removes
/// users with fewer than k distinct artists and artists with fewer than k
/// distinct users. Degrees count distinct partners, not event weights.
InteractionLog k_core_filter(const InteractionLog& log, int k);

/// Split events at a global cutoff so train holds the earliest
/// ceil(train_fraction * |events|) events under the ordering
/// (timestamp, user id, artist id). Test users with no training events are
/// dropped. All events must carry timestamps.
std::pair<InteractionLog, InteractionLog> time_split(const InteractionLog& log,
                                                     double train_fraction);

/// Parameters for the synthetic corpus generator. Artist popularity follows
/// a power law with exponent `popularity_skew`; male artists' sampling
/// probability is multiplied by `male_exposure_boost` and renormalized.
/// Gender counts are the share rounded to nearest (ties away from zero).
struct SynthSpec {
  int n_users = 500;
  int n_artists = 2000;
  double female_share = 0.21675;
  double nonbinary_share = 0.001;
  double popularity_skew = 1.0;
  int events_per_user = 80;
  double male_exposure_boost = 1.5;
  uint64_t seed = 42;
};

/// Deterministic synthetic corpus: same spec, same corpus. Event timestamps
/// are a global counter with users visited round-robin, so time splits keep
/// every user on both sides.
std::pair<InteractionLog, ArtistCatalog> synth_generate(const SynthSpec& spec);

}  // namespace fairloop
