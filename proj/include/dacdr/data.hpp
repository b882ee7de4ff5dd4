#pragma once

#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include "dacdr/model.hpp"
#include "dacdr/rng.hpp"

namespace dacdr {

// Dense 0-based id space built in first-seen order, so reloading the same
// file reproduces the same indices.
class Vocab {
 public:
  int get_or_add(const std::string& id);
  int find(const std::string& id) const;  // -1 when absent
  int size() const { return static_cast<int>(names_.size()); }
  const std::string& name(int i) const;
  std::uint64_t fingerprint() const;  // order-sensitive content hash

 private:
  std::unordered_map<std::string, int> index_;
  std::vector<std::string> names_;
};

struct Interaction {
  int user = 0;
  int item = 0;       // index in the owning domain's vocabulary
  double signal = 0;  // 0/1 label or 1..5 rating
  long long ts = 0;
};

struct IngestStats {
  std::size_t rows = 0;  // data rows seen (valid + malformed)
  std::size_t malformed = 0;
  std::size_t duplicate_side = 0;
  std::size_t unmatched_side = 0;
  std::vector<std::string> bad_samples;
};

struct Dataset {
  bool rating_mode = false;
  Vocab users, items_src, items_tgt, categories;
  std::vector<Interaction> src, tgt;    // file order
  std::vector<int> item_category;       // per source item; -1 when unknown
  std::vector<std::vector<int>> user_src_events;  // per user: src indices, time-ascending
  IngestStats stats;

  int pad_item() const { return items_src.size(); }
  int pad_category() const { return categories.size(); }
  TableSizes table_sizes() const;
};

// Reads the headered tab-separated interaction log. Rows outside the declared
// schema are counted as malformed; more than 1% of them aborts the load.
// A domain id other than the two declared names aborts immediately.
Dataset load_interactions(const std::string& path, bool rating_mode,
                          const std::string& source_domain = "src",
                          const std::string& target_domain = "tgt");

// Attaches item -> category mappings to an already loaded dataset. First
// mapping wins on duplicates; entries for unknown items are skipped.
void load_side_info(Dataset& ds, const std::string& path);

struct UserContext {
  std::vector<int> behavior;  // source item ids; padding id when empty
  std::vector<int> side;      // aligned category ids
  long long cutoff = 0;
};

// The user's positively-signalled source events before cutoff_ts (strict,
// when causal), most recent max_len kept, in time order.
UserContext build_context(const Dataset& ds, int user, long long cutoff_ts,
                          int max_len, bool causal);

struct ColdStartSplit {
  double beta = 0.5;
  std::uint64_t seed = 0;
  std::vector<int> test_users;   // ascending
  std::vector<int> train_users;  // ascending; the remaining overlapping users
};

// Seeded partition of overlapping users; round(beta * N) of them become cold
// test users, whose every target interaction is held out.
ColdStartSplit cold_start_split(const Dataset& ds, double beta, std::uint64_t seed);

// One model input per target interaction on the requested side of the split.
// With causal set, each sample's context is cut at its own timestamp.
// domain_row is the embedding row samples point at (a freshly registered
// domain uses the appended row).
std::vector<SampleInput> make_samples(const Dataset& ds,
                                      const std::vector<int>& test_users,
                                      bool test_side, int max_len, bool causal,
                                      int domain_row = 0);

struct SynthSpec {
  int n_users = 1000;
  int n_items_src = 800;
  int n_items_tgt = 400;
  double overlap_frac = 0.8;
  int latent_dim = 8;
  double domain_shift_deg = 0.0;  // rotation between source and target tastes
  double noise = 0.3;
  std::uint64_t seed = 1;
  bool rating_mode = false;
  int categories = 12;
  int src_events_min = 10, src_events_max = 30;
  int tgt_events_min = 4, tgt_events_max = 12;
  double popularity = 0.7;    // exposure skew
  double gain = 3.5;          // label sharpness (logit mode)
  double rating_scale = 1.8;  // rating slope (rating mode)
  // Taste structure. With aspects == 0 every user is a smooth gaussian taste
  // vector and all of a user's history is equally informative about any item.
  // With aspects > 0 items cluster around `aspects` latent axes and each user
  // cares about `active_aspects` of them (random signs); an item then only
  // tells us about the axis it sits on, so history entries differ in how much
  // they matter for a given candidate.
  int aspects = 0;
  int active_aspects = 2;
  // Source-to-target taste correspondence. Zero keeps the pure rotation by
  // shift_deg; positive values blend in a coordinate-wise cubic before the
  // rotation, so the map between the two taste spaces is no longer a linear
  // function of the source taste.
  double tgt_warp = 0.0;
  // Rating response shape (rating mode only). Zero keeps ratings linear in
  // the user-item affinity; positive values blend toward a saturating curve,
  // so scores pile up near the extremes the way love-it/hate-it ratings do
  // and no bilinear model can stay calibrated across the whole range.
  double rating_curve = 0.0;
  // Scenario-specific taste interplay (aspect mode only). Adds the product of
  // the user's aspect signs, scaled by this amount, to every target-domain
  // affinity. The shift never appears in the source stream, so no linear
  // function of a user's source taste can anticipate it; it has to be read
  // off the combination of what the user liked.
  double xor_shift = 0.0;

  void validate() const;  // throws ArgumentError
};

struct SynthSummary {
  std::size_t src_rows = 0, tgt_rows = 0;
  int overlapping_users = 0;
  double expected_positive_rate = 0.0;  // mean Bernoulli parameter (logit mode)
  double positive_rate = 0.0;           // realized fraction of 1-labels
};

// Rotation applied pairwise to coordinates (0,1), (2,3), ...; an odd final
// coordinate is left unchanged. Exposed for direct testing.
std::vector<double> rotate_pairs(const std::vector<double>& v, double degrees);

SynthSummary synth_generate(const SynthSpec& spec,
                            const std::string& interactions_path,
                            const std::string& side_info_path);

}  // namespace dacdr
