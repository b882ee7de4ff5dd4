#include "dacdr/data.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>

#include "dacdr/errors.hpp"

namespace dacdr {

namespace {

constexpr const char* kInteractionHeader =
    "user_id\titem_id\tdomain_id\tsignal\ttimestamp";
constexpr const char* kSideHeader = "item_id\tcategory_id";
constexpr std::size_t kMaxBadSamples = 5;

void strip_cr(std::string& line) {
  if (!line.empty() && line.back() == '\r') line.pop_back();
}

std::vector<std::string> split_tabs(const std::string& line) {
  std::vector<std::string> fields;
  std::size_t start = 0;
  while (true) {
    const std::size_t tab = line.find('\t', start);
    if (tab == std::string::npos) {
      fields.push_back(line.substr(start));
      return fields;
    }
    fields.push_back(line.substr(start, tab - start));
    start = tab + 1;
  }
}

bool parse_double(const std::string& s, double& out) {
  if (s.empty()) return false;
  char* end = nullptr;
  out = std::strtod(s.c_str(), &end);
  return end == s.c_str() + s.size() && std::isfinite(out);
}

bool parse_timestamp(const std::string& s, long long& out) {
  if (s.empty()) return false;
  char* end = nullptr;
  out = std::strtoll(s.c_str(), &end, 10);
  return end == s.c_str() + s.size() && out >= 0;
}

void note_bad_row(IngestStats& stats, const std::string& line) {
  ++stats.malformed;
  if (stats.bad_samples.size() < kMaxBadSamples) stats.bad_samples.push_back(line);
}

std::string join_samples(const std::vector<std::string>& samples) {
  std::string out;
  for (const std::string& s : samples) {
    out += "\n  ";
    out += s;
  }
  return out;
}

}  // namespace

int Vocab::get_or_add(const std::string& id) {
  auto it = index_.find(id);
  if (it != index_.end()) return it->second;
  const int idx = static_cast<int>(names_.size());
  index_.emplace(id, idx);
  names_.push_back(id);
  return idx;
}

int Vocab::find(const std::string& id) const {
  auto it = index_.find(id);
  return it == index_.end() ? -1 : it->second;
}

const std::string& Vocab::name(int i) const {
  if (i < 0 || i >= size()) throw ArgumentError("Vocab::name: index out of range");
  return names_[static_cast<std::size_t>(i)];
}

std::uint64_t Vocab::fingerprint() const {
  std::uint64_t h = 1469598103934665603ULL;  // FNV-1a, entry-order sensitive
  for (const std::string& n : names_) {
    for (unsigned char c : n) {
      h ^= c;
      h *= 1099511628211ULL;
    }
    h ^= 0xFFu;
    h *= 1099511628211ULL;
  }
  return h;
}

TableSizes Dataset::table_sizes() const {
  TableSizes ts;
  ts.users = users.size();
  ts.items_src = items_src.size();
  ts.items_tgt = items_tgt.size();
  ts.categories = categories.size();
  ts.domains = 1;
  return ts;
}

Dataset load_interactions(const std::string& path, bool rating_mode,
                          const std::string& source_domain,
                          const std::string& target_domain) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IngestError("cannot open interaction file: " + path);

  Dataset ds;
  ds.rating_mode = rating_mode;

  std::string line;
  if (!std::getline(in, line)) return ds;  // zero-byte file: empty dataset
  strip_cr(line);
  if (line != kInteractionHeader)
    throw IngestError("unexpected interaction header in " + path + ": '" + line + "'");

  while (std::getline(in, line)) {
    strip_cr(line);
    if (line.empty()) continue;
    ++ds.stats.rows;

    const std::vector<std::string> f = split_tabs(line);
    if (f.size() != 5) {
      note_bad_row(ds.stats, line);
      continue;
    }
    const std::string& domain = f[2];
    const bool to_src = domain == source_domain;
    if (!to_src && domain != target_domain)
      throw IngestError("unknown domain id '" + domain + "' in " + path);

    double signal = 0.0;
    long long ts = 0;
    bool ok = parse_double(f[3], signal) && parse_timestamp(f[4], ts) &&
              !f[0].empty() && !f[1].empty();
    if (ok) {
      ok = rating_mode ? (signal >= 1.0 && signal <= 5.0)
                       : (signal == 0.0 || signal == 1.0);
    }
    if (!ok) {
      note_bad_row(ds.stats, line);
      continue;
    }

    Interaction ev;
    ev.user = ds.users.get_or_add(f[0]);
    ev.item = to_src ? ds.items_src.get_or_add(f[1]) : ds.items_tgt.get_or_add(f[1]);
    ev.signal = signal;
    ev.ts = ts;
    (to_src ? ds.src : ds.tgt).push_back(ev);
  }

  if (ds.stats.malformed * 100 > ds.stats.rows)
    throw IngestError("more than 1% malformed rows in " + path + " (" +
                      std::to_string(ds.stats.malformed) + " of " +
                      std::to_string(ds.stats.rows) +
                      "); samples:" + join_samples(ds.stats.bad_samples));

  ds.item_category.assign(static_cast<std::size_t>(ds.items_src.size()), -1);
  ds.user_src_events.assign(static_cast<std::size_t>(ds.users.size()), {});
  for (std::size_t i = 0; i < ds.src.size(); ++i)
    ds.user_src_events[static_cast<std::size_t>(ds.src[i].user)].push_back(
        static_cast<int>(i));
  for (std::vector<int>& events : ds.user_src_events)
    std::stable_sort(events.begin(), events.end(), [&ds](int a, int b) {
      return ds.src[static_cast<std::size_t>(a)].ts <
             ds.src[static_cast<std::size_t>(b)].ts;
    });
  return ds;
}

void load_side_info(Dataset& ds, const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IngestError("cannot open side-info file: " + path);

  std::string line;
  if (!std::getline(in, line)) return;
  strip_cr(line);
  if (line != kSideHeader)
    throw IngestError("unexpected side-info header in " + path + ": '" + line + "'");

  std::size_t rows = 0, malformed = 0;
  std::vector<std::string> bad;
  while (std::getline(in, line)) {
    strip_cr(line);
    if (line.empty()) continue;
    ++rows;
    const std::vector<std::string> f = split_tabs(line);
    if (f.size() != 2 || f[0].empty() || f[1].empty()) {
      ++malformed;
      if (bad.size() < kMaxBadSamples) bad.push_back(line);
      continue;
    }
    const int item = ds.items_src.find(f[0]);
    if (item < 0) {
      ++ds.stats.unmatched_side;
      continue;
    }
    if (ds.item_category[static_cast<std::size_t>(item)] >= 0) {
      ++ds.stats.duplicate_side;  // first mapping wins
      continue;
    }
    ds.item_category[static_cast<std::size_t>(item)] = ds.categories.get_or_add(f[1]);
  }
  ds.stats.rows += rows;
  ds.stats.malformed += malformed;
  if (malformed * 100 > rows)
    throw IngestError("more than 1% malformed rows in " + path + " (" +
                      std::to_string(malformed) + " of " + std::to_string(rows) +
                      "); samples:" + join_samples(bad));
}

UserContext build_context(const Dataset& ds, int user, long long cutoff_ts,
                          int max_len, bool causal) {
  if (max_len <= 0) throw ArgumentError("build_context: max_len must be positive");
  UserContext ctx;
  ctx.cutoff = cutoff_ts;

  if (user >= 0 && user < static_cast<int>(ds.user_src_events.size())) {
    for (int idx : ds.user_src_events[static_cast<std::size_t>(user)]) {
      const Interaction& ev = ds.src[static_cast<std::size_t>(idx)];
      if (causal && ev.ts >= cutoff_ts) break;  // events are time-ascending
      const bool positive =
          ds.rating_mode ? (ev.signal >= 4.0) : (ev.signal == 1.0);
      if (!positive) continue;
      ctx.behavior.push_back(ev.item);
      const int cat = ds.item_category[static_cast<std::size_t>(ev.item)];
      ctx.side.push_back(cat < 0 ? ds.pad_category() : cat);
    }
  }
  if (static_cast<int>(ctx.behavior.size()) > max_len) {
    const std::size_t drop = ctx.behavior.size() - static_cast<std::size_t>(max_len);
    ctx.behavior.erase(ctx.behavior.begin(),
                       ctx.behavior.begin() + static_cast<std::ptrdiff_t>(drop));
    ctx.side.erase(ctx.side.begin(),
                   ctx.side.begin() + static_cast<std::ptrdiff_t>(drop));
  }
  if (ctx.behavior.empty()) {
    ctx.behavior.push_back(ds.pad_item());
    ctx.side.push_back(ds.pad_category());
  }
  return ctx;
}

ColdStartSplit cold_start_split(const Dataset& ds, double beta, std::uint64_t seed) {
  if (!(beta > 0.0 && beta < 1.0))
    throw ArgumentError("cold_start_split: beta must lie in (0, 1)");

  std::vector<char> has_src(static_cast<std::size_t>(ds.users.size()), 0);
  std::vector<char> has_tgt(has_src.size(), 0);
  for (const Interaction& ev : ds.src) has_src[static_cast<std::size_t>(ev.user)] = 1;
  for (const Interaction& ev : ds.tgt) has_tgt[static_cast<std::size_t>(ev.user)] = 1;

  std::vector<int> overlap;
  for (int u = 0; u < ds.users.size(); ++u)
    if (has_src[static_cast<std::size_t>(u)] && has_tgt[static_cast<std::size_t>(u)])
      overlap.push_back(u);
  if (overlap.empty())
    throw ProtocolError(
        "cold-start split requires at least one user active in both domains");

  Rng rng(seed);
  rng.shuffle(overlap);
  const std::size_t n_test = static_cast<std::size_t>(
      std::floor(beta * static_cast<double>(overlap.size()) + 0.5));

  ColdStartSplit split;
  split.beta = beta;
  split.seed = seed;
  split.test_users.assign(overlap.begin(),
                          overlap.begin() + static_cast<std::ptrdiff_t>(n_test));
  split.train_users.assign(overlap.begin() + static_cast<std::ptrdiff_t>(n_test),
                           overlap.end());
  std::sort(split.test_users.begin(), split.test_users.end());
  std::sort(split.train_users.begin(), split.train_users.end());
  return split;
}

std::vector<SampleInput> make_samples(const Dataset& ds,
                                      const std::vector<int>& test_users,
                                      bool test_side, int max_len, bool causal,
                                      int domain_row) {
  std::vector<char> is_test(static_cast<std::size_t>(ds.users.size()), 0);
  for (int u : test_users) {
    if (u < 0 || u >= ds.users.size())
      throw ArgumentError("make_samples: test user index out of range");
    is_test[static_cast<std::size_t>(u)] = 1;
  }

  std::vector<SampleInput> out;
  for (const Interaction& ev : ds.tgt) {
    if ((is_test[static_cast<std::size_t>(ev.user)] != 0) != test_side) continue;
    UserContext ctx = build_context(ds, ev.user, ev.ts, max_len, causal);
    SampleInput s;
    s.behavior = std::move(ctx.behavior);
    s.side = std::move(ctx.side);
    s.user = ev.user;
    s.item = ev.item;
    s.domain = domain_row;
    s.label = ev.signal;
    out.push_back(std::move(s));
  }
  return out;
}

void SynthSpec::validate() const {
  if (n_users < 1 || n_items_src < 1 || n_items_tgt < 1)
    throw ArgumentError("synth: user and item counts must be positive");
  if (!(overlap_frac > 0.0 && overlap_frac <= 1.0))
    throw ArgumentError("synth: overlap_frac must lie in (0, 1]");
  if (latent_dim < 1) throw ArgumentError("synth: latent_dim must be positive");
  if (noise < 0.0) throw ArgumentError("synth: noise must be non-negative");
  if (categories < 1) throw ArgumentError("synth: categories must be positive");
  if (src_events_min < 1 || src_events_max < src_events_min ||
      tgt_events_min < 1 || tgt_events_max < tgt_events_min)
    throw ArgumentError("synth: event count bounds are invalid");
  if (popularity < 0.0) throw ArgumentError("synth: popularity must be non-negative");
  if (gain <= 0.0 || rating_scale <= 0.0)
    throw ArgumentError("synth: gain and rating_scale must be positive");
  if (aspects < 0) throw ArgumentError("synth: aspects must be non-negative");
  if (aspects > 0 && (active_aspects < 1 || active_aspects > aspects))
    throw ArgumentError("synth: active_aspects must lie in [1, aspects]");
  if (!(tgt_warp >= 0.0 && tgt_warp <= 1.0))
    throw ArgumentError("synth: tgt_warp must lie in [0, 1]");
  if (!(rating_curve >= 0.0 && rating_curve <= 1.0))
    throw ArgumentError("synth: rating_curve must lie in [0, 1]");
  if (xor_shift < 0.0) throw ArgumentError("synth: xor_shift must be non-negative");
  if (xor_shift > 0.0 && (aspects < 2 || active_aspects < 2))
    throw ArgumentError(
        "synth: xor_shift needs aspect tastes with at least two active axes");
}

std::vector<double> rotate_pairs(const std::vector<double>& v, double degrees) {
  const double rad = degrees * 3.14159265358979323846 / 180.0;
  const double c = std::cos(rad), s = std::sin(rad);
  std::vector<double> out(v);
  for (std::size_t i = 0; i + 1 < v.size(); i += 2) {
    out[i] = c * v[i] - s * v[i + 1];
    out[i + 1] = s * v[i] + c * v[i + 1];
  }
  return out;
}

namespace {

struct SynthItems {
  std::vector<double> latent;   // n x m
  std::vector<double> cum_pop;  // cumulative exposure weights
};

void fill_popularity(Rng& rng, int n, double popularity, std::vector<double>& cum) {
  cum.resize(static_cast<std::size_t>(n));
  double acc = 0.0;
  for (int i = 0; i < n; ++i) {
    acc += std::exp(popularity * rng.gaussian());
    cum[static_cast<std::size_t>(i)] = acc;
  }
}

SynthItems draw_items(Rng& rng, int n, int m, double popularity) {
  SynthItems it;
  it.latent.resize(static_cast<std::size_t>(n) * static_cast<std::size_t>(m));
  for (double& x : it.latent) x = rng.gaussian();
  fill_popularity(rng, n, popularity, it.cum_pop);
  return it;
}

// Aspect axes are random directions rescaled to norm sqrt(m) so dot products
// keep the same magnitude as in the gaussian regime.
std::vector<double> draw_aspect_axes(Rng& rng, int aspects, int m) {
  std::vector<double> axes(static_cast<std::size_t>(aspects) *
                           static_cast<std::size_t>(m));
  for (int a = 0; a < aspects; ++a) {
    double norm2 = 0.0;
    double* row = &axes[static_cast<std::size_t>(a) * static_cast<std::size_t>(m)];
    for (int d = 0; d < m; ++d) {
      row[d] = rng.gaussian();
      norm2 += row[d] * row[d];
    }
    const double s = std::sqrt(static_cast<double>(m) / std::max(norm2, 1e-12));
    for (int d = 0; d < m; ++d) row[d] *= s;
  }
  return axes;
}

constexpr double kAspectJitter = 0.35;  // item spread around its axis

SynthItems draw_aspect_items(Rng& rng, int n, int m, double popularity,
                             const std::vector<double>& axes, int aspects) {
  SynthItems it;
  it.latent.resize(static_cast<std::size_t>(n) * static_cast<std::size_t>(m));
  for (int i = 0; i < n; ++i) {
    const int a = static_cast<int>(rng.below(static_cast<std::uint64_t>(aspects)));
    const double* axis = &axes[static_cast<std::size_t>(a) * static_cast<std::size_t>(m)];
    double* row = &it.latent[static_cast<std::size_t>(i) * static_cast<std::size_t>(m)];
    for (int d = 0; d < m; ++d) row[d] = axis[d] + kAspectJitter * rng.gaussian();
  }
  fill_popularity(rng, n, popularity, it.cum_pop);
  return it;
}

// A user's taste is a signed mix of `active` distinct axes, scaled so its norm
// stays near sqrt(m) regardless of how many axes are active. Returns the
// product of the signs, which the xor_shift term keys on.
double fill_aspect_user(Rng& rng, const std::vector<double>& axes, int aspects,
                        int active, int m, double* dst) {
  std::vector<int> chosen;
  chosen.reserve(static_cast<std::size_t>(active));
  while (static_cast<int>(chosen.size()) < active) {
    const int a = static_cast<int>(rng.below(static_cast<std::uint64_t>(aspects)));
    if (std::find(chosen.begin(), chosen.end(), a) == chosen.end()) chosen.push_back(a);
  }
  for (int d = 0; d < m; ++d) dst[d] = 0.0;
  const double scale = 1.0 / std::sqrt(static_cast<double>(active));
  double parity = 1.0;
  for (const int a : chosen) {
    const double w = rng.uniform() < 0.5 ? -scale : scale;
    parity *= w < 0.0 ? -1.0 : 1.0;
    const double* axis = &axes[static_cast<std::size_t>(a) * static_cast<std::size_t>(m)];
    for (int d = 0; d < m; ++d) dst[d] += w * axis[d];
  }
  return parity;
}

int sample_item(Rng& rng, const SynthItems& items) {
  const double u = rng.uniform() * items.cum_pop.back();
  const auto it = std::upper_bound(items.cum_pop.begin(), items.cum_pop.end(), u);
  const std::size_t idx = static_cast<std::size_t>(it - items.cum_pop.begin());
  return static_cast<int>(std::min(idx, items.cum_pop.size() - 1));
}

// tanh(x/0.4) has standard deviation 0.836259 under a standard normal input;
// dividing by it keeps the bent response on the same scale as the linear one.
double rating_response(double aff, double curve) {
  if (curve <= 0.0) return aff;
  const double bent = std::tanh(aff / 0.4) / 0.836259;
  return (1.0 - curve) * aff + curve * bent;
}

double affinity(const std::vector<double>& users, int u,
                const std::vector<double>& items, int i, int m) {
  const double* p = &users[static_cast<std::size_t>(u) * static_cast<std::size_t>(m)];
  const double* q = &items[static_cast<std::size_t>(i) * static_cast<std::size_t>(m)];
  double dot = 0.0;
  for (int d = 0; d < m; ++d) dot += p[d] * q[d];
  return dot / std::sqrt(static_cast<double>(m));
}

std::vector<long long> draw_timestamps(Rng& rng, int n, long long lo, long long hi) {
  std::vector<long long> ts(static_cast<std::size_t>(n));
  for (long long& t : ts) t = lo + static_cast<long long>(rng.below(
                                      static_cast<std::uint64_t>(hi - lo)));
  std::sort(ts.begin(), ts.end());
  for (int i = 0; i < n; ++i) ts[static_cast<std::size_t>(i)] += i;  // strict order
  return ts;
}

}  // namespace

SynthSummary synth_generate(const SynthSpec& spec,
                            const std::string& interactions_path,
                            const std::string& side_info_path) {
  spec.validate();
  Rng rng(spec.seed);
  const int m = spec.latent_dim;

  std::vector<double> user_src(static_cast<std::size_t>(spec.n_users) *
                               static_cast<std::size_t>(m));
  std::vector<double> parity(static_cast<std::size_t>(spec.n_users), 1.0);
  SynthItems src_items, tgt_items;
  if (spec.aspects == 0) {
    for (double& x : user_src) x = rng.gaussian();
    src_items = draw_items(rng, spec.n_items_src, m, spec.popularity);
    tgt_items = draw_items(rng, spec.n_items_tgt, m, spec.popularity);
  } else {
    const std::vector<double> axes = draw_aspect_axes(rng, spec.aspects, m);
    for (int u = 0; u < spec.n_users; ++u)
      parity[static_cast<std::size_t>(u)] =
          fill_aspect_user(rng, axes, spec.aspects, spec.active_aspects, m,
                           &user_src[static_cast<std::size_t>(u) * static_cast<std::size_t>(m)]);
    src_items = draw_aspect_items(rng, spec.n_items_src, m, spec.popularity, axes,
                                  spec.aspects);
    tgt_items = draw_aspect_items(rng, spec.n_items_tgt, m, spec.popularity, axes,
                                  spec.aspects);
  }
  std::vector<double> user_tgt(user_src.size());
  for (int u = 0; u < spec.n_users; ++u) {
    const std::size_t off = static_cast<std::size_t>(u) * static_cast<std::size_t>(m);
    std::vector<double> p(user_src.begin() + static_cast<std::ptrdiff_t>(off),
                          user_src.begin() + static_cast<std::ptrdiff_t>(off + m));
    if (spec.tgt_warp > 0.0) {
      // Blend toward x^3 / sqrt(15), the unit-variance cubic of a standard
      // normal, so the warp bends the correspondence without inflating it.
      for (double& x : p)
        x = (1.0 - spec.tgt_warp) * x + spec.tgt_warp * x * x * x / std::sqrt(15.0);
    }
    const std::vector<double> t = rotate_pairs(p, spec.domain_shift_deg);
    std::copy(t.begin(), t.end(), user_tgt.begin() + static_cast<std::ptrdiff_t>(off));
  }

  // Category prototypes; each source item belongs to its nearest prototype.
  std::vector<double> protos(static_cast<std::size_t>(spec.categories) *
                             static_cast<std::size_t>(m));
  for (double& x : protos) x = rng.gaussian();
  std::vector<int> item_cat(static_cast<std::size_t>(spec.n_items_src), 0);
  for (int i = 0; i < spec.n_items_src; ++i) {
    int best = 0;
    double best_dot = -1e300;
    for (int c = 0; c < spec.categories; ++c) {
      const double d = affinity(protos, c, src_items.latent, i, m);
      if (d > best_dot) {
        best_dot = d;
        best = c;
      }
    }
    item_cat[static_cast<std::size_t>(i)] = best;
  }

  const int n_overlap = std::max(
      1, std::min(spec.n_users,
                  static_cast<int>(std::floor(spec.overlap_frac * spec.n_users + 0.5))));

  SynthSummary sum;
  sum.overlapping_users = n_overlap;
  double expected_pos = 0.0;
  std::size_t labeled = 0, positives = 0;

  std::string buf = kInteractionHeader;
  buf += '\n';
  char num[64];

  for (int u = 0; u < spec.n_users; ++u) {
    const bool in_src = u < n_overlap || (u - n_overlap) % 2 == 0;
    const bool in_tgt = u < n_overlap || (u - n_overlap) % 2 == 1;

    if (in_src) {
      const int n = rng.range_int(spec.src_events_min, spec.src_events_max);
      const std::vector<long long> ts = draw_timestamps(rng, n, 0, 600000);
      for (int e = 0; e < n; ++e) {
        const int item = sample_item(rng, src_items);
        const double aff = affinity(user_src, u, src_items.latent, item, m);
        const double eps = rng.gaussian();
        buf += 'u';
        buf += std::to_string(u);
        buf += "\ts";
        buf += std::to_string(item);
        buf += "\tsrc\t";
        if (spec.rating_mode) {
          const double r = std::min(
              5.0, std::max(1.0, 3.0 +
                                     spec.rating_scale *
                                         rating_response(aff, spec.rating_curve) +
                                     spec.noise * eps));
          std::snprintf(num, sizeof num, "%.3f", r);
          buf += num;
        } else {
          const double p = 1.0 / (1.0 + std::exp(-(spec.gain * aff + spec.noise * eps)));
          const int y = rng.uniform() < p ? 1 : 0;
          expected_pos += p;
          ++labeled;
          positives += static_cast<std::size_t>(y);
          buf += std::to_string(y);
        }
        buf += '\t';
        buf += std::to_string(ts[static_cast<std::size_t>(e)]);
        buf += '\n';
        ++sum.src_rows;
      }
    }
    if (in_tgt) {
      const int n = rng.range_int(spec.tgt_events_min, spec.tgt_events_max);
      const std::vector<long long> ts = draw_timestamps(rng, n, 300000, 1000000);
      for (int e = 0; e < n; ++e) {
        const int item = sample_item(rng, tgt_items);
        const double aff = affinity(user_tgt, u, tgt_items.latent, item, m) +
                           spec.xor_shift * parity[static_cast<std::size_t>(u)];
        const double eps = rng.gaussian();
        buf += 'u';
        buf += std::to_string(u);
        buf += "\tt";
        buf += std::to_string(item);
        buf += "\ttgt\t";
        if (spec.rating_mode) {
          const double r = std::min(
              5.0, std::max(1.0, 3.0 +
                                     spec.rating_scale *
                                         rating_response(aff, spec.rating_curve) +
                                     spec.noise * eps));
          std::snprintf(num, sizeof num, "%.3f", r);
          buf += num;
        } else {
          const double p = 1.0 / (1.0 + std::exp(-(spec.gain * aff + spec.noise * eps)));
          const int y = rng.uniform() < p ? 1 : 0;
          expected_pos += p;
          ++labeled;
          positives += static_cast<std::size_t>(y);
          buf += std::to_string(y);
        }
        buf += '\t';
        buf += std::to_string(ts[static_cast<std::size_t>(e)]);
        buf += '\n';
        ++sum.tgt_rows;
      }
    }
  }

  {
    std::ofstream out(interactions_path, std::ios::binary | std::ios::trunc);
    if (!out) throw IngestError("cannot write interaction file: " + interactions_path);
    out << buf;
  }
  {
    std::ofstream out(side_info_path, std::ios::binary | std::ios::trunc);
    if (!out) throw IngestError("cannot write side-info file: " + side_info_path);
    std::string side = kSideHeader;
    side += '\n';
    for (int i = 0; i < spec.n_items_src; ++i) {
      side += 's';
      side += std::to_string(i);
      side += "\tc";
      side += std::to_string(item_cat[static_cast<std::size_t>(i)]);
      side += '\n';
    }
    out << side;
  }

  if (labeled > 0) {
    sum.expected_positive_rate = expected_pos / static_cast<double>(labeled);
    sum.positive_rate =
        static_cast<double>(positives) / static_cast<double>(labeled);
  }
  return sum;
}

}  // namespace dacdr
