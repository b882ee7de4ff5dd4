#include "dacdr/model.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numeric>

#include "bin_io.hpp"
#include "dacdr/errors.hpp"

namespace dacdr {

OutputMode parse_output_mode(const std::string& s) {
  if (s == "logit") return OutputMode::logit;
  if (s == "rating") return OutputMode::rating;
  throw ConfigError("unknown output_mode '" + s + "' (logit|rating)");
}

AttentionKind parse_attention_kind(const std::string& s) {
  if (s == "gated") return AttentionKind::gated;
  if (s == "literal") return AttentionKind::literal;
  throw ConfigError("unknown attention_semantics '" + s + "' (gated|literal)");
}

Ablation parse_ablation(const std::string& s) {
  if (s == "full") return Ablation::full;
  if (s == "no_da") return Ablation::no_da;
  if (s == "no_ia") return Ablation::no_ia;
  if (s == "no_da_ia") return Ablation::no_da_ia;
  throw ConfigError("unknown ablation '" + s + "' (full|no_da|no_ia|no_da_ia)");
}

UserTransform parse_user_transform(const std::string& s) {
  if (s == "encoder") return UserTransform::encoder;
  if (s == "bridge") return UserTransform::bridge;
  throw ConfigError("unknown user_transform '" + s + "' (encoder|bridge)");
}

std::string to_string(OutputMode m) {
  return m == OutputMode::logit ? "logit" : "rating";
}
std::string to_string(AttentionKind a) {
  return a == AttentionKind::gated ? "gated" : "literal";
}
std::string to_string(Ablation a) {
  switch (a) {
    case Ablation::full: return "full";
    case Ablation::no_da: return "no_da";
    case Ablation::no_ia: return "no_ia";
    default: return "no_da_ia";
  }
}
std::string to_string(UserTransform u) {
  return u == UserTransform::encoder ? "encoder" : "bridge";
}

void ModelConfig::validate() const {
  if (embed_dim <= 0) throw ConfigError("embed_dim must be positive");
  if (attn_dim <= 0) throw ConfigError("attn_dim must be positive");
  if (max_seq_len <= 0) throw ConfigError("max_seq_len must be positive");
  if (channels < 1 || channels > 2)
    throw ConfigError("channels must be 1 (behavior) or 2 (behavior + side info)");
  for (int w : encoder_hidden)
    if (w <= 0) throw ConfigError("encoder_hidden widths must be positive");
  for (int w : head_hidden)
    if (w <= 0) throw ConfigError("head_hidden widths must be positive");
}

Mlp make_mlp(int in, const std::vector<int>& hidden, int out, Rng& rng) {
  std::vector<int> widths;
  widths.push_back(in);
  widths.insert(widths.end(), hidden.begin(), hidden.end());
  widths.push_back(out);
  Mlp mlp;
  for (std::size_t i = 0; i + 1 < widths.size(); ++i) {
    mlp.weights.push_back(Tensor::xavier(widths[i], widths[i + 1], rng));
    mlp.biases.push_back(Tensor::zeros(1, widths[i + 1]));
  }
  return mlp;
}

Tensor* mlp_forward(Graph& g, Mlp& mlp, Tensor* in) {
  Tensor* h = in;
  for (std::size_t i = 0; i < mlp.weights.size(); ++i) {
    h = g.add(g.matmul(h, &mlp.weights[i]), &mlp.biases[i]);
    if (i + 1 < mlp.weights.size()) h = g.relu(h);
  }
  return h;
}

namespace {

// Stable order that sorts ids ascending; used to make the forward pass
// independent of the caller's sequence order.
std::vector<int> sort_perm(const std::vector<int>& ids) {
  std::vector<int> perm(ids.size());
  std::iota(perm.begin(), perm.end(), 0);
  std::stable_sort(perm.begin(), perm.end(),
                   [&](int a, int b) { return ids[a] < ids[b]; });
  return perm;
}

std::vector<int> apply_perm(const std::vector<int>& ids, const std::vector<int>& perm) {
  std::vector<int> out(ids.size());
  for (std::size_t j = 0; j < perm.size(); ++j) out[j] = ids[perm[j]];
  return out;
}

}  // namespace

Model::Model(const ModelConfig& cfg, const TableSizes& sizes, Rng& rng)
    : cfg_(cfg), sizes_(sizes) {
  cfg_.validate();
  if (sizes.users <= 0) throw ArgumentError("model: needs at least one user");
  if (sizes.items_tgt <= 0) throw ArgumentError("model: needs at least one target item");
  if (sizes.items_src < 0 || sizes.categories < 0)
    throw ArgumentError("model: negative table size");
  if (sizes.domains <= 0) throw ArgumentError("model: needs at least one domain");

  const int k = cfg_.embed_dim, dk = cfg_.attn_dim;
  user_table_src = Tensor::uniform(sizes.users, k, -0.1, 0.1, rng);
  item_table_src = Tensor::uniform(sizes.items_src + 1, k, -0.1, 0.1, rng);
  item_table_tgt = Tensor::uniform(sizes.items_tgt, k, -0.1, 0.1, rng);
  side_table = Tensor::uniform(sizes.categories + 1, k, -0.1, 0.1, rng);
  domain_table = Tensor::uniform(sizes.domains, k, -0.1, 0.1, rng);

  for (auto* steps : {&attn1, &attn2}) {
    steps->resize(cfg_.channels);
    for (auto& blk : *steps) {
      blk.wq = Tensor::xavier(k, dk, rng);
      blk.wk = Tensor::xavier(k, dk, rng);
      blk.wv = Tensor::xavier(k, k, rng);
    }
  }
  encoder = make_mlp((cfg_.channels + 1) * k, cfg_.encoder_hidden, k, rng);
  head = make_mlp((cfg_.channels + 3) * k, cfg_.head_hidden, 1, rng);

  bridge_gen = Tensor::xavier(k, k * k, rng);
  bridge_w1 = Tensor::xavier(k, k, rng);
  bridge_b1 = Tensor::zeros(1, k);
  bridge_w2 = Tensor::xavier(k, k, rng);
  bridge_b2 = Tensor::zeros(1, k);
}

std::vector<ParamGroup> Model::groups() {
  std::vector<ParamGroup> gs;
  gs.push_back({"user_table_src", {&user_table_src}});
  gs.push_back({"item_table_src", {&item_table_src}});
  gs.push_back({"item_table_tgt", {&item_table_tgt}});
  gs.push_back({"side_table", {&side_table}});
  gs.push_back({"domain_table", {&domain_table}});
  ParamGroup attn{"attention", {}};
  for (auto* steps : {&attn1, &attn2})
    for (auto& blk : *steps) {
      attn.tensors.push_back(&blk.wq);
      attn.tensors.push_back(&blk.wk);
      attn.tensors.push_back(&blk.wv);
    }
  gs.push_back(std::move(attn));
  ParamGroup enc{"encoder_mlp", {}};
  for (std::size_t i = 0; i < encoder.weights.size(); ++i) {
    enc.tensors.push_back(&encoder.weights[i]);
    enc.tensors.push_back(&encoder.biases[i]);
  }
  gs.push_back(std::move(enc));
  ParamGroup hd{"head_mlp", {}};
  for (std::size_t i = 0; i < head.weights.size(); ++i) {
    hd.tensors.push_back(&head.weights[i]);
    hd.tensors.push_back(&head.biases[i]);
  }
  gs.push_back(std::move(hd));
  gs.push_back({"bridge",
                {&bridge_gen, &bridge_w1, &bridge_b1, &bridge_w2, &bridge_b2}});
  return gs;
}

std::vector<Tensor*> Model::all_params() {
  std::vector<Tensor*> all;
  for (auto& grp : groups())
    all.insert(all.end(), grp.tensors.begin(), grp.tensors.end());
  return all;
}

std::pair<Tensor*, Tensor*> Model::domain_attention(Graph& g, Tensor* x,
                                                    Tensor* e_d, int channel) {
  if (channel < 0 || channel >= cfg_.channels)
    throw ArgumentError("domain_attention: channel " + std::to_string(channel) +
                        " out of range");
  if (x->rows() == 0) throw ArgumentError("domain_attention: empty sequence");
  if (cfg_.ablation == Ablation::no_da || cfg_.ablation == Ablation::no_da_ia)
    return {x, nullptr};
  AttentionBlock& blk = attn1[channel];
  if (cfg_.attention == AttentionKind::literal) {
    // The one-key form: every output row is the projected domain vector and
    // position weights are degenerate; reported as uniform.
    return {g.repeat_row(g.matmul(e_d, &blk.wv), x->rows()), nullptr};
  }
  Tensor* xq = g.matmul(x, &blk.wq);                              // n x d_k
  Tensor* key = g.matmul(e_d, &blk.wk);                           // 1 x d_k
  Tensor* scores = g.scale(g.matmul(key, g.transpose(xq)),
                           1.0 / std::sqrt(static_cast<double>(cfg_.attn_dim)));
  Tensor* alpha = g.softmax_rows(scores);                         // 1 x n
  Tensor* e1 = g.scale_rows(g.matmul(x, &blk.wv), alpha);         // n x k
  return {e1, alpha};
}

std::pair<Tensor*, Tensor*> Model::item_attention(Graph& g, Tensor* e1,
                                                  Tensor* e_v, int channel) {
  if (channel < 0 || channel >= cfg_.channels)
    throw ArgumentError("item_attention: channel " + std::to_string(channel) +
                        " out of range");
  if (e1->rows() == 0) throw ArgumentError("item_attention: empty sequence");
  AttentionBlock& blk = attn2[channel];
  if (cfg_.ablation == Ablation::no_ia || cfg_.ablation == Ablation::no_da_ia)
    return {g.mean_rows(g.matmul(e1, &blk.wv)), nullptr};
  if (cfg_.attention == AttentionKind::literal)
    return {g.matmul(e_v, &blk.wv), nullptr};
  Tensor* e1q = g.matmul(e1, &blk.wq);                            // n x d_k
  Tensor* key = g.matmul(e_v, &blk.wk);                           // 1 x d_k
  Tensor* scores = g.scale(g.matmul(key, g.transpose(e1q)),
                           1.0 / std::sqrt(static_cast<double>(cfg_.attn_dim)));
  Tensor* beta = g.softmax_rows(scores);                          // 1 x n
  Tensor* e_z = g.matmul(beta, g.matmul(e1, &blk.wv));            // 1 x k
  return {e_z, beta};
}

Tensor* Model::encode_user(Graph& g, const std::vector<Tensor*>& e_z, Tensor* e_d) {
  std::vector<Tensor*> parts = e_z;
  parts.push_back(e_d);
  return mlp_forward(g, encoder, g.concat_cols(parts));
}

Tensor* Model::bridge_user(Graph& g, Tensor* e_u_src, Tensor* e_z_pooled) {
  const int k = cfg_.embed_dim;
  Tensor* h;
  if (e_z_pooled) {
    Tensor* w1 = g.reshape(g.matmul(e_z_pooled, &bridge_gen), k, k);
    h = g.add(g.matmul(e_u_src, w1), &bridge_b1);
  } else {
    h = g.add(g.matmul(e_u_src, &bridge_w1), &bridge_b1);
  }
  return g.add(g.matmul(h, &bridge_w2), &bridge_b2);
}

Tensor* Model::head_score(Graph& g, Tensor* e_u, const std::vector<Tensor*>& e_z,
                          Tensor* e_v, Tensor* e_d) {
  std::vector<Tensor*> parts{e_u};
  parts.insert(parts.end(), e_z.begin(), e_z.end());
  parts.push_back(e_v);
  parts.push_back(e_d);
  return mlp_forward(g, head, g.concat_cols(parts));
}

Tensor* Model::forward(Graph& g, const SampleInput& s, ForwardTrace* trace) {
  if (s.behavior.empty())
    throw ArgumentError("forward: empty behavior sequence (padding id expected)");
  if (cfg_.channels == 2 && s.side.empty())
    throw ArgumentError("forward: empty side sequence (padding id expected)");
  if (static_cast<int>(s.behavior.size()) > cfg_.max_seq_len ||
      static_cast<int>(s.side.size()) > cfg_.max_seq_len)
    throw ArgumentError("forward: sequence exceeds max_seq_len");

  Tensor* e_d = g.lookup(&domain_table, {s.domain});
  Tensor* e_v = g.lookup(&item_table_tgt, {s.item});

  std::vector<Tensor*> ezs;
  std::vector<Tensor*> alpha_nodes(cfg_.channels, nullptr);
  std::vector<Tensor*> beta_nodes(cfg_.channels, nullptr);
  std::vector<std::vector<int>> perms(cfg_.channels);
  std::vector<std::size_t> lens(cfg_.channels);
  for (int c = 0; c < cfg_.channels; ++c) {
    const std::vector<int>& ids = c == 0 ? s.behavior : s.side;
    Tensor* table = c == 0 ? &item_table_src : &side_table;
    perms[c] = sort_perm(ids);
    lens[c] = ids.size();
    Tensor* x = g.lookup(table, apply_perm(ids, perms[c]));
    auto [e1, alpha] = domain_attention(g, x, e_d, c);
    auto [e_z, beta] = item_attention(g, e1, e_v, c);
    alpha_nodes[c] = alpha;
    beta_nodes[c] = beta;
    ezs.push_back(e_z);
  }

  Tensor* e_u;
  if (cfg_.user_transform == UserTransform::encoder) {
    e_u = encode_user(g, ezs, e_d);
  } else {
    Tensor* pooled =
        ezs.size() == 1 ? ezs[0] : g.scale(g.add(ezs[0], ezs[1]), 0.5);
    e_u = bridge_user(g, g.lookup(&user_table_src, {s.user}), pooled);
  }
  Tensor* score = head_score(g, e_u, ezs, e_v, e_d);

  if (trace) {
    trace->channels.assign(cfg_.channels, {});
    for (int c = 0; c < cfg_.channels; ++c) {
      ChannelTrace& ct = trace->channels[c];
      const std::size_t n = lens[c];
      ct.alpha.assign(n, 1.0 / static_cast<double>(n));
      ct.beta.assign(n, 1.0 / static_cast<double>(n));
      // Map weights computed in canonical order back to the caller's order.
      if (alpha_nodes[c])
        for (std::size_t j = 0; j < n; ++j)
          ct.alpha[perms[c][j]] = alpha_nodes[c]->data()[j];
      if (beta_nodes[c])
        for (std::size_t j = 0; j < n; ++j)
          ct.beta[perms[c][j]] = beta_nodes[c]->data()[j];
      ct.e_z = ezs[c]->values();
    }
    trace->user_vec = e_u->values();
    trace->score = score->data()[0];
    trace->y_hat = cfg_.output_mode == OutputMode::logit
                       ? stable_sigmoid(trace->score)
                       : trace->score;
  }
  return score;
}

ForwardTrace Model::forward_sample(const SampleInput& s) {
  Graph g;
  ForwardTrace trace;
  forward(g, s, &trace);
  return trace;
}

void Model::register_new_domain(int n_items_new, Rng& rng) {
  if (n_items_new <= 0)
    throw ArgumentError("register_new_domain: item count must be positive");
  const int k = cfg_.embed_dim;
  Tensor grown(domain_table.rows() + 1, k);
  std::memcpy(grown.data(), domain_table.data(),
              domain_table.size() * sizeof(double));
  for (int j = 0; j < k; ++j)
    grown.at(domain_table.rows(), j) = rng.uniform(-0.1, 0.1);
  domain_table = std::move(grown);
  item_table_tgt = Tensor::uniform(n_items_new, k, -0.1, 0.1, rng);
  sizes_.domains += 1;
  sizes_.items_tgt = n_items_new;
}

namespace {

constexpr char kMagic[8] = {'D', 'A', 'C', 'D', 'R', 'C', 'K', '1'};

using bin::get_string;
using bin::get_u32;
using bin::get_widths;
using bin::put_string;
using bin::put_u32;
using bin::put_widths;

}  // namespace

void Model::save(const std::string& path) const {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw IngestError("checkpoint: cannot write " + path);
  f.write(kMagic, sizeof kMagic);
  put_u32(f, 1);  // version

  put_u32(f, static_cast<std::uint32_t>(cfg_.embed_dim));
  put_u32(f, static_cast<std::uint32_t>(cfg_.attn_dim));
  put_u32(f, static_cast<std::uint32_t>(cfg_.max_seq_len));
  put_u32(f, static_cast<std::uint32_t>(cfg_.channels));
  put_widths(f, cfg_.encoder_hidden);
  put_widths(f, cfg_.head_hidden);
  put_string(f, to_string(cfg_.output_mode));
  put_string(f, to_string(cfg_.attention));
  put_string(f, to_string(cfg_.ablation));
  put_string(f, to_string(cfg_.user_transform));

  put_u32(f, static_cast<std::uint32_t>(sizes_.users));
  put_u32(f, static_cast<std::uint32_t>(sizes_.items_src));
  put_u32(f, static_cast<std::uint32_t>(sizes_.items_tgt));
  put_u32(f, static_cast<std::uint32_t>(sizes_.categories));
  put_u32(f, static_cast<std::uint32_t>(sizes_.domains));

  auto gs = const_cast<Model*>(this)->groups();
  put_u32(f, static_cast<std::uint32_t>(gs.size()));
  for (auto& grp : gs) {
    put_string(f, grp.name);
    put_u32(f, static_cast<std::uint32_t>(grp.tensors.size()));
    for (const Tensor* t : grp.tensors) {
      put_u32(f, static_cast<std::uint32_t>(t->rows()));
      put_u32(f, static_cast<std::uint32_t>(t->cols()));
      f.write(reinterpret_cast<const char*>(t->data()),
              static_cast<std::streamsize>(t->size() * sizeof(double)));
    }
  }
  if (!f) throw IngestError("checkpoint: write failed for " + path);
}

Model Model::load(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IngestError("checkpoint: cannot open " + path);
  char magic[8];
  f.read(magic, sizeof magic);
  if (!f || std::memcmp(magic, kMagic, sizeof magic) != 0)
    throw IngestError("checkpoint: bad magic in " + path);
  if (get_u32(f) != 1) throw IngestError("checkpoint: unsupported version");

  ModelConfig cfg;
  cfg.embed_dim = static_cast<int>(get_u32(f));
  cfg.attn_dim = static_cast<int>(get_u32(f));
  cfg.max_seq_len = static_cast<int>(get_u32(f));
  cfg.channels = static_cast<int>(get_u32(f));
  cfg.encoder_hidden = get_widths(f);
  cfg.head_hidden = get_widths(f);
  cfg.output_mode = parse_output_mode(get_string(f));
  cfg.attention = parse_attention_kind(get_string(f));
  cfg.ablation = parse_ablation(get_string(f));
  cfg.user_transform = parse_user_transform(get_string(f));

  TableSizes sizes;
  sizes.users = static_cast<int>(get_u32(f));
  sizes.items_src = static_cast<int>(get_u32(f));
  sizes.items_tgt = static_cast<int>(get_u32(f));
  sizes.categories = static_cast<int>(get_u32(f));
  sizes.domains = static_cast<int>(get_u32(f));

  Rng scratch(0);
  Model m(cfg, sizes, scratch);
  auto gs = m.groups();
  const std::uint32_t n_groups = get_u32(f);
  if (n_groups != gs.size()) throw IngestError("checkpoint: group count mismatch");
  for (auto& grp : gs) {
    const std::string name = get_string(f);
    if (name != grp.name)
      throw IngestError("checkpoint: expected group " + grp.name + ", found " + name);
    const std::uint32_t n_tensors = get_u32(f);
    if (n_tensors != grp.tensors.size())
      throw IngestError("checkpoint: tensor count mismatch in " + grp.name);
    for (Tensor* t : grp.tensors) {
      const int rows = static_cast<int>(get_u32(f));
      const int cols = static_cast<int>(get_u32(f));
      if (rows != t->rows() || cols != t->cols())
        throw IngestError("checkpoint: shape mismatch in " + grp.name);
      f.read(reinterpret_cast<char*>(t->data()),
             static_cast<std::streamsize>(t->size() * sizeof(double)));
      if (!f) throw IngestError("checkpoint: truncated payload in " + grp.name);
    }
  }
  return m;
}

std::map<std::string, double> gradient_norm_report(Model& m) {
  bool any = false;
  for (Tensor* t : m.all_params())
    if (t->tracks_grad()) any = true;
  if (!any)
    throw StateError("gradient_norm_report: no gradients present; run a backward pass first");
  std::map<std::string, double> norms;
  for (auto& grp : m.groups()) {
    double sq = 0.0;
    for (const Tensor* t : grp.tensors) {
      if (!t->tracks_grad()) continue;
      const double* g = t->grad();
      for (std::size_t i = 0; i < t->size(); ++i) sq += g[i] * g[i];
    }
    norms[grp.name] = std::sqrt(sq);
  }
  return norms;
}

}  // namespace dacdr
