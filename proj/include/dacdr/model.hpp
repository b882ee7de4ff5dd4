#pragma once

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "dacdr/graph.hpp"
#include "dacdr/rng.hpp"
#include "dacdr/tensor.hpp"

namespace dacdr {

enum class OutputMode { logit, rating };
// `gated` scores every sequence position against the domain/item vector and
// softmaxes over positions. `literal` keeps the degenerate one-key form
// (output independent of the sequence) as a diagnostic point of comparison.
enum class AttentionKind { gated, literal };
enum class Ablation { full, no_da, no_ia, no_da_ia };
// How the target user vector is produced: the domain encoder over the
// attended sequences, or a bridge mapping of the source user embedding whose
// first layer is generated from the attention output.
enum class UserTransform { encoder, bridge };

OutputMode parse_output_mode(const std::string& s);
AttentionKind parse_attention_kind(const std::string& s);
Ablation parse_ablation(const std::string& s);
UserTransform parse_user_transform(const std::string& s);
std::string to_string(OutputMode m);
std::string to_string(AttentionKind a);
std::string to_string(Ablation a);
std::string to_string(UserTransform u);

struct ModelConfig {
  int embed_dim = 16;   // k
  int attn_dim = 16;    // d_k
  int max_seq_len = 50;
  int channels = 2;     // behavior + side-info
  std::vector<int> encoder_hidden{64, 32};
  std::vector<int> head_hidden{64, 32};
  OutputMode output_mode = OutputMode::logit;
  AttentionKind attention = AttentionKind::gated;
  Ablation ablation = Ablation::full;
  UserTransform user_transform = UserTransform::encoder;

  void validate() const;  // throws ConfigError
};

// Row counts for the embedding tables. Padding rows for the sequence tables
// are added on top of these counts by the model itself.
struct TableSizes {
  int users = 0;
  int items_src = 0;
  int items_tgt = 0;
  int categories = 0;
  int domains = 1;
};

struct AttentionBlock {
  Tensor wq;  // k x d_k
  Tensor wk;  // k x d_k
  Tensor wv;  // k x k
};

struct Mlp {
  std::vector<Tensor> weights;
  std::vector<Tensor> biases;  // 1 x width each
};

// Xavier-initialized fully connected stack in -> hidden... -> out.
Mlp make_mlp(int in, const std::vector<int>& hidden, int out, Rng& rng);
// ReLU between layers, linear output.
Tensor* mlp_forward(Graph& g, Mlp& mlp, Tensor* in);

struct ParamGroup {
  std::string name;
  std::vector<Tensor*> tensors;
};

// One target interaction with its causally filtered source-side context.
// Sequences always have at least one entry (padding id when history is empty).
struct SampleInput {
  std::vector<int> behavior;  // source item ids
  std::vector<int> side;      // category ids, aligned with behavior
  int user = 0;
  int item = 0;    // target item id
  int domain = 0;  // target domain row
  double label = 0.0;
};

struct ChannelTrace {
  std::vector<double> alpha;  // step-1 weights, caller order
  std::vector<double> beta;   // step-2 weights, caller order
  std::vector<double> e_z;    // pooled channel output, length k
};

struct ForwardTrace {
  std::vector<ChannelTrace> channels;
  std::vector<double> user_vec;  // transformed user embedding, length k
  double score = 0.0;  // raw head output (logit in logit mode, rating otherwise)
  double y_hat = 0.0;  // sigmoid(score) in logit mode, = score in rating mode
  std::map<std::string, double> grad_norms;  // filled by diagnostics only
};

class Model {
 public:
  Model(const ModelConfig& cfg, const TableSizes& sizes, Rng& rng);

  const ModelConfig& config() const { return cfg_; }
  const TableSizes& sizes() const { return sizes_; }
  int pad_item() const { return sizes_.items_src; }
  int pad_category() const { return sizes_.categories; }

  // Named parameter groups in a stable order; the unit of freezing,
  // optimization and checkpointing.
  std::vector<ParamGroup> groups();
  std::vector<Tensor*> all_params();

  // Step 1: scores each sequence row against the domain embedding. Returns
  // the weighted value projections and the weight node (null when the step is
  // bypassed and weights are uniform by definition).
  std::pair<Tensor*, Tensor*> domain_attention(Graph& g, Tensor* x, Tensor* e_d,
                                               int channel);
  // Step 2: scores the step-1 rows against the target item embedding and
  // pools them into one row.
  std::pair<Tensor*, Tensor*> item_attention(Graph& g, Tensor* e1, Tensor* e_v,
                                             int channel);
  Tensor* encode_user(Graph& g, const std::vector<Tensor*>& e_z, Tensor* e_d);
  // e_z_pooled null selects the fixed-weight bridge; otherwise the first
  // layer's weight matrix is generated from the pooled attention output.
  Tensor* bridge_user(Graph& g, Tensor* e_u_src, Tensor* e_z_pooled);
  Tensor* head_score(Graph& g, Tensor* e_u, const std::vector<Tensor*>& e_z,
                     Tensor* e_v, Tensor* e_d);

  // Full per-sample network. Returns the raw score node; callers attach the
  // loss. Sequences are canonicalized internally so that any permutation of
  // the input positions produces a bit-identical score; trace weights are
  // reported in the caller's order.
  Tensor* forward(Graph& g, const SampleInput& s, ForwardTrace* trace = nullptr);
  ForwardTrace forward_sample(const SampleInput& s);

  // Appends a domain embedding row and swaps in a fresh target item table.
  void register_new_domain(int n_items_new, Rng& rng);

  void save(const std::string& path) const;
  static Model load(const std::string& path);

  Tensor user_table_src;  // users x k
  Tensor item_table_src;  // (items_src + 1) x k, last row = padding
  Tensor item_table_tgt;  // items_tgt x k
  Tensor side_table;      // (categories + 1) x k, last row = padding
  Tensor domain_table;    // domains x k
  std::vector<AttentionBlock> attn1, attn2;  // per channel
  Mlp encoder;  // (channels+1)k -> encoder_hidden -> k
  Mlp head;     // (channels+3)k -> head_hidden -> 1
  Tensor bridge_gen;  // k x k*k, generates the first bridge layer
  Tensor bridge_w1;   // k x k, fixed-variant first layer
  Tensor bridge_b1;   // 1 x k
  Tensor bridge_w2;   // k x k
  Tensor bridge_b2;   // 1 x k

 private:
  Model() = default;
  ModelConfig cfg_;
  TableSizes sizes_;
};

// Per-group L2 norms of the accumulated gradients. Throws StateError when no
// parameter carries a gradient buffer (no backward pass has been prepared).
std::map<std::string, double> gradient_norm_report(Model& m);

}  // namespace dacdr
