#include "dacdr/runconfig.hpp"

#include <cctype>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "dacdr/errors.hpp"

namespace dacdr {
namespace {

std::string trim(const std::string& s) {
  std::size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return s.substr(a, b - a);
}

[[noreturn]] void bad_value(const std::string& key, const std::string& value) {
  throw ConfigError("config key '" + key + "': cannot parse value '" + value + "'");
}

int to_int(const std::string& key, const std::string& value) {
  try {
    std::size_t used = 0;
    const int v = std::stoi(value, &used);
    if (used != value.size()) bad_value(key, value);
    return v;
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception&) {
    bad_value(key, value);
  }
}

std::uint64_t to_u64(const std::string& key, const std::string& value) {
  try {
    std::size_t used = 0;
    const unsigned long long v = std::stoull(value, &used);
    if (used != value.size()) bad_value(key, value);
    return static_cast<std::uint64_t>(v);
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception&) {
    bad_value(key, value);
  }
}

double to_double(const std::string& key, const std::string& value) {
  try {
    std::size_t used = 0;
    const double v = std::stod(value, &used);
    if (used != value.size()) bad_value(key, value);
    return v;
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception&) {
    bad_value(key, value);
  }
}

bool to_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1" || value == "yes" || value == "on") return true;
  if (value == "false" || value == "0" || value == "no" || value == "off") return false;
  bad_value(key, value);
}

std::string join_ints(const std::vector<int>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i > 0) out += ',';
    out += std::to_string(v[i]);
  }
  return out;
}

std::string fmt_double(double v) {
  std::ostringstream os;
  os << v;
  return os.str();
}

}  // namespace

std::vector<double> parse_double_list(const std::string& csv) {
  std::vector<double> out;
  std::stringstream ss(csv);
  std::string part;
  while (std::getline(ss, part, ',')) {
    part = trim(part);
    if (part.empty()) throw ConfigError("empty entry in list '" + csv + "'");
    out.push_back(to_double("list", part));
  }
  if (out.empty()) throw ConfigError("empty list");
  return out;
}

std::vector<int> parse_int_list(const std::string& csv) {
  std::vector<int> out;
  for (double v : parse_double_list(csv)) {
    const int i = static_cast<int>(v);
    if (static_cast<double>(i) != v)
      throw ConfigError("expected integers in list '" + csv + "'");
    out.push_back(i);
  }
  return out;
}

void RunConfig::set(const std::string& key, const std::string& raw) {
  const std::string value = trim(raw);
  if (key == "interactions") interactions = value;
  else if (key == "side_info") side_info = value;
  else if (key == "task") task = value;
  else if (key == "loss") loss = value;
  else if (key == "max_seq_len") max_seq_len = to_int(key, value);
  else if (key == "causal") causal = to_bool(key, value);
  else if (key == "beta") beta = to_double(key, value);
  else if (key == "split_seed") split_seed = to_u64(key, value);
  else if (key == "sweep_beta") sweep_beta = value;
  else if (key == "variant") variant = value;
  else if (key == "embed_dim") embed_dim = to_int(key, value);
  else if (key == "attn_dim") attn_dim = to_int(key, value);
  else if (key == "channels") channels = to_int(key, value);
  else if (key == "encoder_hidden") encoder_hidden = parse_int_list(value);
  else if (key == "head_hidden") head_hidden = parse_int_list(value);
  else if (key == "attention") attention = value;
  else if (key == "user_transform") user_transform = value;
  else if (key == "epochs") epochs = to_int(key, value);
  else if (key == "batch_size") batch_size = to_int(key, value);
  else if (key == "lr") lr = to_double(key, value);
  else if (key == "optimizer") optimizer = value;
  else if (key == "seed") seed = to_u64(key, value);
  else if (key == "grad_diag") grad_diag = to_bool(key, value);
  else if (key == "bridge_epochs") bridge_epochs = to_int(key, value);
  else if (key == "checkpoint") checkpoint = value;
  else if (key == "report") report = value;
  else if (key == "base") base = value;
  else if (key == "users") users = to_int(key, value);
  else if (key == "items_src") items_src = to_int(key, value);
  else if (key == "items_tgt") items_tgt = to_int(key, value);
  else if (key == "overlap") overlap = to_double(key, value);
  else if (key == "latent_dim") latent_dim = to_int(key, value);
  else if (key == "shift_deg") shift_deg = to_double(key, value);
  else if (key == "noise") noise = to_double(key, value);
  else if (key == "categories") categories = to_int(key, value);
  else if (key == "src_events_min") src_events_min = to_int(key, value);
  else if (key == "src_events_max") src_events_max = to_int(key, value);
  else if (key == "tgt_events_min") tgt_events_min = to_int(key, value);
  else if (key == "tgt_events_max") tgt_events_max = to_int(key, value);
  else if (key == "popularity") popularity = to_double(key, value);
  else if (key == "gain") gain = to_double(key, value);
  else if (key == "rating_scale") rating_scale = to_double(key, value);
  else if (key == "aspects") aspects = to_int(key, value);
  else if (key == "active_aspects") active_aspects = to_int(key, value);
  else if (key == "tgt_warp") tgt_warp = to_double(key, value);
  else if (key == "rating_curve") rating_curve = to_double(key, value);
  else if (key == "xor_shift") xor_shift = to_double(key, value);
  else if (key == "out_interactions") out_interactions = value;
  else if (key == "out_side") out_side = value;
  else throw ConfigError("unknown config key: '" + key + "'");
}

void RunConfig::load_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot open config file: " + path);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(f, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const std::size_t hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError(path + ":" + std::to_string(lineno) +
                        ": expected 'key = value'");
    set(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
}

std::string RunConfig::effective_loss() const {
  if (!loss.empty()) return loss;
  return task == "rating" ? "mse" : "bce";
}

void RunConfig::validate() const {
  if (task != "logit" && task != "rating")
    throw ConfigError("task must be 'logit' or 'rating', got '" + task + "'");
  if (!loss.empty()) {
    if (loss != "bce" && loss != "mse")
      throw ConfigError("loss must be 'bce' or 'mse', got '" + loss + "'");
    if (task == "logit" && loss != "bce")
      throw ConfigError("task 'logit' requires loss 'bce'");
    if (task == "rating" && loss != "mse")
      throw ConfigError("task 'rating' requires loss 'mse'");
  }
  if (!(beta > 0.0 && beta < 1.0))
    throw ConfigError("beta must lie strictly between 0 and 1");
  if (!sweep_beta.empty())
    for (double b : parse_double_list(sweep_beta))
      if (!(b > 0.0 && b < 1.0))
        throw ConfigError("sweep_beta entries must lie strictly between 0 and 1");
  if (max_seq_len < 1) throw ConfigError("max_seq_len must be positive");
  if (is_baseline()) {
    baseline_config().validate();
  } else {
    model_config().validate();  // also rejects unknown variant strings
    train_config().validate();
  }
}

ModelConfig RunConfig::model_config() const {
  if (is_baseline())
    throw ConfigError("variant '" + variant + "' is a baseline, not an attention model");
  ModelConfig mc;
  mc.embed_dim = embed_dim;
  mc.attn_dim = attn_dim;
  mc.max_seq_len = max_seq_len;
  mc.channels = channels;
  mc.encoder_hidden = encoder_hidden;
  mc.head_hidden = head_hidden;
  mc.output_mode = parse_output_mode(task);
  mc.attention = parse_attention_kind(attention);
  mc.ablation = variant == "dacdr" ? Ablation::full : parse_ablation(variant);
  mc.user_transform = parse_user_transform(user_transform);
  return mc;
}

BaselineConfig RunConfig::baseline_config() const {
  if (!is_baseline())
    throw ConfigError("variant '" + variant + "' is not a baseline");
  BaselineConfig bc;
  bc.name = variant;
  bc.embed_dim = embed_dim;
  bc.hidden = head_hidden;
  bc.output_mode = parse_output_mode(task);
  bc.init_seed = seed;
  bc.train = train_config();
  bc.bridge_epochs = bridge_epochs;
  return bc;
}

TrainConfig RunConfig::train_config() const {
  TrainConfig tc;
  tc.epochs = epochs;
  tc.batch_size = batch_size;
  tc.seed = seed;
  tc.opt.kind = parse_optimizer(optimizer);
  tc.opt.lr = lr;
  tc.grad_diag = grad_diag;
  return tc;
}

SynthSpec RunConfig::synth_spec() const {
  SynthSpec sp;
  sp.n_users = users;
  sp.n_items_src = items_src;
  sp.n_items_tgt = items_tgt;
  sp.overlap_frac = overlap;
  sp.latent_dim = latent_dim;
  sp.domain_shift_deg = shift_deg;
  sp.noise = noise;
  sp.seed = seed;
  sp.rating_mode = rating_mode();
  sp.categories = categories;
  sp.src_events_min = src_events_min;
  sp.src_events_max = src_events_max;
  sp.tgt_events_min = tgt_events_min;
  sp.tgt_events_max = tgt_events_max;
  sp.popularity = popularity;
  sp.gain = gain;
  sp.rating_scale = rating_scale;
  sp.aspects = aspects;
  sp.active_aspects = active_aspects;
  sp.tgt_warp = tgt_warp;
  sp.rating_curve = rating_curve;
  sp.xor_shift = xor_shift;
  return sp;
}

std::map<std::string, std::string> RunConfig::echo() const {
  std::map<std::string, std::string> e;
  e["interactions"] = interactions;
  e["side_info"] = side_info;
  e["task"] = task;
  e["loss"] = effective_loss();
  e["max_seq_len"] = std::to_string(max_seq_len);
  e["causal"] = causal ? "true" : "false";
  e["beta"] = fmt_double(beta);
  e["split_seed"] = std::to_string(split_seed);
  e["sweep_beta"] = sweep_beta;
  e["variant"] = variant;
  e["embed_dim"] = std::to_string(embed_dim);
  e["attn_dim"] = std::to_string(attn_dim);
  e["channels"] = std::to_string(channels);
  e["encoder_hidden"] = join_ints(encoder_hidden);
  e["head_hidden"] = join_ints(head_hidden);
  e["attention"] = attention;
  e["user_transform"] = user_transform;
  e["epochs"] = std::to_string(epochs);
  e["batch_size"] = std::to_string(batch_size);
  e["lr"] = fmt_double(lr);
  e["optimizer"] = optimizer;
  e["seed"] = std::to_string(seed);
  e["grad_diag"] = grad_diag ? "true" : "false";
  e["bridge_epochs"] = std::to_string(bridge_epochs);
  e["checkpoint"] = checkpoint;
  e["report"] = report;
  e["base"] = base;
  e["users"] = std::to_string(users);
  e["items_src"] = std::to_string(items_src);
  e["items_tgt"] = std::to_string(items_tgt);
  e["overlap"] = fmt_double(overlap);
  e["latent_dim"] = std::to_string(latent_dim);
  e["shift_deg"] = fmt_double(shift_deg);
  e["noise"] = fmt_double(noise);
  e["categories"] = std::to_string(categories);
  e["src_events_min"] = std::to_string(src_events_min);
  e["src_events_max"] = std::to_string(src_events_max);
  e["tgt_events_min"] = std::to_string(tgt_events_min);
  e["tgt_events_max"] = std::to_string(tgt_events_max);
  e["popularity"] = fmt_double(popularity);
  e["gain"] = fmt_double(gain);
  e["rating_scale"] = fmt_double(rating_scale);
  e["aspects"] = std::to_string(aspects);
  e["active_aspects"] = std::to_string(active_aspects);
  e["tgt_warp"] = fmt_double(tgt_warp);
  e["rating_curve"] = fmt_double(rating_curve);
  e["xor_shift"] = fmt_double(xor_shift);
  e["out_interactions"] = out_interactions;
  e["out_side"] = out_side;
  return e;
}

}  // namespace dacdr
