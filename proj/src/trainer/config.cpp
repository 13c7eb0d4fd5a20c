// Copyright 2026 The guru Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "guru/trainer/config.hpp"

#include "guru/util/error.hpp"
#include "guru/util/hash.hpp"
#include "guru/util/json_reader.hpp"

namespace guru::trainer {

Variant parse_variant(const std::string& s) {
  if (s == "SeqRec") return Variant::SeqRec;
  if (s == "AutoRec") return Variant::AutoRec;
  if (s == "RecGURU") return Variant::RecGURU;
  throw ConfigError("unknown variant '" + s + "' (expected SeqRec, AutoRec or RecGURU)");
}

const char* variant_name(Variant v) {
  switch (v) {
    case Variant::SeqRec: return "SeqRec";
    case Variant::AutoRec: return "AutoRec";
    case Variant::RecGURU: return "RecGURU";
  }
  return "?";
}

namespace {

void positive(int v, const char* name) {
  if (v <= 0) throw ConfigError(std::string(name) + ": must be positive");
}

void nonnegative(double v, const char* name) {
  if (!(v >= 0.0)) throw ConfigError(std::string(name) + ": must be nonnegative");
}

void check_adam(const nn::AdamConfig& a, const std::string& name) {
  if (!(a.lr > 0.0)) throw ConfigError(name + ".lr: must be positive");
  if (!(a.beta1 >= 0.0 && a.beta1 < 1.0)) throw ConfigError(name + ".beta1: must be in [0, 1)");
  if (!(a.beta2 >= 0.0 && a.beta2 < 1.0)) throw ConfigError(name + ".beta2: must be in [0, 1)");
  if (!(a.eps > 0.0)) throw ConfigError(name + ".eps: must be positive");
}

nlohmann::json adam_json(const nn::AdamConfig& a) {
  return {{"lr", a.lr}, {"beta1", a.beta1}, {"beta2", a.beta2}, {"eps", a.eps}};
}

void read_adam(JsonReader r, nn::AdamConfig& a) {
  r.get("lr", a.lr);
  r.get("beta1", a.beta1);
  r.get("beta2", a.beta2);
  r.get("eps", a.eps);
  r.finish();
}

}  // namespace

void TrainConfig::validate() const {
  positive(model.max_len, "network.max_len");
  positive(model.d, "network.d");
  positive(model.layers, "network.layers");
  positive(model.heads, "network.heads");
  positive(model.d_ff, "network.d_ff");
  if (model.d % model.heads != 0) throw ConfigError("network.heads: must divide network.d");
  if (!(model.dropout >= 0.0 && model.dropout < 1.0))
    throw ConfigError("network.dropout: must be in [0, 1)");
  positive(window, "window");
  if (window > model.max_len + 1) throw ConfigError("window: must not exceed network.max_len + 1");
  positive(n_sampled, "n_sampled");
  positive(n_bpr_neg, "n_bpr_neg");
  positive(batch_size, "batch_size");
  positive(critic_hidden, "critic_hidden");
  adversary.validate();
  nonnegative(w_rec, "weights.rec");
  nonnegative(w_adv, "weights.adv");
  nonnegative(w_l2, "weights.l2");
  if (pretrain_epochs < 0) throw ConfigError("pretrain.epochs: must be nonnegative");
  if (adversarial_iters < 0) throw ConfigError("adversarial.iterations: must be nonnegative");
  if (finetune_epochs < 0) throw ConfigError("finetune.epochs: must be nonnegative");
  positive(finetune_cuts, "finetune.cuts");
  positive(pretrain_warmup, "pretrain.warmup");
  check_adam(pretrain_adam, "pretrain.adam");
  check_adam(critic_adam, "adversarial.critic_adam");
  check_adam(generator_adam, "adversarial.generator_adam");
  check_adam(finetune_adam, "finetune.adam");
  if (checkpoint_every < 0) throw ConfigError("checkpoint_every: must be nonnegative");
  positive(eval.n_neg, "eval.n_neg");
  if (eval.ks.empty()) throw ConfigError("eval.ks: must not be empty");
  for (int k : eval.ks) positive(k, "eval.ks");
  if (finetune_domains.empty()) throw ConfigError("finetune.domains: must not be empty");
  if (finetune_domains.size() == 2 && finetune_domains[0] == finetune_domains[1])
    throw ConfigError("finetune.domains: duplicate domain");
  if (finetune_domains.size() > 2) throw ConfigError("finetune.domains: at most two domains");
}

nlohmann::json to_json(const TrainConfig& c) {
  nlohmann::json domains = nlohmann::json::array();
  for (auto d : c.finetune_domains) domains.push_back(corpus::domain_name(d));
  return {
      {"network",
       {{"max_len", c.model.max_len},
        {"d", c.model.d},
        {"layers", c.model.layers},
        {"heads", c.model.heads},
        {"d_ff", c.model.d_ff},
        {"dropout", c.model.dropout}}},
      {"window", c.window},
      {"n_sampled", c.n_sampled},
      {"n_bpr_neg", c.n_bpr_neg},
      {"batch_size", c.batch_size},
      {"critic_hidden", c.critic_hidden},
      {"adversary",
       {{"mode", adversary::adversary_mode_name(c.adversary.mode)},
        {"lambda_gp", c.adversary.lambda_gp},
        {"critic_iters", c.adversary.critic_iters}}},
      {"weights", {{"rec", c.w_rec}, {"adv", c.w_adv}, {"l2", c.w_l2}}},
      {"pretrain",
       {{"epochs", c.pretrain_epochs}, {"warmup", c.pretrain_warmup}, {"adam", adam_json(c.pretrain_adam)}}},
      {"adversarial",
       {{"iterations", c.adversarial_iters},
        {"critic_adam", adam_json(c.critic_adam)},
        {"generator_adam", adam_json(c.generator_adam)}}},
      {"finetune",
       {{"epochs", c.finetune_epochs},
        {"cuts", c.finetune_cuts},
        {"unfreeze", c.unfreeze},
        {"domains", domains},
        {"adam", adam_json(c.finetune_adam)}}},
      {"checkpoint_every", c.checkpoint_every},
      {"eval", {{"n_neg", c.eval.n_neg}, {"ks", c.eval.ks}, {"seed", c.eval.seed}}},
      {"variant", variant_name(c.variant)},
      {"seed", c.seed},
  };
}

TrainConfig train_config_from_json(const nlohmann::json& j) {
  TrainConfig c;
  JsonReader r(j, "");
  {
    auto m = r.child("network");
    m.get("max_len", c.model.max_len);
    m.get("d", c.model.d);
    m.get("layers", c.model.layers);
    m.get("heads", c.model.heads);
    m.get("d_ff", c.model.d_ff);
    m.get("dropout", c.model.dropout);
    m.finish();
  }
  r.get("window", c.window);
  r.get("n_sampled", c.n_sampled);
  r.get("n_bpr_neg", c.n_bpr_neg);
  r.get("batch_size", c.batch_size);
  r.get("critic_hidden", c.critic_hidden);
  {
    auto a = r.child("adversary");
    std::string mode = adversary::adversary_mode_name(c.adversary.mode);
    a.get("mode", mode);
    try {
      c.adversary.mode = adversary::parse_adversary_mode(mode);
    } catch (const ConfigError& e) {
      throw ConfigError(a.field("mode") + ": " + e.what());
    }
    a.get("lambda_gp", c.adversary.lambda_gp);
    a.get("critic_iters", c.adversary.critic_iters);
    a.finish();
  }
  {
    auto w = r.child("weights");
    w.get("rec", c.w_rec);
    w.get("adv", c.w_adv);
    w.get("l2", c.w_l2);
    w.finish();
  }
  {
    auto p = r.child("pretrain");
    p.get("epochs", c.pretrain_epochs);
    p.get("warmup", c.pretrain_warmup);
    if (p.has("adam")) read_adam(p.child("adam"), c.pretrain_adam);
    p.finish();
  }
  {
    auto a = r.child("adversarial");
    a.get("iterations", c.adversarial_iters);
    if (a.has("critic_adam")) read_adam(a.child("critic_adam"), c.critic_adam);
    if (a.has("generator_adam")) read_adam(a.child("generator_adam"), c.generator_adam);
    a.finish();
  }
  {
    auto f = r.child("finetune");
    f.get("epochs", c.finetune_epochs);
    f.get("cuts", c.finetune_cuts);
    f.get("unfreeze", c.unfreeze);
    if (f.has("domains")) {
      std::vector<std::string> names;
      f.get("domains", names);
      c.finetune_domains.clear();
      for (const auto& n : names) {
        try {
          c.finetune_domains.push_back(corpus::parse_domain(n));
        } catch (const Error& e) {
          throw ConfigError(f.field("domains") + ": " + e.what());
        }
      }
    }
    if (f.has("adam")) read_adam(f.child("adam"), c.finetune_adam);
    f.finish();
  }
  r.get("checkpoint_every", c.checkpoint_every);
  {
    auto e = r.child("eval");
    e.get("n_neg", c.eval.n_neg);
    e.get("ks", c.eval.ks);
    e.get("seed", c.eval.seed);
    e.finish();
  }
  if (r.has("variant")) {
    std::string v;
    r.get("variant", v);
    try {
      c.variant = parse_variant(v);
    } catch (const ConfigError& e) {
      throw ConfigError(std::string("variant: ") + e.what());
    }
  }
  r.get("seed", c.seed);
  r.finish();
  c.validate();
  return c;
}

std::string config_hash(const TrainConfig& cfg) { return hash_hex(to_json(cfg).dump()); }

}  // namespace guru::trainer
