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

#include "guru/trainer/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>

#include "guru/util/error.hpp"
#include "guru/util/hash.hpp"

namespace guru::trainer {

using model::Pass;
using model::TokenBatch;
using model::Trainable;
using nn::Matrix;
using nn::Var;

namespace {

std::uint64_t stage_stream(const std::string& name) {
  Fnv1a h;
  h.update(name);
  return h.digest();
}

/// k distinct indices from [0, n) in random order (all of them if k >= n).
std::vector<int> sample_indices(int n, int k, Rng& rng) {
  std::vector<int> idx(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) idx[static_cast<std::size_t>(i)] = i;
  const int take = std::min(n, k);
  for (int i = 0; i < take; ++i) {
    const int j = i + static_cast<int>(rng.below(static_cast<std::uint64_t>(n - i)));
    std::swap(idx[static_cast<std::size_t>(i)], idx[static_cast<std::size_t>(j)]);
  }
  idx.resize(static_cast<std::size_t>(take));
  return idx;
}

void require_finite(double loss, const std::string& what, std::int64_t iteration,
                    const std::vector<int>& users) {
  if (std::isfinite(loss)) return;
  std::string ids;
  for (std::size_t i = 0; i < users.size() && i < 16; ++i) ids += (i ? "," : "") + std::to_string(users[i]);
  if (users.size() > 16) ids += ",...";
  throw NonFiniteError(what + " loss is not finite at iteration " + std::to_string(iteration) +
                       " (batch users " + ids + ")");
}

void append(nn::ParameterList& out, const nn::ParameterList& more) {
  out.insert(out.end(), more.begin(), more.end());
}

std::vector<std::vector<int>> pick(const std::vector<std::vector<int>>& seqs, const std::vector<int>& users) {
  std::vector<std::vector<int>> out;
  out.reserve(users.size());
  for (int u : users) out.push_back(seqs[static_cast<std::size_t>(u)]);
  return out;
}

/// Users whose training prefix has at least `min_len` items.
std::vector<int> users_with(const std::vector<std::vector<int>>& seqs, std::size_t min_len) {
  std::vector<int> out;
  for (std::size_t u = 0; u < seqs.size(); ++u)
    if (seqs[u].size() >= min_len) out.push_back(static_cast<int>(u));
  return out;
}

Var reconstruction_for(const Pass& pass, TrainState& state, Domain d,
                       const std::vector<std::vector<int>>& seqs, model::Encoded* encoded) {
  auto& model = state.model;
  const TokenBatch tb = model::pad_batch(seqs, model.dims().max_len, model.tables(d).num_items);
  const model::Encoded enc = model::encode(pass, model, d, tb, Trainable{});
  if (encoded) *encoded = enc;
  return model::reconstruction_loss(pass, model, d, enc.h, tb, state.config().n_sampled, state.rng,
                                    Trainable{});
}

nn::ParameterList generator_parameters(TrainState& state, const std::vector<Domain>& domains) {
  nn::ParameterList out = state.model.encoder_parameters();
  for (Domain d : domains) {
    append(out, state.model.table_parameters(d));
    append(out, state.model.decoder_parameters(d));
  }
  return out;
}

void periodic(TrainState& state, const CheckpointHook& hook, std::int64_t total) {
  const int every = state.config().checkpoint_every;
  if (hook && every > 0 && state.iteration < total && state.iteration % every == 0) hook(state);
}

}  // namespace

// ---------------------------------------------------------------------------

TrainingData::TrainingData(corpus::CrossDomainDataset dataset, std::string hash)
    : data(std::move(dataset)), data_hash(std::move(hash)) {
  splits[0] = corpus::split_leave_one_out(data.a);
  splits[1] = corpus::split_leave_one_out(data.b);
}

std::vector<std::vector<int>> TrainingData::train_sequences(Domain d) const {
  std::vector<std::vector<int>> out;
  for (const auto& u : split(d).users) out.push_back(u.train);
  return out;
}

// ---------------------------------------------------------------------------

TrainState::TrainState(const TrainConfig& cfg, int num_items_a, int num_items_b)
    : model((cfg.validate(), cfg.model), num_items_a, num_items_b),
      critic(cfg.model.d, cfg.critic_hidden),
      recommenders{cdsrec::Recommender("cdsrec_a", cfg.model, cfg.window),
                   cdsrec::Recommender("cdsrec_b", cfg.model, cfg.window)},
      critic_opt(cfg.critic_adam),
      generator_opt(cfg.generator_adam),
      finetune_opt{nn::Adam(cfg.finetune_adam), nn::Adam(cfg.finetune_adam)},
      cfg_(cfg) {
  nn::LrSchedule schedule;
  schedule.kind = nn::LrSchedule::Kind::inverse_sqrt;
  schedule.factor = cfg.pretrain_adam.lr;
  schedule.model_dim = cfg.model.d;
  schedule.warmup = cfg.pretrain_warmup;
  pretrain_opt = nn::Adam(cfg.pretrain_adam, schedule);

  Rng init = Rng::derive(cfg.seed, 0);
  model.init(init);
  critic.init(init);
  for (auto& r : recommenders) r.init(init);
  rng = Rng::derive(cfg.seed, 1);
}

nn::ParameterList TrainState::all_parameters() {
  nn::ParameterList out = model.parameters();
  append(out, critic.parameters());
  for (auto& r : recommenders) append(out, r.parameters());
  return out;
}

nn::ConstParameterList TrainState::critic_parameters() const {
  auto& c = const_cast<adversary::Critic&>(critic);
  nn::ConstParameterList out;
  for (auto* p : c.parameters()) out.push_back(p);
  return out;
}

void TrainState::begin_phase(const std::string& name, std::uint64_t stream) {
  phase = name;
  iteration = 0;
  phase_complete = false;
  critic_updates = 0;
  generator_updates = 0;
  best.clear();
  best_score = -1.0;
  rng = Rng::derive(cfg_.seed, stream);
  traces[name] = nlohmann::json::array();
  summary[name] = nlohmann::json::object();
}

void TrainState::append_trace(const nlohmann::json& record) {
  if (!traces.contains(phase)) traces[phase] = nlohmann::json::array();
  traces[phase].push_back(record);
}

Checkpoint TrainState::to_checkpoint() {
  Checkpoint c;
  c.meta = {{"format", "guru-state/1"},
            {"config", to_json(cfg_)},
            {"config_hash", config_hash(cfg_)},
            {"phase", phase},
            {"iteration", iteration},
            {"phase_complete", phase_complete},
            {"critic_updates", critic_updates},
            {"generator_updates", generator_updates},
            {"rng", rng.serialize()},
            {"traces", traces},
            {"summary", summary},
            {"best_score", best_score}};
  for (auto* p : all_parameters()) c.tensors["param/" + p->name] = p->value;
  const std::vector<std::pair<std::string, const nn::Adam*>> opts = {
      {"pretrain", &pretrain_opt}, {"critic", &critic_opt}, {"generator", &generator_opt},
      {"finetune_A", &finetune_opt[0]}, {"finetune_B", &finetune_opt[1]}};
  for (const auto& [name, opt] : opts) {
    c.meta["optimizers"][name] = opt->steps();
    for (const auto& [pname, mom] : opt->moments()) {
      c.tensors["adam/" + name + "/" + pname + "/m"] = mom.m;
      c.tensors["adam/" + name + "/" + pname + "/v"] = mom.v;
    }
  }
  for (const auto& [name, m] : best) c.tensors["best/" + name] = m;
  return c;
}

void TrainState::load(const Checkpoint& ckpt) {
  const auto& meta = ckpt.meta;
  if (meta.value("format", "") != "guru-state/1") throw InputError("checkpoint: unknown format");
  const std::string expected = config_hash(cfg_);
  if (meta.value("config_hash", "") != expected)
    throw InputError("checkpoint config hash " + meta.value("config_hash", "") +
                     " does not match the configuration (" + expected + ")");
  std::map<std::string, const Matrix*> shapes;
  for (auto* p : all_parameters()) {
    const auto it = ckpt.tensors.find("param/" + p->name);
    if (it == ckpt.tensors.end()) throw InputError("checkpoint: missing tensor " + p->name);
    if (it->second.rows() != p->value.rows() || it->second.cols() != p->value.cols())
      throw InputError("checkpoint: shape mismatch for " + p->name);
    p->value = it->second;
    p->zero_grad();
    shapes[p->name] = &p->value;
  }
  auto check_shape = [&](const std::string& pname, const Matrix& m) {
    const auto it = shapes.find(pname);
    if (it == shapes.end()) throw InputError("checkpoint: tensor for unknown parameter " + pname);
    if (it->second->rows() != m.rows() || it->second->cols() != m.cols())
      throw InputError("checkpoint: shape mismatch for " + pname);
  };
  const std::vector<std::pair<std::string, nn::Adam*>> opts = {
      {"pretrain", &pretrain_opt}, {"critic", &critic_opt}, {"generator", &generator_opt},
      {"finetune_A", &finetune_opt[0]}, {"finetune_B", &finetune_opt[1]}};
  for (const auto& [name, opt] : opts) {
    opt->moments().clear();
    opt->set_steps(meta.at("optimizers").at(name).get<std::int64_t>());
  }
  best.clear();
  for (const auto& [key, m] : ckpt.tensors) {
    if (key.rfind("best/", 0) == 0) {
      check_shape(key.substr(5), m);
      best[key.substr(5)] = m;
      continue;
    }
    if (key.rfind("adam/", 0) != 0) continue;
    const auto slash = key.find('/', 5);
    const std::string opt_name = key.substr(5, slash - 5);
    const std::string rest = key.substr(slash + 1);
    const std::string pname = rest.substr(0, rest.size() - 2);
    const bool first = rest.compare(rest.size() - 2, 2, "/m") == 0;
    check_shape(pname, m);
    nn::Adam* opt = nullptr;
    for (const auto& [name, o] : opts)
      if (name == opt_name) opt = o;
    if (!opt) throw InputError("checkpoint: unknown optimizer " + opt_name);
    auto& mom = opt->moments()[pname];
    (first ? mom.m : mom.v) = m;
  }
  phase = meta.at("phase").get<std::string>();
  iteration = meta.at("iteration").get<std::int64_t>();
  phase_complete = meta.at("phase_complete").get<bool>();
  critic_updates = meta.at("critic_updates").get<std::int64_t>();
  generator_updates = meta.at("generator_updates").get<std::int64_t>();
  rng.deserialize(meta.at("rng").get<std::string>());
  traces = meta.at("traces");
  summary = meta.at("summary");
  best_score = meta.at("best_score").get<double>();
}

// ---------------------------------------------------------------------------

void pretrain(const TrainingData& data, TrainState& state, const std::vector<Domain>& domains,
              const CheckpointHook& hook) {
  const auto& cfg = state.config();
  std::vector<std::vector<std::vector<int>>> seqs;
  std::vector<std::vector<int>> users;
  for (Domain d : domains) {
    seqs.push_back(data.train_sequences(d));
    users.push_back(users_with(seqs.back(), 1));
    if (users.back().empty()) throw InvariantError(std::string("pretrain: domain ") + domain_name(d) + " has no sequences");
  }
  const auto params = generator_parameters(state, domains);
  const auto all = state.model.parameters();
  const std::size_t batch = static_cast<std::size_t>(cfg.batch_size);

  while (state.iteration < cfg.pretrain_epochs) {
    std::vector<std::vector<int>> order = users;
    std::size_t steps = 0;
    for (auto& o : order) {
      state.rng.shuffle(o);
      steps = std::max(steps, (o.size() + batch - 1) / batch);
    }
    std::vector<double> epoch_loss(domains.size(), 0.0);
    std::vector<double> epoch_steps(domains.size(), 0.0);
    for (std::size_t s = 0; s < steps; ++s) {
      nn::Tape tape;
      const Pass pass{&tape, cfg.model.dropout, &state.rng};
      Var total;
      nlohmann::json rec = {{"event", "step"}, {"step", state.pretrain_opt.steps() + 1},
                            {"lr", state.pretrain_opt.current_lr()}};
      for (std::size_t k = 0; k < domains.size(); ++k) {
        const auto& o = order[k];
        const std::size_t nb = (o.size() + batch - 1) / batch;
        const std::size_t start = (s % nb) * batch;
        const std::vector<int> ids(o.begin() + static_cast<long>(start),
                                   o.begin() + static_cast<long>(std::min(o.size(), start + batch)));
        Var loss = reconstruction_for(pass, state, domains[k], pick(seqs[k], ids), nullptr);
        require_finite(loss.scalar(), "reconstruction", state.pretrain_opt.steps() + 1, ids);
        rec[std::string("loss_") + domain_name(domains[k])] = loss.scalar();
        epoch_loss[k] += loss.scalar();
        epoch_steps[k] += 1.0;
        total = total.tape() ? nn::add(total, loss) : loss;
      }
      nn::zero_grads(all);
      tape.backward(total);
      state.pretrain_opt.step(params);
      state.append_trace(rec);
    }
    ++state.iteration;
    nlohmann::json rec = {{"event", "epoch"}, {"epoch", state.iteration}};
    for (std::size_t k = 0; k < domains.size(); ++k)
      rec[std::string("loss_") + domain_name(domains[k])] = epoch_loss[k] / epoch_steps[k];
    state.append_trace(rec);
    periodic(state, hook, cfg.pretrain_epochs);
  }
  for (Domain d : domains)
    state.summary[state.phase][std::string("nll_") + domain_name(d)] = reconstruction_nll(state, data, d);
  state.phase_complete = true;
}

// ---------------------------------------------------------------------------

namespace {

Matrix critic_view(TrainState& state, Domain d, const std::vector<std::vector<int>>& seqs) {
  nn::Tape tape;
  const Pass pass{&tape, state.config().model.dropout, &state.rng};
  const auto& model = state.model;
  const TokenBatch tb = model::pad_batch(seqs, model.dims().max_len, model.tables(d).num_items);
  return model::encode(pass, state.model, d, tb, Trainable{false, false, false}).h.value();
}

}  // namespace

void adversarial_phase(const TrainingData& data, TrainState& state, const CheckpointHook& hook) {
  const auto& cfg = state.config();
  const std::array<Domain, 2> domains = {Domain::A, Domain::B};
  std::array<std::vector<std::vector<int>>, 2> seqs = {data.train_sequences(Domain::A),
                                                      data.train_sequences(Domain::B)};
  std::array<std::vector<int>, 2> users = {users_with(seqs[0], 1), users_with(seqs[1], 1)};
  for (const auto& u : users)
    if (u.empty()) throw InvariantError("adversarial phase: a domain has no sequences");
  const auto& overlap = data.data.overlap;
  auto& summary = state.summary[state.phase];
  if (state.iteration == 0) {
    summary["overlap_distance_start"] = overlap_distance(state, data);
    if (overlap.empty()) summary["notice"] = "no overlapped users; the l2 term is skipped";
  }
  const auto gen_params = generator_parameters(state, {Domain::A, Domain::B});
  const auto model_params = state.model.parameters();
  const auto critic_params = state.critic.parameters();
  const int batch = cfg.batch_size;

  while (state.iteration < cfg.adversarial_iters) {
    adversary::CriticDiagnostics diag;
    double critic_loss = 0.0;
    for (int c = 0; c < cfg.adversary.critic_iters; ++c) {
      std::array<Matrix, 2> h;
      for (std::size_t k = 0; k < 2; ++k) {
        const auto pick_ids = sample_indices(static_cast<int>(users[k].size()), batch, state.rng);
        std::vector<int> ids;
        for (int i : pick_ids) ids.push_back(users[k][static_cast<std::size_t>(i)]);
        h[k] = critic_view(state, domains[k], pick(seqs[k], ids));
      }
      nn::Tape tape;
      const Pass pass{&tape, 0.0, nullptr};
      Var loss = adversary::critic_loss(pass, state.critic, tape.constant(h[0]), tape.constant(h[1]),
                                        cfg.adversary, state.rng, &diag);
      require_finite(loss.scalar(), "critic", state.iteration + 1, {});
      critic_loss = loss.scalar();
      nn::zero_grads(critic_params);
      tape.backward(loss);
      state.critic_opt.step(critic_params);
      ++state.critic_updates;
    }

    nn::Tape tape;
    const Pass pass{&tape, cfg.model.dropout, &state.rng};
    std::array<model::Encoded, 2> enc;
    std::array<double, 2> rec_loss{};
    Var total;
    for (std::size_t k = 0; k < 2; ++k) {
      const auto pick_ids = sample_indices(static_cast<int>(users[k].size()), batch, state.rng);
      std::vector<int> ids;
      for (int i : pick_ids) ids.push_back(users[k][static_cast<std::size_t>(i)]);
      Var l = reconstruction_for(pass, state, domains[k], pick(seqs[k], ids), &enc[k]);
      require_finite(l.scalar(), "reconstruction", state.iteration + 1, ids);
      rec_loss[k] = l.scalar();
      total = total.tape() ? nn::add(total, l) : l;
    }
    total = nn::scale(total, cfg.w_rec);
    double adv = 0.0, l2 = 0.0;
    if (cfg.w_adv > 0.0) {
      Var a = adversary::generator_adv_loss(pass, state.critic, enc[0].h, enc[1].h, cfg.adversary.mode);
      adv = a.scalar();
      total = nn::add(total, nn::scale(a, cfg.w_adv));
    }
    if (cfg.w_l2 > 0.0 && !overlap.empty()) {
      const auto pairs = sample_indices(static_cast<int>(overlap.size()), batch, state.rng);
      std::vector<std::vector<int>> sa, sb;
      for (int p : pairs) {
        sa.push_back(seqs[0][static_cast<std::size_t>(overlap[static_cast<std::size_t>(p)].first)]);
        sb.push_back(seqs[1][static_cast<std::size_t>(overlap[static_cast<std::size_t>(p)].second)]);
      }
      auto& m = state.model;
      const auto ta = model::pad_batch(sa, m.dims().max_len, m.tables(Domain::A).num_items);
      const auto tb = model::pad_batch(sb, m.dims().max_len, m.tables(Domain::B).num_items);
      const Var ha = model::encode(pass, m, Domain::A, ta, Trainable{}).h;
      const Var hb = model::encode(pass, m, Domain::B, tb, Trainable{}).h;
      Var d = adversary::l2_overlap_loss(tape, ha, hb);
      l2 = d.scalar();
      total = nn::add(total, nn::scale(d, cfg.w_l2));
    }
    require_finite(total.scalar(), "generator", state.iteration + 1, {});
    const auto critic_before = nn::parameter_digest(state.critic_parameters());
    nn::zero_grads(model_params);
    nn::zero_grads(critic_params);
    tape.backward(total);
    state.generator_opt.step(gen_params);
    if (nn::parameter_digest(state.critic_parameters()) != critic_before)
      throw InvariantError("adversarial phase: generator step modified the critic");
    ++state.generator_updates;
    ++state.iteration;
    state.append_trace({{"event", "iteration"},
                        {"iteration", state.iteration},
                        {"critic_loss", critic_loss},
                        {"wasserstein", diag.wasserstein},
                        {"gradient_penalty", diag.penalty},
                        {"loss_A", rec_loss[0]},
                        {"loss_B", rec_loss[1]},
                        {"adversarial", adv},
                        {"l2", l2}});
    periodic(state, hook, cfg.adversarial_iters);
  }
  summary["overlap_distance_end"] = overlap_distance(state, data);
  summary["critic_updates"] = state.critic_updates;
  summary["generator_updates"] = state.generator_updates;
  state.phase_complete = true;
}

// ---------------------------------------------------------------------------

namespace {

Matrix gur_rows(TrainState& state, Domain d, const std::vector<std::vector<int>>& histories) {
  if (state.config().variant == Variant::SeqRec)
    return Matrix::Zero(static_cast<Eigen::Index>(histories.size()), state.config().model.d);
  return model::extract_gur(state.model, d, histories);
}

bool tables_trainable(const TrainConfig& cfg) { return cfg.variant == Variant::SeqRec || cfg.unfreeze; }

nn::ParameterList finetune_parameters(TrainState& state, Domain d) {
  const auto& cfg = state.config();
  nn::ParameterList out = state.recommender(d).parameters();
  if (tables_trainable(cfg)) append(out, state.model.table_parameters(d));
  if (cfg.unfreeze && cfg.variant != Variant::SeqRec) append(out, state.model.encoder_parameters());
  return out;
}

void snapshot(TrainState& state, const nn::ParameterList& params) {
  state.best.clear();
  for (auto* p : params) state.best[p->name] = p->value;
}

double validation_hr10(TrainState& state, const TrainingData& data, Domain d) {
  const auto& cfg = state.config();
  eval::EvalOptions opt;
  opt.part = corpus::SplitPart::valid;
  opt.n_neg = cfg.eval.n_neg;
  opt.ks = {10};
  opt.seed = cfg.eval.seed;
  return eval::evaluate(make_scorer(state, d), data.data.corpus(d), data.split(d), opt).hr.at(10);
}

}  // namespace

void finetune(const TrainingData& data, Domain domain, TrainState& state, const CheckpointHook& hook) {
  const auto& cfg = state.config();
  const auto seqs = data.train_sequences(domain);
  const auto users = users_with(seqs, 2);
  const int num_items = data.data.corpus(domain).num_items;
  auto& rec = state.recommender(domain);
  auto& tables = state.model.tables(domain);
  auto& opt = state.finetune_optimizer(domain);
  const auto params = finetune_parameters(state, domain);
  const auto all = state.all_parameters();
  const bool train_tables = tables_trainable(cfg);
  const bool unfreeze = cfg.unfreeze && cfg.variant != Variant::SeqRec;
  auto& summary = state.summary[state.phase];

  if (state.iteration == 0) {
    const double hr = validation_hr10(state, data, domain);
    summary["untrained_val_hr@10"] = hr;
    state.best_score = hr;
    snapshot(state, params);
    state.append_trace({{"event", "epoch"}, {"epoch", 0}, {"val_hr@10", hr}});
  }
  if (users.empty() && cfg.finetune_epochs > 0)
    throw InvariantError(std::string("finetune: domain ") + domain_name(domain) + " has no training pairs");

  std::vector<std::set<int>> seen(seqs.size());
  for (int u : users) seen[static_cast<std::size_t>(u)] = std::set<int>(seqs[static_cast<std::size_t>(u)].begin(), seqs[static_cast<std::size_t>(u)].end());

  while (state.iteration < cfg.finetune_epochs) {
    // (user, cut): predict train[cut] from train[:cut].
    std::vector<std::pair<int, int>> examples;
    for (int u : users) {
      const int t = static_cast<int>(seqs[static_cast<std::size_t>(u)].size());
      examples.emplace_back(u, t - 1);
      for (int i : sample_indices(t - 2, cfg.finetune_cuts - 1, state.rng)) examples.emplace_back(u, i + 1);
    }
    state.rng.shuffle(examples);
    double epoch_loss = 0.0;
    int batches = 0;
    for (std::size_t start = 0; start < examples.size(); start += static_cast<std::size_t>(cfg.batch_size)) {
      const std::size_t end = std::min(examples.size(), start + static_cast<std::size_t>(cfg.batch_size));
      std::vector<std::vector<int>> prefixes;
      std::vector<int> targets, ids;
      std::vector<std::vector<int>> negatives;
      for (std::size_t e = start; e < end; ++e) {
        const auto [u, cut] = examples[e];
        const auto& s = seqs[static_cast<std::size_t>(u)];
        prefixes.emplace_back(s.begin(), s.begin() + cut);
        targets.push_back(s[static_cast<std::size_t>(cut)]);
        ids.push_back(u);
        const auto& own = seen[static_cast<std::size_t>(u)];
        if (static_cast<int>(own.size()) >= num_items)
          throw InvariantError("finetune: a user has interacted with every item");
        std::vector<int> neg;
        while (static_cast<int>(neg.size()) < cfg.n_bpr_neg) {
          const int v = 1 + static_cast<int>(state.rng.below(static_cast<std::uint64_t>(num_items)));
          if (!own.count(v)) neg.push_back(v);
        }
        negatives.push_back(neg);
      }
      nn::Tape tape;
      const Pass pass{&tape, cfg.model.dropout, &state.rng};
      Var gur;
      if (unfreeze) {
        const auto tb = model::pad_batch(prefixes, cfg.model.max_len, num_items);
        gur = model::encode(pass, state.model, domain, tb, Trainable{true, true, false}).h;
      } else {
        gur = tape.constant(gur_rows(state, domain, prefixes));
      }
      const auto windows = cdsrec::window_batch(prefixes, rec.window(), num_items);
      Var q = cdsrec::preference_vectors(pass, rec, tables, windows, gur, true, train_tables);
      Var loss = cdsrec::bpr_loss(q, pass.bind(tables.item_table, train_tables), targets, negatives);
      require_finite(loss.scalar(), "bpr", opt.steps() + 1, ids);
      nn::zero_grads(all);
      tape.backward(loss);
      opt.step(params);
      state.append_trace({{"event", "step"}, {"step", opt.steps()}, {"loss", loss.scalar()}});
      epoch_loss += loss.scalar();
      ++batches;
    }
    ++state.iteration;
    const double hr = validation_hr10(state, data, domain);
    state.append_trace({{"event", "epoch"},
                        {"epoch", state.iteration},
                        {"loss", batches ? epoch_loss / batches : 0.0},
                        {"val_hr@10", hr}});
    if (hr > state.best_score) {
      state.best_score = hr;
      snapshot(state, params);
      summary["best_epoch"] = state.iteration;
    }
    periodic(state, hook, cfg.finetune_epochs);
  }
  for (auto* p : params) {
    const auto it = state.best.find(p->name);
    if (it != state.best.end()) p->value = it->second;
  }
  if (!summary.contains("best_epoch")) summary["best_epoch"] = 0;
  summary["best_val_hr@10"] = state.best_score;
  state.phase_complete = true;
}

// ---------------------------------------------------------------------------

eval::Scorer make_scorer(TrainState& state, Domain domain) {
  return [&state, domain](const std::vector<eval::Query>& queries) {
    std::vector<std::vector<int>> histories;
    for (const auto& q : queries) histories.push_back(q.history);
    auto& rec = state.recommender(domain);
    auto& tables = state.model.tables(domain);
    const Matrix gur = gur_rows(state, domain, histories);
    nn::Tape tape;
    const Pass pass{&tape, 0.0, nullptr};
    const auto windows = cdsrec::window_batch(histories, rec.window(), tables.num_items);
    const Matrix q =
        cdsrec::preference_vectors(pass, rec, tables, windows, tape.constant(gur), false, false).value();
    std::vector<std::vector<double>> out;
    out.reserve(queries.size());
    for (std::size_t i = 0; i < queries.size(); ++i)
      out.push_back(cdsrec::score(q.row(static_cast<Eigen::Index>(i)), queries[i].candidates, tables));
    return out;
  };
}

double reconstruction_nll(TrainState& state, const TrainingData& data, Domain domain) {
  const auto seqs = data.train_sequences(domain);
  const auto users = users_with(seqs, 1);
  auto& model = state.model;
  const int num_items = model.tables(domain).num_items;
  const Trainable frozen{false, false, false};
  double total = 0.0, tokens = 0.0;
  Rng unused(0);
  for (std::size_t start = 0; start < users.size(); start += 256) {
    const std::vector<int> ids(users.begin() + static_cast<long>(start),
                               users.begin() + static_cast<long>(std::min(users.size(), start + 256)));
    nn::Tape tape;
    const Pass pass{&tape, 0.0, nullptr};
    const TokenBatch tb = model::pad_batch(pick(seqs, ids), model.dims().max_len, num_items);
    const auto enc = model::encode(pass, model, domain, tb, frozen);
    const double loss = model::reconstruction_loss(pass, model, domain, enc.h, tb, num_items, unused, frozen).scalar();
    double n = 0.0;
    for (int t : tb.tokens) n += (t >= 1 && t <= num_items) ? 1.0 : 0.0;
    total += loss * n;
    tokens += n;
  }
  return tokens > 0.0 ? total / tokens : 0.0;
}

double overlap_distance(TrainState& state, const TrainingData& data) {
  const auto& overlap = data.data.overlap;
  if (overlap.empty()) return 0.0;
  const auto sa = data.train_sequences(Domain::A);
  const auto sb = data.train_sequences(Domain::B);
  std::vector<std::vector<int>> a, b;
  for (const auto& [ua, ub] : overlap) {
    a.push_back(sa[static_cast<std::size_t>(ua)]);
    b.push_back(sb[static_cast<std::size_t>(ub)]);
  }
  const Matrix ha = model::extract_gur(state.model, Domain::A, a);
  const Matrix hb = model::extract_gur(state.model, Domain::B, b);
  return (ha - hb).rowwise().norm().mean();
}

// ---------------------------------------------------------------------------

std::vector<Stage> plan_stages(const TrainConfig& cfg) {
  std::vector<Stage> out;
  const auto ft = [](Domain d) { return std::string("finetune_") + domain_name(d); };
  switch (cfg.variant) {
    case Variant::SeqRec:
      for (Domain d : cfg.finetune_domains) out.push_back({ft(d), Stage::Kind::finetune, {d}, ""});
      break;
    case Variant::AutoRec:
      for (Domain d : cfg.finetune_domains) {
        const std::string pre = std::string("pretrain_") + domain_name(d);
        out.push_back({pre, Stage::Kind::pretrain, {d}, ""});
        out.push_back({ft(d), Stage::Kind::finetune, {d}, pre});
      }
      break;
    case Variant::RecGURU:
      out.push_back({"pretrain", Stage::Kind::pretrain, {Domain::A, Domain::B}, ""});
      out.push_back({"adversarial", Stage::Kind::adversarial, {Domain::A, Domain::B}, "pretrain"});
      for (Domain d : cfg.finetune_domains) out.push_back({ft(d), Stage::Kind::finetune, {d}, "adversarial"});
      break;
  }
  return out;
}

std::filesystem::path latest_checkpoint(const std::filesystem::path& stage_dir) {
  if (!std::filesystem::is_directory(stage_dir)) return {};
  std::filesystem::path best;
  long long best_iter = -1;
  for (const auto& e : std::filesystem::directory_iterator(stage_dir)) {
    if (e.path().extension() != ".ckpt") continue;
    const std::string stem = e.path().stem().string();
    if (stem.empty() || !std::all_of(stem.begin(), stem.end(), ::isdigit)) continue;
    const long long it = std::stoll(stem);
    if (it > best_iter) {
      best_iter = it;
      best = e.path();
    }
  }
  return best;
}

nlohmann::json report_meta(const TrainConfig& cfg, const std::string& data_hash) {
  return {{"config_hash", config_hash(cfg)},
          {"data_manifest_hash", data_hash},
          {"seed", cfg.seed},
          {"candidate_seed", cfg.eval.seed},
          {"n_neg", cfg.eval.n_neg},
          {"split", "test"},
          {"variant", variant_name(cfg.variant)}};
}

namespace {

void write_trace_log(const std::filesystem::path& path, const nlohmann::json& meta,
                     const nlohmann::json& records) {
  std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << meta.dump() << '\n';
  for (const auto& r : records) out << r.dump() << '\n';
  if (!out) throw InputError("cannot write trace " + path.string());
}

}  // namespace

void save_run_checkpoint(const std::filesystem::path& path, TrainState& state,
                         const std::string& data_hash) {
  Checkpoint c = state.to_checkpoint();
  c.meta["data_manifest_hash"] = data_hash;
  write_checkpoint(path, c);
}

void load_run_checkpoint(const std::filesystem::path& path, TrainState& state,
                         const std::string& data_hash) {
  const Checkpoint c = read_checkpoint(path);
  if (c.meta.value("data_manifest_hash", "") != data_hash)
    throw InputError("checkpoint " + path.string() + " was written for a different dataset");
  state.load(c);
}

RunResult run_all(const TrainingData& data, const TrainConfig& cfg, const RunOptions& options) {
  cfg.validate();
  const auto log = [&](const std::string& msg) {
    if (options.log) options.log(msg);
  };
  const auto& out = options.out;
  std::filesystem::create_directories(out);

  nlohmann::json manifest = {{"format", "guru-run/1"},
                             {"config", to_json(cfg)},
                             {"config_hash", config_hash(cfg)},
                             {"data_manifest_hash", data.data_hash},
                             {"seed", cfg.seed}};
  for (const auto& s : plan_stages(cfg)) manifest["stages"].push_back(s.name);
  const auto manifest_path = out / "manifest.json";
  if (std::filesystem::exists(manifest_path)) {
    std::ifstream in(manifest_path);
    nlohmann::json existing;
    try {
      existing = nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception&) {
      throw InputError("unreadable run manifest " + manifest_path.string());
    }
    if (existing.value("config_hash", "") != manifest["config_hash"] ||
        existing.value("data_manifest_hash", "") != manifest["data_manifest_hash"])
      throw InputError("output directory " + out.string() +
                       " holds a run with a different config or dataset");
  } else {
    std::ofstream m(manifest_path, std::ios::binary);
    m << manifest.dump(2) << '\n';
  }

  RunResult result;
  result.report = eval::MetricsReport(report_meta(cfg, data.data_hash));
  const int na = data.data.a.num_items, nb = data.data.b.num_items;

  for (const auto& stage : plan_stages(cfg)) {
    const auto dir = out / stage.name;
    auto state = std::make_unique<TrainState>(cfg, na, nb);
    const auto latest = latest_checkpoint(dir);
    if (!latest.empty()) {
      load_run_checkpoint(latest, *state, data.data_hash);
      if (state->phase != stage.name)
        throw InputError("checkpoint " + latest.string() + " belongs to stage " + state->phase);
    }
    if (latest.empty() || !state->phase_complete) {
      if (latest.empty()) {
        if (!stage.parent.empty()) {
          const auto parent = latest_checkpoint(out / stage.parent);
          if (parent.empty()) throw ArtifactMissingError("no checkpoint for stage " + stage.parent);
          load_run_checkpoint(parent, *state, data.data_hash);
          if (!state->phase_complete) throw InputError("stage " + stage.parent + " is incomplete");
        }
        state->begin_phase(stage.name, stage_stream(stage.name));
        log("stage " + stage.name + ": start");
      } else {
        log("stage " + stage.name + ": resume at " + std::to_string(state->iteration));
      }
      const CheckpointHook hook = [&](TrainState& s) {
        save_run_checkpoint(dir / (std::to_string(s.iteration) + ".ckpt"), s, data.data_hash);
      };
      switch (stage.kind) {
        case Stage::Kind::pretrain: pretrain(data, *state, stage.domains, hook); break;
        case Stage::Kind::adversarial: adversarial_phase(data, *state, hook); break;
        case Stage::Kind::finetune: finetune(data, stage.domains[0], *state, hook); break;
      }
      save_run_checkpoint(dir / (std::to_string(state->iteration) + ".ckpt"), *state, data.data_hash);
      log("stage " + stage.name + ": done");
    } else {
      log("stage " + stage.name + ": loaded");
    }
    write_trace_log(out / "traces" / (stage.name + ".log"),
                    {{"event", "meta"},
                     {"stage", stage.name},
                     {"config_hash", config_hash(cfg)},
                     {"data_manifest_hash", data.data_hash},
                     {"seed", cfg.seed}},
                    state->traces[stage.name]);
    result.summary[stage.name] = state->summary[stage.name];

    if (stage.kind == Stage::Kind::finetune) {
      const Domain d = stage.domains[0];
      eval::EvalOptions opt;
      opt.part = corpus::SplitPart::test;
      opt.n_neg = cfg.eval.n_neg;
      opt.ks = cfg.eval.ks;
      opt.seed = cfg.eval.seed;
      result.report.add(domain_name(d), variant_name(cfg.variant),
                        eval::evaluate(make_scorer(*state, d), data.data.corpus(d), data.split(d), opt));
    }
    result.state = std::move(state);
    if (stage.name == options.stop_after) {
      log("stopping after stage " + stage.name);
      return result;
    }
  }
  result.report.write(out);
  {
    std::ofstream s(out / "summary.json", std::ios::binary);
    s << result.summary.dump(2) << '\n';
  }
  result.complete = true;
  return result;
}

}  // namespace guru::trainer
