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

#include "guru/cli/commands.hpp"

#include <fcntl.h>
#include <sys/file.h>
#include <unistd.h>

#include <CLI11.hpp>
#include <algorithm>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include "guru/corpus/overlap.hpp"
#include "guru/corpus/store.hpp"
#include "guru/util/error.hpp"

namespace guru::cli {

using corpus::Domain;
using trainer::Variant;

int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const ArtifactMissingError*>(&e)) return kExitArtifactMissing;
  if (dynamic_cast<const InputError*>(&e) || dynamic_cast<const ConfigError*>(&e) ||
      dynamic_cast<const LookupError*>(&e) || dynamic_cast<const CorpusDegenerateError*>(&e))
    return kExitInput;
  return kExitInternal;
}

DirectoryLock::DirectoryLock(const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  const auto path = dir / ".lock";
  fd_ = ::open(path.c_str(), O_RDWR | O_CREAT, 0644);
  if (fd_ < 0) throw InputError("cannot create lock file " + path.string());
  if (::flock(fd_, LOCK_EX | LOCK_NB) != 0) {
    ::close(fd_);
    fd_ = -1;
    throw InputError("output directory " + dir.string() + " is in use by another process");
  }
}

DirectoryLock::~DirectoryLock() {
  if (fd_ >= 0) {
    ::flock(fd_, LOCK_UN);
    ::close(fd_);
  }
}

namespace {

void say(const Logger& log, const std::string& msg) {
  if (log) log(msg);
}

nlohmann::json synthetic_params_json(const corpus::SyntheticParams& p) {
  return {{"users_per_domain", p.users_per_domain}, {"items_per_domain", p.items_per_domain},
          {"overlap_count", p.overlap_count},       {"latent_dim", p.latent_dim},
          {"mean_len_a", p.mean_len_a},             {"mean_len_b", p.mean_len_b},
          {"sparsity_skew", p.sparsity_skew},       {"primary_share", p.primary_share},
          {"secondary_share", p.secondary_share},   {"k_core", p.k_core}};
}

corpus::CrossDomainDataset maybe_subsample(const ExperimentConfig& cfg, corpus::CrossDomainDataset data,
                                           nlohmann::json& provenance, const Logger& log) {
  if (!cfg.data.overlap_rate) return data;
  corpus::SubsampleReport rep;
  data = corpus::subsample_overlap(data, *cfg.data.overlap_rate, cfg.data.subsample_seed, &rep);
  provenance["subsample"] = {{"target_rate", *cfg.data.overlap_rate},
                             {"seed", cfg.data.subsample_seed},
                             {"keep_probability", rep.keep_probability},
                             {"kept", rep.kept},
                             {"moved_to_a", rep.moved_to_a},
                             {"moved_to_b", rep.moved_to_b}};
  say(log, "overlap subsampled to rate " + std::to_string(data.overlap_rate()));
  return data;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << text;
  if (!out) throw InputError("cannot write " + path.string());
}

void add_baselines(eval::MetricsReport& report, const ExperimentConfig& cfg,
                   const trainer::TrainingData& data, const Logger& log) {
  eval::EvalOptions opt;
  opt.part = corpus::SplitPart::test;
  opt.n_neg = cfg.train.eval.n_neg;
  opt.ks = cfg.train.eval.ks;
  opt.seed = cfg.train.eval.seed;
  for (Domain d : cfg.train.finetune_domains) {
    const auto& c = data.data.corpus(d);
    const auto& split = data.split(d);
    for (const auto& b : cfg.baselines) {
      say(log, "baseline " + b + " on domain " + domain_name(d));
      if (b == "POP") {
        report.add(domain_name(d), b, eval::evaluate(eval::baseline_pop(c), c, split, opt));
      } else if (b == "BPRMF") {
        eval::BprMfOptions mf;
        mf.seed = cfg.train.seed;
        report.add(domain_name(d), b, eval::evaluate(eval::baseline_bprmf(c, split, mf), c, split, opt));
      }
    }
  }
}

// ---- plotting --------------------------------------------------------------

struct Series {
  std::string name;
  std::vector<std::string> columns;
  std::vector<std::vector<std::optional<double>>> rows;
};

std::vector<std::string> columns_for(const std::string& stage, const std::string& event) {
  if (stage.rfind("pretrain", 0) == 0) {
    if (event == "step") return {"step", "lr", "loss_A", "loss_B"};
    if (event == "epoch") return {"epoch", "loss_A", "loss_B"};
  } else if (stage == "adversarial") {
    if (event == "iteration")
      return {"iteration", "critic_loss", "wasserstein", "gradient_penalty",
              "loss_A", "loss_B", "adversarial", "l2"};
  } else if (stage.rfind("finetune", 0) == 0) {
    if (event == "step") return {"step", "loss"};
    if (event == "epoch") return {"epoch", "loss", "val_hr@10"};
  }
  return {};
}

std::string format_number(double v) {
  std::ostringstream s;
  s.precision(17);
  s << v;
  return s.str();
}

std::string render_csv(const Series& s) {
  std::ostringstream out;
  for (std::size_t c = 0; c < s.columns.size(); ++c) out << (c ? "," : "") << s.columns[c];
  out << '\n';
  for (const auto& row : s.rows) {
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (c) out << ',';
      if (row[c]) out << format_number(*row[c]);
    }
    out << '\n';
  }
  return out.str();
}

/// One panel per non-x column, stacked vertically.
std::string render_svg(const Series& s) {
  const double w = 640, h = 180, pad = 40;
  const std::size_t panels = s.columns.size() - 1;
  std::ostringstream out;
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w << "\" height=\"" << h * panels
      << "\" font-family=\"sans-serif\" font-size=\"11\">\n";
  for (std::size_t p = 0; p < panels; ++p) {
    const std::size_t col = p + 1;
    std::vector<std::pair<double, double>> pts;
    for (const auto& row : s.rows)
      if (row[0] && row[col] && std::isfinite(*row[col])) pts.emplace_back(*row[0], *row[col]);
    const double top = h * p;
    out << "<g><text x=\"" << pad << "\" y=\"" << top + 14 << "\">" << s.name << ": " << s.columns[col]
        << "</text>\n";
    out << "<rect x=\"" << pad << "\" y=\"" << top + 20 << "\" width=\"" << w - 2 * pad << "\" height=\""
        << h - 40 << "\" fill=\"none\" stroke=\"#999\"/>\n";
    if (!pts.empty()) {
      double x0 = pts.front().first, x1 = x0, y0 = pts.front().second, y1 = y0;
      for (const auto& [x, y] : pts) {
        x0 = std::min(x0, x);
        x1 = std::max(x1, x);
        y0 = std::min(y0, y);
        y1 = std::max(y1, y);
      }
      const double sx = x1 > x0 ? (w - 2 * pad) / (x1 - x0) : 0.0;
      const double sy = y1 > y0 ? (h - 40) / (y1 - y0) : 0.0;
      out << "<polyline fill=\"none\" stroke=\"#1f77b4\" points=\"";
      for (const auto& [x, y] : pts)
        out << pad + (x - x0) * sx << ',' << top + 20 + (h - 40) - (y - y0) * sy << ' ';
      out << "\"/>\n";
      out << "<text x=\"2\" y=\"" << top + 28 << "\">" << format_number(y1) << "</text>\n";
      out << "<text x=\"2\" y=\"" << top + h - 20 << "\">" << format_number(y0) << "</text>\n";
    }
    out << "</g>\n";
  }
  out << "</svg>\n";
  return out.str();
}

std::vector<Series> read_trace(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot read trace " + path.string());
  const std::string stage = path.stem().string();
  std::map<std::string, Series> by_event;
  std::string line;
  std::size_t records = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    nlohmann::json r;
    try {
      r = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception&) {
      throw InputError("malformed trace line in " + path.string());
    }
    const std::string event = r.value("event", "");
    if (event == "meta") continue;
    const auto cols = columns_for(stage, event);
    if (cols.empty()) continue;
    auto& s = by_event[event];
    if (s.columns.empty()) {
      s.columns = cols;
      s.name = stage + (event == "epoch" ? "_epochs" : "");
    }
    std::vector<std::optional<double>> row;
    for (const auto& c : cols)
      row.push_back(r.contains(c) && r[c].is_number() ? std::optional<double>(r[c].get<double>())
                                                       : std::nullopt);
    s.rows.push_back(row);
    ++records;
  }
  if (records == 0) throw InputError("trace " + path.string() + " is empty");
  std::vector<Series> out;
  for (auto& [event, s] : by_event) out.push_back(std::move(s));
  return out;
}

}  // namespace

nlohmann::json cmd_prepare(const ExperimentConfig& cfg, const Logger& log) {
  if (cfg.data.source != DataConfig::Source::raw)
    throw ConfigError("data.source: prepare needs \"raw\" input (use synth for synthetic data)");
  std::array<corpus::DomainCorpus, 2> corpora;
  nlohmann::json provenance = {{"command", "prepare"}};
  for (Domain d : {Domain::A, Domain::B}) {
    const auto& src = d == Domain::A ? cfg.data.raw_a : cfg.data.raw_b;
    if (!std::filesystem::exists(src.path)) throw InputError("raw file not found: " + src.path.string());
    say(log, "ingesting " + src.path.string());
    const auto in = corpus::ingest_file(src.path, src.format);
    corpora[d == Domain::A ? 0 : 1] = corpus::preprocess(in.records, d, cfg.data.preprocess);
    provenance["sources"][domain_name(d)] = {{"path", src.path.string()},
                                             {"records", in.records.size()},
                                             {"skipped", in.skipped}};
  }
  provenance["preprocess"] = {{"rating_min", cfg.data.preprocess.rating_min},
                              {"k_core", cfg.data.preprocess.k_core}};
  if (cfg.data.preprocess.min_timestamp)
    provenance["preprocess"]["min_timestamp"] = *cfg.data.preprocess.min_timestamp;
  auto data = corpus::link_domains(std::move(corpora[0]), std::move(corpora[1]));
  data = maybe_subsample(cfg, std::move(data), provenance, log);
  return corpus::save_dataset(cfg.data.dir, data, provenance);
}

nlohmann::json cmd_synth(const ExperimentConfig& cfg, std::optional<std::uint64_t> seed, const Logger& log) {
  const std::uint64_t s = seed.value_or(cfg.data.synthetic_seed);
  say(log, "generating synthetic data with seed " + std::to_string(s));
  auto data = corpus::generate_synthetic(cfg.data.synthetic, s).data;
  nlohmann::json provenance = {
      {"command", "synth"}, {"seed", s}, {"params", synthetic_params_json(cfg.data.synthetic)}};
  data = maybe_subsample(cfg, std::move(data), provenance, log);
  return corpus::save_dataset(cfg.data.dir, data, provenance);
}

trainer::TrainingData load_training_data(const ExperimentConfig& cfg) {
  auto stored = corpus::load_dataset(cfg.data.dir);
  return trainer::TrainingData(std::move(stored.data), stored.manifest_hash);
}

trainer::RunResult cmd_train(const ExperimentConfig& cfg, const std::string& stop_after, const Logger& log) {
  const auto data = load_training_data(cfg);
  return trainer::run_all(data, cfg.train, {cfg.variant_dir(cfg.train.variant), stop_after, log});
}

eval::MetricsReport cmd_eval(const ExperimentConfig& cfg, const std::optional<std::filesystem::path>& checkpoint,
                             const Logger& log) {
  const auto data = load_training_data(cfg);
  const auto dir = cfg.variant_dir(cfg.train.variant);
  eval::MetricsReport report(trainer::report_meta(cfg.train, data.data_hash));
  std::vector<std::pair<Domain, std::filesystem::path>> targets;
  if (checkpoint) {
    const auto ckpt = trainer::read_checkpoint(*checkpoint);
    const std::string phase = ckpt.meta.value("phase", "");
    if (phase.rfind("finetune_", 0) != 0)
      throw InputError("checkpoint " + checkpoint->string() + " is not a fine-tuned model (phase " + phase + ")");
    targets.emplace_back(corpus::parse_domain(phase.substr(9)), *checkpoint);
  } else {
    for (Domain d : cfg.train.finetune_domains) {
      const auto stage_dir = dir / (std::string("finetune_") + domain_name(d));
      const auto path = trainer::latest_checkpoint(stage_dir);
      if (path.empty()) throw ArtifactMissingError("no fine-tune checkpoint in " + stage_dir.string());
      targets.emplace_back(d, path);
    }
  }
  eval::EvalOptions opt;
  opt.part = corpus::SplitPart::test;
  opt.n_neg = cfg.train.eval.n_neg;
  opt.ks = cfg.train.eval.ks;
  opt.seed = cfg.train.eval.seed;
  for (const auto& [d, path] : targets) {
    trainer::TrainState state(cfg.train, data.data.a.num_items, data.data.b.num_items);
    trainer::load_run_checkpoint(path, state, data.data_hash);
    if (!state.phase_complete) throw InputError("checkpoint " + path.string() + " is from an unfinished fine-tune");
    say(log, "evaluating " + path.string());
    report.add(domain_name(d), trainer::variant_name(cfg.train.variant),
               eval::evaluate(trainer::make_scorer(state, d), data.data.corpus(d), data.split(d), opt));
  }
  add_baselines(report, cfg, data, log);
  report.write(dir / "eval");
  return report;
}

std::vector<std::filesystem::path> cmd_plot(const std::filesystem::path& traces, const std::filesystem::path& out) {
  std::vector<std::filesystem::path> logs;
  if (std::filesystem::is_directory(traces)) {
    for (const auto& e : std::filesystem::directory_iterator(traces))
      if (e.path().extension() == ".log") logs.push_back(e.path());
    std::sort(logs.begin(), logs.end());
    if (logs.empty()) throw InputError("no trace logs in " + traces.string());
  } else if (std::filesystem::exists(traces)) {
    logs.push_back(traces);
  } else {
    throw ArtifactMissingError("trace path not found: " + traces.string());
  }
  std::vector<std::filesystem::path> written;
  for (const auto& log : logs) {
    for (const auto& s : read_trace(log)) {
      const auto csv = out / (s.name + ".csv");
      const auto svg = out / (s.name + ".svg");
      write_text(csv, render_csv(s));
      write_text(svg, render_svg(s));
      written.push_back(csv);
      written.push_back(svg);
    }
  }
  return written;
}

eval::MetricsReport cmd_run_all(const ExperimentConfig& cfg, const Logger& log) {
  if (!std::filesystem::exists(cfg.data.dir / "manifest.json")) {
    if (cfg.data.source == DataConfig::Source::raw)
      cmd_prepare(cfg, log);
    else
      cmd_synth(cfg, std::nullopt, log);
  }
  const auto data = load_training_data(cfg);
  nlohmann::json meta = trainer::report_meta(cfg.train, data.data_hash);
  meta.erase("variant");
  meta.erase("config_hash");
  eval::MetricsReport report(meta);
  for (Variant v : {Variant::SeqRec, Variant::AutoRec, Variant::RecGURU}) {
    auto vcfg = cfg;
    vcfg.train.variant = v;
    say(log, std::string("variant ") + trainer::variant_name(v));
    const auto r = trainer::run_all(data, vcfg.train, {cfg.variant_dir(v), "", log});
    report.meta()["config_hashes"][trainer::variant_name(v)] = trainer::config_hash(vcfg.train);
    for (Domain d : cfg.train.finetune_domains)
      report.add(domain_name(d), trainer::variant_name(v), r.report.get(domain_name(d), trainer::variant_name(v)));
  }
  add_baselines(report, cfg, data, log);
  report.write(cfg.output);
  return report;
}

// ---- command line ----------------------------------------------------------

int run_cli(int argc, char** argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Cross-domain sequential recommendation with generalized user representations"};
  app.require_subcommand(1);
  app.fallthrough();
  bool quiet = false;
  app.add_flag("-q,--quiet", quiet, "Suppress progress messages");

  std::string config_path, variant, stop_after, checkpoint, traces, plot_out;
  std::uint64_t seed = 0;

  auto* synth = app.add_subcommand("synth", "Generate the synthetic cross-domain dataset");
  synth->add_option("-c,--config", config_path, "Experiment config (JSON)")->required();
  auto* seed_opt = synth->add_option("--seed", seed, "Override data.synthetic.seed");

  auto* prepare = app.add_subcommand("prepare", "Ingest and preprocess raw interaction files");
  prepare->add_option("-c,--config", config_path, "Experiment config (JSON)")->required();

  auto* train = app.add_subcommand("train", "Train the configured variant (resumes if interrupted)");
  train->add_option("-c,--config", config_path, "Experiment config (JSON)")->required();
  train->add_option("--variant", variant, "Override the config's variant (SeqRec, AutoRec, RecGURU)");
  train->add_option("--stop-after", stop_after, "Stop after this stage (e.g. pretrain)");

  auto* evaluate = app.add_subcommand("eval", "Evaluate a trained variant and the baselines");
  evaluate->add_option("-c,--config", config_path, "Experiment config (JSON)")->required();
  evaluate->add_option("--variant", variant, "Override the config's variant");
  evaluate->add_option("--checkpoint", checkpoint, "Fine-tune checkpoint to evaluate");

  auto* plot = app.add_subcommand("plot", "Loss curves (CSV + SVG) from trace logs");
  plot->add_option("--traces", traces, "Trace directory or .log file")->required();
  plot->add_option("-o,--out", plot_out, "Output directory (default: <traces>/plots)");

  auto* run_all = app.add_subcommand("run-all", "Data, all variants, baselines and one report");
  run_all->add_option("-c,--config", config_path, "Experiment config (JSON)")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitInput;
  }

  const Logger log = [&](const std::string& msg) {
    if (!quiet) err << "[guru] " << msg << std::endl;
  };
  try {
    if (plot->parsed()) {
      const std::filesystem::path t(traces);
      const auto dest = plot_out.empty()
                            ? (std::filesystem::is_directory(t) ? t : t.parent_path()) / "plots"
                            : std::filesystem::path(plot_out);
      for (const auto& f : cmd_plot(t, dest)) out << f.string() << '\n';
      return kExitOk;
    }
    ExperimentConfig cfg = load_experiment_config(config_path);
    if (!variant.empty()) {
      try {
        cfg.train.variant = trainer::parse_variant(variant);
      } catch (const ConfigError& e) {
        throw ConfigError(std::string("--variant: ") + e.what());
      }
    }
    DirectoryLock lock(cfg.output);
    if (synth->parsed()) {
      const auto m = cmd_synth(cfg, seed_opt->count() ? std::optional<std::uint64_t>(seed) : std::nullopt, log);
      out << m.dump(2) << '\n';
    } else if (prepare->parsed()) {
      out << cmd_prepare(cfg, log).dump(2) << '\n';
    } else if (train->parsed()) {
      const auto r = cmd_train(cfg, stop_after, log);
      out << (r.complete ? r.report.to_json().dump(2) : std::string("{\"stopped_after\": \"" + stop_after + "\"}"))
          << '\n';
    } else if (evaluate->parsed()) {
      out << cmd_eval(cfg, checkpoint.empty() ? std::nullopt : std::optional<std::filesystem::path>(checkpoint), log)
                 .to_json()
                 .dump(2)
          << '\n';
    } else if (run_all->parsed()) {
      out << cmd_run_all(cfg, log).to_json().dump(2) << '\n';
    }
    return kExitOk;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << std::endl;
    return exit_code_for(e);
  }
}

}  // namespace guru::cli
