/*
 * Copyright 2026 The mieeg Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *    http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "mieeg/core/manifest.hpp"
#include "mieeg/core/synth.hpp"
#include "mieeg/core/trial_io.hpp"
#include "mieeg/error.hpp"
#include "mieeg/train/experiments.hpp"

namespace fs = std::filesystem;
using nlohmann::ordered_json;
using namespace mieeg;
using namespace mieeg::train;

namespace {

constexpr int kExitRuntime = 1;
constexpr int kExitUsage = 2;

// Raised for values that parse but violate a configuration invariant.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

ordered_json typed_value(const std::string& s) {
  if (s == "true") return true;
  if (s == "false") return false;
  if (!s.empty()) {
    char* end = nullptr;
    const long long i = std::strtoll(s.c_str(), &end, 10);
    if (*end == '\0') return i;
    const double d = std::strtod(s.c_str(), &end);
    if (*end == '\0') return d;
  }
  return s;
}

// Every configurable option of `app` with its resolved value, keyed by long name.
ordered_json resolved_options(const CLI::App* app) {
  ordered_json j = ordered_json::object();
  for (const CLI::Option* opt : app->get_options()) {
    if (!opt->get_configurable() || opt->get_lnames().empty()) continue;
    const std::string key = opt->get_lnames().front();
    if (key == "help" || key == "config") continue;
    std::vector<std::string> values = opt->results();
    if (values.empty()) {
      if (opt->get_type_size() == 0) {
        j[key] = false;
        continue;
      }
      if (opt->get_default_str().empty()) continue;
      values = {opt->get_default_str()};
      if (values[0].size() > 1 && values[0].front() == '[') {  // vector default "[a,b]"
        std::string inner = values[0].substr(1, values[0].size() - 2);
        values.clear();
        std::stringstream ss(inner);
        for (std::string item; std::getline(ss, item, ',');) values.push_back(item);
      }
    }
    if (opt->get_type_size() == 0) {
      j[key] = typed_value(values.back()) != false && values.back() != "0";
    } else if (opt->get_expected_max() > 1) {
      ordered_json arr = ordered_json::array();
      for (const auto& v : values) arr.push_back(typed_value(v));
      j[key] = arr;
    } else {
      j[key] = typed_value(values.back());
    }
  }
  return j;
}

/// Flat JSON object whose keys are the long option names of the running subcommand.
class JsonConfig : public CLI::Config {
 public:
  std::string section;  // subcommand the file applies to

  std::string to_config(const CLI::App* app, bool, bool, std::string) const override {
    const CLI::App* target = app;
    if (!section.empty()) target = app->get_subcommand(section);
    return resolved_options(target).dump(2) + "\n";
  }

  std::vector<CLI::ConfigItem> from_config(std::istream& input) const override {
    ordered_json j;
    try {
      j = ordered_json::parse(input);
    } catch (const ordered_json::exception& ex) {
      throw CLI::ConversionError("config", std::string("invalid JSON: ") + ex.what());
    }
    if (!j.is_object()) throw CLI::ConversionError("config", "the config file must hold a JSON object");
    std::vector<CLI::ConfigItem> items;
    for (const auto& [key, value] : j.items()) {
      CLI::ConfigItem item;
      if (!section.empty()) item.parents = {section};
      item.name = key;
      auto text = [&key](const ordered_json& v) -> std::string {
        if (v.is_string()) return v.get<std::string>();
        if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
        if (v.is_number()) return v.dump();
        throw CLI::ConversionError(key, "unsupported value type in config");
      };
      if (value.is_array()) {
        for (const auto& v : value) item.inputs.push_back(text(v));
      } else {
        item.inputs.push_back(text(value));
      }
      items.push_back(std::move(item));
    }
    return items;
  }
};

// Option groups shared by several subcommands.
struct PreprocessArgs {
  double low_hz = 8.0;
  double high_hz = 30.0;
  int filter_order = 4;
  double fs_target = 250.0;
  std::string templ = "standard";
  bool no_screening = false;
  double screen_threshold = 0.6;
  int screen_folds = 5;
  int jobs = 1;

  void add(CLI::App* app) {
    app->add_option("--low-hz", low_hz, "Bandpass lower edge (Hz)");
    app->add_option("--high-hz", high_hz, "Bandpass upper edge (Hz)");
    app->add_option("--filter-order", filter_order, "Butterworth prototype order")->check(CLI::PositiveNumber);
    app->add_option("--fs-target", fs_target, "Sampling rate after resampling (Hz)")->check(CLI::PositiveNumber);
    app->add_option("--template", templ, "Channel template")->check(CLI::IsMember({"standard"}));
    app->add_flag("--no-screening", no_screening, "Keep every pretraining subject");
    app->add_option("--screen-threshold", screen_threshold, "Minimum within-subject CSP+LDA accuracy")
        ->check(CLI::Range(0.0, 1.0));
    app->add_option("--screen-folds", screen_folds, "Cross-validation folds for screening")->check(CLI::Range(2, 100));
    app->add_option("--jobs", jobs, "Worker threads for per-trial preprocessing")->check(CLI::Range(1, 256));
  }

  HarmonizeOptions options() const {
    HarmonizeOptions o;
    o.filter = {low_hz, high_hz, filter_order};
    o.resample.f_target = fs_target;
    o.screening = !no_screening;
    o.screen.threshold = screen_threshold;
    o.screen.folds = screen_folds;
    o.jobs = jobs;
    return o;
  }
};

struct TrainArgs {
  TrainConfig cfg;
  std::string variant = "full";

  TrainArgs() { cfg.epochs_pretrain = 30; }

  void add(CLI::App* app) {
    auto& m = cfg.model;
    app->add_option("--seed-list", cfg.seeds, "Seeds; results are aggregated over them");
    app->add_option("--alpha", cfg.alpha, "Mask ratio");
    app->add_option("--lr", cfg.lr, "Adam learning rate for pretraining");
    app->add_option("--finetune-lr", cfg.finetune_lr, "Adam learning rate for fine-tuning");
    app->add_option("--batch", cfg.batch, "Mini-batch size");
    app->add_option("--epochs-pretrain", cfg.epochs_pretrain, "Pretraining epochs");
    app->add_option("--epochs-finetune", cfg.epochs_finetune, "Fine-tuning epochs (at most 20)");
    app->add_option("--report-epoch", cfg.report_epoch, "Epoch whose test accuracy is reported");
    app->add_option("--finetune-fraction", cfg.finetune_fraction, "Chronological calibration fraction");
    app->add_option("--variant", variant, "Ablation variant")->check(CLI::IsMember({"full", "no_pretrain", "no_selfsup"}));
    app->add_flag("--freeze-body", cfg.freeze_body, "Fine-tune the classification head only");
    app->add_flag("--detach-target", cfg.detach_target, "Stop reconstruction gradients into the target tokens");
    app->add_option("--dim", m.encoder.dim, "Token and model dimension D");
    app->add_option("--layers", m.encoder.layers, "Encoder layers");
    app->add_option("--heads", m.encoder.heads, "Attention heads");
    app->add_option("--ff-dim", m.encoder.ff_dim, "Feed-forward width");
    app->add_option("--dropout", m.encoder.dropout, "Dropout probability");
    app->add_option("--decoder-layers", m.encoder.decoder_layers, "Decoder layers");
    app->add_option("--max-tokens", m.encoder.max_tokens, "Positional embedding capacity");
    app->add_option("--kernel", m.tokenizer.kernel, "Temporal kernel length (samples)");
    app->add_option("--stride", m.tokenizer.stride, "Temporal stride");
    app->add_option("--feature-maps", m.tokenizer.feature_maps, "Temporal feature maps");
    app->add_option("--pool", m.tokenizer.pool, "Average-pool window");
  }

  TrainConfig resolved() const {
    TrainConfig c = cfg;
    c.model.tokenizer.dim = c.model.encoder.dim;
    c.ablation = parse_variant(variant);
    try {
      c.validate();
    } catch (const InvalidArgument& ex) {
      throw UsageError(ex.what());
    }
    return c;
  }
};

std::vector<DatasetManifest> load_all(const std::vector<std::string>& paths) {
  std::vector<DatasetManifest> out;
  for (const auto& p : paths) out.push_back(load_manifest(p));
  return out;
}

std::string config_echo(const CLI::App* sub) {
  ordered_json j = resolved_options(sub);
  j["command"] = sub->get_name();
  return j.dump();
}

void print_summary(const RunReport& r) {
  std::cout << r.summary_csv();
}

int cmd_synth(const CLI::App*, SynthConfig cfg, const std::string& out) {
  const auto m = synth_dataset(cfg, out);
  std::cout << "wrote " << m.trial_count() << " trials for " << m.subjects.size() << " subjects to " << out << "\n";
  return 0;
}

std::string trial_name(std::size_t i) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "trial-%04zu.mirp", i);
  return buf;
}

void write_text(const fs::path& p, const std::string& text) {
  std::ofstream f(p, std::ios::binary | std::ios::trunc);
  if (!f) throw IoError("cannot write " + p.string());
  f << text;
}

int cmd_preprocess(const std::string& manifest_path, const std::string& out, const std::string& role,
                   const HarmonizeOptions& options, double fraction) {
  const auto src = load_manifest(manifest_path);
  DatasetManifest dst;
  dst.name = src.name;
  dst.fs = options.resample.f_target;
  dst.channels = options.templ.electrodes;
  dst.label_vocab = LabelVocab::unified();
  const fs::path root(out);
  fs::create_directories(root);

  auto write_session = [&](SubjectEntry& subject, const std::string& session, const std::vector<Trial>& trials) {
    SessionEntry s;
    s.id = session;
    const fs::path dir = root / subject.id / session;
    fs::create_directories(dir);
    for (std::size_t i = 0; i < trials.size(); ++i) {
      write_trial_file(trials[i], dir / trial_name(i));
      s.trials.push_back((fs::path(subject.id) / session / trial_name(i)).generic_string());
    }
    subject.sessions.push_back(std::move(s));
  };

  if (role == "pretrain") {
    const auto set = prepare_pretraining(src, options);
    for (const auto& r : set.screening)
      std::cerr << "screening " << r.subject_id << " accuracy " << r.accuracy << (r.retained ? " retained" : " excluded") << "\n";
    for (const auto& id : set.retained) {
      SubjectEntry subject;
      subject.id = id;
      for (const auto& s : set.sessions) {
        if (s.subject_id != id) continue;
        write_session(subject, s.session_id, s.trials);
        write_text(root / id / ("align-" + s.session_id + ".json"), spatial::to_json(s.reference));
      }
      dst.subjects.push_back(std::move(subject));
    }
    std::cout << "retained";
    for (const auto& id : set.retained) std::cout << ' ' << id;
    std::cout << "\n";
  } else {
    const auto subjects = prepare_downstream(src, options, fraction);
    for (const auto& d : subjects) {
      SubjectEntry subject;
      subject.id = d.subject_id;
      std::vector<Trial> all = d.calibration;
      all.insert(all.end(), d.test.begin(), d.test.end());
      write_session(subject, "ses-0", all);
      write_text(root / d.subject_id / "align.json", spatial::to_json(d.reference));
      dst.subjects.push_back(std::move(subject));
    }
    std::cout << "subjects";
    for (const auto& d : subjects) std::cout << ' ' << d.subject_id;
    std::cout << "\n";
  }
  save_manifest(dst, root / "manifest.json");
  return 0;
}

int cmd_pretrain(const CLI::App* sub, const std::vector<std::string>& manifests, const std::string& out,
                 const HarmonizeOptions& options, const TrainConfig& cfg) {
  if (cfg.ablation == Variant::no_pretrain) throw UsageError("--variant no_pretrain has no pretraining stage");
  const auto started = std::chrono::steady_clock::now();
  const auto corpus = build_corpus(load_all(manifests), {}, options, cfg.finetune_fraction);
  fs::create_directories(out);
  RunReport report;
  report.command = "pretrain";
  report.config_json = config_echo(sub);
  report.retained_subjects = corpus.retained;
  for (const auto seed : cfg.seeds) {
    auto r = pretrain(corpus.pretraining, cfg, seed);
    report.loss_curves.push_back({variant_name(cfg.ablation), cfg.alpha, seed, r.curve});
    const auto path = fs::path(out) / checkpoint_name("pretrain", {cfg.ablation, cfg.alpha}, seed);
    save_state(r.state, path.string());
    std::cout << "seed " << seed << ": final loss " << r.curve.back().total << " -> " << path.string() << "\n";
  }
  report.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  report.write(fs::path(out) / "report");
  return 0;
}

int cmd_finetune(const CLI::App* sub, const std::string& checkpoint, const std::vector<std::string>& manifests,
                 const std::string& out, const HarmonizeOptions& options, const TrainConfig& cfg) {
  const auto started = std::chrono::steady_clock::now();
  const auto base = load_state(checkpoint);
  const auto corpus = build_corpus({}, load_all(manifests), options, cfg.finetune_fraction);
  fs::create_directories(out);
  RunReport report;
  report.command = "finetune";
  report.config_json = config_echo(sub);
  for (const auto& d : corpus.downstream) report.split_hashes[d.subject_id] = d.split_hash;
  const RunSpec spec{cfg.ablation, cfg.alpha};
  for (const auto seed : cfg.seeds)
    for (const auto& d : corpus.downstream) {
      const auto ft = finetune(base, d, cfg, seed);
      save_state(ft.state, (fs::path(out) / checkpoint_name("finetune", spec, seed, d.subject_id)).string());
      report.rows.push_back({d.dataset, d.subject_id, seed, variant_name(cfg.ablation), cfg.alpha, "test", ft.report_accuracy});
      report.rows.push_back({d.dataset, d.subject_id, seed, variant_name(cfg.ablation), cfg.alpha, "test_best", ft.best_accuracy});
    }
  report.summary = summarize(report.rows);
  report.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  report.write(fs::path(out) / "report");
  std::cout << report.to_csv();
  return 0;
}

int cmd_eval(const std::string& checkpoint, const std::vector<std::string>& manifests, const HarmonizeOptions& options,
             double fraction, const std::string& variant, double alpha) {
  const auto state = load_state(checkpoint);
  const auto corpus = build_corpus({}, load_all(manifests), options, fraction);
  RunReport report;
  for (const auto& d : corpus.downstream)
    report.rows.push_back({d.dataset, d.subject_id, 0, variant, alpha, "test", evaluate(state, d.test)});
  std::cout << report.to_csv();
  return 0;
}

int cmd_experiment(const CLI::App* sub, const std::string& kind, const std::vector<std::string>& pre,
                   const std::vector<std::string>& down, const std::string& out, const HarmonizeOptions& options,
                   const TrainConfig& cfg, const std::vector<double>& alphas) {
  const auto corpus = build_corpus(load_all(pre), load_all(down), options, cfg.finetune_fraction);
  const fs::path dir(out);
  fs::create_directories(dir);
  RunReport report = kind == "sweep" ? mask_sweep(corpus, cfg, alphas, dir / "checkpoints")
                                     : ablation_suite(corpus, cfg, dir / "checkpoints");
  report.config_json = config_echo(sub);
  report.write(dir / "report");
  print_summary(report);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Motor-imagery EEG pretraining pipeline"};
  app.require_subcommand(1);
  app.fallthrough();
  app.option_defaults()->always_capture_default();
  auto config = std::make_shared<JsonConfig>();
  app.config_formatter(config);
  app.set_config("--config", "", "JSON file of option values (command-line flags win)");
  app.allow_config_extras(false);

  // synth
  SynthConfig synth;
  std::string synth_out;
  auto* s_synth = app.add_subcommand("synth", "Write a synthetic motor-imagery dataset");
  s_synth->add_option("--subjects", synth.n_subjects, "Number of subjects")->check(CLI::Range(1, 100000));
  s_synth->add_option("--trials-per-class", synth.trials_per_class, "Trials per class and subject")->check(CLI::Range(1, 100000));
  s_synth->add_option("--fs", synth.fs, "Sampling rate (Hz)")->check(CLI::PositiveNumber);
  s_synth->add_option("--duration", synth.duration, "Trial length (s)")->check(CLI::PositiveNumber);
  s_synth->add_option("--seed", synth.seed, "Generator seed");
  s_synth->add_option("--name", synth.name, "Dataset name");
  s_synth->add_option("--subject-offset", synth.subject_offset, "Number of the first subject")->check(CLI::NonNegativeNumber);
  s_synth->add_option("--out", synth_out, "Output directory")->required();

  // preprocess
  PreprocessArgs pp_pre;
  std::string pp_manifest, pp_out, pp_role = "pretrain";
  double pp_fraction = 0.3;
  auto* s_pre = app.add_subcommand("preprocess", "Harmonize and align a dataset");
  s_pre->add_option("--manifest", pp_manifest, "Input manifest")->required()->check(CLI::ExistingFile);
  s_pre->add_option("--out", pp_out, "Output directory")->required();
  s_pre->add_option("--role", pp_role, "pretrain: align on all trials; downstream: align on the calibration split")
      ->check(CLI::IsMember({"pretrain", "downstream"}));
  s_pre->add_option("--finetune-fraction", pp_fraction, "Calibration fraction for the downstream role");
  pp_pre.add(s_pre);

  // pretrain
  PreprocessArgs pt_pre;
  TrainArgs pt_train;
  std::vector<std::string> pt_manifests;
  std::string pt_out;
  auto* s_pt = app.add_subcommand("pretrain", "Joint masked-reconstruction and classification pretraining");
  s_pt->add_option("--pretrain-manifest", pt_manifests, "Pretraining manifests")->required()->check(CLI::ExistingFile);
  s_pt->add_option("--out", pt_out, "Output directory for checkpoints and report")->required();
  pt_pre.add(s_pt);
  pt_train.add(s_pt);

  // finetune
  PreprocessArgs ft_pre;
  TrainArgs ft_train;
  std::vector<std::string> ft_manifests;
  std::string ft_ckpt, ft_out;
  auto* s_ft = app.add_subcommand("finetune", "Fine-tune a checkpoint on downstream subjects");
  s_ft->add_option("--checkpoint", ft_ckpt, "Pretrained checkpoint")->required()->check(CLI::ExistingFile);
  s_ft->add_option("--downstream-manifest", ft_manifests, "Downstream manifests")->required()->check(CLI::ExistingFile);
  s_ft->add_option("--out", ft_out, "Output directory for checkpoints and report")->required();
  ft_pre.add(s_ft);
  ft_train.add(s_ft);

  // eval
  PreprocessArgs ev_pre;
  std::vector<std::string> ev_manifests;
  std::string ev_ckpt, ev_variant = "full";
  double ev_fraction = 0.3, ev_alpha = 0.5;
  auto* s_ev = app.add_subcommand("eval", "Test accuracy of a checkpoint (read-only, CSV on stdout)");
  s_ev->add_option("--checkpoint", ev_ckpt, "Checkpoint")->required()->check(CLI::ExistingFile);
  s_ev->add_option("--downstream-manifest", ev_manifests, "Downstream manifests")->required()->check(CLI::ExistingFile);
  s_ev->add_option("--finetune-fraction", ev_fraction, "Calibration fraction (test = the remainder)");
  s_ev->add_option("--variant", ev_variant, "Variant label for the CSV rows")
      ->check(CLI::IsMember({"full", "no_pretrain", "no_selfsup"}));
  s_ev->add_option("--alpha", ev_alpha, "Mask-ratio label for the CSV rows");
  ev_pre.add(s_ev);

  // sweep and ablate
  PreprocessArgs sw_pre, ab_pre;
  TrainArgs sw_train, ab_train;
  std::vector<std::string> sw_pm, sw_dm, ab_pm, ab_dm;
  std::string sw_out, ab_out;
  std::vector<double> sw_alphas = default_alphas();
  auto* s_sw = app.add_subcommand("sweep", "Mask-ratio sweep: full pretrain + fine-tune per ratio");
  auto* s_ab = app.add_subcommand("ablate", "Ablation: full, without self-supervision, without pretraining");
  for (auto [sub, pm, dm, out, pre, train] :
       {std::tuple{s_sw, &sw_pm, &sw_dm, &sw_out, &sw_pre, &sw_train}, std::tuple{s_ab, &ab_pm, &ab_dm, &ab_out, &ab_pre, &ab_train}}) {
    sub->add_option("--pretrain-manifest", *pm, "Pretraining manifests")->required()->check(CLI::ExistingFile);
    sub->add_option("--downstream-manifest", *dm, "Downstream manifests")->required()->check(CLI::ExistingFile);
    sub->add_option("--out", *out, "Output directory for checkpoints and report")->required();
    pre->add(sub);
    train->add(sub);
  }
  s_sw->add_option("--alphas", sw_alphas, "Mask ratios to sweep");

  for (int i = 1; i < argc; ++i) {
    const std::string a = argv[i];
    if (auto* sub = app.get_subcommand_no_throw(a)) {
      config->section = sub->get_name();
      break;
    }
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (s_synth->parsed()) return cmd_synth(s_synth, synth, synth_out);
    if (s_pre->parsed()) {
      if (!(pp_fraction > 0.0 && pp_fraction < 1.0)) throw UsageError("--finetune-fraction must lie in (0, 1)");
      return cmd_preprocess(pp_manifest, pp_out, pp_role, pp_pre.options(), pp_fraction);
    }
    if (s_pt->parsed()) return cmd_pretrain(s_pt, pt_manifests, pt_out, pt_pre.options(), pt_train.resolved());
    if (s_ft->parsed()) return cmd_finetune(s_ft, ft_ckpt, ft_manifests, ft_out, ft_pre.options(), ft_train.resolved());
    if (s_ev->parsed()) {
      if (!(ev_fraction > 0.0 && ev_fraction < 1.0)) throw UsageError("--finetune-fraction must lie in (0, 1)");
      return cmd_eval(ev_ckpt, ev_manifests, ev_pre.options(), ev_fraction, ev_variant, ev_alpha);
    }
    if (s_sw->parsed()) {
      for (double a : sw_alphas)
        if (!(a > 0.0 && a < 1.0)) throw UsageError("every mask ratio must lie in (0, 1)");
      return cmd_experiment(s_sw, "sweep", sw_pm, sw_dm, sw_out, sw_pre.options(), sw_train.resolved(), sw_alphas);
    }
    if (s_ab->parsed()) return cmd_experiment(s_ab, "ablate", ab_pm, ab_dm, ab_out, ab_pre.options(), ab_train.resolved(), {});
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitUsage;
}
