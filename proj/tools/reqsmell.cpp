// reqsmell: requirements smell linter and multi-label learning workbench.
//
// Exit status: 0 success (lint: no findings), 1 lint findings, 2 error.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <set>
#include <string>

#include <CLI11.hpp>

#include "reqsmell/reqsmell.hpp"

namespace {

using namespace reqsmell;
using ojson = nlohmann::ordered_json;

constexpr int kExitClean = 0;
constexpr int kExitFindings = 1;
constexpr int kExitError = 2;

struct Common {
  std::string in;
  std::string out;
  std::string format;
  std::string config_path;
  std::optional<std::uint64_t> seed;
};

CorpusFormat input_format(const Common& c) {
  if (!c.format.empty()) {
    auto f = parse_corpus_format(c.format);
    if (!f) throw Error("unknown format '" + c.format + "' (expected jsonl or csv)");
    return *f;
  }
  return std::filesystem::path(c.in).extension() == ".csv" ? CorpusFormat::csv : CorpusFormat::jsonl;
}

RunConfig resolve_config(const Common& c) {
  auto cfg = RunConfig::load(c.config_path);
  if (c.seed) cfg.seed = *c.seed;
  return cfg;
}

void finalize_features(RunConfig& cfg) {
  if (cfg.stop_words.empty()) return;
  auto text = detail::read_file(cfg.stop_words);
  std::set<std::string> words;
  for (const auto& w : terms_of(text)) words.insert(w);
  cfg.pipeline.features.stop_words = std::move(words);
}

SmellLexicons smell_lexicons(const RunConfig& cfg) {
  return cfg.lexicons.empty() ? SmellLexicons::bundled() : SmellLexicons::load_dir(cfg.lexicons);
}

TagLexicon tag_lexicon(const RunConfig& cfg) {
  return cfg.tag_lexicon.empty() ? TagLexicon::bundled() : TagLexicon::load(cfg.tag_lexicon);
}

std::string pretty(const ojson& j) { return j.dump(2) + "\n"; }

/// Every run leaves the resolved configuration next to its primary output.
void write_config_sidecar(const std::string& out, const std::string& command, const RunConfig& cfg) {
  ojson j;
  j["command"] = command;
  j["config_hash"] = cfg.hash();
  j["config"] = cfg.to_json();
  detail::write_file(out + ".config.json", pretty(j));
}

int cmd_ingest(const Common& c, const std::string& out_format) {
  auto cfg = resolve_config(c);
  auto corpus = load_corpus(c.in, input_format(c));
  auto fmt = parse_corpus_format(out_format);
  if (!fmt) throw Error("unknown output format '" + out_format + "'");
  save_corpus(corpus, c.out, *fmt);
  write_config_sidecar(c.out, "ingest", cfg);
  std::cerr << "ingested " << corpus.size() << " requirement(s)\n";
  return kExitClean;
}

int cmd_autolabel(const Common& c, const std::string& mode, const std::string& lexicons, bool drop_clean,
                  const std::string& findings_out) {
  auto cfg = resolve_config(c);
  if (!mode.empty()) {
    auto m = parse_detect_mode(mode);
    if (!m) throw Error("unknown mode '" + mode + "' (expected pos_proxy or lexicon)");
    cfg.autolabel_mode = *m;
  }
  if (!lexicons.empty()) cfg.lexicons = lexicons;
  if (drop_clean) cfg.retain_clean = false;
  auto corpus = load_corpus(c.in, input_format(c));
  auto labeled = autolabel(corpus, cfg.autolabel_mode, smell_lexicons(cfg), tag_lexicon(cfg), cfg.retain_clean);
  save_corpus(labeled, c.out, CorpusFormat::jsonl);
  if (!findings_out.empty()) detail::write_file(findings_out, pretty(findings_json(labeled)));
  write_config_sidecar(c.out, "autolabel", cfg);
  std::cerr << "labeled " << labeled.size() << " requirement(s)\n";
  return kExitClean;
}

int cmd_stats(const Common& c) {
  auto cfg = resolve_config(c);
  auto corpus = load_corpus(c.in, input_format(c));
  auto report = corpus_stats(corpus).to_json();
  report["config_hash"] = cfg.hash();
  detail::write_file(c.out, pretty(report));
  write_config_sidecar(c.out, "stats", cfg);
  return kExitClean;
}

int cmd_lint(const Common& c, const std::string& mode, const std::string& lexicons, const std::string& summary_out,
             bool quiet) {
  auto cfg = resolve_config(c);
  if (!mode.empty()) {
    auto m = parse_detect_mode(mode);
    if (!m) throw Error("unknown mode '" + mode + "' (expected pos_proxy or lexicon)");
    cfg.lint_mode = *m;
  }
  if (!lexicons.empty()) cfg.lexicons = lexicons;
  auto corpus = load_corpus(c.in, input_format(c));
  auto labeled = autolabel(corpus, cfg.lint_mode, smell_lexicons(cfg), tag_lexicon(cfg));
  detail::write_file(c.out, pretty(findings_json(labeled)));
  auto summary = lint_summary(labeled);
  if (!summary_out.empty()) detail::write_file(summary_out, summary);
  if (!quiet) std::cout << summary;
  write_config_sidecar(c.out, "lint", cfg);
  for (const auto& it : labeled.items())
    if (!it.findings.empty()) return kExitFindings;
  return kExitClean;
}

Corpus load_labeled(const Common& c) {
  auto corpus = load_corpus(c.in, input_format(c));
  if (!corpus.all_labeled()) throw Error(c.in + ": corpus is not labeled (run autolabel first)");
  return corpus;
}

int cmd_train(const Common& c, const std::string& model) {
  auto cfg = resolve_config(c);
  if (!model.empty()) {
    auto k = parse_model_kind(model);
    if (!k) throw Error("unknown model '" + model + "' (expected mlp, svm, nb or ensemble)");
    cfg.pipeline.model = *k;
  }
  finalize_features(cfg);
  auto corpus = load_labeled(c);
  auto labels = resolve_labels(corpus, cfg.pipeline.labels);
  auto fitted = fit_pipeline(corpus, labels, cfg.pipeline, cfg.seed);
  ojson j;
  j["config_hash"] = cfg.hash();
  j["seed"] = cfg.seed;
  j["vocabulary"] = fitted.vocabulary.to_json();
  j["model"] = model_to_json(fitted.model, labels.names());
  j["notes"] = fitted.notes;
  detail::write_file(c.out, j.dump() + "\n");
  write_config_sidecar(c.out, "train", cfg);
  return kExitClean;
}

int cmd_crossval(const Common& c, std::optional<std::size_t> k) {
  auto cfg = resolve_config(c);
  if (k) cfg.cv_k = *k;
  finalize_features(cfg);
  auto corpus = load_labeled(c);
  auto rep = cross_validate(corpus, cfg.pipeline, cfg.cv_k, cfg.seed);
  ojson j;
  j["config_hash"] = cfg.hash();
  j["seed"] = cfg.seed;
  j["model"] = std::string(name(cfg.pipeline.model));
  auto body = rep.to_json();
  for (auto it = body.begin(); it != body.end(); ++it) j[it.key()] = it.value();
  detail::write_file(c.out, pretty(j));
  write_config_sidecar(c.out, "crossval", cfg);
  std::cerr << "mean micro-f1 " << rep.summary([](const EvalReport& r) { return r.micro_f1; }).mean << "\n";
  return kExitClean;
}

int cmd_curve(const Common& c) {
  auto cfg = resolve_config(c);
  finalize_features(cfg);
  auto corpus = load_labeled(c);
  auto curve = learning_curve(corpus, cfg.pipeline, cfg.curve_fractions, cfg.gap_threshold, cfg.seed);
  detail::write_file(c.out, curve.to_csv());
  auto summary = curve.summary_json();
  ojson j;
  j["config_hash"] = cfg.hash();
  j["seed"] = cfg.seed;
  for (auto it = summary.begin(); it != summary.end(); ++it) j[it.key()] = it.value();
  detail::write_file(c.out + ".summary.json", pretty(j));
  write_config_sidecar(c.out, "curve", cfg);
  std::cerr << "gap " << curve.gap << (curve.overfit_flag ? " (overfitting)" : "") << "\n";
  return kExitClean;
}

void add_common(CLI::App* sub, Common& c, bool needs_config = true) {
  sub->add_option("--in", c.in, "Input corpus file")->required();
  sub->add_option("--out", c.out, "Output file")->required();
  sub->add_option("--format", c.format, "Input format: jsonl or csv (default: from extension)");
  if (needs_config) sub->add_option("--config", c.config_path, "JSON run configuration");
  sub->add_option("--seed", c.seed, "Root seed (overrides config)");
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"Requirements smell linter and multi-label learning workbench"};
  app.require_subcommand(1);

  Common common;
  std::string out_format = "jsonl";
  std::string mode, lexicons, findings_out, summary_out, model;
  bool drop_clean = false, quiet = false;
  std::optional<std::size_t> k;

  auto* ingest = app.add_subcommand("ingest", "Validate a JSONL/CSV corpus and write it as JSONL");
  add_common(ingest, common);
  ingest->add_option("--out-format", out_format, "jsonl or csv");

  auto* label = app.add_subcommand("autolabel", "Label every requirement from its detected smells");
  add_common(label, common);
  label->add_option("--mode", mode, "pos_proxy or lexicon");
  label->add_option("--lexicons", lexicons, "Smell lexicon directory");
  label->add_flag("--drop-clean", drop_clean, "Drop requirements without findings");
  label->add_option("--findings", findings_out, "Also write findings JSON here");

  auto* stats = app.add_subcommand("stats", "Class counts and labels-per-requirement histogram");
  add_common(stats, common);

  auto* lint = app.add_subcommand("lint", "Report smells; exit 1 when any are found");
  add_common(lint, common);
  lint->add_option("--mode", mode, "pos_proxy or lexicon");
  lint->add_option("--lexicons", lexicons, "Smell lexicon directory");
  lint->add_option("--summary", summary_out, "Write the plain-text summary here");
  lint->add_flag("--quiet", quiet, "Do not print the summary");

  auto* train = app.add_subcommand("train", "Fit vocabulary, SMOTE and a model on the whole corpus");
  add_common(train, common);
  train->add_option("--model", model, "mlp, svm, nb or ensemble");

  auto* crossval = app.add_subcommand("crossval", "k-fold cross-validation report");
  add_common(crossval, common);
  crossval->add_option("--k", k, "Number of folds");

  auto* curve = app.add_subcommand("curve", "Learning curve CSV and overfitting summary");
  add_common(curve, common);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitError;
  }

  try {
    if (*ingest) return cmd_ingest(common, out_format);
    if (*label) return cmd_autolabel(common, mode, lexicons, drop_clean, findings_out);
    if (*stats) return cmd_stats(common);
    if (*lint) return cmd_lint(common, mode, lexicons, summary_out, quiet);
    if (*train) return cmd_train(common, model);
    if (*crossval) return cmd_crossval(common, k);
    if (*curve) return cmd_curve(common);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitError;
  }
  return kExitError;
}
