#pragma once

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "reqsmell/corpus.hpp"
#include "reqsmell/error.hpp"
#include "reqsmell/eval.hpp"
#include "reqsmell/smells.hpp"

namespace reqsmell {

/// Everything a command needs, with a default for every field. Loaded from
/// JSON; command-line flags override afterwards.
struct RunConfig {
  std::uint64_t seed = 42;
  DetectMode autolabel_mode = DetectMode::pos_proxy;
  DetectMode lint_mode = DetectMode::lexicon;
  std::string lexicons;    // directory; empty means bundled
  std::string tag_lexicon; // file; empty means bundled
  bool retain_clean = true;
  std::string stop_words; // file; empty means none
  PipelineConfig pipeline;
  std::size_t cv_k = 5;
  std::vector<double> curve_fractions = default_curve_fractions();
  double gap_threshold = 0.1;

  nlohmann::ordered_json to_json() const {
    const auto& p = pipeline;
    nlohmann::ordered_json j;
    j["seed"] = seed;
    j["autolabel_mode"] = std::string(name(autolabel_mode));
    j["lint_mode"] = std::string(name(lint_mode));
    j["lexicons"] = lexicons;
    j["tag_lexicon"] = tag_lexicon;
    j["retain_clean"] = retain_clean;
    j["labels"] = p.labels == LabelChoice::core ? "core" : p.labels == LabelChoice::all ? "all" : "auto";
    j["model"] = std::string(name(p.model));
    j["threshold"] = p.threshold;
    j["features"] = {{"min_df", p.features.min_df}, {"max_df_ratio", p.features.max_df_ratio},
                     {"stop_words", stop_words}};
    j["smote"] = {{"enabled", p.smote_enabled}, {"k_neighbors", p.smote_k_neighbors},
                  {"target_ratio", p.smote_target_ratio}};
    j["mlp"] = {{"hidden", p.mlp.hidden}, {"learning_rate", p.mlp.learning_rate}, {"epochs", p.mlp.epochs},
                {"batch_size", p.mlp.batch_size}, {"l2", p.mlp.l2}};
    j["svm"] = {{"lambda", p.svm.lambda}, {"epochs", p.svm.epochs}};
    j["nb"] = {{"smoothing", p.nb_smoothing}};
    j["ensemble"] = {{"rule", std::string(name(p.ensemble_rule))}};
    j["cv"] = {{"k", cv_k}, {"fold_mode", p.fold_mode == FoldMode::random ? "random" : "iterative_stratified"}};
    j["curve"] = {{"fractions", curve_fractions}, {"gap_threshold", gap_threshold}};
    return j;
  }

  /// 64-bit FNV-1a of the canonical JSON form, as 16 hex digits.
  std::string hash() const {
    const auto text = to_json().dump();
    std::uint64_t h = 14695981039346656037ULL;
    for (unsigned char c : text) {
      h ^= c;
      h *= 1099511628211ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
  }

  /// Applies the keys present in `j` on top of the current values. Unknown
  /// keys and ill-typed values raise an error naming the dotted key.
  void merge(const nlohmann::json& j) {
    if (!j.is_object()) throw Error("config: top level must be a JSON object");
    auto& p = pipeline;
    for (auto it = j.begin(); it != j.end(); ++it) {
      const std::string& key = it.key();
      const auto& v = it.value();
      if (key == "seed") seed = get<std::uint64_t>(v, key);
      else if (key == "autolabel_mode") autolabel_mode = mode(v, key);
      else if (key == "lint_mode") lint_mode = mode(v, key);
      else if (key == "lexicons") lexicons = get<std::string>(v, key);
      else if (key == "tag_lexicon") tag_lexicon = get<std::string>(v, key);
      else if (key == "retain_clean") retain_clean = get<bool>(v, key);
      else if (key == "labels") {
        auto s = get<std::string>(v, key);
        if (s == "auto") p.labels = LabelChoice::auto_detect;
        else if (s == "core") p.labels = LabelChoice::core;
        else if (s == "all") p.labels = LabelChoice::all;
        else throw Error("config key 'labels': expected auto, core or all");
      } else if (key == "model") {
        auto k = parse_model_kind(get<std::string>(v, key));
        if (!k) throw Error("config key 'model': unknown model '" + v.get<std::string>() + "'");
        p.model = *k;
      } else if (key == "threshold") p.threshold = get<double>(v, key);
      else if (key == "features") section(v, key, [&](const std::string& k, const nlohmann::json& x) {
        if (k == "min_df") p.features.min_df = get<std::size_t>(x, key + "." + k);
        else if (k == "max_df_ratio") p.features.max_df_ratio = get<double>(x, key + "." + k);
        else if (k == "stop_words") stop_words = get<std::string>(x, key + "." + k);
        else unknown(key + "." + k);
      });
      else if (key == "smote") section(v, key, [&](const std::string& k, const nlohmann::json& x) {
        if (k == "enabled") p.smote_enabled = get<bool>(x, key + "." + k);
        else if (k == "k_neighbors") p.smote_k_neighbors = get<std::size_t>(x, key + "." + k);
        else if (k == "target_ratio") p.smote_target_ratio = get<double>(x, key + "." + k);
        else unknown(key + "." + k);
      });
      else if (key == "mlp") section(v, key, [&](const std::string& k, const nlohmann::json& x) {
        if (k == "hidden") p.mlp.hidden = get<std::size_t>(x, key + "." + k);
        else if (k == "learning_rate") p.mlp.learning_rate = get<double>(x, key + "." + k);
        else if (k == "epochs") p.mlp.epochs = get<std::size_t>(x, key + "." + k);
        else if (k == "batch_size") p.mlp.batch_size = get<std::size_t>(x, key + "." + k);
        else if (k == "l2") p.mlp.l2 = get<double>(x, key + "." + k);
        else unknown(key + "." + k);
      });
      else if (key == "svm") section(v, key, [&](const std::string& k, const nlohmann::json& x) {
        if (k == "lambda") p.svm.lambda = get<double>(x, key + "." + k);
        else if (k == "epochs") p.svm.epochs = get<std::size_t>(x, key + "." + k);
        else unknown(key + "." + k);
      });
      else if (key == "nb") section(v, key, [&](const std::string& k, const nlohmann::json& x) {
        if (k == "smoothing") p.nb_smoothing = get<double>(x, key + "." + k);
        else unknown(key + "." + k);
      });
      else if (key == "ensemble") section(v, key, [&](const std::string& k, const nlohmann::json& x) {
        if (k == "rule") {
          auto r = parse_ensemble_rule(get<std::string>(x, key + "." + k));
          if (!r) throw Error("config key 'ensemble.rule': expected mean_score or majority_vote");
          p.ensemble_rule = *r;
        } else unknown(key + "." + k);
      });
      else if (key == "cv") section(v, key, [&](const std::string& k, const nlohmann::json& x) {
        if (k == "k") cv_k = get<std::size_t>(x, key + "." + k);
        else if (k == "fold_mode") {
          auto m = parse_fold_mode(get<std::string>(x, key + "." + k));
          if (!m) throw Error("config key 'cv.fold_mode': expected random or iterative_stratified");
          p.fold_mode = *m;
        } else unknown(key + "." + k);
      });
      else if (key == "curve") section(v, key, [&](const std::string& k, const nlohmann::json& x) {
        if (k == "fractions") curve_fractions = get<std::vector<double>>(x, key + "." + k);
        else if (k == "gap_threshold") gap_threshold = get<double>(x, key + "." + k);
        else unknown(key + "." + k);
      });
      else unknown(key);
    }
  }

  static RunConfig load(const std::string& path) {
    RunConfig c;
    if (path.empty()) return c;
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open config '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    const auto text = ss.str();
    if (detail::blank(text)) return c;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
      throw Error("config '" + path + "': invalid JSON (" + e.what() + ")");
    }
    c.merge(j);
    return c;
  }

private:
  [[noreturn]] static void unknown(const std::string& key) { throw Error("unknown config key '" + key + "'"); }

  template <class T>
  static T get(const nlohmann::json& v, const std::string& key) {
    try {
      if constexpr (std::is_same_v<T, bool>) {
        if (!v.is_boolean()) throw Error("");
      } else if constexpr (std::is_same_v<T, std::string>) {
        if (!v.is_string()) throw Error("");
      } else if constexpr (std::is_integral_v<T>) {
        if (!v.is_number_unsigned()) throw Error("");
      } else if constexpr (std::is_floating_point_v<T>) {
        if (!v.is_number()) throw Error("");
      }
      return v.get<T>();
    } catch (const std::exception&) {
      throw Error("config key '" + key + "': wrong type");
    }
  }

  static DetectMode mode(const nlohmann::json& v, const std::string& key) {
    auto m = parse_detect_mode(get<std::string>(v, key));
    if (!m) throw Error("config key '" + key + "': expected pos_proxy or lexicon");
    return *m;
  }

  template <class F>
  static void section(const nlohmann::json& v, const std::string& key, F&& each) {
    if (!v.is_object()) throw Error("config key '" + key + "': expected object");
    for (auto it = v.begin(); it != v.end(); ++it) each(it.key(), it.value());
  }
};

} // namespace reqsmell
