#include "cli.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>

#include "noiseflood/classifier.hpp"
#include "noiseflood/csv.hpp"
#include "noiseflood/detection.hpp"
#include "noiseflood/detector.hpp"
#include "noiseflood/errors.hpp"
#include "noiseflood/evaluation.hpp"
#include "noiseflood/flooding.hpp"
#include "noiseflood/manifest.hpp"
#include "noiseflood/score_csv.hpp"
#include "noiseflood/trees.hpp"

namespace nflood::cli {
namespace {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

/// Flags shared by the commands that run the flooding search.
struct RunConfig {
  std::string classifier = "builtin:band-energy";
  std::optional<int> step_size;
  std::optional<int> epsilon_max;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> bands;
  std::size_t workers = 1;
  int timeout_ms = static_cast<int>(kDefaultResponseTimeout.count());

  FloodingConfig flooding() const {
    FloodingConfig cfg;
    cfg.step_size = step_size.value_or(kDefaultStepSize);
    cfg.epsilon_max = epsilon_max.value_or(kDefaultEpsilonMax);
    if (!seed) throw ConfigError("--seed is required: scoring is never implicitly seeded");
    cfg.seed = *seed;
    cfg.validate();
    if (workers < 1) throw ConfigError("--workers must be at least 1");
    if (timeout_ms < 1) throw ConfigError("--timeout-ms must be positive");
    return cfg;
  }

  BandPlan plan() const { return bands ? BandPlan::parse(*bands) : BandPlan{}; }

  // Worker count and output paths are left out: outputs do not depend on them.
  json to_json(const FloodingConfig& cfg, const BandPlan& plan) const {
    return json{{"classifier", classifier},
                {"s", cfg.step_size},
                {"eps_max", cfg.epsilon_max},
                {"seed", cfg.seed},
                {"bands", plan.edges_string()}};
  }
};

void add_run_flags(CLI::App& cmd, RunConfig& rc) {
  cmd.add_option("--classifier", rc.classifier,
                 "builtin:band-energy or exec:<command> (wire protocol over stdio)");
  cmd.add_option("--step", rc.step_size, "noise amplitude step s");
  cmd.add_option("--eps-max", rc.epsilon_max, "maximum noise amplitude");
  cmd.add_option("--seed", rc.seed, "run seed (required)");
  cmd.add_option("--bands", rc.bands, "five band edges in Hz, e.g. 0,2000,4000,6000,8000");
  cmd.add_option("--workers", rc.workers, "parallel scoring workers");
  cmd.add_option("--timeout-ms", rc.timeout_ms, "external classifier response timeout");
}

int exit_code_for(const std::vector<RowFailure>& failures) {
  if (failures.empty()) return kSuccess;
  for (const auto& f : failures) {
    if (f.classifier_error) return kClassifierFailure;
  }
  return kPartialFailure;
}

void report_failures(const std::vector<RowFailure>& failures, std::size_t total,
                     std::ostream& err) {
  if (failures.empty()) return;
  err << failures.size() << " of " << total << " rows failed:\n";
  for (const auto& f : failures) {
    err << "  row " << f.row_index << " (" << f.id << "): " << f.message << '\n';
  }
}

ProgressCallback progress_printer(std::ostream& err) {
  return [&err](std::size_t done, std::size_t total) {
    const std::size_t step = std::max<std::size_t>(total / 10, 1);
    if (done % step == 0 || done == total) err << "scored " << done << "/" << total << '\n';
  };
}

// ---------------------------------------------------------------- score

struct ScoreArgs {
  fs::path manifest;
  fs::path out;
  RunConfig run;
};

int cmd_score(const ScoreArgs& args, std::ostream& out, std::ostream& err) {
  const FloodingConfig cfg = args.run.flooding();
  const BandPlan plan = args.run.plan();
  const auto rows = load_manifest(args.manifest);
  auto classifier =
      make_classifier(args.run.classifier, std::chrono::milliseconds(args.run.timeout_ms));

  auto scores =
      score_dataset(rows, *classifier, cfg, plan, args.run.workers, progress_printer(err));

  json provenance = args.run.to_json(cfg, plan);
  provenance["command"] = "score";
  provenance["manifest"] = args.manifest.string();
  provenance["manifest_hash"] = file_fingerprint(args.manifest);

  ScoreTable table;
  table.plan = plan;
  table.seed = cfg.seed;
  table.step_size = cfg.step_size;
  table.epsilon_max = cfg.epsilon_max;
  table.provenance = provenance.dump();
  table.rows = std::move(scores.vectors);
  write_score_csv(table, args.out);

  out << "wrote " << table.rows.size() << " score vectors to " << args.out.string() << '\n';
  report_failures(scores.failures, rows.size(), err);
  return exit_code_for(scores.failures);
}

// ---------------------------------------------------------------- train

struct TrainArgs {
  fs::path scores;
  fs::path out;
  std::string kind;
  std::string band = "unfiltered";
  std::optional<int> max_depth;
  std::size_t min_leaf = 1;
  std::size_t trees = 100;
  std::size_t max_features = 2;
  bool no_bootstrap = false;
  std::optional<std::size_t> stages;
  double learning_rate = 0.1;
  std::optional<std::uint64_t> seed;
};

std::size_t band_index_for(const std::string& text, const BandPlan& plan) {
  const FrequencyBand band = FrequencyBand::parse(text);
  for (std::size_t i = 0; i < kNumBands; ++i) {
    if (plan[i] == band) return i;
  }
  throw ConfigError("band " + text + " is not part of the score file's band plan");
}

double training_f1(const DetectorModel& model, std::span<const ScoreVector> rows) {
  return confusion([&](const ScoreVector& v) { return model.detect(v); }, rows).f1();
}

int cmd_train(const TrainArgs& args, std::ostream& out) {
  const DetectorKind kind = parse_detector_kind(args.kind);
  const ScoreTable table = read_score_csv(args.scores);
  const auto& rows = table.rows;
  for (const auto& v : rows) {
    if (!v.is_adversarial) throw DataError("training row '" + v.id + "' has no ground truth");
  }

  DetectorModel model;
  model.kind = kind;
  auto& p = model.provenance;
  p.seed = table.seed;
  p.step_size = table.step_size;
  p.epsilon_max = table.epsilon_max;
  p.plan = table.plan;
  p.dataset_hash = file_fingerprint(args.scores);
  p.training_rows = rows.size();

  json run{{"command", "train"}, {"kind", args.kind}, {"scores", args.scores.string()}};
  if (!table.provenance.empty()) run["scoring"] = json::parse(table.provenance);

  const auto print_member = [&](const ThresholdModel& m) {
    out << "  " << table.plan[m.band_index].name() << ": threshold " << m.threshold
        << ", info gain " << m.stats.info_gain << " bits"
        << (m.stats.degenerate ? " (degenerate: all scores equal)" : "") << '\n';
  };

  switch (kind) {
    case DetectorKind::Threshold: {
      const std::size_t band = band_index_for(args.band, table.plan);
      std::vector<LabeledScore> scores;
      for (const auto& v : rows) {
        scores.push_back({static_cast<double>(v.scores[band].epsilon), *v.is_adversarial});
      }
      const auto m = learn_threshold(scores, band);
      run["band"] = table.plan[band].name();
      model.body = m;
      out << "threshold detector\n";
      print_member(m);
      break;
    }
    case DetectorKind::Majority:
    case DetectorKind::Ltv: {
      const auto members = learn_band_thresholds(rows);
      VotingModel voting{members, 3};
      if (kind == DetectorKind::Ltv) {
        voting = learn_vote_threshold(rows, members);
        const auto f1 = vote_threshold_f1(rows, members);
        out << "training F1 by vote threshold:";
        for (std::size_t k = 0; k < kNumBands; ++k) out << " k=" << k + 1 << ':' << f1[k];
        out << '\n';
      }
      model.body = voting;
      out << (kind == DetectorKind::Ltv ? "learned" : "majority") << " vote threshold "
          << voting.vote_threshold << '\n';
      for (const auto& m : members) print_member(m);
      break;
    }
    case DetectorKind::Tree: {
      const auto examples = to_examples(rows);
      TreeParams params{args.max_depth.value_or(4), args.min_leaf};
      run["max_depth"] = params.max_depth;
      run["min_leaf"] = params.min_leaf;
      model.body = fit_tree(examples, params);
      out << "decision tree with " << std::get<DecisionTree>(model.body).nodes.size()
          << " nodes\n";
      break;
    }
    case DetectorKind::Forest: {
      const auto examples = to_examples(rows);
      ForestParams params;
      params.n_trees = args.trees;
      params.tree = TreeParams{args.max_depth.value_or(4), args.min_leaf};
      params.max_features = args.max_features;
      params.bootstrap = !args.no_bootstrap;
      params.seed = args.seed.value_or(table.seed);
      run["trees"] = params.n_trees;
      run["max_depth"] = params.tree.max_depth;
      run["min_leaf"] = params.tree.min_leaf;
      run["max_features"] = params.max_features;
      run["bootstrap"] = params.bootstrap;
      run["seed"] = params.seed;
      model.body = fit_forest(examples, params);
      out << "random forest with " << params.n_trees << " trees\n";
      break;
    }
    case DetectorKind::AdaBoost: {
      const auto examples = to_examples(rows);
      AdaBoostParams params{args.stages.value_or(50)};
      run["stages"] = params.n_stages;
      const auto m = fit_adaboost(examples, params);
      out << "AdaBoost with " << m.stages.size() << " stages\n";
      model.body = m;
      break;
    }
    case DetectorKind::GBoost: {
      const auto examples = to_examples(rows);
      GBoostParams params;
      params.n_stages = args.stages.value_or(100);
      params.learning_rate = args.learning_rate;
      params.max_depth = args.max_depth.value_or(3);
      params.min_leaf = args.min_leaf;
      run["stages"] = params.n_stages;
      run["learning_rate"] = params.learning_rate;
      run["max_depth"] = params.max_depth;
      run["min_leaf"] = params.min_leaf;
      const auto m = fit_gboost(examples, params);
      out << "gradient boosting with " << m.stages.size() << " stages, training log-loss "
          << m.training_loss.back() << '\n';
      model.body = m;
      break;
    }
  }
  p.run_config = run.dump();
  out << "training F1 " << training_f1(model, rows) << '\n';
  save_model(model, args.out);
  out << "wrote " << to_string(kind) << " model to " << args.out.string() << '\n';
  return kSuccess;
}

// ---------------------------------------------------------------- detect

struct DetectArgs {
  fs::path model;
  std::optional<fs::path> manifest;
  std::optional<fs::path> wav;
  std::optional<fs::path> out;
  RunConfig run;
};

int cmd_detect(DetectArgs args, std::ostream& out, std::ostream& err) {
  const DetectorModel model = load_model(args.model);
  const auto& p = model.provenance;
  if (args.run.step_size && *args.run.step_size != p.step_size) {
    throw ConfigError("model was trained with s=" + std::to_string(p.step_size) +
                      " but --step is " + std::to_string(*args.run.step_size));
  }
  if (args.run.epsilon_max && *args.run.epsilon_max != p.epsilon_max) {
    throw ConfigError("model was trained with eps_max=" + std::to_string(p.epsilon_max) +
                      " but --eps-max is " + std::to_string(*args.run.epsilon_max));
  }
  if (args.run.bands && !(BandPlan::parse(*args.run.bands) == p.plan)) {
    throw ConfigError("model was trained with bands " + p.plan.edges_string() +
                      " but --bands is " + *args.run.bands);
  }
  args.run.step_size = p.step_size;
  args.run.epsilon_max = p.epsilon_max;
  args.run.bands = p.plan.edges_string();
  const FloodingConfig cfg = args.run.flooding();

  std::vector<ManifestRow> rows;
  if (args.manifest && args.wav) throw ConfigError("give either --manifest or --wav, not both");
  if (args.manifest) {
    rows = load_manifest(*args.manifest);
  } else if (args.wav) {
    ManifestRow row;
    row.id = args.wav->filename().string();
    row.path = args.wav->string();
    row.resolved = fs::absolute(*args.wav);
    rows.push_back(row);
  } else {
    throw ConfigError("detect needs --manifest or --wav");
  }

  auto classifier =
      make_classifier(args.run.classifier, std::chrono::milliseconds(args.run.timeout_ms));
  const auto scores = score_dataset(rows, *classifier, cfg, p.plan, args.run.workers);

  std::ofstream file;
  if (args.out) {
    file.open(*args.out, std::ios::binary | std::ios::trunc);
    if (!file) throw Error("cannot write " + args.out->string());
  }
  std::ostream& sink = args.out ? file : out;
  json provenance = args.run.to_json(cfg, p.plan);
  provenance["command"] = "detect";
  provenance["model"] = args.model.string();
  provenance["model_kind"] = to_string(model.kind);
  sink << "# nflood-verdicts v1 " << provenance.dump() << '\n';
  std::vector<std::string> header{"id", "verdict", "probability"};
  for (const auto& s : p.plan.column_suffixes()) header.push_back("eps_" + s);
  sink << csv::join_record(header) << '\n';
  for (const auto& v : scores.vectors) {
    const Prediction pred = model.predict(v);
    std::ostringstream prob;
    prob.precision(6);
    prob << pred.probability;
    std::vector<std::string> fields{v.id, pred.adversarial ? "adversarial" : "benign", prob.str()};
    for (const auto& s : v.scores) fields.push_back(std::to_string(s.epsilon));
    sink << csv::join_record(fields) << '\n';
  }
  report_failures(scores.failures, rows.size(), err);
  return exit_code_for(scores.failures);
}

// ---------------------------------------------------------------- eval

struct EvalArgs {
  std::vector<fs::path> models;
  fs::path scores;
  fs::path out;
};

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw Error("cannot write " + path.string());
  f << text;
}

int cmd_eval(const EvalArgs& args, std::ostream& out) {
  const ScoreTable table = read_score_csv(args.scores);
  const std::string scores_hash = file_fingerprint(args.scores);
  fs::create_directories(args.out);

  std::vector<EvalReport> reports;
  for (const auto& model_path : args.models) {
    const DetectorModel model = load_model(model_path);
    const auto& p = model.provenance;
    if (p.step_size != table.step_size || p.epsilon_max != table.epsilon_max ||
        !(p.plan == table.plan)) {
      throw ConfigError(model_path.string() + " was trained with s=" +
                        std::to_string(p.step_size) + ", eps_max=" +
                        std::to_string(p.epsilon_max) + ", bands " + p.plan.edges_string() +
                        " but the test scores use s=" + std::to_string(table.step_size) +
                        ", eps_max=" + std::to_string(table.epsilon_max) + ", bands " +
                        table.plan.edges_string());
    }
    const std::string name = model_path.stem().string();
    EvalReport report = evaluate([&](const ScoreVector& v) { return model.detect(v); },
                                 table.rows, name);
    report.config_hash = file_fingerprint(model_path);

    std::ostringstream text;
    text << "# nflood-report v1\n";
    text << "model: " << model_path.string() << '\n';
    text << "kind: " << to_string(model.kind) << '\n';
    write_report(report, text);
    text << "test_scores: " << args.scores.string() << '\n';
    text << "test_scores_hash: " << scores_hash << '\n';
    text << "seed: " << table.seed << '\n';
    text << "s: " << table.step_size << '\n';
    text << "eps_max: " << table.epsilon_max << '\n';
    text << "bands: " << table.plan.edges_string() << '\n';
    if (!table.provenance.empty()) text << "scoring_config: " << table.provenance << '\n';
    if (!p.run_config.empty()) text << "training_config: " << p.run_config << '\n';
    write_text(args.out / (name + ".report.txt"), text.str());

    if (report.matrix) {
      std::ostringstream pct;
      write_matrix_csv(*report.matrix, pct, false);
      write_text(args.out / (name + ".matrix.csv"), pct.str());
      std::ostringstream raw;
      write_matrix_csv(*report.matrix, raw, true);
      write_text(args.out / (name + ".matrix_raw.csv"), raw.str());
    }
    out << name << ": precision " << (report.precision ? std::to_string(*report.precision) : "undefined")
        << ", recall " << (report.recall ? std::to_string(*report.recall) : "undefined")
        << ", F1 " << report.f1 << '\n';
    reports.push_back(std::move(report));
  }

  std::ostringstream comparison;
  write_comparison_csv(reports, comparison);
  write_text(args.out / "comparison.csv", comparison.str());
  return kSuccess;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"nflood: detect adversarial audio by noise flooding"};
  app.require_subcommand(1);

  ScoreArgs score;
  auto* score_cmd = app.add_subcommand("score", "compute flooding score vectors for a manifest");
  score_cmd->add_option("--manifest", score.manifest, "dataset manifest CSV")->required();
  score_cmd->add_option("--out", score.out, "score CSV to write")->required();
  add_run_flags(*score_cmd, score.run);

  TrainArgs train;
  auto* train_cmd = app.add_subcommand("train", "train a detector from a score CSV");
  train_cmd->add_option("--scores", train.scores, "training score CSV")->required();
  train_cmd->add_option("--kind", train.kind,
                        "threshold|majority|ltv|tree|forest|adaboost|gboost")->required();
  train_cmd->add_option("--out", train.out, "model file to write")->required();
  train_cmd->add_option("--band", train.band, "band for --kind threshold (e.g. 0-2000)");
  train_cmd->add_option("--max-depth", train.max_depth, "tree depth limit");
  train_cmd->add_option("--min-leaf", train.min_leaf, "minimum samples per leaf");
  train_cmd->add_option("--trees", train.trees, "forest size");
  train_cmd->add_option("--max-features", train.max_features, "forest features per split");
  train_cmd->add_flag("--no-bootstrap", train.no_bootstrap, "forest: fit every tree on all rows");
  train_cmd->add_option("--stages", train.stages, "boosting stages");
  train_cmd->add_option("--learning-rate", train.learning_rate, "gradient boosting step");
  train_cmd->add_option("--seed", train.seed, "forest seed (defaults to the scoring seed)");

  DetectArgs detect;
  auto* detect_cmd = app.add_subcommand("detect", "score inputs and print verdicts");
  detect_cmd->add_option("--model", detect.model, "trained model file")->required();
  detect_cmd->add_option("--manifest", detect.manifest, "manifest of inputs");
  detect_cmd->add_option("--wav", detect.wav, "single WAV input");
  detect_cmd->add_option("--out", detect.out, "verdict file (default stdout)");
  add_run_flags(*detect_cmd, detect.run);

  EvalArgs eval;
  auto* eval_cmd = app.add_subcommand("eval", "evaluate detectors on a test score CSV");
  eval_cmd->add_option("--model", eval.models, "model file (repeatable)")->required();
  eval_cmd->add_option("--scores", eval.scores, "test score CSV")->required();
  eval_cmd->add_option("--out", eval.out, "report directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kSuccess : kConfigError;
  }

  try {
    if (*score_cmd) return cmd_score(score, out, err);
    if (*train_cmd) return cmd_train(train, out);
    if (*detect_cmd) return cmd_detect(detect, out, err);
    if (*eval_cmd) return cmd_eval(eval, out);
  } catch (const ClassifierError& e) {
    err << "classifier failure: " << e.what() << '\n';
    return kClassifierFailure;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kConfigError;
  }
  return kConfigError;
}

}  // namespace nflood::cli
