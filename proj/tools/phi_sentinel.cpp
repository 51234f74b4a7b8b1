// phi_sentinel: command-line front end for scanning, training, evaluating and
// explaining the PHI column detector.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numeric>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "phi_sentinel/phi_sentinel.hpp"

namespace ps = phi_sentinel;
namespace fs = std::filesystem;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitPhiFound = 2;
constexpr int kExitUsage = 64;
constexpr int kExitNoInput = 66;
constexpr int kExitInternal = 70;

struct UsageError : ps::Error {
  using ps::Error::Error;
};
struct MissingInput : ps::Error {
  using ps::Error::Error;
};

struct Config {
  std::string config_path;
  std::vector<std::string> inputs;
  std::vector<std::string> label_files;
  std::string corpus_dir;
  std::string output;
  std::string output_text;
  std::string csv_output;
  std::string model_path;
  std::string library_path;
  std::string log_path;
  std::string matrix_path;
  std::string background_path;
  std::vector<std::string> columns;
  std::size_t k = ps::kDefaultSampleSize;
  std::uint64_t seed = 42;
  double threshold = ps::kDefaultThreshold;
  unsigned threads = 0;
  bool paranoid = false;
  bool fail_on_phi = false;
  std::size_t folds = 5;
  std::size_t top = 10;
  std::size_t attributions = 0;
  // gen
  std::size_t datasets = 8;
  std::size_t total_columns = 889;
  std::size_t rows = 1000;
  double phi_fraction = 0.075;
  bool no_held_out = false;
};

void require_file(const std::string& path, const char* what) {
  if (path.empty()) throw UsageError(std::string(what) + " path is required");
  if (!fs::exists(path)) throw MissingInput(std::string(what) + " not found: " + path);
}

const ps::PatternLibrary& library_for(const Config& cfg, ps::PatternLibrary& storage) {
  if (cfg.library_path.empty()) return ps::builtin_library();
  require_file(cfg.library_path, "pattern library");
  storage = ps::load_library(cfg.library_path);
  return storage;
}

ps::gbt::GbtModel model_for(const Config& cfg) {
  require_file(cfg.model_path, "model");
  return ps::gbt::load_model(cfg.model_path);
}

void log_run(const char* command, const Config& cfg, const std::string& library_version,
             const std::string& model_hash) {
  std::fprintf(stderr, "phi_sentinel %s %s: library=%s model=%s k=%zu seed=%llu threshold=%g threads=%u\n",
               ps::kToolVersion, command, library_version.c_str(), model_hash.empty() ? "-" : model_hash.c_str(),
               cfg.k, static_cast<unsigned long long>(cfg.seed), cfg.threshold, ps::resolve_threads(cfg.threads));
}

// Labeled datasets from --corpus or from paired --input/--labels flags.
std::vector<ps::Dataset> labeled_datasets(const Config& cfg) {
  if (!cfg.corpus_dir.empty()) {
    require_file((fs::path(cfg.corpus_dir) / "manifest.json").string(), "corpus manifest");
    return ps::synthgen::load_corpus(cfg.corpus_dir);
  }
  if (cfg.inputs.empty()) throw UsageError("give --corpus or at least one --input with --labels");
  if (cfg.inputs.size() != cfg.label_files.size())
    throw UsageError("every --input needs a matching --labels sidecar");
  std::vector<ps::Dataset> out;
  for (std::size_t i = 0; i < cfg.inputs.size(); ++i) {
    require_file(cfg.inputs[i], "input");
    require_file(cfg.label_files[i], "labels");
    auto ds = ps::load_dataset(cfg.inputs[i]);
    ps::apply_labels(ds, ps::load_labels(cfg.label_files[i]));
    out.push_back(std::move(ds));
  }
  return out;
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ps::IoError("cannot write " + path);
  out << text;
}

void write_json(const std::string& path, const nlohmann::ordered_json& doc) { write_text(path, doc.dump(2) + "\n"); }

// ---- subcommands ----

int cmd_gen(const Config& cfg) {
  if (cfg.output.empty()) throw UsageError("gen needs --output <dir>");
  ps::synthgen::CorpusSpec spec;
  spec.n_datasets = cfg.datasets;
  spec.total_columns = cfg.total_columns;
  spec.rows = cfg.rows;
  spec.phi_fraction = cfg.phi_fraction;
  spec.seed = cfg.seed;
  spec.held_out_formats = !cfg.no_held_out;
  log_run("gen", cfg, ps::kBuiltinLibraryVersion, {});
  const auto corpus = ps::synthgen::generate_corpus(spec, cfg.threads);
  ps::synthgen::save_corpus(cfg.output, spec, corpus);
  std::size_t columns = 0, phi = 0;
  for (const auto& g : corpus)
    for (const auto& c : g.dataset.columns) {
      ++columns;
      phi += c.label.value_or(0);
    }
  std::fprintf(stderr, "wrote %zu datasets, %zu columns, %zu PHI to %s\n", corpus.size(), columns, phi,
               cfg.output.c_str());
  return kExitOk;
}

int cmd_train(const Config& cfg) {
  if (cfg.output.empty()) throw UsageError("train needs --output <model.json>");
  ps::PatternLibrary storage;
  const auto& library = library_for(cfg, storage);
  log_run("train", cfg, library.version, {});
  const auto datasets = labeled_datasets(cfg);
  std::size_t skipped = 0;
  const auto profiles = ps::profile_labeled(datasets, library, {cfg.k, cfg.seed, cfg.threads}, &skipped);
  if (skipped) std::fprintf(stderr, "skipped %zu unlabeled or empty columns\n", skipped);
  const auto x = ps::profile_matrix(profiles);
  const auto y = ps::profile_labels(profiles);
  ps::gbt::TrainParams params;
  params.seed = cfg.seed;
  params.threads = ps::resolve_threads(cfg.threads);
  const auto trained = ps::gbt::train_calibrated(x, y, params);
  if (!trained.calibration_note.empty()) std::fprintf(stderr, "note: %s\n", trained.calibration_note.c_str());
  ps::gbt::save_model(trained.model, cfg.output);
  std::fprintf(stderr, "model %s written to %s (%zu columns, platt a=%g b=%g)\n",
               ps::gbt::model_hash(trained.model).c_str(), cfg.output.c_str(), x.rows, trained.model.platt_a,
               trained.model.platt_b);
  if (!cfg.log_path.empty()) {
    std::string log = "round,loss\n";
    for (std::size_t r = 0; r < trained.log.loss.size(); ++r) {
      char line[64];
      std::snprintf(line, sizeof line, "%zu,%.17g\n", r, trained.log.loss[r]);
      log += line;
    }
    write_text(cfg.log_path, log);
  }
  if (!cfg.matrix_path.empty()) {
    std::vector<ps::MetaFeatureVector> rows;
    for (const auto& p : profiles) rows.push_back(p.vector);
    std::ofstream out(cfg.matrix_path, std::ios::binary);
    if (!out) throw ps::IoError("cannot write " + cfg.matrix_path);
    ps::write_matrix_csv(out, rows, y);
  }
  return kExitOk;
}

int cmd_scan(const Config& cfg) {
  if (cfg.inputs.size() != 1) throw UsageError("scan needs exactly one --input");
  if (cfg.output.empty()) throw UsageError("scan needs --output <report.json>");
  require_file(cfg.inputs.front(), "input");
  ps::PatternLibrary storage;
  const auto& library = library_for(cfg, storage);
  const auto model = model_for(cfg);
  const auto hash = ps::gbt::model_hash(model);
  log_run("scan", cfg, library.version, hash);
  auto dataset = ps::load_dataset(cfg.inputs.front());
  ps::ScanOptions options{cfg.k, cfg.seed, cfg.threshold, cfg.threads, cfg.attributions};
  const auto verdicts = ps::scan(dataset, model, library, options);
  ps::ReportMeta meta{ps::kToolVersion, library.version, hash, cfg.k, cfg.seed, cfg.threshold};

  std::optional<nlohmann::ordered_json> metrics;
  if (!cfg.label_files.empty()) {
    require_file(cfg.label_files.front(), "labels");
    ps::apply_labels(dataset, ps::load_labels(cfg.label_files.front()));
    std::vector<double> regex, ml, final_scores;
    std::vector<int> labels;
    for (std::size_t c = 0; c < verdicts.size(); ++c) {
      if (!dataset.columns[c].label) continue;
      labels.push_back(*dataset.columns[c].label);
      regex.push_back(verdicts[c].prob_regex);
      ml.push_back(verdicts[c].prob_ml_calibrated);
      final_scores.push_back(verdicts[c].prob_final);
    }
    metrics = nlohmann::ordered_json{
        {"regex", ps::compute_metrics_lenient(regex, labels, cfg.threshold).metrics},
        {"ml", ps::compute_metrics_lenient(ml, labels, cfg.threshold).metrics},
        {"ensemble", ps::compute_metrics_lenient(final_scores, labels, cfg.threshold).metrics}};
  }
  ps::write_report(verdicts, meta, cfg.output, metrics ? &*metrics : nullptr);

  std::size_t flagged = 0;
  for (const auto& v : verdicts) {
    if (!v.predicted) continue;
    ++flagged;
    std::printf("%-32s final=%.3f regex=%.3f ml=%.3f%s\n", v.column_name.c_str(), v.prob_final, v.prob_regex,
                v.prob_ml_calibrated, v.best_pattern_id ? (" pattern=" + *v.best_pattern_id).c_str() : "");
  }
  std::fprintf(stderr, "%zu of %zu columns flagged\n", flagged, verdicts.size());
  return cfg.fail_on_phi && flagged > 0 ? kExitPhiFound : kExitOk;
}

int cmd_evaluate(const Config& cfg) {
  ps::PatternLibrary storage;
  const auto& library = library_for(cfg, storage);
  log_run("evaluate", cfg, library.version, {});
  const auto datasets = labeled_datasets(cfg);
  const auto profiles = ps::profile_labeled(datasets, library, {cfg.k, cfg.seed, cfg.threads});
  const auto x = ps::profile_matrix(profiles);
  const auto y = ps::profile_labels(profiles);
  std::vector<double> regex;
  for (const auto& p : profiles) regex.push_back(p.prob_regex);
  ps::CvOptions options;
  options.folds = cfg.folds;
  options.seed = cfg.seed;
  options.threshold = cfg.threshold;
  options.params.seed = cfg.seed;
  options.threads = cfg.threads;
  const auto cv = ps::cross_validate(x, y, regex, options);
  const auto table = ps::format_metric_table(cv);
  std::fputs(table.c_str(), stdout);
  if (!cfg.output_text.empty()) write_text(cfg.output_text, table);
  if (!cfg.output.empty()) {
    nlohmann::ordered_json doc;
    doc["meta"] = {{"tool_version", ps::kToolVersion}, {"library_version", library.version},
                   {"k", cfg.k},  {"seed", cfg.seed}, {"threshold", cfg.threshold},
                   {"folds", cfg.folds}, {"columns", x.rows}};
    doc["metrics"] = ps::cv_to_json(cv);
    write_json(cfg.output, doc);
  }
  return kExitOk;
}

nlohmann::ordered_json attribution_json(const ps::explain::Attribution& a, const std::vector<std::string>& names) {
  nlohmann::ordered_json j;
  j["column"] = a.column_name;
  j["phi0"] = a.phi0;
  j["contributions"] = nlohmann::ordered_json::array();
  for (std::size_t s = 0; s < a.phi.size(); ++s) j["contributions"].push_back({{"slot", names[s]}, {"value", a.phi[s]}});
  j["margin"] = a.margin;
  return j;
}

int explain_corpus(const Config& cfg) {
  ps::PatternLibrary storage;
  const auto& library = library_for(cfg, storage);
  log_run("explain", cfg, library.version, {});
  const auto datasets = labeled_datasets(cfg);
  const auto profiles = ps::profile_labeled(datasets, library, {cfg.k, cfg.seed, cfg.threads});
  const auto x = ps::profile_matrix(profiles);
  const auto y = ps::profile_labels(profiles);
  std::vector<double> regex;
  for (const auto& p : profiles) regex.push_back(p.prob_regex);
  ps::CvOptions options;
  options.folds = cfg.folds;
  options.seed = cfg.seed;
  options.params.seed = cfg.seed;
  options.threads = cfg.threads;
  const auto cv = ps::cross_validate(x, y, regex, options);
  const auto background = ps::explain::sample_background(x, cfg.seed);
  const auto report = ps::explain::importance_report(cv.fold_models, x, background, cfg.threads);

  nlohmann::ordered_json doc;
  doc["importance"] = nlohmann::ordered_json::array();
  std::string csv = "slot,importance,stddev\n";
  for (const auto& s : report.ranking) {
    doc["importance"].push_back({{"slot", s.name}, {"importance", s.importance}, {"stddev", s.stddev}});
    char line[128];
    std::snprintf(line, sizeof line, "%s,%.17g,%.17g\n", s.name.c_str(), s.importance, s.stddev);
    csv += line;
  }
  std::printf("%-22s %10s %10s\n", "slot", "importance", "stddev");
  for (const auto& s : report.top(cfg.top)) std::printf("%-22s %10.4f %10.4f\n", s.name.c_str(), s.importance, s.stddev);
  if (!cfg.output.empty()) write_json(cfg.output, doc);
  if (!cfg.csv_output.empty()) write_text(cfg.csv_output, csv);
  return kExitOk;
}

int cmd_explain(const Config& cfg) {
  if (!cfg.corpus_dir.empty()) return explain_corpus(cfg);
  if (cfg.inputs.size() != 1) throw UsageError("explain needs --corpus or exactly one --input");
  require_file(cfg.inputs.front(), "input");
  ps::PatternLibrary storage;
  const auto& library = library_for(cfg, storage);
  const auto model = model_for(cfg);
  log_run("explain", cfg, library.version, ps::gbt::model_hash(model));
  const auto dataset = ps::load_dataset(cfg.inputs.front());
  const auto vectors = ps::extract_dataset(dataset, cfg.k, cfg.seed, cfg.threads);

  ps::gbt::FeatureMatrix background;
  if (!cfg.background_path.empty()) {
    require_file(cfg.background_path, "background matrix");
    std::ifstream in(cfg.background_path, std::ios::binary);
    background = ps::explain::sample_background(ps::gbt::FeatureMatrix::from_vectors(ps::read_matrix_csv(in).rows),
                                                cfg.seed);
  } else {
    std::vector<ps::MetaFeatureVector> present;
    for (const auto& v : vectors)
      if (v) present.push_back(*v);
    if (present.empty()) throw ps::EmptyDatasetError("no column in the input has data to explain");
    background = ps::explain::sample_background(ps::gbt::FeatureMatrix::from_vectors(present), cfg.seed);
  }

  nlohmann::ordered_json out = nlohmann::ordered_json::array();
  std::string csv = "column,slot,value\n";
  for (std::size_t c = 0; c < dataset.columns.size(); ++c) {
    const auto& name = dataset.columns[c].name;
    if (!cfg.columns.empty() && std::find(cfg.columns.begin(), cfg.columns.end(), name) == cfg.columns.end())
      continue;
    if (!vectors[c]) {
      std::fprintf(stderr, "column '%s' has no data; skipped\n", name.c_str());
      continue;
    }
    const auto attribution = ps::explain::shap_values(model, *vectors[c], background);
    out.push_back(attribution_json(attribution, model.slot_names));
    std::vector<std::size_t> order(attribution.phi.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return std::fabs(attribution.phi[a]) > std::fabs(attribution.phi[b]);
    });
    std::printf("%s  margin=%.4f phi0=%.4f\n", name.c_str(), attribution.margin, attribution.phi0);
    for (std::size_t i = 0; i < std::min(cfg.top, order.size()); ++i)
      std::printf("  %-22s %+.4f\n", model.slot_names[order[i]].c_str(), attribution.phi[order[i]]);
    for (std::size_t s = 0; s < attribution.phi.size(); ++s) {
      char line[256];
      std::snprintf(line, sizeof line, ",%s,%.17g\n", model.slot_names[s].c_str(), attribution.phi[s]);
      csv += ps::detail::quote_field(name, ',') + line;
    }
  }
  for (const auto& wanted : cfg.columns) {
    const bool found = std::any_of(dataset.columns.begin(), dataset.columns.end(),
                                   [&](const ps::Column& c) { return c.name == wanted; });
    if (!found) throw UsageError("no column named '" + wanted + "' in " + cfg.inputs.front());
  }
  if (!cfg.output.empty()) write_json(cfg.output, out.size() == 1 ? out.front() : out);
  if (!cfg.csv_output.empty()) write_text(cfg.csv_output, csv);
  return kExitOk;
}

int cmd_library(const Config& cfg) {
  ps::PatternLibrary storage;
  const auto& library = library_for(cfg, storage);
  const auto doc = ps::library_to_json(library);
  if (cfg.output.empty()) {
    std::cout << doc.dump(2) << '\n';
  } else {
    write_json(cfg.output, doc);
  }
  return kExitOk;
}

// Fills options the user did not give on the command line from a JSON file
// whose keys are the long flag names without dashes.
void apply_config_file(CLI::App& app, CLI::App& sub) {
  const auto* opt = app.get_option("--config");
  if (opt->count() == 0) return;
  const auto path = opt->as<std::string>();
  std::ifstream in(path, std::ios::binary);
  if (!in) throw MissingInput("config file not found: " + path);
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw UsageError(std::string("config file is not valid JSON: ") + e.what());
  }
  if (!doc.is_object()) throw UsageError("config file must hold a JSON object");
  for (const auto& [key, value] : doc.items()) {
    CLI::Option* target = nullptr;
    for (auto* app_ptr : {&sub, &app}) {
      try {
        target = app_ptr->get_option("--" + key);
        break;
      } catch (const CLI::OptionNotFound&) {
      }
    }
    if (!target) {
      std::string alt = key;
      std::replace(alt.begin(), alt.end(), '_', '-');
      try {
        target = sub.get_option("--" + alt);
      } catch (const CLI::OptionNotFound&) {
        continue;  // keys for other subcommands are ignored
      }
    }
    if (target->count() > 0) continue;
    std::vector<std::string> values;
    auto as_text = [](const nlohmann::json& v) {
      if (v.is_string()) return v.get<std::string>();
      if (v.is_boolean()) return std::string(v.get<bool>() ? "true" : "false");
      return v.dump();
    };
    if (value.is_array()) {
      for (const auto& v : value) values.push_back(as_text(v));
    } else {
      values.push_back(as_text(value));
    }
    if (target->get_type_size() == 0) {
      if (values.size() == 1 && values.front() == "true") target->add_result("true");
    } else {
      target->add_result(values);
    }
    target->run_callback();
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Column-level PHI scanner: regex screening plus a calibrated metadata classifier"};
  app.set_version_flag("--version", std::string(ps::kToolVersion));
  app.require_subcommand(1);
  Config cfg;
  app.add_option("--config", cfg.config_path, "JSON file with default option values");

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("-k,--k", cfg.k, "values sampled per column")->check(CLI::PositiveNumber);
    sub->add_option("--seed", cfg.seed, "random seed");
    sub->add_option("--threads", cfg.threads, "worker threads (0 = PHI_SENTINEL_THREADS or all cores)");
    sub->add_option("--library", cfg.library_path, "pattern library JSON (default: built-in)");
  };
  auto add_threshold = [&](CLI::App* sub) {
    sub->add_option("--threshold", cfg.threshold, "decision threshold on the final probability")
        ->check(CLI::Range(0.0, 1.0));
    sub->add_flag("--paranoid", cfg.paranoid, "use the low 0.2 threshold");
  };
  auto add_labeled_inputs = [&](CLI::App* sub) {
    sub->add_option("--corpus", cfg.corpus_dir, "corpus directory with manifest.json");
    sub->add_option("--input", cfg.inputs, "CSV dataset (repeatable)");
    sub->add_option("--labels", cfg.label_files, "label sidecar for each --input");
  };

  auto* gen = app.add_subcommand("gen", "generate a labeled synthetic corpus");
  gen->add_option("--output", cfg.output, "output directory")->required();
  gen->add_option("--seed", cfg.seed, "random seed");
  gen->add_option("--threads", cfg.threads, "worker threads");
  gen->add_option("--datasets", cfg.datasets, "number of datasets")->check(CLI::PositiveNumber);
  gen->add_option("--columns", cfg.total_columns, "total columns over all datasets")->check(CLI::PositiveNumber);
  gen->add_option("--rows", cfg.rows, "rows per dataset")->check(CLI::PositiveNumber);
  gen->add_option("--phi-fraction", cfg.phi_fraction, "target share of PHI columns");
  gen->add_flag("--no-held-out", cfg.no_held_out, "use every format in every dataset");

  auto* train = app.add_subcommand("train", "train and calibrate a model on labeled data");
  add_common(train);
  add_labeled_inputs(train);
  train->add_option("--output,--model", cfg.output, "model file to write")->required();
  train->add_option("--log", cfg.log_path, "per-round training loss CSV");
  train->add_option("--matrix", cfg.matrix_path, "write the training feature matrix CSV");

  auto* scan = app.add_subcommand("scan", "scan one dataset and write a JSON report");
  add_common(scan);
  add_threshold(scan);
  scan->add_option("--input", cfg.inputs, "CSV dataset")->required();
  scan->add_option("--model", cfg.model_path, "trained model JSON")->required();
  scan->add_option("--output", cfg.output, "report JSON to write")->required();
  scan->add_option("--labels", cfg.label_files, "optional label sidecar; adds a metrics block");
  scan->add_option("--top", cfg.attributions, "attributions per column in the report (0 = none)");
  scan->add_flag("--fail-on-phi", cfg.fail_on_phi, "exit with status 2 when any column is flagged");

  auto* evaluate = app.add_subcommand("evaluate", "stratified k-fold evaluation of regex, ML and ensemble");
  add_common(evaluate);
  add_threshold(evaluate);
  add_labeled_inputs(evaluate);
  evaluate->add_option("--folds", cfg.folds, "number of folds")->check(CLI::Range(2, 100));
  evaluate->add_option("--output", cfg.output, "metrics JSON to write");
  evaluate->add_option("--output-text", cfg.output_text, "metrics table to write");

  auto* explain = app.add_subcommand("explain", "Shapley attributions per column, or corpus-wide importance");
  add_common(explain);
  add_labeled_inputs(explain);
  explain->add_option("--model", cfg.model_path, "trained model JSON (single-dataset mode)");
  explain->add_option("--column", cfg.columns, "column to explain (repeatable; default all)");
  explain->add_option("--background", cfg.background_path, "feature matrix CSV from train --matrix");
  explain->add_option("--folds", cfg.folds, "folds for corpus mode")->check(CLI::Range(2, 100));
  explain->add_option("--top", cfg.top, "rows in the printed table");
  explain->add_option("--output", cfg.output, "attribution JSON to write");
  explain->add_option("--csv", cfg.csv_output, "attribution CSV to write");

  auto* library = app.add_subcommand("library", "print or save the pattern library");
  library->add_option("--library", cfg.library_path, "pattern library JSON (default: built-in)");
  library->add_option("--output", cfg.output, "file to write instead of stdout");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    std::cerr << app.help();
    return kExitUsage;
  }

  try {
    CLI::App* sub = app.get_subcommands().front();
    apply_config_file(app, *sub);
    if (cfg.paranoid) {
      const auto* thr = sub->get_option_no_throw("--threshold");
      if (thr && thr->count() > 0) throw UsageError("--paranoid and --threshold are mutually exclusive");
      cfg.threshold = ps::kParanoidThreshold;
    }
    if (sub == gen) return cmd_gen(cfg);
    if (sub == train) return cmd_train(cfg);
    if (sub == scan) return cmd_scan(cfg);
    if (sub == evaluate) return cmd_evaluate(cfg);
    if (sub == explain) return cmd_explain(cfg);
    if (sub == library) return cmd_library(cfg);
    return kExitUsage;
  } catch (const UsageError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitUsage;
  } catch (const ps::SpecError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitUsage;
  } catch (const CLI::ParseError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitUsage;
  } catch (const MissingInput& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitNoInput;
  } catch (const ps::IoError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitNoInput;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "internal error: %s\n", e.what());
    return kExitInternal;
  }
}
