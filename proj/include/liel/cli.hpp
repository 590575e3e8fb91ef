#pragma once

// The `liel` command line: build-index, train, link, eval, selfcheck.

#include <cstdio>
#include <exception>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "liel/config.hpp"
#include "liel/decode.hpp"
#include "liel/eval_io.hpp"
#include "liel/evaluator.hpp"
#include "liel/kb_store.hpp"
#include "liel/selfcheck.hpp"

namespace liel::cli {

namespace detail {

inline StopWords load_stopwords(const std::string& path) {
  if (path.empty()) return {};
  std::ifstream in(path);
  if (!in) throw InputError("cannot read stop-word file " + path);
  return read_stopwords(in);
}

inline std::ofstream open_output(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write " + path);
  return out;
}

inline void echo_config(std::ostream& err, const std::string& command,
                        const PipelineConfig& config) {
  err << "liel " << command << " config: " << config.to_json().dump() << '\n';
}

inline void print_table(std::ostream& out, const EvalReport& r) {
  auto fixed = [](double v) {
    std::ostringstream s;
    s << std::fixed << std::setprecision(4) << v;
    return s.str();
  };
  out << "metric " << r.metric << "  queries " << r.queries << "  in-kb " << r.in_kb
      << "  nil " << r.nil << '\n';
  out << std::left << std::setw(24) << "document" << std::setw(11) << "precision"
      << std::setw(11) << "recall" << "f1\n";
  for (const auto& d : r.per_document) {
    out << std::left << std::setw(24) << d.doc_id << std::setw(11) << fixed(d.precision)
        << std::setw(11) << fixed(d.recall) << fixed(d.f1) << '\n';
  }
  out << std::left << std::setw(24) << "micro" << std::setw(11) << fixed(r.precision)
      << std::setw(11) << fixed(r.recall) << fixed(r.f1) << '\n';
  if (r.metric == "bot") {
    out << std::left << std::setw(24) << "macro" << std::setw(11) << fixed(r.macro_precision)
        << std::setw(11) << fixed(r.macro_recall) << fixed(r.macro_f1) << '\n';
  }
}

}  // namespace detail

inline int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Entity linking with a maximum-entropy tuple model", "liel"};
  app.require_subcommand(1);
  PipelineConfig config;
  std::string metric = "bot";

  auto* build = app.add_subcommand("build-index", "Build the anchor index from KB records");
  build->add_option("--kb", config.kb_path, "KB records (JSON lines)")->required();
  build->add_option("--out", config.output_path, "Index file to write")->required();
  build->add_option("--max-candidates", config.max_candidates, "Candidate cap stored in the index");

  auto* train = app.add_subcommand("train", "Train a model on labeled documents");
  train->add_option("--kb-index,--index", config.index_path, "Index file")->required();
  train->add_option("--train", config.train_path, "Labeled documents (JSON lines)")->required();
  train->add_option("--out", config.output_path, "Model file to write")->required();
  train->add_option("--sigma", config.sigma, "L2 regularization weight");
  train->add_option("--max-candidates", config.max_candidates, "Candidates per mention");
  train->add_option("--gap", config.gap, "Max tokens between linked mentions");
  train->add_option("--window", config.window, "Context window in tokens (even)");
  train->add_option("--top-n", config.top_n, "Terms kept in top vectors");
  train->add_option("--budget", config.budget, "Max tuples per component");
  train->add_option("--pmi-blacklist", config.pmi_blacklist,
                    "Drop categories seen in more than this share of gold entities");
  train->add_option("--max-iterations", config.max_iterations, "L-BFGS iteration cap");
  train->add_option("--tolerance", config.tolerance, "Gradient infinity-norm tolerance");
  train->add_option("--stopwords", config.stopwords_path, "Stop-word list, one per line");
  train->add_option("--seed", config.seed, "Random seed");

  auto* link = app.add_subcommand("link", "Link mentions in documents");
  link->add_option("--model", config.model_path, "Model file")->required();
  link->add_option("--index", config.index_path, "Index file")->required();
  link->add_option("--in", config.input_path, "Documents (JSON lines)")->required();
  link->add_option("--out", config.output_path, "Predictions to write")->required();
  link->add_option("--jobs", config.jobs, "Worker threads");
  link->add_option("--seed", config.seed, "Random seed");

  auto* eval = app.add_subcommand("eval", "Score predictions against gold documents");
  eval->add_option("--metric", metric, "bot or b3plus")
      ->check(CLI::IsMember({"bot", "b3plus"}));
  eval->add_option("--pred", config.input_path, "Predictions (JSON lines)")->required();
  eval->add_option("--gold", config.gold_path, "Gold documents (JSON lines)")->required();
  eval->add_option("--out", config.output_path, "JSON report to write");

  auto* check = app.add_subcommand("selfcheck", "Run invariant checks on bundled fixtures");
  check->add_option("--seed", config.seed, "Random seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err);
  }

  try {
    config.validate();
    if (*build) {
      detail::echo_config(err, "build-index", config);
      const KbStore kb = build_index(read_kb_file(config.kb_path),
                                     {static_cast<std::uint32_t>(config.max_candidates)});
      kb.save_file(config.output_path);
      err << "indexed " << kb.index().entry_count << " entries, "
          << kb.index().postings.size() << " anchors, " << kb.index().dangling_links
          << " dangling links\n";
    } else if (*train) {
      detail::echo_config(err, "train", config);
      const KbStore kb = KbStore::load_file(config.index_path);
      const auto docs = read_documents_file(config.train_path);
      TrainOptions options;
      options.sigma = config.sigma;
      options.pmi_blacklist = config.pmi_blacklist;
      options.decode = config.decode_config();
      options.optimizer = config.optimizer();
      const auto result =
          train_from_documents(docs, kb, detail::load_stopwords(config.stopwords_path), options);
      save_model_file(result.result.model, config.output_path);
      err << "trained on " << result.stats.instances << " components ("
          << result.stats.injected_gold << " with injected gold, "
          << result.stats.skipped_unlabeled << " unlabeled skipped); "
          << result.result.iterations << " iterations, " << to_string(result.result.status)
          << ", CLL " << result.result.objective_trace.back() << '\n';
    } else if (*link) {
      detail::echo_config(err, "link", config);
      const KbStore kb = KbStore::load_file(config.index_path);
      const Model model = load_model_file(config.model_path);
      const auto docs = read_documents_file(config.input_path);
      const Linker linker(kb, model);
      const auto predictions = link_documents(linker, docs, config.jobs);
      auto file = detail::open_output(config.output_path);
      write_predictions(file, predictions);
      err << "linked " << predictions.size() << " mentions in " << docs.size()
          << " documents\n";
    } else if (*eval) {
      detail::echo_config(err, "eval", config);
      std::ifstream pred_in(config.input_path);
      if (!pred_in) throw InputError("cannot read predictions " + config.input_path);
      const auto predictions = read_predictions(pred_in);
      const auto gold = read_documents_file(config.gold_path);
      const EvalReport report =
          metric == "bot"
              ? bot_f1(predicted_title_bags(predictions), gold_title_bags(gold))
              : b3plus_f1(predicted_labels(predictions), gold_labels(gold));
      if (!config.output_path.empty()) {
        auto file = detail::open_output(config.output_path);
        file << report_to_json(report).dump(2) << '\n';
      }
      detail::print_table(out, report);
    } else if (*check) {
      detail::echo_config(err, "selfcheck", config);
      bool all = true;
      for (const auto& r : selfcheck::run_all(config.seed)) {
        out << (r.passed ? "PASS " : "FAIL ") << r.name << " (" << r.detail << ")\n";
        all = all && r.passed;
      }
      return all ? 0 : 1;
    }
  } catch (const Error& e) {
    err << "liel: error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    err << "liel: error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}

inline int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  std::vector<const char*> argv;
  argv.push_back("liel");
  for (const auto& a : args) argv.push_back(a.c_str());
  return run(static_cast<int>(argv.size()), argv.data(), out, err);
}

}  // namespace liel::cli
