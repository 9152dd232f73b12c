// SPDX-License-Identifier: Apache-2.0
//
// The `diffg` command line tool. run() is kept separate from main() so the
// test suite can drive it with string streams.
#pragma once

#include <chrono>
#include <cstdint>
#include <ctime>
#include <filesystem>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "diffg/cs_extractor.hpp"
#include "diffg/diffgraph.hpp"
#include "diffg/embed.hpp"
#include "diffg/error.hpp"
#include "diffg/neural/checkpoint.hpp"
#include "diffg/neural/gradcheck.hpp"
#include "diffg/text.hpp"
#include "diffg/trainer.hpp"
#include "diffg/world.hpp"

#ifndef DIFFG_DATA_DIR
#define DIFFG_DATA_DIR "data"
#endif

namespace diffg::cli {

inline constexpr const char* kVersion = "0.1.0";

namespace fs = std::filesystem;

enum Exit : int { ok = 0, usage = 1, data = 2, numeric = 3 };

struct Inputs {
  std::string data_dir = DIFFG_DATA_DIR;
  std::string embeddings;  // default <data>/embeddings.txt
  std::string corpus;      // default <data>/corpus.tsv
  std::string vocab;       // default <data>/vocab.tsv

  fs::path path_or(const std::string& explicit_path, const char* name) const {
    return explicit_path.empty() ? fs::path(data_dir) / name : fs::path(explicit_path);
  }
  fs::path embeddings_path() const { return path_or(embeddings, "embeddings.txt"); }
  fs::path corpus_path() const { return path_or(corpus, "corpus.tsv"); }
  fs::path vocab_path() const { return path_or(vocab, "vocab.tsv"); }
};

inline std::string utc_now() {
  auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

// Hash over every regular file of a directory in name order.
inline std::string dir_hash(const fs::path& dir) {
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(dir)) {
    if (e.is_regular_file() && e.path().filename() != "manifest.txt") files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());
  std::string acc;
  for (const auto& f : files) acc += f.filename().string() + "=" + text::file_hash(f) + "\n";
  return text::hex64(text::fnv1a(acc));
}

// Run manifest: metadata as '#' comments, then the subcommand options as
// key=value lines that `--config` reads back.
struct RunManifest {
  std::string command;
  std::vector<std::pair<std::string, std::string>> config;
  std::vector<std::pair<std::string, std::string>> inputs;  // name -> content hash
  std::uint64_t seed = 0;
  std::string started;
  std::string finished;

  std::string serialize() const {
    std::string s = "# diffg run manifest\n";
    s += "# command=" + command + "\n";
    s += "# version=" + std::string(kVersion) + "\n";
    s += "# seed=" + std::to_string(seed) + "\n";
    s += "# started=" + started + "\n";
    s += "# finished=" + finished + "\n";
    for (const auto& [k, v] : inputs) s += "# input." + k + "=" + v + "\n";
    for (const auto& [k, v] : config) s += k + "=" + v + "\n";
    return s;
  }
};

inline void write_manifest(const fs::path& path, RunManifest m) {
  m.finished = utc_now();
  text::write_file(path, m.serialize());
}

inline std::vector<std::pair<std::string, std::string>> option_values(const CLI::App& sub) {
  std::vector<std::pair<std::string, std::string>> out;
  for (const auto* opt : sub.get_options()) {
    const auto name = opt->get_single_name();
    if (opt->get_lnames().empty() || name == "help" || name == "config") continue;
    auto res = opt->results();
    if (res.empty()) {
      auto d = opt->get_default_str();
      if (d.empty()) continue;
      res = {d};
    }
    out.emplace_back(name, text::join(res, ","));
  }
  return out;
}

inline cs::CommonsenseGraph extract_graph(const world::Catalog& catalog, const embed::EmbeddingTable& table,
                                          const cs::Corpus& corpus, double threshold,
                                          cs::PipelineResult* details = nullptr) {
  auto entities = catalog.entity_names();
  auto r = cs::run_pipeline(corpus, entities, table, threshold, cs::catalog_categories(catalog));
  if (details) *details = r;
  return r.graph;
}

inline const std::vector<world::GameSpec>& split_of(const world::Dataset& d, const std::string& split) {
  if (split == "train") return d.train;
  if (split == "test") return d.test;
  if (split == "valid") return d.valid;
  if (split == "out") return d.out;
  throw ConfigError("unknown split '" + split + "'");
}

inline std::vector<double> parse_thresholds(const std::vector<std::string>& raw) {
  std::vector<double> out;
  for (const auto& s : raw) {
    char* end = nullptr;
    double v = std::strtod(s.c_str(), &end);
    if (end == s.c_str() || *end) throw ConfigError("bad threshold '" + s + "'");
    cs::check_threshold(v);
    out.push_back(v);
  }
  return out;
}

// Replaces `--config FILE` with the file's key=value lines as `--key value`
// arguments; keys already given on the command line win.
inline std::vector<std::string> expand_config(std::vector<std::string> args) {
  std::vector<std::string> rest, given;
  std::string path;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) {
      path = args[++i];
    } else if (text::starts_with(args[i], "--config=")) {
      path = args[i].substr(9);
    } else {
      if (text::starts_with(args[i], "--")) given.push_back(args[i].substr(2, args[i].find('=') - 2));
      rest.push_back(args[i]);
    }
  }
  if (path.empty()) return args;
  const auto contents = text::read_file(path);
  for (const auto& line : text::lines(contents)) {
    auto t = std::string(text::trim(line));
    if (t.empty() || t[0] == '#' || t[0] == '[') continue;
    auto eq = t.find('=');
    if (eq == std::string::npos) throw ConfigError(path + ": expected key=value, got '" + t + "'");
    auto key = std::string(text::trim(t.substr(0, eq)));
    auto value = std::string(text::trim(t.substr(eq + 1)));
    if (std::find(given.begin(), given.end(), key) != given.end()) continue;
    if (value == "false") continue;
    rest.push_back("--" + key);
    if (value != "true") rest.push_back(value);
  }
  return rest;
}

inline int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err, std::istream& in) {
  CLI::App app{"Difference-graph agent for text-based tidy-up games"};
  app.name("diffg");
  app.require_subcommand(1);
  app.set_version_flag("--version", kVersion);
  std::string config_path;

  Inputs inputs;
  auto add_inputs = [&](CLI::App* sub) {
    sub->add_option("--data", inputs.data_dir, "Directory with vocab/rooms/goals/corpus/embeddings")
        ->capture_default_str();
    sub->add_option("--embeddings", inputs.embeddings, "Word vector file (default <data>/embeddings.txt)");
    sub->add_option("--corpus", inputs.corpus, "Triple corpus (default <data>/corpus.tsv)");
    sub->add_option("--vocab", inputs.vocab, "Entity vocabulary (default <data>/vocab.tsv)");
  };

  // gen
  auto* gen = app.add_subcommand("gen", "Generate a 50/40/10 (+40 OUT) game dataset");
  gen->add_option("--config", config_path, "key=value option file, e.g. a run manifest; flags win");
  std::string gen_level = "easy", gen_out;
  std::uint64_t gen_seed = 1;
  add_inputs(gen);
  gen->add_option("--level", gen_level, "easy | medium | hard")->capture_default_str();
  gen->add_option("--seed", gen_seed, "Dataset seed")->capture_default_str();
  gen->add_option("--out", gen_out, "Output directory")->required();

  // extract
  auto* ext = app.add_subcommand("extract", "Extract the grounded commonsense graph and report precision/recall");
  ext->add_option("--config", config_path, "key=value option file, e.g. a run manifest; flags win");
  double ext_threshold = 0.3;
  std::string ext_out;
  bool ext_report = false;
  add_inputs(ext);
  ext->add_option("--threshold", ext_threshold, "Cosine similarity threshold in (0, 1]")->capture_default_str();
  ext->add_option("--out", ext_out, "Graph output file");
  ext->add_flag("--report", ext_report, "Print precision and recall against the goal graph");

  // train
  auto* trn = app.add_subcommand("train", "Train an agent with advantage actor-critic");
  trn->add_option("--config", config_path, "key=value option file, e.g. a run manifest; flags win");
  train::TrainConfig tc;
  std::string trn_dataset, trn_graph, trn_out, trn_ablation = "full", trn_activation = "elu";
  double trn_threshold = 0.3;
  bool no_graph_activation = false;
  add_inputs(trn);
  trn->add_option("--dataset", trn_dataset, "Dataset directory from `gen`")->required();
  trn->add_option("--graph", trn_graph, "Commonsense graph from `extract` (default: extract now)");
  trn->add_option("--threshold", trn_threshold, "Threshold when extracting on the fly")->capture_default_str();
  trn->add_option("--out", trn_out, "Run directory")->required();
  trn->add_option("--epochs", tc.epochs)->capture_default_str();
  trn->add_option("--train-games", tc.train_games, "Use the first n training games (0 = all)")->capture_default_str();
  trn->add_option("--lr", tc.learning_rate)->capture_default_str();
  trn->add_option("--gamma", tc.gamma)->capture_default_str();
  trn->add_option("--hidden", tc.hidden)->capture_default_str();
  trn->add_option("--seed", tc.seed)->capture_default_str();
  trn->add_option("--entropy-coef", tc.entropy_coef)->capture_default_str();
  trn->add_option("--value-coef", tc.value_coef)->capture_default_str();
  trn->add_option("--dropout", tc.dropout)->capture_default_str();
  trn->add_option("--ablation", trn_ablation, "full | no-de")->capture_default_str();
  trn->add_option("--activation", trn_activation, "elu | relu")->capture_default_str();
  trn->add_flag("--no-graph-activation", no_graph_activation, "Drop phi from the graph encoder");

  // eval
  auto* evl = app.add_subcommand("eval", "Greedy evaluation: mean +- std over seeds");
  std::vector<std::string> evl_ckpts;
  std::string evl_dataset, evl_split = "test", evl_graph, evl_policy = "model";
  std::vector<std::uint64_t> evl_seeds{1, 2, 3, 4, 5};
  double evl_threshold = 0.3;
  add_inputs(evl);
  evl->add_option("--checkpoint", evl_ckpts, "One checkpoint per seed");
  evl->add_option("--dataset", evl_dataset)->required();
  evl->add_option("--split", evl_split, "train | test | valid | out")->capture_default_str();
  evl->add_option("--graph", evl_graph);
  evl->add_option("--threshold", evl_threshold)->capture_default_str();
  evl->add_option("--policy", evl_policy, "model | oracle | random")->capture_default_str();
  evl->add_option("--seeds", evl_seeds, "Seeds for the random policy")->delimiter(',');

  // inspect
  auto* ins = app.add_subcommand("inspect", "Per-step difference graph trace of a checkpoint on one game");
  std::string ins_ckpt, ins_game, ins_graph, ins_trace;
  double ins_threshold = 0.3;
  add_inputs(ins);
  ins->add_option("--checkpoint", ins_ckpt)->required();
  ins->add_option("--game", ins_game)->required();
  ins->add_option("--graph", ins_graph);
  ins->add_option("--threshold", ins_threshold)->capture_default_str();
  ins->add_option("--trace", ins_trace, "Write the trace to this file instead of stdout");

  // play
  auto* ply = app.add_subcommand("play", "Play a game interactively");
  std::string ply_game;
  ply->add_option("--game", ply_game)->required();

  // gradcheck
  auto* grd = app.add_subcommand("gradcheck", "Finite-difference check of all parameter gradients");
  std::uint64_t grd_seed = 1;
  std::size_t grd_hidden = 8;
  double grd_tol = 1e-4;
  grd->add_option("--seed", grd_seed)->capture_default_str();
  grd->add_option("--hidden", grd_hidden)->capture_default_str();
  grd->add_option("--tolerance", grd_tol)->capture_default_str();

  // sweep-threshold
  auto* swp = app.add_subcommand("sweep-threshold", "Extraction report for each threshold");
  std::vector<std::string> swp_thresholds;
  add_inputs(swp);
  swp->add_option("thresholds", swp_thresholds, "Thresholds in (0, 1]")->required();

  std::vector<std::string> args(argv, argv + argc);
  try {
    args = expand_config(std::move(args));
  } catch (const ConfigError& e) {
    err << "diffg: " << e.what() << "\n";
    return Exit::usage;
  } catch (const std::exception& e) {
    err << "diffg: data error: " << e.what() << "\n";
    return Exit::data;
  }
  std::vector<const char*> cargs;
  for (const auto& a : args) cargs.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(cargs.size()), cargs.data());
  } catch (const CLI::CallForHelp& e) {
    out << app.help("", CLI::AppFormatMode::All);
    return Exit::ok;
  } catch (const CLI::CallForAllHelp& e) {
    out << app.help("", CLI::AppFormatMode::All);
    return Exit::ok;
  } catch (const CLI::CallForVersion& e) {
    out << kVersion << "\n";
    return Exit::ok;
  } catch (const CLI::ParseError& e) {
    err << "diffg: " << e.what() << "\n";
    return Exit::usage;
  }

  auto catalog = [&] {
    return world::Catalog::load(inputs.vocab_path(), fs::path(inputs.data_dir) / "rooms.tsv",
                                fs::path(inputs.data_dir) / "goals.tsv");
  };
  auto data_inputs = [&](bool with_corpus) {
    std::vector<std::pair<std::string, std::string>> v{
        {"vocab", text::file_hash(inputs.vocab_path())},
        {"rooms", text::file_hash(fs::path(inputs.data_dir) / "rooms.tsv")},
        {"goals", text::file_hash(fs::path(inputs.data_dir) / "goals.tsv")}};
    if (with_corpus) {
      v.emplace_back("embeddings", text::file_hash(inputs.embeddings_path()));
      v.emplace_back("corpus", text::file_hash(inputs.corpus_path()));
    }
    return v;
  };
  auto load_graph = [&](const std::string& path, double threshold, const world::Catalog& cat,
                        const embed::EmbeddingTable& table) {
    if (!path.empty()) return cs::CommonsenseGraph::load(path);
    return extract_graph(cat, table, cs::Corpus::load(inputs.corpus_path()), threshold);
  };

  try {
    const std::string started = utc_now();
    if (*gen) {
      auto level = world::parse_level(gen_level);
      auto d = world::generate_dataset(catalog(), level, gen_seed);
      world::write_dataset(d, gen_out);
      write_manifest(fs::path(gen_out) / "manifest.txt",
                     {"gen", option_values(*gen), data_inputs(false), gen_seed, started, ""});
      out << "wrote " << d.train.size() << " train, " << d.test.size() << " test, " << d.valid.size()
          << " valid, " << d.out.size() << " out games to " << gen_out << "\n";
    } else if (*ext) {
      cs::check_threshold(ext_threshold);
      auto cat = catalog();
      auto table = embed::EmbeddingTable::load(inputs.embeddings_path());
      for (const auto& w : table.warnings()) err << "warning: " << w << "\n";
      cs::PipelineResult details;
      auto g = extract_graph(cat, table, cs::Corpus::load(inputs.corpus_path()), ext_threshold, &details);
      for (const auto& w : details.warnings) err << "warning: " << w << "\n";
      if (!ext_out.empty()) {
        g.save(ext_out);
        write_manifest(ext_out + ".manifest", {"extract", option_values(*ext), data_inputs(true), 0, started, ""});
      }
      out << "corpus\t" << details.corpus_size << "\nebm\t" << details.after_ebm << "\nnbc\t" << details.after_nbc
          << "\ngrounded\t" << g.triples.size() << "\n";
      if (!ext_report) return Exit::ok;
      auto r = cs::eval_extraction(g, cat.goals());
      out << "N\t" << r.n_candidates << "\nC_g\t" << r.n_goal_matching << "\nL\t" << r.l_goals << "\nG_c\t"
          << r.l_covered << "\n";
      out << "precision\t" << (r.precision_undefined ? "undefined" : cs::percent(r.precision)) << "\nrecall\t"
          << cs::percent(r.recall) << "\n";
    } else if (*trn) {
      if (trn_ablation != "full" && trn_ablation != "no-de") throw ConfigError("ablation must be full or no-de");
      tc.difference_encoder = trn_ablation == "full";
      tc.activation = nn::parse_activation(trn_activation);
      tc.graph_activation = !no_graph_activation;
      tc.validate();
      auto cat = catalog();
      auto table = embed::EmbeddingTable::load(inputs.embeddings_path());
      auto graph = load_graph(trn_graph, trn_threshold, cat, table);
      auto res = train::make_resources(std::move(table), graph);
      auto dataset = world::load_dataset(trn_dataset);
      fs::create_directories(trn_out);
      auto run_inputs = data_inputs(trn_graph.empty());
      run_inputs.emplace_back("dataset", dir_hash(trn_dataset));
      if (!trn_graph.empty()) run_inputs.emplace_back("graph", text::file_hash(trn_graph));
      auto result = train::train(tc, dataset, res, [&](int epoch, const nn::Model& m, const train::CurveRow& row) {
        char name[32];
        std::snprintf(name, sizeof name, "epoch-%03d.ckpt", epoch);
        nn::save(m, fs::path(trn_out) / name);
        out << "epoch " << epoch << "\ttrain " << text::format_double(row.train_score) << "\tvalid "
            << text::format_double(row.valid_score) << "\tsteps " << text::format_double(row.valid_steps) << "\n";
      });
      text::write_file(fs::path(trn_out) / "curve.tsv", train::format_curve(result.curve));
      nn::save(result.best, fs::path(trn_out) / "best.ckpt");
      write_manifest(fs::path(trn_out) / "manifest.txt",
                     {"train", option_values(*trn), run_inputs, tc.seed, started, ""});
      out << "selected epoch " << result.best_epoch << "\n";
    } else if (*evl) {
      auto dataset = world::load_dataset(evl_dataset);
      const auto& games = split_of(dataset, evl_split);
      train::EvalResult r;
      if (evl_policy == "model") {
        if (evl_ckpts.empty()) throw ConfigError("--checkpoint is required for the model policy");
        auto cat = catalog();
        auto table = embed::EmbeddingTable::load(inputs.embeddings_path());
        auto graph = load_graph(evl_graph, evl_threshold, cat, table);
        auto res = train::make_resources(std::move(table), graph);
        std::vector<nn::Model> models;
        for (const auto& c : evl_ckpts) models.push_back(nn::load(c));
        r = train::evaluate(models, res, games);
      } else if (evl_policy == "oracle") {
        std::vector<train::SetResult> per;
        for (std::size_t i = 0; i < evl_seeds.size(); ++i) {
          train::OraclePolicy p;
          per.push_back(train::play_set(p, games));
        }
        r = train::summarize(per);
      } else if (evl_policy == "random") {
        std::vector<train::SetResult> per;
        for (auto s : evl_seeds) {
          train::RandomPolicy p{Rng(s, "sampling")};
          per.push_back(train::play_set(p, games));
        }
        r = train::summarize(per);
      } else {
        throw ConfigError("policy must be model, oracle or random");
      }
      char line[128];
      std::snprintf(line, sizeof line, "%s\t%zu\t%.2f\t%.2f\t%.1f\n", evl_split.c_str(), r.per_seed.size(), r.mean,
                    r.stddev, r.steps);
      out << "split\tseeds\tmean\tstd\tsteps\n" << line;
    } else if (*ins) {
      auto cat = catalog();
      auto table = embed::EmbeddingTable::load(inputs.embeddings_path());
      auto graph = load_graph(ins_graph, ins_threshold, cat, table);
      auto res = train::make_resources(std::move(table), graph);
      auto model = nn::load(ins_ckpt);
      auto spec = std::make_shared<const world::GameSpec>(world::load_game(ins_game));
      train::Agent agent(model, res, train::Mode::greedy);
      std::ostringstream trace;
      int n = 0;
      auto t = train::run(agent, spec, [&](const train::Agent& a, const train::StepRecord& rec, const world::GameState&) {
        trace << "step\t" << ++n << "\n" << obs::dump(a.tracker()) << a.graph().dump();
        trace << "chosen\t" << rec.commands[rec.chosen] << "\t" << text::format_double(std::exp(rec.log_prob)) << "\n";
        trace << "reward\t" << rec.reward << "\n";
      });
      trace << "score\t" << text::format_double(t.score) << "\nsteps\t" << t.steps.size() << "\n";
      if (ins_trace.empty()) {
        out << trace.str();
      } else {
        text::write_file(ins_trace, trace.str());
      }
    } else if (*ply) {
      auto spec = std::make_shared<const world::GameSpec>(world::load_game(ply_game));
      auto [state, obs] = world::reset(spec);
      out << obs.text;
      while (!state.done) {
        auto commands = world::admissible_commands(state);
        for (std::size_t i = 0; i < commands.size(); ++i) out << "  " << i + 1 << ". " << commands[i] << "\n";
        std::size_t choice = 0;
        while (true) {
          out << "> " << std::flush;
          std::string line;
          if (!std::getline(in, line)) {
            out << "\n";
            return Exit::ok;
          }
          auto t = std::string(text::trim(line));
          if (t == "q" || t == "quit") return Exit::ok;
          char* end = nullptr;
          unsigned long v = std::strtoul(t.c_str(), &end, 10);
          if (!t.empty() && *end == '\0' && v >= 1 && v <= commands.size()) {
            choice = v - 1;
            break;
          }
          out << "Enter a number from 1 to " << commands.size() << " (q to quit).\n";
        }
        auto r = world::step(state, commands[choice]);
        if (!r.observation.feedback.empty()) out << r.observation.feedback << "\n";
        out << r.observation.text;
      }
      out << "Final score: " << state.score << "/" << spec->goals.size() << " in " << state.steps << " steps.\n";
    } else if (*grd) {
      auto r = nn::gradcheck(grd_seed, grd_hidden, 1e-5, grd_tol);
      for (const auto& g : r.groups) {
        char line[160];
        std::snprintf(line, sizeof line, "%-14s %5zu params  max rel-err %.3e  %s\n", g.group.c_str(), g.checked,
                      g.max_error, g.max_error <= grd_tol ? "PASS" : "FAIL");
        out << line;
      }
      char line[160];
      std::snprintf(line, sizeof line, "%s rel-err %.3e (tolerance %.0e, worst %s)\n", r.pass ? "PASS" : "FAIL",
                    r.max_error, grd_tol, r.worst.c_str());
      out << line;
      return r.pass ? Exit::ok : Exit::numeric;
    } else if (*swp) {
      auto thresholds = parse_thresholds(swp_thresholds);
      auto cat = catalog();
      auto table = embed::EmbeddingTable::load(inputs.embeddings_path());
      auto corpus = cs::Corpus::load(inputs.corpus_path());
      out << "threshold\tN\tC_g\tL\tG_c\tprecision\trecall\n";
      for (double th : thresholds) {
        auto r = cs::eval_extraction(extract_graph(cat, table, corpus, th), cat.goals());
        out << text::format_double(th) << "\t" << r.n_candidates << "\t" << r.n_goal_matching << "\t" << r.l_goals
            << "\t" << r.l_covered << "\t" << (r.precision_undefined ? "undefined" : cs::percent(r.precision))
            << "\t" << cs::percent(r.recall) << "\n";
      }
    }
  } catch (const NumericError& e) {
    err << "diffg: numeric failure: " << e.what() << "\n";
    return Exit::numeric;
  } catch (const ConfigError& e) {
    err << "diffg: " << e.what() << "\n";
    return Exit::usage;
  } catch (const DataError& e) {
    err << "diffg: data error: " << e.what() << "\n";
    return Exit::data;
  } catch (const std::exception& e) {
    err << "diffg: " << e.what() << "\n";
    return Exit::data;
  }
  return Exit::ok;
}

}  // namespace diffg::cli
