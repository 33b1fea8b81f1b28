// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// wac: batch entry points for generating data, training and evaluating
// lexicons, embedding export/fusion, TTR judgements, and the teaching
// service. Every subcommand emits a JSON run report.

#include <chrono>
#include <csignal>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "wac/composition.hpp"
#include "wac/datagen.hpp"
#include "wac/embedding.hpp"
#include "wac/error.hpp"
#include "wac/io.hpp"
#include "wac/kernels.hpp"
#include "wac/teach_http.hpp"
#include "wac/text_format.hpp"
#include "wac/ttr.hpp"

using nlohmann::json;

namespace {

constexpr int kExitUsage = 2;
constexpr int kExitData = 3;
constexpr int kExitInternal = 4;
constexpr std::uint64_t kDefaultSeed = 7;

struct RunConfig {
  std::string command;
  std::uint64_t seed = kDefaultSeed;
  std::string report_path;

  // gen
  std::string preset = "color-shape";
  std::size_t scenes = 500;
  std::size_t objects = 0;
  std::size_t tokens = 0;
  std::optional<std::size_t> episodes_per_scene;
  std::optional<double> noise_sigma;

  // shared paths
  std::string data;
  std::string out;
  std::string lexicon;
  std::string scenes_file;
  std::string scene_id;
  std::string object_id;
  std::string type_file;
  std::vector<std::string> phrase;

  // train
  wac::TrainConfig train;
  bool serial = false;

  // embeddings
  std::string corpus;
  std::size_t window = 2;
  std::size_t dim = 128;
  std::string table_a;
  std::string table_b;
  std::string method = "mult";

  double threshold = 0.5;

  // serve
  std::string host = "127.0.0.1";
  int port = 8080;
};

json config_json(const wac::TrainConfig& c) {
  return {{"learning_rate", c.learning_rate}, {"l2_lambda", c.l2_lambda},
          {"max_epochs", c.max_epochs},       {"tol", c.tol},
          {"neg_ratio", c.neg_ratio},         {"cache_cap", c.cache_cap},
          {"prob_clamp_eps", c.prob_clamp_eps}};
}

/// "key = value" lines appended as trailing "--key value" arguments, so
/// that (with take-last semantics) the file overrides command-line flags.
std::vector<std::string> config_file_args(const std::string& path) {
  std::ifstream in(path);
  if (!in) wac::fail(wac::ErrorKind::NotFound, "cannot open config '" + path + "'");
  std::vector<std::string> args;
  std::string line;
  while (std::getline(in, line)) {
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    const auto eq = line.find('=');
    auto trim = [](std::string s) {
      const auto b = s.find_first_not_of(" \t\r");
      const auto e = s.find_last_not_of(" \t\r");
      return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
    };
    if (trim(line).empty()) continue;
    if (eq == std::string::npos) {
      args.push_back("--" + trim(line));
      continue;
    }
    const auto key = trim(line.substr(0, eq));
    const auto value = trim(line.substr(eq + 1));
    if (value == "true") {
      args.push_back("--" + key);
    } else if (value != "false") {
      args.push_back("--" + key);
      args.push_back(value);
    }
  }
  return args;
}

std::vector<std::string> read_phrase(const std::vector<std::string>& raw) {
  std::vector<std::string> tokens;
  for (const auto& r : raw) {
    for (auto t : wac::text::split_ws(r)) tokens.emplace_back(t);
  }
  return tokens;
}

wac::Scene find_scene(const std::vector<wac::Scene>& scenes, const std::string& id) {
  for (const auto& s : scenes) {
    if (s.id == id) return s;
  }
  wac::fail(wac::ErrorKind::NotFound, "scene '" + id + "' not found");
}

std::vector<wac::Scene> load_scene_list(const RunConfig& cfg, std::size_t& dim) {
  if (!cfg.scenes_file.empty()) {
    std::ifstream in(cfg.scenes_file);
    if (!in) wac::fail(wac::ErrorKind::NotFound, "cannot open '" + cfg.scenes_file + "'");
    auto [d, scenes] = wac::io::load_scenes(in);
    dim = d;
    return scenes;
  }
  if (!cfg.data.empty()) {
    auto data = wac::io::load_dataset(cfg.data);
    dim = data.dim;
    return data.scenes;
  }
  throw CLI::ValidationError("--scenes or --data is required");
}

void require(const std::string& value, const char* flag) {
  if (value.empty()) throw CLI::RequiredError(flag);
}

// ---------------------------------------------------------------- commands

void cmd_gen(const RunConfig& cfg, json& report) {
  require(cfg.out, "--out");
  auto spec = wac::GenerativeSpec::preset(cfg.preset, cfg.seed);
  if (cfg.noise_sigma) spec.noise_sigma = *cfg.noise_sigma;
  wac::GenerateOptions opt;
  opt.n_scenes = cfg.scenes;
  if (cfg.preset == "left-right") {
    opt.objects_per_scene = 2;
    opt.tokens_per_expression = 1;
    opt.episodes_per_scene = 0;
  } else {
    opt.objects_per_scene = cfg.preset == "fast-mapping" ? 4 : 5;
    opt.tokens_per_expression = 2;
    opt.episodes_per_scene = 1;
  }
  if (cfg.objects) opt.objects_per_scene = cfg.objects;
  if (cfg.tokens) opt.tokens_per_expression = cfg.tokens;
  if (cfg.episodes_per_scene) opt.episodes_per_scene = *cfg.episodes_per_scene;

  const auto data = wac::generate(spec, opt);
  wac::io::save_dataset(cfg.out, data);
  report["outputs"] = {cfg.out + ".scenes", cfg.out + ".episodes"};
  report["metrics"] = {{"scenes", data.scenes.size()},
                       {"episodes", data.episodes.size()},
                       {"vocab", data.vocab().size()},
                       {"dim", data.dim}};
  report["generator"] = {{"preset", cfg.preset},
                         {"noise_sigma", spec.noise_sigma},
                         {"objects_per_scene", opt.objects_per_scene},
                         {"tokens_per_expression", opt.tokens_per_expression},
                         {"episodes_per_scene", opt.episodes_per_scene}};
}

void cmd_train(const RunConfig& cfg, json& report) {
  require(cfg.data, "--data");
  require(cfg.out, "--out");
  const auto data = wac::io::load_dataset(cfg.data);
  wac::Lexicon lex(data.dim, cfg.train);
  const auto sets = wac::build_training_sets(data, cfg.train.neg_ratio, cfg.seed);
  wac::kernels::train_words(lex, sets,
                            cfg.serial ? wac::kernels::Exec::Serial : wac::kernels::Exec::Parallel);
  wac::io::save_lexicon_file(cfg.out, lex);
  const auto m = wac::kernels::evaluate(lex, data.episodes, data.scenes,
                                        wac::kernels::Exec::Parallel);
  report["outputs"] = {cfg.out};
  report["metrics"] = {{"words", lex.size()},
                       {"train_accuracy_at_1", m.accuracy_at_1},
                       {"train_mrr", m.mrr}};
}

void cmd_eval(const RunConfig& cfg, json& report) {
  require(cfg.data, "--data");
  require(cfg.lexicon, "--lexicon");
  const auto lex = wac::io::load_lexicon_file(cfg.lexicon);
  const auto data = wac::io::load_dataset(cfg.data);
  if (data.dim != lex.dim()) {
    wac::fail(wac::ErrorKind::Dimension, "dataset dimension " + std::to_string(data.dim) +
                                             " != lexicon dimension " +
                                             std::to_string(lex.dim()));
  }
  const auto m = wac::kernels::evaluate(lex, data.episodes, data.scenes,
                                        cfg.serial ? wac::kernels::Exec::Serial
                                                   : wac::kernels::Exec::Parallel);
  report["metrics"] = {{"accuracy_at_1", m.accuracy_at_1},
                       {"mrr", m.mrr},
                       {"mean_gold_rank", m.mean_gold_rank},
                       {"episodes", m.episodes}};
}

void cmd_resolve(const RunConfig& cfg, json& report) {
  require(cfg.lexicon, "--lexicon");
  require(cfg.scene_id, "--scene-id");
  const auto lex = wac::io::load_lexicon_file(cfg.lexicon);
  std::size_t dim = 0;
  const auto scene = find_scene(load_scene_list(cfg, dim), cfg.scene_id);
  scene.validate(lex.dim());
  const auto tokens = read_phrase(cfg.phrase);
  const auto dist = wac::resolve(lex, tokens, scene);
  report["metrics"] = {{"tokens", tokens},
                       {"argmax", dist.object_ids[dist.argmax()]},
                       {"distribution", wac::teach::distribution_to_json(dist)}};
}

void cmd_export(const RunConfig& cfg, json& report) {
  require(cfg.lexicon, "--lexicon");
  require(cfg.out, "--out");
  const auto table = wac::export_visual_embeddings(wac::io::load_lexicon_file(cfg.lexicon));
  wac::io::save_embeddings_file(cfg.out, table);
  report["outputs"] = {cfg.out};
  report["metrics"] = {{"words", table.vectors.size()}, {"dim", table.dim}};
}

void cmd_text_embeddings(const RunConfig& cfg, json& report) {
  require(cfg.corpus, "--corpus");
  require(cfg.out, "--out");
  std::ifstream in(cfg.corpus);
  if (!in) wac::fail(wac::ErrorKind::NotFound, "cannot open '" + cfg.corpus + "'");
  std::vector<std::vector<std::string>> corpus;
  std::string line;
  while (std::getline(in, line)) {
    std::vector<std::string> sentence;
    for (auto t : wac::text::split_ws(line)) sentence.emplace_back(t);
    if (!sentence.empty()) corpus.push_back(std::move(sentence));
  }
  const auto table = wac::build_text_embeddings(corpus, cfg.window, cfg.dim, cfg.seed);
  wac::io::save_embeddings_file(cfg.out, table);
  report["outputs"] = {cfg.out};
  report["metrics"] = {{"words", table.vectors.size()},
                       {"dim", table.dim},
                       {"sentences", corpus.size()}};
}

void cmd_fuse(const RunConfig& cfg, json& report) {
  require(cfg.table_a, "--a");
  require(cfg.table_b, "--b");
  require(cfg.out, "--out");
  const auto result = wac::fuse(wac::io::load_embeddings_file(cfg.table_a),
                                wac::io::load_embeddings_file(cfg.table_b),
                                wac::parse_fuse_method(cfg.method));
  wac::io::save_embeddings_file(cfg.out, result.table);
  report["outputs"] = {cfg.out};
  report["metrics"] = {{"words", result.table.vectors.size()},
                       {"dim", result.table.dim},
                       {"only_in_a", result.only_in_a},
                       {"only_in_b", result.only_in_b}};
}

void cmd_judge(const RunConfig& cfg, json& report) {
  require(cfg.lexicon, "--lexicon");
  require(cfg.type_file, "--type");
  require(cfg.scene_id, "--scene-id");
  require(cfg.object_id, "--object-id");
  const auto lex = wac::io::load_lexicon_file(cfg.lexicon);
  std::ifstream in(cfg.type_file);
  if (!in) wac::fail(wac::ErrorKind::NotFound, "cannot open '" + cfg.type_file + "'");
  const auto rtype = wac::ttr::parse_record_type(in);
  std::size_t dim = 0;
  const auto scene = find_scene(load_scene_list(cfg, dim), cfg.scene_id);
  const auto idx = scene.index_of(cfg.object_id);
  if (idx == wac::Scene::npos) {
    wac::fail(wac::ErrorKind::NotFound, "object '" + cfg.object_id + "' not in scene");
  }
  const auto record = wac::ttr::object_record(scene.objects[idx], rtype);
  const double p = wac::ttr::judge(record, rtype, lex);
  report["metrics"] = {{"judgement", p},
                       {"threshold", cfg.threshold},
                       {"holds", wac::ttr::holds(record, rtype, lex, cfg.threshold)}};
}

wac::teach::TeachHttpServer* g_server = nullptr;

void on_signal(int) {
  if (g_server) g_server->stop();
}

void cmd_serve(const RunConfig& cfg, json& report) {
  wac::teach::TeachService service;
  wac::teach::TeachHttpServer server(service);
  if (!server.bind(cfg.host, cfg.port)) {
    wac::fail(wac::ErrorKind::InvalidArgument,
              "cannot bind " + cfg.host + ":" + std::to_string(cfg.port));
  }
  g_server = &server;
  std::signal(SIGINT, on_signal);
  std::signal(SIGTERM, on_signal);
  std::cerr << "teach service listening on http://" << cfg.host << ":" << cfg.port << "\n";
  server.listen_after_bind();
  g_server = nullptr;
  report["metrics"] = {{"sessions", service.session_count()}};
}

void add_train_flags(CLI::App* sub, RunConfig& cfg) {
  sub->add_option("--learning-rate", cfg.train.learning_rate);
  sub->add_option("--l2-lambda", cfg.train.l2_lambda);
  sub->add_option("--max-epochs", cfg.train.max_epochs);
  sub->add_option("--tol", cfg.train.tol);
  sub->add_option("--neg-ratio", cfg.train.neg_ratio);
  sub->add_option("--cache-cap", cfg.train.cache_cap);
  sub->add_option("--prob-clamp-eps", cfg.train.prob_clamp_eps);
}

void emit_report(const RunConfig& cfg, const json& report) {
  if (cfg.report_path.empty()) {
    std::cout << report.dump() << std::endl;
    return;
  }
  std::ofstream out(cfg.report_path);
  out << report.dump(2) << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  RunConfig cfg;
  CLI::App app{"words-as-classifiers toolkit"};
  app.require_subcommand(1);
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  std::string config_path;
  app.add_option("--config", config_path, "key = value file; entries override flags");

  auto common = [&](CLI::App* sub) {
    sub->option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
    sub->add_option("--seed", cfg.seed);
    sub->add_option("--report", cfg.report_path, "write the JSON run report here");
    sub->add_option("--config", config_path, "key = value file; entries override flags");
  };

  auto* gen = app.add_subcommand("gen", "generate a synthetic dataset");
  common(gen);
  gen->add_option("--preset", cfg.preset)
      ->check(CLI::IsMember({"left-right", "color-shape", "fast-mapping"}));
  gen->add_option("--scenes", cfg.scenes);
  gen->add_option("--objects", cfg.objects);
  gen->add_option("--tokens", cfg.tokens);
  gen->add_option("--episodes-per-scene", cfg.episodes_per_scene,
                 "referring expressions per scene; 0 describes every object");
  gen->add_option("--noise-sigma", cfg.noise_sigma);
  gen->add_option("--out", cfg.out, "dataset prefix");

  auto* train = app.add_subcommand("train", "train one classifier per word");
  common(train);
  train->add_option("--data", cfg.data, "dataset prefix");
  train->add_option("--out", cfg.out, "lexicon file");
  train->add_flag("--serial", cfg.serial, "use the serial reference kernels");
  add_train_flags(train, cfg);

  auto* eval = app.add_subcommand("eval", "reference-resolution metrics");
  common(eval);
  eval->add_option("--data", cfg.data);
  eval->add_option("--lexicon", cfg.lexicon);
  eval->add_flag("--serial", cfg.serial);

  auto* res = app.add_subcommand("resolve", "referent distribution for one phrase");
  common(res);
  res->add_option("--lexicon", cfg.lexicon);
  res->add_option("--scenes", cfg.scenes_file);
  res->add_option("--data", cfg.data);
  res->add_option("--scene-id", cfg.scene_id);
  res->add_option("--phrase", cfg.phrase)->expected(1, -1)
      ->multi_option_policy(CLI::MultiOptionPolicy::TakeAll);

  auto* exp = app.add_subcommand("export-embeddings", "classifier weights as visual vectors");
  common(exp);
  exp->add_option("--lexicon", cfg.lexicon);
  exp->add_option("--out", cfg.out);

  auto* text = app.add_subcommand("build-text-embeddings", "PPMI + random projection");
  common(text);
  text->add_option("--corpus", cfg.corpus, "one whitespace-tokenized sentence per line");
  text->add_option("--window", cfg.window);
  text->add_option("--dim", cfg.dim);
  text->add_option("--out", cfg.out);

  auto* fuse = app.add_subcommand("fuse", "combine two embedding tables");
  common(fuse);
  fuse->add_option("--a", cfg.table_a);
  fuse->add_option("--b", cfg.table_b);
  fuse->add_option("--method", cfg.method)->check(CLI::IsMember({"add", "concat", "mult"}));
  fuse->add_option("--out", cfg.out);

  auto* judge = app.add_subcommand("judge", "probabilistic record-type judgement");
  common(judge);
  judge->add_option("--lexicon", cfg.lexicon);
  judge->add_option("--type", cfg.type_file);
  judge->add_option("--scenes", cfg.scenes_file);
  judge->add_option("--data", cfg.data);
  judge->add_option("--scene-id", cfg.scene_id);
  judge->add_option("--object-id", cfg.object_id);
  judge->add_option("--threshold", cfg.threshold);

  auto* serve = app.add_subcommand("serve", "run the teaching service");
  common(serve);
  serve->add_option("--host", cfg.host);
  serve->add_option("--port", cfg.port);

  const auto start = std::chrono::steady_clock::now();
  json report = {{"status", "ok"}};
  int code = 0;

  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  try {
    for (std::size_t i = 0; i + 1 < args.size(); ++i) {
      if (args[i] == "--config") {
        auto extra = config_file_args(args[i + 1]);
        args.insert(args.end(), extra.begin(), extra.end());
        break;
      }
    }
    std::reverse(args.begin(), args.end());
    app.parse(args);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    report["status"] = "error";
    report["error"] = {{"kind", "usage"}, {"message", e.what()}};
    emit_report(cfg, report);
    return kExitUsage;
  } catch (const wac::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    report["status"] = "error";
    report["error"] = {{"kind", wac::to_string(e.kind())}, {"message", e.what()}};
    emit_report(cfg, report);
    return kExitUsage;
  }

  for (auto* sub : app.get_subcommands()) cfg.command = sub->get_name();
  report["command"] = cfg.command;
  report["seed"] = cfg.seed;
  report["config"] = config_json(cfg.train);

  try {
    cfg.train.validate();
    if (cfg.command == "gen") cmd_gen(cfg, report);
    else if (cfg.command == "train") cmd_train(cfg, report);
    else if (cfg.command == "eval") cmd_eval(cfg, report);
    else if (cfg.command == "resolve") cmd_resolve(cfg, report);
    else if (cfg.command == "export-embeddings") cmd_export(cfg, report);
    else if (cfg.command == "build-text-embeddings") cmd_text_embeddings(cfg, report);
    else if (cfg.command == "fuse") cmd_fuse(cfg, report);
    else if (cfg.command == "judge") cmd_judge(cfg, report);
    else if (cfg.command == "serve") cmd_serve(cfg, report);
  } catch (const CLI::Error& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    report["status"] = "error";
    report["error"] = {{"kind", "usage"}, {"message", e.what()}};
    code = kExitUsage;
  } catch (const wac::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    report["status"] = "error";
    report["error"] = {{"kind", wac::to_string(e.kind())}, {"message", e.what()}};
    code = e.kind() == wac::ErrorKind::Internal ? kExitInternal : kExitData;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    report["status"] = "error";
    report["error"] = {{"kind", "internal"}, {"message", e.what()}};
    code = kExitInternal;
  }
  report["wall_time_s"] =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  emit_report(cfg, report);
  return code;
}
