// Command-line entry point: corpus generation, vocabulary mining, user
// matching, the HTTP service and the simulated-user study.

#include <csignal>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "critique/config.hpp"
#include "critique/error.hpp"
#include "critique/service.hpp"
#include "critique/session.hpp"
#include "critique/simulate.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

critique::Server* g_server = nullptr;

void on_signal(int) {
  if (g_server != nullptr) g_server->stop();
}

struct ConfigFlags {
  std::string config_file;
  std::optional<std::size_t> top_n;
  std::optional<std::size_t> k_expl;
  std::optional<std::size_t> vocab_size;
  std::optional<double> df_low;
  std::optional<double> df_high;
  std::optional<std::string> backend;

  void add_to(CLI::App* app) {
    app->add_option("--config", config_file, "JSON config file")->check(CLI::ExistingFile);
    app->add_option("--top-n", top_n, "Recommendations shown per step");
    app->add_option("--k-expl", k_expl, "Keyphrases per explanation");
    app->add_option("--vocab-size", vocab_size, "Keyphrases to mine");
    app->add_option("--df-low", df_low, "Minimum item document frequency");
    app->add_option("--df-high", df_high, "Maximum item document frequency");
    app->add_option("--backend", backend, "shared | per_item");
  }

  critique::Config resolve() const {
    critique::Config c;
    if (!config_file.empty()) c = critique::load_config(config_file);
    json overrides = json::object();
    if (top_n) overrides["top_n"] = *top_n;
    if (k_expl) overrides["k_expl"] = *k_expl;
    if (vocab_size) overrides["vocab_size"] = *vocab_size;
    if (df_low) overrides["df_low"] = *df_low;
    if (df_high) overrides["df_high"] = *df_high;
    if (backend) overrides["backend"] = *backend;
    return critique::merge_config(c, overrides);
  }
};

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw critique::Error(critique::ErrorCode::Io, "cannot write " + path.string());
  out << text;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multi-step critiquing recommender"};
  app.require_subcommand(1);

  // generate
  auto* gen = app.add_subcommand("generate", "Write a synthetic corpus (reviews.jsonl, items.jsonl)");
  critique::SyntheticParams synth;
  std::string gen_out;
  gen->add_option("--out", gen_out, "Output directory")->required();
  gen->add_option("--seed", synth.seed);
  gen->add_option("--destinations", synth.n_destinations);
  gen->add_option("--hotels-min", synth.hotels_min);
  gen->add_option("--hotels-max", synth.hotels_max);
  gen->add_option("--users", synth.n_users);
  gen->add_option("--reviews-per-user", synth.reviews_per_user);
  gen->add_option("--vocab-size", synth.vocab_size, "Planted keyphrases");
  gen->add_option("--features-min", synth.features_min);
  gen->add_option("--features-max", synth.features_max);
  gen->add_option("--theme-size", synth.theme_size);
  gen->add_option("--theme-share", synth.theme_share);
  gen->add_option("--preference-weight", synth.preference_weight);

  // mine
  auto* mine = app.add_subcommand("mine", "Mine the keyphrase vocabulary and print it");
  std::string mine_data;
  std::string mine_out;
  std::string mine_exclude;
  ConfigFlags mine_cfg;
  mine->add_option("--data", mine_data, "Data directory")->required()->check(CLI::ExistingDirectory);
  mine->add_option("--out", mine_out, "Write vocab.txt here instead of stdout");
  mine->add_option("--exclude", mine_exclude, "File of phrases to exclude")->check(CLI::ExistingFile);
  mine_cfg.add_to(mine);

  // match
  auto* match = app.add_subcommand("match", "Match a free-text wish to the closest user");
  std::string match_data;
  std::string match_query;
  match->add_option("--data", match_data)->required()->check(CLI::ExistingDirectory);
  match->add_option("--query", match_query)->required();

  // index
  auto* index = app.add_subcommand("index", "Persist the TF-IDF user index as JSON");
  std::string index_data;
  std::string index_out;
  index->add_option("--data", index_data)->required()->check(CLI::ExistingDirectory);
  index->add_option("--out", index_out)->required();

  // serve
  auto* serve = app.add_subcommand("serve", "Run the HTTP API");
  std::string serve_data;
  std::string serve_host = "0.0.0.0";
  int serve_port = 8080;
  std::string serve_static;
  std::string serve_snapshot;
  ConfigFlags serve_cfg;
  serve->add_option("--data", serve_data)->required()->check(CLI::ExistingDirectory);
  serve->add_option("--host", serve_host);
  serve->add_option("--port", serve_port);
  serve->add_option("--static", serve_static, "Built UI bundle served under /")
      ->check(CLI::ExistingDirectory);
  serve->add_option("--snapshot", serve_snapshot,
                    "Session snapshot file, restored at start and written on shutdown");
  serve_cfg.add_to(serve);

  // simulate
  auto* sim = app.add_subcommand("simulate", "Run the simulated-user study");
  std::string sim_data;
  bool sim_synthetic = false;
  std::uint64_t sim_seed = 0;
  std::size_t sim_sessions = 200;
  std::size_t sim_steps = 10;
  std::string sim_policy = "target_driven";
  std::string sim_out;
  std::size_t sim_threads = 1;
  ConfigFlags sim_cfg;
  auto* data_opt = sim->add_option("--data", sim_data)->check(CLI::ExistingDirectory);
  auto* synth_opt = sim->add_flag("--synthetic", sim_synthetic, "Use the default synthetic corpus");
  data_opt->excludes(synth_opt);
  sim->add_option("--seed", sim_seed);
  sim->add_option("--sessions", sim_sessions);
  sim->add_option("--steps", sim_steps);
  sim->add_option("--policy", sim_policy, "target_driven | random");
  sim->add_option("--threads", sim_threads);
  sim->add_option("--out", sim_out, "Report JSON path (stdout summary always printed)");
  sim_cfg.add_to(sim);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*gen) {
      auto corpus = critique::generate_synthetic(synth);
      fs::create_directories(gen_out);
      std::ofstream reviews(fs::path(gen_out) / "reviews.jsonl");
      critique::write_reviews(reviews, corpus.reviews);
      std::ofstream items(fs::path(gen_out) / "items.jsonl");
      critique::write_items(items, corpus.catalog);
      std::cout << corpus.reviews.size() << " reviews, " << corpus.catalog.size() << " items, "
                << corpus.catalog.destinations().size() << " destinations\n";
    } else if (*mine) {
      const auto cfg = mine_cfg.resolve();
      critique::MiningOptions options{cfg.vocab_size, cfg.df_low, cfg.df_high, {}};
      if (!mine_exclude.empty()) {
        for (const auto& line : critique::split_lines(critique::read_file(mine_exclude))) {
          auto p = critique::to_lower(critique::trim(line));
          if (!p.empty()) options.exclude.insert(p);
        }
      }
      const fs::path dir(mine_data);
      auto vocab = critique::mine_vocabulary(critique::load_reviews(dir / "reviews.jsonl"),
                                             critique::load_items(dir / "items.jsonl"), options);
      std::string text;
      for (const auto& p : vocab.phrases()) text += p + "\n";
      if (mine_out.empty()) {
        std::cout << text;
      } else {
        write_text(mine_out, text);
      }
    } else if (*match) {
      auto system = critique::System::load(match_data);
      auto m = critique::match_user(system.index, match_query, system.stopwords);
      std::cout << json{{"user_id", m.user_id}, {"similarity", m.similarity}}.dump() << "\n";
    } else if (*index) {
      const fs::path dir(index_data);
      auto corpus = critique::load_reviews(dir / "reviews.jsonl");
      auto stop = fs::exists(dir / "stopwords.txt")
                      ? critique::StopwordSet::from_file(dir / "stopwords.txt")
                      : critique::StopwordSet::bundled();
      critique::build_tfidf_index(critique::build_user_documents(corpus, stop)).save(index_out);
    } else if (*serve) {
      auto system = critique::System::load(serve_data, serve_cfg.resolve());
      critique::Api api(system);
      if (!serve_snapshot.empty() && fs::exists(serve_snapshot)) {
        api.restore(json::parse(critique::read_file(serve_snapshot)));
      }
      std::optional<fs::path> static_dir;
      if (!serve_static.empty()) static_dir = serve_static;
      critique::Server server(api, static_dir);
      g_server = &server;
      std::signal(SIGINT, on_signal);
      std::signal(SIGTERM, on_signal);
      std::cerr << "listening on " << serve_host << ":" << serve_port << " ("
                << system.catalog.size() << " items, " << system.vocab.size()
                << " keyphrases)\n";
      const bool ok = server.listen(serve_host, serve_port);
      g_server = nullptr;
      if (!serve_snapshot.empty()) write_text(serve_snapshot, api.snapshot().dump());
      return ok ? 0 : 1;
    } else if (*sim) {
      if (sim_data.empty() && !sim_synthetic) {
        std::cerr << "simulate: pass --data DIR or --synthetic\n";
        return 2;
      }
      const auto cfg = sim_cfg.resolve();
      auto system = sim_synthetic
                        ? [&] {
                            auto c = critique::generate_synthetic(critique::SyntheticParams{});
                            return critique::System::build(std::move(c.reviews),
                                                           std::move(c.catalog), cfg);
                          }()
                        : critique::System::load(sim_data, cfg);
      critique::StudyParams params;
      params.seed = sim_seed;
      params.sessions = sim_sessions;
      params.max_steps = sim_steps;
      params.policy = critique::parse_policy(sim_policy);
      params.backend = cfg.backend;
      params.threads = sim_threads;
      const auto reports = critique::run_study(system, params);
      const auto metrics = critique::aggregate(reports);

      json sessions = json::array();
      for (const auto& r : reports) sessions.push_back(critique::report_to_json(r));
      json report = {{"params",
                      {{"seed", sim_seed},
                       {"sessions", sim_sessions},
                       {"steps", sim_steps},
                       {"policy", critique::to_string(params.policy)},
                       {"backend", critique::to_string(params.backend)},
                       {"config", cfg.to_json()}}},
                     {"aggregate", critique::metrics_to_json(metrics)},
                     {"sessions", sessions}};
      if (!sim_out.empty()) write_text(sim_out, report.dump(2));
      std::cout << critique::metrics_to_json(metrics).dump(2) << "\n";
    }
  } catch (const critique::Error& e) {
    std::cerr << "error [" << critique::to_string(e.code()) << "]: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
