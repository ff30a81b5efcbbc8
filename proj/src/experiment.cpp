#include "vrpo/experiment.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "vrpo/games.hpp"
#include "vrpo/oracle.hpp"

namespace vrpo {

namespace {

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

uint64_t parse_u64(const std::string& key, const std::string& value) {
  try {
    return std::stoull(value);
  } catch (...) {
    throw InvalidConfig("config: " + key + ": expected an integer, got '" +
                        value + "'");
  }
}

int parse_int(const std::string& key, const std::string& value) {
  try {
    return std::stoi(value);
  } catch (...) {
    throw InvalidConfig("config: " + key + ": expected an integer, got '" +
                        value + "'");
  }
}

double parse_double(const std::string& key, const std::string& value) {
  try {
    return std::stod(value);
  } catch (...) {
    throw InvalidConfig("config: " + key + ": expected a number, got '" +
                        value + "'");
  }
}

bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1") return true;
  if (value == "false" || value == "0") return false;
  throw InvalidConfig("config: " + key + ": expected true/false, got '" +
                      value + "'");
}

std::vector<uint64_t> parse_seed_list(const std::string& value) {
  std::vector<uint64_t> seeds;
  std::stringstream ss(value);
  std::string item;
  while (std::getline(ss, item, ','))
    if (!item.empty()) seeds.push_back(parse_u64("seeds", item));
  return seeds;
}

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t\r");
  return s.substr(begin, end - begin + 1);
}

}  // namespace

std::string metrics_csv_row(const IterationMetrics& m) {
  std::string row = std::to_string(m.iteration);
  row += ',';
  if (m.has_exploitability()) row += fmt(m.exploitability);
  row += ',' + fmt(m.adv_std);
  row += ',' + fmt(m.clip_fraction);
  row += ',' + fmt(m.kl_ref);
  row += ',' + fmt(m.kl_uniform);
  row += ',' + fmt(m.mean_return_p1);
  row += ',' + fmt(m.mean_traj_len);
  row += ',' + fmt(m.lr_actor);
  row += ',' + fmt(m.lr_critic);
  row += ',' + fmt(m.clip_eps);
  row += ',' + fmt(m.reg_alpha);
  return row;
}

void ExperimentConfig::validate() const {
  make_game(game);        // throws InvalidConfig for unknown names
  parse_algorithm(algo);  // throws InvalidConfig for unknown algorithms
  if (seeds.empty()) throw InvalidConfig("config: seeds must be non-empty");
  trainer.validate();
}

void apply_override(ExperimentConfig& config, const std::string& key,
                    const std::string& value) {
  TrainerConfig& t = config.trainer;
  if (key == "game") config.game = value;
  else if (key == "algo") config.algo = value;
  else if (key == "out") config.out_dir = value;
  else if (key == "seeds") config.seeds = parse_seed_list(value);
  else if (key == "oracle_critic_init")
    config.oracle_critic_init = parse_bool(key, value);
  else if (key == "batch_size") t.batch_size = parse_int(key, value);
  else if (key == "minibatches") t.minibatches = parse_int(key, value);
  else if (key == "actor_epochs") t.actor_epochs = parse_int(key, value);
  else if (key == "critic_epochs") t.critic_epochs = parse_int(key, value);
  else if (key == "clip_base") t.clip_base = parse_double(key, value);
  else if (key == "reg_base") t.reg_base = parse_double(key, value);
  else if (key == "lr_base") t.lr_base = parse_double(key, value);
  else if (key == "momentum") t.momentum = parse_double(key, value);
  else if (key == "lambda") t.lambda = parse_double(key, value);
  else if (key == "gamma") t.gamma = parse_double(key, value);
  else if (key == "total_iters") t.total_iters = parse_int(key, value);
  else if (key == "lr_horizon") t.lr_horizon = parse_int(key, value);
  else if (key == "reg_horizon") t.reg_horizon = parse_int(key, value);
  else if (key == "replay_ratio") t.replay_ratio = parse_int(key, value);
  else if (key == "ema_decay") t.ema_decay = parse_double(key, value);
  else if (key == "eval_interval") t.eval_interval = parse_int(key, value);
  else if (key == "rollout_workers") t.rollout_workers = parse_int(key, value);
  else throw InvalidConfig("config: unknown key '" + key + "'");
}

ExperimentConfig load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoFailure("config: cannot open '" + path + "'");
  ExperimentConfig config;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw InvalidConfig("config: " + path + ":" + std::to_string(line_no) +
                          ": expected key=value");
    apply_override(config, trim(line.substr(0, eq)),
                   trim(line.substr(eq + 1)));
  }
  return config;
}

std::string resolve_out_dir(const std::string& out_dir) {
  const char* root = std::getenv("VRPO_OUTPUT_ROOT");
  if (root == nullptr || *root == '\0' ||
      std::filesystem::path(out_dir).is_absolute())
    return out_dir;
  return (std::filesystem::path(root) / out_dir).string();
}

std::vector<RunArtifact> run(const ExperimentConfig& config) {
  config.validate();
  const Algorithm algo = parse_algorithm(config.algo);
  const std::string out_root = resolve_out_dir(config.out_dir);

  std::vector<RunArtifact> artifacts;
  for (uint64_t seed : config.seeds) {
    const auto t0 = std::chrono::steady_clock::now();
    std::filesystem::path dir =
        std::filesystem::path(out_root) /
        (config.game + "_" + config.algo + "_seed" + std::to_string(seed));
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec)
      throw IoFailure("run: cannot create output directory '" + dir.string() +
                      "'");

    RunArtifact art;
    art.seed = seed;
    art.metrics_csv = (dir / "metrics.csv").string();
    art.checkpoint = (dir / "checkpoint.bin").string();
    art.summary_json = (dir / "summary.json").string();

    std::ofstream csv(art.metrics_csv, std::ios::trunc);
    if (!csv) throw IoFailure("run: cannot write '" + art.metrics_csv + "'");
    csv << kMetricsHeader << '\n';
    csv.flush();

    TrainerConfig tc = config.trainer;
    tc.seed = seed;
    Trainer trainer(make_game(config.game), config.game, algo, tc);
    if (config.oracle_critic_init) trainer.seed_critic_from_oracle();

    double adv_std_sum = 0.0;
    for (int it = 1; it <= tc.total_iters; ++it) {
      const IterationMetrics m = trainer.iterate();
      csv << metrics_csv_row(m) << '\n';
      csv.flush();
      adv_std_sum += m.adv_std;
      if (m.has_exploitability()) art.final_exploitability = m.exploitability;
    }
    if (!csv) throw IoFailure("run: write failed for '" + art.metrics_csv + "'");
    art.mean_adv_std =
        tc.total_iters > 0 ? adv_std_sum / tc.total_iters : 0.0;

    trainer.save_checkpoint(art.checkpoint);
    art.wall_seconds = std::chrono::duration<double>(
                           std::chrono::steady_clock::now() - t0)
                           .count();

    nlohmann::json summary;
    summary["game"] = config.game;
    summary["algorithm"] = config.algo;
    summary["seed"] = seed;
    summary["iterations"] = tc.total_iters;
    if (std::isnan(art.final_exploitability))
      summary["final_exploitability"] = nullptr;
    else
      summary["final_exploitability"] = art.final_exploitability;
    summary["mean_adv_std"] = art.mean_adv_std;
    summary["wall_time_seconds"] = art.wall_seconds;
    std::ofstream js(art.summary_json, std::ios::trunc);
    if (!js) throw IoFailure("run: cannot write '" + art.summary_json + "'");
    js << summary.dump(2) << '\n';

    artifacts.push_back(std::move(art));
  }
  return artifacts;
}

std::string variance_report(const ExperimentConfig& config, int iterations,
                            const std::vector<std::string>& algos,
                            const std::string& out_csv) {
  if (iterations < 0)
    throw InvalidConfig("config: iterations must be >= 0");
  if (algos.empty()) throw InvalidConfig("config: algos must be non-empty");
  ExperimentConfig probe = config;
  for (const std::string& algo : algos) {
    probe.algo = algo;
    probe.validate();
  }

  // Matched seed and schedule across algorithms, aligned by iteration.
  // Two columns per algorithm: the spread over every record consumed by
  // actor updates, and over the first seat's records alone.
  std::vector<std::vector<double>> series;
  std::vector<std::vector<double>> series_p1;
  for (const std::string& algo : algos) {
    TrainerConfig tc = config.trainer;
    tc.seed = config.seeds.front();
    Trainer trainer(make_game(config.game), config.game,
                    parse_algorithm(algo), tc);
    if (config.oracle_critic_init) trainer.seed_critic_from_oracle();
    std::vector<double> stds, stds_p1;
    stds.reserve(iterations);
    for (int it = 1; it <= iterations; ++it) {
      const IterationMetrics m = trainer.iterate();
      stds.push_back(m.adv_std);
      stds_p1.push_back(m.adv_std_p1);
    }
    series.push_back(std::move(stds));
    series_p1.push_back(std::move(stds_p1));
  }

  const std::string path = resolve_out_dir(out_csv);
  if (const auto parent = std::filesystem::path(path).parent_path();
      !parent.empty()) {
    std::error_code ec;
    std::filesystem::create_directories(parent, ec);
  }
  std::ofstream csv(path, std::ios::trunc);
  if (!csv) throw IoFailure("variance-report: cannot write '" + path + "'");
  csv << "iteration";
  for (const std::string& algo : algos)
    csv << ",adv_std_" << algo << ",adv_std_p1_" << algo;
  csv << '\n';
  for (int it = 0; it < iterations; ++it) {
    csv << (it + 1);
    for (size_t a = 0; a < algos.size(); ++a)
      csv << ',' << fmt(series[a][it]) << ',' << fmt(series_p1[a][it]);
    csv << '\n';
    csv.flush();
  }
  return path;
}

namespace {

void demo_check(bool ok, const std::string& what) {
  if (!ok) throw InvalidConfig("figure1-demo: mismatch in " + what);
}

Trajectory follow(const GameStateTable& g, int a0, int a1) {
  Trajectory t;
  t.n_players = 2;
  int s = g.root_state();
  for (int a : {a0, a1}) {
    t.states.push_back(s);
    t.actions.push_back(a);
    t.acting.push_back(g.acting_player(s));
    auto r = g.rewards(s, a);
    t.rewards.insert(t.rewards.end(), r.begin(), r.end());
    s = g.next_state(s, a);
  }
  t.terminal_state = s;
  return t;
}

}  // namespace

std::string figure1_demo() {
  std::ostringstream out;
  const char* names[4] = {"hh", "ht", "th", "tt"};
  const int moves[4][2] = {{0, 0}, {0, 1}, {1, 0}, {1, 1}};

  out << "Two-step matching pennies: player 1 wins +1 on a match.\n";
  out << "All panels use oracle critics, lambda = 1, gamma = 1.\n\n";

  // Panel 1: perfect information, responder deterministically counters.
  {
    auto g = build_matching_pennies(false);
    TabularPolicy counter(g);
    counter.set_pure(g.info_index(g.next_state(0, 0)), 1);
    counter.set_pure(g.info_index(g.next_state(0, 1)), 0);
    const ExactValues ev = exact_values(g, counter);
    const VCritic v = ev.as_v_critic(g);
    out << "[perfect information, deterministic responder: GAE]\n";
    out << "  V1(root) = " << ev.v(0, 0)
        << "  V1(h) = " << ev.v(g.next_state(0, 0), 0) << "\n";
    for (int k = 0; k < 4; ++k) {
      const Trajectory traj = follow(g, moves[k][0], moves[k][1]);
      const auto recs = gae_advantages(g, traj, v, 1.0, 1.0, 0);
      // Per-step residuals for player 1.
      double d[2];
      for (int t = 0; t < 2; ++t) {
        const int nxt = t == 0 ? traj.states[1] : traj.terminal_state;
        d[t] = traj.reward(t, 0) + v.value(g, nxt, 0) -
               v.value(g, traj.states[t], 0);
      }
      out << "  traj " << names[k] << ": delta = (" << d[0] << ", " << d[1]
          << "), gae = " << recs[0].advantage << "\n";
      if (k == 1) demo_check(recs[0].advantage == 0.0, "perfect-info gae(ht)");
    }
    demo_check(ev.v(g.next_state(0, 0), 0) == -1.0, "perfect-info V1(h)");
  }

  // Panels 2 and 3: imperfect information, both players uniform.
  auto g = build_matching_pennies(true);
  UniformPolicy uniform;
  const ExactValues ev = exact_values(g, uniform);
  const VCritic v = ev.as_v_critic(g);
  const CentralizedQCritic q = ev.as_q_critic(g);
  const int h = g.next_state(0, 0);
  out << "\n[imperfect information, uniform mixer: GAE]\n";
  out << "  V1(root) = " << ev.v(0, 0) << "  V1(h) = " << ev.v(h, 0)
      << "  Q1(h,t) = " << ev.q(g, h, 1, 0) << "\n";
  demo_check(ev.v(h, 0) == 0.0, "V1(h)");
  demo_check(ev.q(g, h, 1, 0) == -1.0, "Q1(h,t)");

  const double expected_gae[4] = {+1.0, -1.0, -1.0, +1.0};
  double gae_mean = 0.0;
  for (int k = 0; k < 4; ++k) {
    const Trajectory traj = follow(g, moves[k][0], moves[k][1]);
    double d[2];
    for (int t = 0; t < 2; ++t) {
      const int nxt = t == 0 ? traj.states[1] : traj.terminal_state;
      d[t] = traj.reward(t, 0) + v.value(g, nxt, 0) -
             v.value(g, traj.states[t], 0);
    }
    const auto recs = gae_advantages(g, traj, v, 1.0, 1.0, 0);
    out << "  traj " << names[k] << ": delta = (" << d[0] << ", " << d[1]
        << "), gae = " << recs[0].advantage << "\n";
    demo_check(recs[0].advantage == expected_gae[k], "gae estimate");
    gae_mean += recs[0].advantage / 4.0;
  }
  demo_check(gae_mean == 0.0, "gae enumeration mean");
  out << "  mean over the four equally likely trajectories = 0\n";

  out << "\n[imperfect information, uniform mixer: Q-boosting]\n";
  for (int k = 0; k < 4; ++k) {
    const Trajectory traj = follow(g, moves[k][0], moves[k][1]);
    const auto recs = qboost_advantages(g, traj, q, uniform, 1.0, 1.0, 0);
    std::vector<double> vb0(2), vb1(2);
    q.v_bar(g, uniform, traj.states[1], vb1);
    const double d0 = traj.reward(0, 0) + vb1[0] -
                      q.q(g, traj.states[0], traj.actions[0], 0);
    const double d1 = traj.reward(1, 0) + 0.0 -
                      q.q(g, traj.states[1], traj.actions[1], 0);
    out << "  traj " << names[k] << ": delta+ = (" << d0 << ", " << d1
        << "), boost = " << recs[0].advantage << "\n";
    demo_check(recs[0].advantage == 0.0, "boost estimate");
  }
  out << "  every estimate equals the true advantage of 0\n";
  return out.str();
}

}  // namespace vrpo
