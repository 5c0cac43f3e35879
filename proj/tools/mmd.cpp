#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numeric>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "mmd/analysis.hpp"
#include "mmd/io.hpp"
#include "mmd/parallel.hpp"
#include "mmd/plan.hpp"
#include "mmd/rng.hpp"
#include "mmd/stv.hpp"
#include "mmd/synth.hpp"
#include "mmd/tree.hpp"
#include "mmd/voters.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

// Reads a JSON object of flag values. Top-level keys apply to the selected
// subcommand; a nested object keyed by a subcommand name applies only there.
class JsonConfig : public CLI::Config {
 public:
  explicit JsonConfig(const CLI::App* app) : app_(app) {}

  std::string to_config(const CLI::App*, bool, bool, std::string) const override { return "{}"; }

  std::vector<CLI::ConfigItem> from_config(std::istream& input) const override {
    json root;
    try {
      root = json::parse(input);
    } catch (const json::exception& e) {
      throw CLI::ConversionError("config", e.what());
    }
    if (!root.is_object()) throw CLI::ConversionError("config", "top level must be an object");
    std::vector<std::string> active;
    for (const auto* sub : app_->get_subcommands()) active.push_back(sub->get_name());

    std::vector<CLI::ConfigItem> items;
    for (const auto& [key, value] : root.items()) {
      if (value.is_object()) {
        if (std::find(active.begin(), active.end(), key) == active.end()) continue;
        for (const auto& [k, v] : value.items()) items.push_back(item({key}, k, v));
      } else {
        items.push_back(item(active, key, value));
      }
    }
    return items;
  }

 private:
  static CLI::ConfigItem item(std::vector<std::string> parents, const std::string& name, const json& value) {
    CLI::ConfigItem it;
    it.parents = std::move(parents);
    it.name = name;
    auto scalar = [](const json& v) { return v.is_string() ? v.get<std::string>() : v.dump(); };
    if (value.is_array())
      for (const auto& v : value) it.inputs.push_back(scalar(v));
    else
      it.inputs.push_back(scalar(value));
    return it;
  }

  const CLI::App* app_;
};

struct Common {
  std::string state_path;
  std::string rule = "stv";
  std::string k = "all";
  double sigma = 0.05;
  std::uint64_t seed = 1;
  std::string out;
  unsigned threads = mmd::default_threads();
  std::size_t ensemble_size = 1000;
  int voters_per_block = 50;
  double epsilon = 0.01;
};

std::vector<int> parse_k_set(const std::string& text, int seats) {
  std::vector<int> out;
  if (text == "all") {
    out.resize(static_cast<std::size_t>(seats));
    std::iota(out.begin(), out.end(), 1);
    return out;
  }
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto comma = text.find(',', pos);
    const auto token = text.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos);
    int k = 0;
    try {
      std::size_t used = 0;
      k = std::stoi(token, &used);
      if (used != token.size()) throw std::invalid_argument(token);
    } catch (const std::exception&) {
      throw mmd::InputError("--k: \"" + token + "\" is not an integer");
    }
    if (k < 1 || k > seats)
      throw mmd::InputError("--k: " + std::to_string(k) + " outside 1.." + std::to_string(seats));
    out.push_back(k);
    if (comma == std::string::npos) break;
    pos = comma + 1;
  }
  return out;
}

int single_k(const Common& c, int seats) {
  const auto ks = parse_k_set(c.k, seats);
  if (ks.size() != 1) throw mmd::InputError("--k must name exactly one district count for this command");
  return ks.front();
}

mmd::TreeOptions tree_options(const Common& c) {
  mmd::TreeOptions o;
  o.threads = c.threads;
  return o;
}

fs::path out_dir(const Common& c) { return c.out.empty() ? fs::path("out") : fs::path(c.out); }

void check_plan(const mmd::StateInstance& state, const mmd::Plan& plan, mmd::BalanceTolerance tol,
                const std::string& what) {
  const auto violations = mmd::validate_plan(state, plan, tol);
  if (violations.empty()) return;
  std::string msg = what + " failed validation:";
  for (const auto& v : violations) msg += " [" + std::string(mmd::violation_name(v.kind)) + "] " + v.detail;
  throw std::runtime_error(msg);
}

int cmd_synth(const mmd::SynthParams& params, const std::string& out) {
  const auto text = mmd::state_to_json(mmd::generate_synthetic_state(params));
  if (out.empty())
    std::cout << text;
  else
    mmd::write_text_file(out, text);
  return 0;
}

int cmd_sweep(const Common& c) {
  const auto state = mmd::load_state(c.state_path);
  const auto rule = mmd::SeatShareRule::from_name(c.rule);
  const auto ks = parse_k_set(c.k, state.total_seats());
  mmd::SweepOptions opt;
  opt.uncertainty.sigma = c.sigma;
  opt.tolerance = mmd::BalanceTolerance(c.epsilon);
  opt.ensemble_size = c.ensemble_size;
  opt.tree = tree_options(c);
  const auto result = mmd::sweep_k(state, rule, ks, c.seed, opt);

  const auto dir = out_dir(c);
  mmd::write_text_file(dir / "metrics.csv", mmd::metrics_csv(result.records));
  std::size_t w = 0;
  for (int k : ks) {
    const bool failed = std::any_of(result.failures.begin(), result.failures.end(),
                                    [k](const mmd::SweepFailure& f) { return f.k == k; });
    if (failed) continue;
    const auto& plan = result.witnesses_fair[w++];
    check_plan(state, plan, opt.tolerance, "fair plan for k=" + std::to_string(k));
    mmd::write_text_file(dir / ("fair_plan_k" + std::to_string(k) + ".json"), mmd::plan_to_json(plan));
  }
  for (const auto& f : result.failures) std::cerr << "k=" << f.k << " failed: " << f.reason << "\n";
  if (result.failures.size() == ks.size()) return 1;
  return result.failures.empty() ? 0 : 3;
}

int cmd_optimize(const Common& c, const std::string& objective) {
  const auto state = mmd::load_state(c.state_path);
  const auto rule = mmd::SeatShareRule::from_name(c.rule);
  const int k = single_k(c, state.total_seats());
  const mmd::BalanceTolerance tol(c.epsilon);
  const auto tree = mmd::build_tree(state, k, tol, mmd::derive_seed(c.seed, {static_cast<std::uint64_t>(k)}),
                                    tree_options(c));
  const auto scores = mmd::score_leaves(tree, state, rule, mmd::UncertaintyModel{c.sigma}, c.threads);
  const int n = state.total_seats();
  const double y = state.vote_share_r();

  mmd::Plan plan;
  json summary = {{"k", k}, {"rule", std::string(rule.name())}, {"objective", objective}, {"sigma", c.sigma},
                  {"seed", c.seed}, {"vote_share_r", y}, {"total_seats", n}};
  if (objective == "fair") {
    auto fair = mmd::optimize_fair(tree, state, scores, y);
    plan = std::move(fair.plan);
    summary["seats_r"] = fair.seats_r;
    summary["gap"] = fair.gap;
  } else {
    auto best = mmd::optimize_partisan(tree, state, scores, objective == "max-r" ? mmd::Party::R : mmd::Party::D);
    plan = std::move(best.plan);
    summary["expected_seats"] = best.value;
    summary["seats_r"] = best.seats_r;
    summary["gap"] = std::abs(static_cast<double>(best.seats_r) / n - y);
  }
  summary["seat_share_r"] = summary["seats_r"].get<double>() / n;
  summary["tree"] = json::parse(mmd::diagnostics_to_json(tree.diagnostics()));

  check_plan(state, plan, tol, "optimized plan");
  const int rescored = mmd::plan_seats_r(state, plan, rule);
  if (rescored != summary["seats_r"].get<int>())
    throw std::runtime_error("plan re-scoring gives " + std::to_string(rescored) + " R seats, summary says " +
                             summary["seats_r"].dump());

  const auto dir = out_dir(c);
  mmd::write_text_file(dir / "plan.json", mmd::plan_to_json(plan));
  mmd::write_text_file(dir / "summary.json", summary.dump(2) + "\n");
  return 0;
}

int cmd_ensemble(const Common& c) {
  const auto state = mmd::load_state(c.state_path);
  const auto rule = mmd::SeatShareRule::from_name(c.rule);
  const auto ks = parse_k_set(c.k, state.total_seats());
  const mmd::BalanceTolerance tol(c.epsilon);
  std::vector<mmd::MetricsRecord> records;
  std::string plans_text;
  for (int k : ks) {
    const auto kk = static_cast<std::uint64_t>(k);
    const auto tree = mmd::build_tree(state, k, tol, mmd::derive_seed(c.seed, {kk}), tree_options(c));
    const auto seed = mmd::derive_seed(c.seed, {kk, 1});
    const auto result = mmd::ensemble_metrics(tree, state, rule, c.ensemble_size, seed);
    records.insert(records.end(), result.records.begin(), result.records.end());
    for (const auto& leaves : result.plans) {
      const auto plan = tree.plan_from_leaves(state, leaves);
      check_plan(state, plan, tol, "ensemble plan for k=" + std::to_string(k));
      plans_text += json::parse(mmd::plan_to_json(plan)).dump() + "\n";
    }
  }
  const auto dir = out_dir(c);
  mmd::write_text_file(dir / "ensemble.csv", mmd::metrics_csv(records));
  mmd::write_text_file(dir / "plans.jsonl", plans_text);
  return 0;
}

struct StvFlags {
  std::string plan_path, voters_path, ballots_path, candidates_path;
  int seats = 0;
  int per_party = 0;
  std::string mode = "partisan_score";
  bool verbose = false;
  double polarization = 0.0;
};

mmd::VoterFile voters_for(const mmd::StateInstance& state, const Common& c, const StvFlags& s) {
  if (!s.voters_path.empty()) return mmd::load_voter_csv(s.voters_path);
  mmd::VoterModelParams p;
  p.voters_per_block = c.voters_per_block;
  p.polarization = s.polarization;
  p.seed = mmd::derive_seed(c.seed, {0x707e});
  return mmd::generate_voter_file(state, p);
}

int cmd_stv(const Common& c, const StvFlags& s) {
  const auto dir = out_dir(c);
  json out;
  std::string log;
  if (!s.ballots_path.empty()) {
    if (s.candidates_path.empty() || s.seats < 1)
      throw mmd::InputError("--ballots requires --candidates and --seats");
    const auto ballots = mmd::load_ballots_csv(s.ballots_path);
    const auto candidates = mmd::parse_candidates_csv(mmd::read_text_file(s.candidates_path));
    const auto result = mmd::run_stv(ballots, candidates, s.seats, c.seed);
    out = json::parse(mmd::election_to_json(result, candidates));
    log = mmd::round_log_jsonl(result);
  } else {
    if (c.state_path.empty() || s.plan_path.empty())
      throw mmd::InputError("stv needs --state and --plan, or --ballots, --candidates and --seats");
    const auto state = mmd::load_state(c.state_path);
    const auto plan = mmd::load_plan(s.plan_path);
    check_plan(state, plan, mmd::BalanceTolerance(c.epsilon), "input plan");
    const auto voters = voters_for(state, c, s);
    const mmd::VoterIndex index(state, voters);
    const auto mode = mmd::ranking_mode_from_name(s.mode);
    out["districts"] = json::array();
    int seats_r = 0;
    for (std::size_t d = 0; d < plan.districts.size(); ++d) {
      const auto& district = plan.districts[d];
      std::vector<std::uint32_t> blocks;
      for (auto id : district.blocks) blocks.push_back(static_cast<std::uint32_t>(state.index_of(id)));
      const auto members = index.in_blocks(blocks);
      const int per_party = s.per_party > 0 ? s.per_party : district.seats + 2;
      const auto task = mmd::derive_seed(c.seed, {static_cast<std::uint64_t>(d)});
      const auto candidates = mmd::generate_candidates(members, district.seats, per_party, mmd::derive_seed(task, {1}));
      const auto ballots = mmd::build_ballots(members, candidates, mode);
      const auto result = mmd::run_stv(ballots, candidates, district.seats, mmd::derive_seed(task, {2}));
      auto entry = json::parse(mmd::election_to_json(result, candidates));
      entry["district"] = d;
      entry["vote_share_r"] = mmd::district_vote_share(state, district);
      seats_r += mmd::partisan_split(result, candidates).seats_r;
      out["districts"].push_back(std::move(entry));
      std::istringstream lines(mmd::round_log_jsonl(result));
      for (std::string line; std::getline(lines, line);) {
        auto rec = json::parse(line);
        rec["district"] = d;
        log += rec.dump() + "\n";
      }
    }
    out["seats_r"] = seats_r;
    out["seats_d"] = state.total_seats() - seats_r;
  }
  mmd::write_text_file(dir / "election.json", out.dump(2) + "\n");
  if (s.verbose) {
    mmd::write_text_file(dir / "rounds.jsonl", log);
    std::cout << log;
  }
  return 0;
}

int cmd_diversity(const Common& c, const StvFlags& s) {
  const auto state = mmd::load_state(c.state_path);
  const auto ks = parse_k_set(c.k, state.total_seats());
  const mmd::BalanceTolerance tol(c.epsilon);
  const auto voters = voters_for(state, c, s);
  mmd::DiversityOptions opt;
  opt.mode = mmd::ranking_mode_from_name(s.mode);
  opt.per_party = s.per_party;
  opt.threads = c.threads;
  std::vector<mmd::DiversityRecord> records;
  for (int k : ks) {
    const auto kk = static_cast<std::uint64_t>(k);
    const auto tree = mmd::build_tree(state, k, tol, mmd::derive_seed(c.seed, {kk}), tree_options(c));
    const auto plans = mmd::sample_plans(tree, state, c.ensemble_size, mmd::derive_seed(c.seed, {kk, 1}));
    for (const auto& p : plans) check_plan(state, p, tol, "diversity plan");
    const auto rec = mmd::intra_party_analysis(state, plans, voters, mmd::derive_seed(c.seed, {kk, 2}), opt);
    records.insert(records.end(), rec.begin(), rec.end());
  }
  const auto dir = out_dir(c);
  mmd::write_text_file(dir / "diversity.csv", mmd::diversity_csv(records));
  if (s.voters_path.empty()) mmd::write_text_file(dir / "voters.csv", mmd::voter_csv(voters));
  return 0;
}

void add_common(CLI::App* sub, Common& c, bool needs_state) {
  auto* state = sub->add_option("--state", c.state_path, "State JSON file")->check(CLI::ExistingFile);
  if (needs_state) state->required();
  sub->add_option("--rule", c.rule, "Seat-share rule: wta, pav, stv, thiele2")
      ->check(CLI::IsMember({"wta", "pav", "stv", "thiele2"}))
      ->capture_default_str();
  sub->add_option("--k", c.k, "District count(s): N, a comma list, or all")->capture_default_str();
  sub->add_option("--sigma", c.sigma, "Vote-share uncertainty (standard deviation)")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  sub->add_option("--seed", c.seed, "Base random seed")->capture_default_str();
  sub->add_option("--out", c.out, "Output directory (default: out)");
  sub->add_option("--threads", c.threads, "Worker threads")->check(CLI::PositiveNumber)->capture_default_str();
  sub->add_option("--ensemble-size", c.ensemble_size, "Plans sampled per k")->capture_default_str();
  sub->add_option("--voters-per-block", c.voters_per_block, "Synthetic voters per average block")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  sub->add_option("--epsilon", c.epsilon, "Population balance tolerance")->capture_default_str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multi-member districting: ensembles, optimization and STV simulation"};
  app.require_subcommand(1);
  app.fallthrough();
  app.set_config("--config", "", "JSON file of flag values; command-line flags take precedence");
  app.config_formatter(std::make_shared<JsonConfig>(&app));

  Common common;
  StvFlags stv;

  mmd::SynthParams synth;
  std::string synth_out;
  auto* s = app.add_subcommand("synth", "Generate a synthetic grid state");
  s->add_option("--blocks", synth.n_blocks, "Number of blocks")->required()->check(CLI::PositiveNumber);
  s->add_option("--seats", synth.seats, "Total seats N")->required()->check(CLI::PositiveNumber);
  s->add_option("--r-share", synth.r_share, "Statewide R vote share")->required()->check(CLI::Range(0.0, 1.0));
  s->add_option("--corr", synth.spatial_correlation, "Spatial correlation length in blocks")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  s->add_option("--seed", synth.seed, "Random seed")->capture_default_str();
  s->add_option("--out", synth_out, "Output state file (default: stdout)");

  auto* sweep = app.add_subcommand("sweep", "Optimize and sample plans for every k; write metrics.csv");
  add_common(sweep, common, true);

  std::string objective = "fair";
  auto* opt = app.add_subcommand("optimize", "Most partisan or most proportional plan for one k");
  add_common(opt, common, true);
  opt->add_option("--objective", objective, "max-r, max-d or fair")
      ->check(CLI::IsMember({"max-r", "max-d", "fair"}))
      ->capture_default_str();

  auto* ens = app.add_subcommand("ensemble", "Sample neutral plans and summarise seat outcomes");
  add_common(ens, common, true);

  auto* elect = app.add_subcommand("stv", "Run STV on every district of a plan, or on a ballot file");
  add_common(elect, common, false);
  elect->add_option("--plan", stv.plan_path, "Plan JSON")->check(CLI::ExistingFile);
  elect->add_option("--voters", stv.voters_path, "Voter CSV (default: generated)")->check(CLI::ExistingFile);
  elect->add_option("--ballots", stv.ballots_path, "Ballot CSV")->check(CLI::ExistingFile);
  elect->add_option("--candidates", stv.candidates_path, "Candidate CSV")->check(CLI::ExistingFile);
  elect->add_option("--seats", stv.seats, "Seats when counting a ballot file");
  elect->add_option("--mode", stv.mode, "Ranking mode: partisan_score or geographic")->capture_default_str();
  elect->add_option("--per-party", stv.per_party, "Candidates per party (default: seats + 2)");
  elect->add_option("--polarization", stv.polarization, "Intra-party polarization of generated voters");
  elect->add_flag("--verbose", stv.verbose, "Write the round log as JSON lines");

  auto* div = app.add_subcommand("diversity", "Intra-party winner and coalition diversity per k");
  add_common(div, common, true);
  div->add_option("--voters", stv.voters_path, "Voter CSV (default: generated)")->check(CLI::ExistingFile);
  div->add_option("--mode", stv.mode, "Ranking mode: partisan_score or geographic")->capture_default_str();
  div->add_option("--per-party", stv.per_party, "Candidates per party (default: seats + 2)");
  div->add_option("--polarization", stv.polarization, "Intra-party polarization of generated voters")
      ->capture_default_str();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*s) return cmd_synth(synth, synth_out);
    if (*sweep) return cmd_sweep(common);
    if (*opt) return cmd_optimize(common, objective);
    if (*ens) return cmd_ensemble(common);
    if (*elect) return cmd_stv(common, stv);
    if (*div) return cmd_diversity(common, stv);
  } catch (const mmd::InputError& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
