#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <sstream>
#include <string>

#include <json.hpp>

#include "mmd/analysis.hpp"
#include "mmd/io.hpp"
#include "mmd/plan.hpp"
#include "mmd/social_choice.hpp"
#include "mmd/stv.hpp"
#include "support.hpp"

using namespace mmd;
namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

const fs::path kWork = fs::path("cli_work");

int run(const std::string& args) {
  const std::string cmd = std::string(MMD_CLI_PATH) + " " + args + " > " + (kWork / "stdout.txt").string() +
                          " 2> " + (kWork / "stderr.txt").string();
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string path(const std::string& name) { return (kWork / name).string(); }

const std::string& state_file() {
  static const std::string p = [] {
    fs::create_directories(kWork);
    const auto file = path("state.json");
    REQUIRE(run("synth --blocks 36 --seats 4 --r-share 0.4 --corr 1 --seed 3 --out " + file) == 0);
    return file;
  }();
  return p;
}

std::vector<std::vector<std::string>> csv_rows(const std::string& file) {
  std::istringstream in(read_text_file(file));
  std::vector<std::vector<std::string>> rows;
  std::string line;
  std::getline(in, line);
  while (std::getline(in, line)) {
    std::vector<std::string> cols;
    std::istringstream ls(line);
    for (std::string c; std::getline(ls, c, ',');) cols.push_back(c);
    rows.push_back(cols);
  }
  return rows;
}

}  // namespace

TEST_CASE("synth writes a valid, reproducible state") {
  fs::create_directories(kWork);
  REQUIRE(run("synth --blocks 144 --seats 6 --r-share 0.4 --corr 2 --seed 1 --out " + path("a.json")) == 0);
  REQUIRE(run("synth --blocks 144 --seats 6 --r-share 0.4 --corr 2 --seed 1 --out " + path("b.json")) == 0);
  const auto s = load_state(path("a.json"));
  CHECK(s.size() == 144);
  CHECK(s.total_seats() == 6);
  CHECK(read_text_file(path("a.json")) == read_text_file(path("b.json")));
  CHECK(run("synth --blocks 144 --seats 6") != 0);
  CHECK(read_text_file(path("stderr.txt")).find("--r-share") != std::string::npos);
}

TEST_CASE("sweep expands --k all and defaults to stv") {
  REQUIRE(run("sweep --state " + state_file() + " --k all --sigma 0 --threads 1 --ensemble-size 50 --out " +
              path("sweep")) == 0);
  const auto rows = csv_rows(path("sweep/metrics.csv"));
  const auto s = load_state(state_file());
  CHECK(rows.size() == 4u * static_cast<std::size_t>(s.total_seats()));
  for (const auto& r : rows) {
    CHECK(r[1] == "stv");
    if (r[0] == "1") CHECK(std::stod(r[5]) < 1.0 / s.total_seats());
  }
  for (int k = 1; k <= s.total_seats(); ++k) {
    const auto plan = load_plan(path("sweep/fair_plan_k" + std::to_string(k) + ".json"));
    CHECK(validate_plan(s, plan).empty());
  }
  CHECK(run("sweep --state " + state_file() + " --k 9 --out " + path("bad")) != 0);
  CHECK(run("sweep --state " + state_file() + " --rule borda --out " + path("bad")) != 0);
}

TEST_CASE("optimize objectives bracket the fair plan") {
  const auto s = load_state(state_file());
  double share[3];
  const char* objectives[] = {"max-r", "max-d", "fair"};
  for (int i = 0; i < 3; ++i) {
    const auto dir = path(std::string("opt_") + objectives[i]);
    REQUIRE(run("optimize --state " + state_file() + " --k 2 --threads 1 --objective " + objectives[i] +
                " --out " + dir) == 0);
    const auto summary = json::parse(read_text_file(dir + "/summary.json"));
    share[i] = summary["seat_share_r"].get<double>();
    const auto plan = load_plan(dir + "/plan.json");
    CHECK(validate_plan(s, plan).empty());
    if (std::string(objectives[i]) == "fair") {
      const int seats = plan_seats_r(s, plan, SeatShareRule(RuleKind::stv));
      const double gap = std::abs(static_cast<double>(seats) / s.total_seats() - s.vote_share_r());
      CHECK(summary["gap"].get<double>() == doctest::Approx(gap));
    }
  }
  CHECK(share[1] <= share[2]);
  CHECK(share[2] <= share[0]);
}

TEST_CASE("stv counts a party-line ballot file") {
  Rng rng(5);
  const auto p = test::party_line_profile(rng, 3, 400, 229);
  write_text_file(path("ballots.csv"), ballots_to_csv(p.ballots));
  write_text_file(path("candidates.csv"), candidates_to_csv(p.candidates));
  const std::string base =
      "stv --ballots " + path("ballots.csv") + " --candidates " + path("candidates.csv") + " --seats 3 --seed 4";
  REQUIRE(run(base + " --verbose --out " + path("stv1")) == 0);
  REQUIRE(run(base + " --out " + path("stv2")) == 0);
  const auto a = json::parse(read_text_file(path("stv1/election.json")));
  const auto b = json::parse(read_text_file(path("stv2/election.json")));
  CHECK(a["winners"] == b["winners"]);
  int seats_r = 0;
  for (const auto& w : a["winners"]) seats_r += w.get<int>() < 3 ? 1 : 0;
  CHECK(seats_r == stv_seats(229.0 / 400.0, 3).seats_r);
  const auto log = read_text_file(path("stv1/rounds.jsonl"));
  std::istringstream lines(log);
  int n = 0;
  for (std::string line; std::getline(lines, line); ++n) CHECK(json::parse(line).contains("tallies"));
  CHECK(n == a["rounds"].get<int>());
}

TEST_CASE("stv simulates every district of a plan") {
  REQUIRE(run("optimize --state " + state_file() + " --k 2 --threads 1 --out " + path("plan2")) == 0);
  const std::string cmd =
      "stv --state " + state_file() + " --plan " + path("plan2/plan.json") + " --voters-per-block 10 --seed 2";
  REQUIRE(run(cmd + " --out " + path("sim1")) == 0);
  REQUIRE(run(cmd + " --out " + path("sim2")) == 0);
  CHECK(read_text_file(path("sim1/election.json")) == read_text_file(path("sim2/election.json")));
  const auto e = json::parse(read_text_file(path("sim1/election.json")));
  CHECK(e["districts"].size() == 2);
  CHECK(e["seats_r"].get<int>() + e["seats_d"].get<int>() == 4);
}

TEST_CASE("ensemble and diversity write their tables") {
  REQUIRE(run("ensemble --state " + state_file() + " --k 2,4 --ensemble-size 10 --threads 1 --out " +
              path("ens")) == 0);
  CHECK(csv_rows(path("ens/ensemble.csv")).size() == 10);
  REQUIRE(run("diversity --state " + state_file() + " --k 4,1 --ensemble-size 2 --voters-per-block 8 "
              "--polarization 0.5 --threads 1 --out " + path("div")) == 0);
  const auto rows = csv_rows(path("div/diversity.csv"));
  CHECK(rows.size() >= 2);
  CHECK(fs::exists(path("div/voters.csv")));
}

TEST_CASE("JSON config supplies flags; the command line wins") {
  write_text_file(path("config.json"),
                  R"({"rule": "pav", "sigma": 0, "threads": 1, "ensemble-size": 5, "sweep": {"k": "1,2"}})");
  REQUIRE(run("--config " + path("config.json") + " sweep --state " + state_file() + " --rule wta --out " +
              path("cfg")) == 0);
  const auto rows = csv_rows(path("cfg/metrics.csv"));
  CHECK(rows.size() == 8);
  for (const auto& r : rows) CHECK(r[1] == "wta");
  write_text_file(path("broken.json"), "{not json");
  CHECK(run("--config " + path("broken.json") + " sweep --state " + state_file()) != 0);
}
