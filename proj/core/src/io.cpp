#include "mmd/io.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

namespace mmd {

using nlohmann::json;

namespace {

template <class T>
T field(const json& obj, const char* key, const std::string& where) {
  if (!obj.contains(key)) throw InputError(where + ": missing field \"" + key + "\"");
  try {
    return obj.at(key).get<T>();
  } catch (const json::exception& e) {
    throw InputError(where + ": field \"" + key + "\": " + e.what());
  }
}

json parse_json(std::string_view text, const char* what) {
  try {
    return json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    throw InputError(std::string(what) + " parse error: " + e.what());
  }
}

}  // namespace

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::filesystem::path& path, std::string_view contents) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw InputError("cannot write " + path.string());
  out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
  if (!out) throw InputError("write failed for " + path.string());
}

StateInstance parse_state(std::string_view json_text) {
  const json doc = parse_json(json_text, "state");
  if (!doc.is_object()) throw InputError("state: top level must be an object");
  const int seats = field<int>(doc, "total_seats", "state");
  if (!doc.contains("blocks") || !doc["blocks"].is_array()) throw InputError("state: \"blocks\" must be an array");

  std::vector<Block> blocks;
  std::vector<std::vector<BlockId>> neighbors;
  blocks.reserve(doc["blocks"].size());
  std::size_t pos = 0;
  for (const auto& rec : doc["blocks"]) {
    const std::string where = "state block #" + std::to_string(pos++) +
                              (rec.is_object() && rec.contains("id") ? " (id " + rec["id"].dump() + ")" : "");
    if (!rec.is_object()) throw InputError(where + ": must be an object");
    Block b;
    b.id = field<BlockId>(rec, "id", where);
    b.population = field<std::int64_t>(rec, "population", where);
    b.votes_r = field<double>(rec, "votes_r", where);
    b.votes_d = field<double>(rec, "votes_d", where);
    b.centroid = {field<double>(rec, "x", where), field<double>(rec, "y", where)};
    blocks.push_back(b);
    neighbors.push_back(field<std::vector<BlockId>>(rec, "neighbors", where));
  }
  return StateInstance(std::move(blocks), neighbors, seats);
}

StateInstance load_state(const std::filesystem::path& path) { return parse_state(read_text_file(path)); }

std::string state_to_json(const StateInstance& state) {
  json blocks = json::array();
  for (std::size_t i = 0; i < state.size(); ++i) {
    const auto& b = state.block(i);
    std::vector<BlockId> nbrs;
    for (auto j : state.neighbors(i)) nbrs.push_back(state.block(j).id);
    blocks.push_back({{"id", b.id},
                      {"population", b.population},
                      {"votes_r", b.votes_r},
                      {"votes_d", b.votes_d},
                      {"x", b.centroid.x},
                      {"y", b.centroid.y},
                      {"neighbors", nbrs}});
  }
  json doc = {{"total_seats", state.total_seats()}, {"blocks", std::move(blocks)}};
  return doc.dump(1) + "\n";
}

Plan parse_plan(std::string_view json_text) {
  const json doc = parse_json(json_text, "plan");
  if (!doc.is_object() || !doc.contains("districts") || !doc["districts"].is_array())
    throw InputError("plan: \"districts\" must be an array");
  Plan plan;
  std::size_t pos = 0;
  for (const auto& rec : doc["districts"]) {
    const std::string where = "plan district #" + std::to_string(pos++);
    if (!rec.is_object()) throw InputError(where + ": must be an object");
    District d;
    d.seats = field<int>(rec, "seats", where);
    d.blocks = field<std::vector<BlockId>>(rec, "blocks", where);
    plan.districts.push_back(std::move(d));
  }
  return plan;
}

Plan load_plan(const std::filesystem::path& path) { return parse_plan(read_text_file(path)); }

std::string plan_to_json(const Plan& plan) {
  json districts = json::array();
  for (const auto& d : plan.districts) districts.push_back({{"seats", d.seats}, {"blocks", d.blocks}});
  return json{{"districts", std::move(districts)}}.dump() + "\n";
}

}  // namespace mmd
