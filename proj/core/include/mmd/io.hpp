#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "mmd/plan.hpp"
#include "mmd/state.hpp"

namespace mmd {

// State file:
//   { "total_seats": int,
//     "blocks": [ { "id", "population", "votes_r", "votes_d", "x", "y", "neighbors": [...] } ] }
// Plan file:
//   { "districts": [ { "seats": int, "blocks": [int, ...] } ] }

StateInstance parse_state(std::string_view json_text);
StateInstance load_state(const std::filesystem::path& path);
std::string state_to_json(const StateInstance& state);

Plan parse_plan(std::string_view json_text);
Plan load_plan(const std::filesystem::path& path);
std::string plan_to_json(const Plan& plan);

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, std::string_view contents);

}  // namespace mmd
