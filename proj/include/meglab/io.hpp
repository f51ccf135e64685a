#pragma once

#include "meglab/engine.hpp"
#include "meglab/exploration.hpp"
#include "meglab/linear.hpp"
#include "meglab/lqr.hpp"
#include "meglab/mdp.hpp"
#include "meglab/meg.hpp"
#include "meglab/oracle.hpp"

#include <json.hpp>

#include <filesystem>
#include <string>

namespace meglab::io {

using nlohmann::json;

// TabularMDP <-> {"S","A","H","s1","P","R"}, h-major nesting. Doubles
// round-trip bit-exactly (shortest-representation JSON numbers).
json to_json(const TabularMDP& mdp);
TabularMDP mdp_from_json(const json& j);

// LinearMDP <-> {"d","s1","phi","nu","theta"}.
json to_json(const LinearMDP& lm);
LinearMDP linear_from_json(const json& j);

// LQRSystem <-> {"ds","da","A","B","Rs","Ra","s1"}.
json to_json(const LQRSystem& sys);
LQRSystem lqr_from_json(const json& j);

// {"kind":"epsilon_greedy","eps":[...]} or {"kind":"gaussian","eps":[...],"sigma":[...]}.
json to_json(const ExplorationSchedule& sched);
ExplorationSchedule schedule_from_json(const json& j);

// {"alpha","c","task_index","improved_policy","feasible"}; c is null when infinite.
json to_json(const MEGResult& result);

// Shortest round-trip decimal representation of a double.
std::string format_double(double v);

// round,task_id,greedy_value,optimal_value,suboptimality,episodes_total,seed
std::string runlog_csv(const RunLog& log);

// task_id,episode,h,s,a,r,s_next
std::string dataset_csv(const Dataset& data, const std::string& task_id);

// policy,h,index,eigenvalue (ascending per matrix)
std::string spectrum_csv_header();
void append_spectrum_csv(std::string& csv, const std::string& policy_desc, int h,
                         const std::vector<double>& sorted_eigenvalues);

// Write-temp-then-rename.
void atomic_write(const std::filesystem::path& path, const std::string& content);
std::string read_file(const std::filesystem::path& path);

} // namespace meglab::io
