#include "meglab/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <stdexcept>
#include <system_error>

namespace meglab::io {

namespace {

json tensor3(const std::vector<std::vector<std::vector<double>>>& t) {
    return json(t);
}

std::vector<std::vector<std::vector<double>>> tensor3_from(const json& j, const char* field) {
    if (!j.is_array()) throw std::invalid_argument(std::string("expected array for ") + field);
    return j.get<std::vector<std::vector<std::vector<double>>>>();
}

} // namespace

json to_json(const TabularMDP& mdp) {
    json j;
    j["S"] = mdp.num_states;
    j["A"] = mdp.num_actions;
    j["H"] = mdp.horizon;
    j["s1"] = mdp.initial_state;
    j["P"] = json(mdp.transitions);
    j["R"] = tensor3(mdp.rewards);
    return j;
}

TabularMDP mdp_from_json(const json& j) {
    TabularMDP mdp;
    mdp.num_states = j.at("S").get<int>();
    mdp.num_actions = j.at("A").get<int>();
    mdp.horizon = j.at("H").get<int>();
    mdp.initial_state = j.at("s1").get<int>();
    mdp.transitions = j.at("P").get<std::vector<std::vector<std::vector<std::vector<double>>>>>();
    mdp.rewards = tensor3_from(j.at("R"), "R");
    require_valid_mdp(mdp);
    return mdp;
}

json to_json(const LinearMDP& lm) {
    json j;
    j["d"] = lm.dim;
    j["s1"] = lm.initial_state;
    j["phi"] = json(lm.phi);
    j["nu"] = json(lm.nu);
    j["theta"] = json(lm.theta);
    return j;
}

LinearMDP linear_from_json(const json& j) {
    LinearMDP lm;
    lm.dim = j.at("d").get<int>();
    lm.initial_state = j.value("s1", 0);
    lm.phi = j.at("phi").get<FeatureMap>();
    lm.nu = j.at("nu").get<std::vector<std::vector<Vec>>>();
    lm.theta = j.at("theta").get<std::vector<Vec>>();
    lm.horizon = static_cast<int>(lm.phi.size());
    lm.num_states = lm.horizon > 0 ? static_cast<int>(lm.phi[0].size()) : 0;
    lm.num_actions = lm.num_states > 0 ? static_cast<int>(lm.phi[0][0].size()) : 0;
    return lm;
}

namespace {

json mat_to_json(const Mat& m) {
    std::vector<std::vector<double>> rows(m.rows, std::vector<double>(m.cols));
    for (int i = 0; i < m.rows; ++i)
        for (int j = 0; j < m.cols; ++j) rows[i][j] = m(i, j);
    return json(rows);
}

Mat mat_from_json(const json& j) {
    const auto rows = j.get<std::vector<std::vector<double>>>();
    if (rows.empty()) return Mat(0, 0);
    Mat m(static_cast<int>(rows.size()), static_cast<int>(rows[0].size()));
    for (int i = 0; i < m.rows; ++i) {
        if (static_cast<int>(rows[i].size()) != m.cols)
            throw std::invalid_argument("ragged matrix rows in JSON");
        for (int c = 0; c < m.cols; ++c) m(i, c) = rows[i][c];
    }
    return m;
}

json mat_list_to_json(const std::vector<Mat>& list) {
    json arr = json::array();
    for (const auto& m : list) arr.push_back(mat_to_json(m));
    return arr;
}

std::vector<Mat> mat_list_from_json(const json& j) {
    std::vector<Mat> out;
    for (const auto& item : j) out.push_back(mat_from_json(item));
    return out;
}

} // namespace

json to_json(const LQRSystem& sys) {
    json j;
    j["ds"] = sys.dim_state;
    j["da"] = sys.dim_action;
    j["A"] = mat_list_to_json(sys.A);
    j["B"] = mat_list_to_json(sys.B);
    j["Rs"] = mat_list_to_json(sys.Rs);
    j["Ra"] = mat_list_to_json(sys.Ra);
    j["s1"] = sys.initial_state;
    return j;
}

LQRSystem lqr_from_json(const json& j) {
    LQRSystem sys;
    sys.dim_state = j.at("ds").get<int>();
    sys.dim_action = j.at("da").get<int>();
    sys.A = mat_list_from_json(j.at("A"));
    sys.B = mat_list_from_json(j.at("B"));
    sys.Rs = mat_list_from_json(j.at("Rs"));
    sys.Ra = mat_list_from_json(j.at("Ra"));
    sys.initial_state = j.at("s1").get<Vec>();
    sys.horizon = static_cast<int>(sys.A.size());
    sys.validate();
    return sys;
}

json to_json(const ExplorationSchedule& sched) {
    json j;
    j["kind"] = sched.kind == ScheduleKind::EpsGreedy ? "epsilon_greedy" : "gaussian";
    j["eps"] = sched.eps;
    if (sched.kind == ScheduleKind::Gaussian) j["sigma"] = sched.sigma;
    return j;
}

ExplorationSchedule schedule_from_json(const json& j) {
    ExplorationSchedule sched;
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "epsilon_greedy") {
        sched.kind = ScheduleKind::EpsGreedy;
    } else if (kind == "gaussian") {
        sched.kind = ScheduleKind::Gaussian;
        sched.sigma = j.at("sigma").get<std::vector<double>>();
    } else {
        throw std::invalid_argument("schedule kind must be epsilon_greedy or gaussian");
    }
    sched.eps = j.at("eps").get<std::vector<double>>();
    sched.validate();
    return sched;
}

json to_json(const MEGResult& result) {
    json j;
    j["alpha"] = result.alpha;
    if (std::isinf(result.c))
        j["c"] = nullptr;
    else
        j["c"] = result.c;
    j["task_index"] = result.task_index;
    j["feasible"] = result.feasible;
    json actions = json::array();
    for (const auto& layer : result.improved_policy.probs) {
        json layer_actions = json::array();
        for (const auto& row : layer) {
            int a = 0;
            for (std::size_t i = 0; i < row.size(); ++i)
                if (row[i] == 1.0) a = static_cast<int>(i);
            layer_actions.push_back(a);
        }
        actions.push_back(layer_actions);
    }
    j["improved_policy"] = actions;
    return j;
}

std::string format_double(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

std::string runlog_csv(const RunLog& log) {
    std::string csv = "round,task_id,greedy_value,optimal_value,suboptimality,episodes_total,seed\n";
    for (const auto& row : log.rows) {
        csv += std::to_string(row.round);
        csv += ',';
        csv += std::to_string(row.task);
        csv += ',';
        csv += format_double(row.greedy_value);
        csv += ',';
        csv += format_double(row.optimal_value);
        csv += ',';
        csv += format_double(row.optimal_value - row.greedy_value);
        csv += ',';
        csv += std::to_string(row.episodes_total);
        csv += ',';
        csv += std::to_string(log.seed);
        csv += '\n';
    }
    return csv;
}

std::string dataset_csv(const Dataset& data, const std::string& task_id) {
    // Steps are written 1-based (h in 1..H), matching the other exported
    // artifacts that carry explicit step columns.
    std::string csv = "task_id,episode,h,s,a,r,s_next\n";
    const auto& records = data.records();
    const auto& episodes = data.record_episode();
    for (std::size_t i = 0; i < records.size(); ++i) {
        const auto& rec = records[i];
        csv += task_id;
        csv += ',';
        csv += std::to_string(episodes[i]);
        csv += ',';
        csv += std::to_string(rec.h + 1);
        csv += ',';
        csv += std::to_string(rec.state);
        csv += ',';
        csv += std::to_string(rec.action);
        csv += ',';
        csv += format_double(rec.reward);
        csv += ',';
        csv += std::to_string(rec.next_state);
        csv += '\n';
    }
    return csv;
}

std::string spectrum_csv_header() {
    return "policy,h,index,eigenvalue\n";
}

void append_spectrum_csv(std::string& csv, const std::string& policy_desc, int h,
                         const std::vector<double>& sorted_eigenvalues) {
    for (std::size_t i = 0; i < sorted_eigenvalues.size(); ++i) {
        csv += policy_desc;
        csv += ',';
        csv += std::to_string(h);
        csv += ',';
        csv += std::to_string(i);
        csv += ',';
        csv += format_double(sorted_eigenvalues[i]);
        csv += '\n';
    }
}

void atomic_write(const std::filesystem::path& path, const std::string& content) {
    namespace fs = std::filesystem;
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    const fs::path tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("atomic_write: cannot open " + tmp.string());
        out << content;
        if (!out) throw std::runtime_error("atomic_write: write failed for " + tmp.string());
    }
    fs::rename(tmp, path);
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("read_file: cannot open " + path.string());
    return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

} // namespace meglab::io
