#include <doctest.h>

#include "meglab/harness.hpp"
#include "meglab/io.hpp"
#include "meglab/meg.hpp"

#include <filesystem>

using namespace meglab;
using meglab::io::json;

TEST_CASE("TabularMDP JSON round-trips bit-exactly") {
    rng::Stream stream(3);
    for (int trial = 0; trial < 10; ++trial) {
        const TabularMDP m = harness::random_dense_mdp(3, 2, 3, stream);
        const json j = io::to_json(m);
        const TabularMDP back = io::mdp_from_json(json::parse(j.dump()));
        CHECK(back.num_states == m.num_states);
        CHECK(back.initial_state == m.initial_state);
        // Bit-exact doubles, hence identical tensors.
        CHECK(back.transitions == m.transitions);
        CHECK(back.rewards == m.rewards);
        // And a stable second serialization.
        CHECK(io::to_json(back).dump() == j.dump());
    }
}

TEST_CASE("TabularMDP JSON uses the declared field names and h-major nesting") {
    const HallwayInstance hallway = gen_hallway(2);
    const json j = io::to_json(hallway.diverse.tasks[0]);
    CHECK(j.contains("S"));
    CHECK(j.contains("A"));
    CHECK(j.contains("H"));
    CHECK(j.contains("s1"));
    CHECK(j.at("P").size() == 2);          // h-major
    CHECK(j.at("P")[0].size() == 3);       // then s
    CHECK(j.at("P")[0][0].size() == 2);    // then a
    CHECK(j.at("P")[0][0][0].size() == 3); // then s'
    CHECK(j.at("R")[0].size() == 3);
}

TEST_CASE("LinearMDP JSON round-trips") {
    rng::Stream stream(5);
    const TabularMDP base = harness::random_dense_mdp(2, 2, 2, stream);
    const LinearMDP lm = embed_tabular(base);
    const LinearMDP back = io::linear_from_json(json::parse(io::to_json(lm).dump()));
    CHECK(back.dim == lm.dim);
    CHECK(back.phi == lm.phi);
    CHECK(back.nu == lm.nu);
    CHECK(back.theta == lm.theta);
    CHECK(validate_linear(back).empty());
}

TEST_CASE("LQRSystem JSON round-trips and re-validates") {
    rng::Stream stream(7);
    const LQRSystem sys = harness::random_wellposed_lqr(2, 2, 3, stream);
    const LQRSystem back = io::lqr_from_json(json::parse(io::to_json(sys).dump()));
    CHECK(back.dim_state == 2);
    CHECK(back.horizon == 3);
    for (int h = 0; h < 3; ++h) {
        CHECK(back.A[h].a == sys.A[h].a);
        CHECK(back.B[h].a == sys.B[h].a);
        CHECK(back.Rs[h].a == sys.Rs[h].a);
        CHECK(back.Ra[h].a == sys.Ra[h].a);
    }
    CHECK(back.initial_state == sys.initial_state);
}

TEST_CASE("schedule JSON carries the declared shape") {
    const ExplorationSchedule sched = default_schedule(3, ScheduleVariant::Thm2);
    const json j = io::to_json(sched);
    CHECK(j.at("kind") == "epsilon_greedy");
    CHECK(j.at("eps").size() == 3);
    const ExplorationSchedule back = io::schedule_from_json(j);
    CHECK(back.eps == sched.eps);

    const ExplorationSchedule gauss = gaussian_schedule(2, {0.5, 0.5}, {1.0, 2.0});
    const json jg = io::to_json(gauss);
    CHECK(jg.at("kind") == "gaussian");
    const ExplorationSchedule gauss_back = io::schedule_from_json(jg);
    CHECK(gauss_back.sigma == gauss.sigma);
}

TEST_CASE("MEGResult JSON exposes alpha, c, task, policy, feasibility") {
    const HallwayInstance hallway = gen_hallway(2);
    TaskSet single;
    single.tasks = {hallway.diverse.tasks.back()};
    const std::vector<QFunction> zero = {QFunction::zeros(3, 2, 2)};
    const MEGResult result = meg_exact(SuboptimalJoint{zero, 1.0}, single,
                                       default_schedule(2, ScheduleVariant::Thm2));
    const json j = io::to_json(result);
    CHECK(j.at("feasible") == true);
    CHECK(j.at("alpha").get<double>() == doctest::Approx(result.alpha));
    CHECK(j.at("task_index") == 0);
    CHECK(j.at("improved_policy").size() == 2); // h-major action table
}

TEST_CASE("runlog CSV declares the specified header") {
    const HallwayInstance hallway = gen_hallway(2);
    const RunLog log =
        run_algorithm1(hallway.diverse, default_schedule(2, ScheduleVariant::Thm2), 3, 1);
    const std::string csv = io::runlog_csv(log);
    CHECK(csv.rfind("round,task_id,greedy_value,optimal_value,suboptimality,episodes_total,seed\n",
                    0) == 0);
}

TEST_CASE("dataset CSV declares the specified header and tracks episodes") {
    const HallwayInstance hallway = gen_hallway(2);
    Dataset data(3, 2, 2);
    rng::Stream stream(9);
    data.add_episode(sample_episode(hallway.base, MarkovPolicy::uniform(3, 2, 2), stream));
    data.add_episode(sample_episode(hallway.base, MarkovPolicy::uniform(3, 2, 2), stream));
    const std::string csv = io::dataset_csv(data, "task0");
    CHECK(csv.rfind("task_id,episode,h,s,a,r,s_next\n", 0) == 0);
    // First step of each episode: 1-based h = 1, starting state 0.
    CHECK(csv.find("task0,0,1,0,") != std::string::npos);
    CHECK(csv.find("task0,1,1,0,") != std::string::npos);
}

TEST_CASE("spectrum CSV lists ascending eigenvalues per (policy, h)") {
    std::string csv = io::spectrum_csv_header();
    io::append_spectrum_csv(csv, "mix", 2, {0.25, 0.5, 1.0});
    CHECK(csv == "policy,h,index,eigenvalue\nmix,2,0,0.25\nmix,2,1,0.5\nmix,2,2,1\n");
}

TEST_CASE("atomic_write replaces files without partial content") {
    namespace fs = std::filesystem;
    const fs::path dir = fs::temp_directory_path() / "meglab_io_test";
    fs::create_directories(dir);
    const fs::path file = dir / "out.txt";
    io::atomic_write(file, "first");
    io::atomic_write(file, "second");
    CHECK(io::read_file(file) == "second");
    CHECK(!fs::exists(file.string() + ".tmp"));
    fs::remove_all(dir);
}

TEST_CASE("schedule JSON rejects unknown kinds") {
    json j;
    j["kind"] = "boltzmann";
    j["eps"] = {0.5};
    CHECK_THROWS_AS(io::schedule_from_json(j), std::invalid_argument);
}

TEST_CASE("format_double round-trips") {
    for (double v : {0.1, 1.0 / 3.0, 12345.6789, 2.2250738585072014e-308}) {
        const std::string s = io::format_double(v);
        CHECK(std::stod(s) == v);
    }
}
