#pragma once

#include "meglab/mdp.hpp"

#include <string>
#include <vector>

namespace meglab {

// Tasks sharing (S, A, H). The built-in generators additionally share
// transitions bit-identically; `shared_transitions` records that flag.
struct TaskSet {
    std::vector<TabularMDP> tasks;
    std::vector<std::string> ids;
    bool shared_transitions = false;

    int size() const { return static_cast<int>(tasks.size()); }
    void validate() const;
};

} // namespace meglab
