#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "hypercross/metric_tree.hpp"

namespace hypercross {

// One acceptance-suite case.  details_json depends only on the seed, so a
// fixed config reproduces the report byte for byte; wall time is carried
// separately because it never enters the report.
struct SuiteCase {
    std::string id;
    bool pass;
    std::string details_json;
    long long elapsed_ms;
};

std::vector<std::string> suite_ids();
SuiteCase run_suite_case(const std::string& id, uint64_t seed);

// Random metric tree with the given leaf range: random topology by edge
// splitting, strictly positive rational lengths.  Shared with tests.
MetricTree random_metric_tree(std::mt19937_64& rng, int min_leaves, int max_leaves);

}  // namespace hypercross
