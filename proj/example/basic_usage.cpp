// Builds a small graph update by update and prints the maintained matchings.

#include <iostream>

#include "dynmatch/oracle/exact_matching.hpp"
#include "dynmatch/pipeline.hpp"

int main() {
    dynmatch::InstanceConfig cfg;
    cfg.n = 8;
    cfg.delta_cap = 4;
    cfg.levels = 2;
    cfg.algo_seed = 42;
    dynmatch::Pipeline pl(cfg);

    // Two paths of length three and a triangle hanging off vertex 6.
    const std::vector<std::pair<dynmatch::VertexId, dynmatch::VertexId>> edges{
        {0, 1}, {1, 2}, {2, 3}, {4, 5}, {5, 6}, {6, 7}, {5, 7}};
    for (auto [u, v] : edges) {
        const auto rep = pl.insert(u, v);
        std::cout << "insert " << u << "-" << v << ": |M_0| = " << pl.base().size()
                  << ", |answer| = " << pl.answer_size() << ", M_0 changes = " << rep.m0_delta() << "\n";
    }
    pl.erase(1, 2);
    std::cout << "after erasing 1-2: |answer| = " << pl.answer_size() << "\n";

    std::vector<dynmatch::EdgeKey> present = pl.instance().edge_keys();
    const auto mu = dynmatch::oracle::max_matching_exact(cfg.n, present).size;
    std::cout << "maximum matching size = " << mu << "\nanswer:";
    for (const auto& e : pl.current_answer()) std::cout << " " << e.lo << "-" << e.hi;
    std::cout << "\n";
    return 2 * pl.answer_size() >= mu ? 0 : 1;
}
