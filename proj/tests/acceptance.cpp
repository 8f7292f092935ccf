// One PASS/FAIL line per acceptance criterion; optional arguments restrict the run to those ids.
#include <cstdio>
#include <exception>
#include <string>
#include <vector>

#include "fraclab/experiments.hpp"

using namespace fraclab;

int main(int argc, char** argv)
{
    std::vector<std::string> ids;
    for (int i = 1; i < argc; ++i) ids.emplace_back(argv[i]);
    if (ids.empty())
        for (const auto& e : experiment_table()) ids.push_back(e.id);

    int failed = 0;
    for (const auto& id : ids) {
        std::string line;
        try {
            const Report r = run_criterion(id);
            char t[32];
            std::snprintf(t, sizeof t, " [%.1f s]", r.wall_seconds);
            line = r.summary() + t;
            if (!r.passed()) {
                ++failed;
                for (const auto& c : r.checks)
                    if (!c.pass)
                        std::printf("    failing check %s = %.6g (required %s %.6g)\n", c.name.c_str(), c.value,
                                    c.relation.c_str(), c.bound);
            }
        } catch (const std::exception& e) {
            ++failed;
            line = "FAIL " + id + ": " + e.what();
        }
        std::printf("%s\n", line.c_str());
        std::fflush(stdout);
    }
    return failed == 0 ? 0 : 1;
}
