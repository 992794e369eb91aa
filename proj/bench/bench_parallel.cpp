// Benchmark comparing the serial reference implementations against the
// OpenMP kernels: per-node reaction integration inside advance(), and the
// ensemble runner. Also verifies that both paths agree bitwise.

#include <chrono>
#include <cstdio>
#include <cstring>
#include <string>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "soilcn/common.hpp"
#include "soilcn/ensemble.hpp"
#include "soilcn/morris.hpp"
#include "soilcn/network_io.hpp"
#include "soilcn/scenario.hpp"

using namespace soilcn;

namespace {

double seconds(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
        .count();
}

}  // namespace

int main(int argc, char** argv) {
    std::string data = argc > 1 ? argv[1] : "data";
    int years = argc > 2 ? std::atoi(argv[2]) : 2;

#ifdef _OPENMP
    std::printf("OpenMP enabled, max threads = %d\n", omp_get_max_threads());
#else
    std::printf("OpenMP not available; both paths run serially\n");
#endif

    ReactionNetwork net = load_network(data + "/example.net");
    Scenario sc = load_scenario(data + "/desk_grass.scn");
    sc.horizon_years = years;
    sc.window_years = 1;
    sc.nodes = 20;  // more nodes, more parallel work per step
    sc.depth = 3.0;

    std::printf("\n== column kernel: %d-year run, %d nodes ==\n", years, sc.nodes);
    auto t0 = std::chrono::steady_clock::now();
    RunResult serial = run_simulation(sc, net, ParallelMode::Serial);
    double t_serial = seconds(t0);
    std::printf("serial reference: %8.2f s\n", t_serial);

    t0 = std::chrono::steady_clock::now();
    RunResult parallel = run_simulation(sc, net, ParallelMode::OpenMP);
    double t_parallel = seconds(t0);
    std::printf("openmp nodes:     %8.2f s   speedup x%.2f\n", t_parallel,
                t_serial / t_parallel);

    bool identical = true;
    for (int i = 0; i < TargetOutputs::kCount; ++i)
        if (serial.targets.value(i) != parallel.targets.value(i)) identical = false;
    std::printf("targets bitwise identical: %s\n", identical ? "yes" : "NO");

    std::printf("\n== ensemble kernel: K = 3, n = 2 (8 one-year runs) ==\n");
    Scenario mini = sc;
    mini.horizon_years = 1;
    mini.window_years = 1;
    mini.nodes = 6;
    mini.depth = 1.2;
    ParameterCatalog cat = catalog_parameters(net);
    ParameterCatalog small;
    for (const char* p :
         {"mortality.AER.delta", "reaction.Resp-Msa-AER.k", "param.km_o2"})
        small.entries.push_back(cat.entries[cat.index_of(p)]);
    ParameterSpace space = make_parameter_space(small, 11);
    auto trajs = sample_trajectories(space, 2, 3);
    auto weather = scenario_weather(mini, mini.seed, mini.horizon_years);
    PointModel model = simulator_model(mini, net, space, weather);
    std::vector<std::string> names;
    for (const char* n : TargetOutputs::names()) names.push_back(n);

    t0 = std::chrono::steady_clock::now();
    EnsembleOptions one;
    one.concurrency = 1;
    EnsembleResult r1 = execute_ensemble(space, trajs, names, model, one);
    double t_one = seconds(t0);
    std::printf("concurrency 1:    %8.2f s\n", t_one);

    t0 = std::chrono::steady_clock::now();
    EnsembleOptions many;
#ifdef _OPENMP
    many.concurrency = omp_get_max_threads();
#else
    many.concurrency = 1;
#endif
    EnsembleResult rn = execute_ensemble(space, trajs, names, model, many);
    double t_many = seconds(t0);
    std::printf("concurrency %-2d:   %8.2f s   speedup x%.2f\n", many.concurrency,
                t_many, t_one / t_many);

    bool same = true;
    for (size_t i = 0; i < r1.records.size(); ++i)
        for (size_t y = 0; y < names.size(); ++y)
            if (r1.records[i].targets[y] != rn.records[i].targets[y]) same = false;
    std::printf("ensemble results bitwise identical: %s\n", same ? "yes" : "NO");
    return identical && same ? 0 : 1;
}
