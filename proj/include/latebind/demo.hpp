#ifndef LATEBIND_DEMO_HPP
#define LATEBIND_DEMO_HPP

#include "latebind/dynamics.hpp"
#include "latebind/profile.hpp"
#include "latebind/simulate.hpp"
#include "latebind/workloads.hpp"

// Bundled self-contained scenarios: a three-stage assistant-style chain
// (detect → answer → speak) used by the demo configs, the test suites and
// the acceptance runs. `scale` stretches every base latency, which widens
// the synthesized budget ranges proportionally.

namespace latebind::demo {

inline constexpr std::uint64_t kSampleSeed = 20240901;
inline constexpr int kSamplesPerSize = 2000;

ResourceGrid grid();             // 1000..3000 millicores, step 100
PercentileGrid percentiles();    // 1..99 step 5 plus the 99 tail

std::vector<FunctionFamily> families(double scale = 1.0);
WorkflowSpec workflow(Millis slo_ms = 1900, int batch = 1);
DynamicsModel dynamics();

/// Profiles extracted from freshly generated samples for the given batches.
ProfileSet profiles(double scale = 1.0, std::vector<int> batches = {1},
                    std::uint64_t seed = kSampleSeed,
                    int n_per_size = kSamplesPerSize);

SimConfig sim_config(Millis slo_ms = 1900, std::uint64_t n_requests = 1000,
                     std::uint64_t seed = 7);

} // namespace latebind::demo

#endif // LATEBIND_DEMO_HPP
