// One line per acceptance criterion; exit status 1 if any fails.

#include <chrono>
#include <cstdio>
#include <functional>
#include <utility>
#include <vector>

#include "beammem/experiments.hpp"

int main() {
  namespace ex = beammem::experiments;
  const std::vector<std::function<beammem::Verdict()>> criteria{
      ex::conservation,   ex::dissipation_identity, ex::monitors,       ex::decay_exponential,
      ex::decay_polynomial, ex::proposition1,       ex::pointwise,      ex::kernel_checker,
      ex::observability,  ex::cross_representation};

  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto start = std::chrono::steady_clock::now();
    beammem::Verdict v{"criterion", false, {}};
    try {
      v = criteria[i]();
    } catch (const std::exception& e) {
      v.pass = false;
      v.details.push_back(std::string("threw: ") + e.what());
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::printf("criterion %zu %s: %s (%.1f s)\n", i + 1, v.name.c_str(), v.pass ? "PASS" : "FAIL", secs);
    for (const auto& d : v.details) std::printf("    %s\n", d.c_str());
    std::fflush(stdout);
    if (!v.pass) ++failed;
  }
  std::printf("%d of %zu criteria failed\n", failed, criteria.size());
  return failed ? 1 : 0;
}
