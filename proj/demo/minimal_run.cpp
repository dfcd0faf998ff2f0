// Smallest end-to-end use of the library: build a scenario, run the
// asynchronous solver, print the primal/dual summary.

#include <cstdio>

#include "codednet/codednet.hpp"

int main() {
  using namespace codednet;
  BuiltScenario sc = build_scenario(builtin_two_node());
  SolverTrace trace = run_solver(sc.model, sc.channel, sc.phy, sc.solver);
  const TraceRow& last = trace.rows.back();
  std::printf("utility f(y_avg) = %.4f, best dual = %.4f, gap = %.4f\n",
              last.f_avg, last.best_dual, last.best_dual - last.f_avg);
  std::printf("average rate a = %.4f bps/Hz over %d matchings\n",
              trace.y_avg.a[0], static_cast<int>(sc.phy.matchings.size()));
  return 0;
}
