// Complete-basis sweep: significant digits of the orthogonal basis and of the
// Vandermonde basis for n = 5..50 (d = 2n - 1).

#include <cstdio>
#include <vector>

#include "dopfit/dopfit.hpp"

int main() {
  std::vector<Eigen::Index> ns;
  for (Eigen::Index n = 5; n <= 50; n += 5) ns.push_back(n);
  std::printf("%4s %4s %12s %12s %10s %12s\n", "n", "d", "eta_F(dop)", "eta_F(vdm)", "rank(dop)", "vdm status");
  for (const dopfit::SweepRow& row : dopfit::sweep_complete(ns, 0.2, 0.8)) {
    const double vdm = row.vandermonde ? row.vandermonde->eta_frob() : 0.0;
    const bool failed = !row.vandermonde || row.vandermonde->failed;
    std::printf("%4lld %4d %12.2f %12.2f %10d %12s\n", static_cast<long long>(row.n), row.degree,
                row.dop->eta_frob(), vdm, row.dop->eps_rank, failed ? "not PD" : "ok");
  }
}
