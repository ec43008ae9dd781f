#include "capot/experiment.hpp"

#include <algorithm>
#include <cstdio>
#include <future>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "capot/capacity.hpp"
#include "capot/ot.hpp"
#include "capot/product.hpp"
#include "capot/transport.hpp"

namespace capot {

std::vector<double> uniform_spacings(std::size_t n, SplitMix& rng) {
  if (n == 0) throw std::invalid_argument("uniform_spacings: n must be positive");
  std::vector<double> cuts(n - 1);
  for (auto& c : cuts) c = rng.uniform();
  std::sort(cuts.begin(), cuts.end());
  std::vector<double> masses(n);
  double prev = 0.0;
  for (std::size_t i = 0; i + 1 < n; ++i) {
    masses[i] = cuts[i] - prev;
    prev = cuts[i];
  }
  masses[n - 1] = 1.0 - prev;
  return masses;
}

std::vector<Fig1Row> run_fig1(const Fig1Config& cfg) {
  if (cfg.nx < 2 || cfg.ny < 2) throw std::invalid_argument("fig1: grids need at least two points");

  std::vector<double> xs(cfg.nx), ys(cfg.ny);
  std::vector<std::string> xl(cfg.nx), yl(cfg.ny);
  for (unsigned i = 0; i < cfg.nx; ++i) {
    xs[i] = static_cast<double>(i + 1);
    xl[i] = std::to_string(i + 1);
  }
  for (unsigned j = 0; j < cfg.ny; ++j) {
    ys[j] = 2.2 * static_cast<double>(j);
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.1f", ys[j]);
    yl[j] = buf;
  }
  const ProductSpace sp{GroundSet(std::move(xl)), GroundSet(std::move(yl))};

  std::vector<double> cost(static_cast<std::size_t>(cfg.nx) * cfg.ny);
  for (unsigned i = 0; i < cfg.nx; ++i)
    for (unsigned j = 0; j < cfg.ny; ++j) {
      const double d = xs[i] - ys[j];
      cost[static_cast<std::size_t>(i) * cfg.ny + j] = d * d;
    }
  const LossMatrix loss(sp, std::move(cost));

  std::vector<Fig1Row> rows(cfg.trials);
  auto run_trial = [&](unsigned t) {
    SplitMix rng = SplitMix::fork(cfg.seed, t);
    const std::vector<double> u = uniform_spacings(cfg.nx, rng);
    const std::vector<double> v = uniform_spacings(cfg.ny, rng);
    Fig1Row row;
    row.trial = t;
    row.capacity_min =
        choquet_bounds(loss, make_additive(sp.x(), u), make_additive(sp.y(), v), false).lower;
    row.classical_min = ot_classic(loss, u, v, Sense::minimize).objective;
    rows[t] = row;
  };

  unsigned workers = std::max(1u, std::thread::hardware_concurrency());
  workers = std::min<unsigned>({workers, 8u, std::max(1u, cfg.trials)});
  std::vector<std::future<void>> tasks;
  tasks.reserve(workers);
  for (unsigned w = 0; w < workers; ++w)
    tasks.push_back(std::async(std::launch::async, [&, w] {
      for (unsigned t = w; t < cfg.trials; t += workers) run_trial(t);
    }));
  for (auto& t : tasks) t.get();
  return rows;
}

}  // namespace capot
