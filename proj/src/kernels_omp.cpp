#include <omp.h>

#include <algorithm>
#include <cmath>

#include "robagg/kernels.hpp"

namespace robagg::kernels {

RegretTable regret_table(std::span<const ThreeSignalStructure> structures,
                         RationalityLevel lambda, int n) {
  RegretTable t;
  t.n = n;
  t.size = structures.size();
  t.signed_mass.resize(t.size * (n + 1));
  t.best.resize(t.size);
  const auto count = static_cast<std::ptrdiff_t>(t.size);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t k = 0; k < count; ++k) {
    detail::fill_row(structures[k], lambda, n, t.signed_mass.data() + k * (n + 1), &t.best[k]);
  }
  return t;
}

ArgMax max_regret(const RegretTable& table, std::span<const double> f) {
  const auto blocks = static_cast<std::ptrdiff_t>((table.size + kBlock - 1) / kBlock);
  std::vector<ArgMax> partial(blocks, ArgMax{-1.0, 0});
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t b = 0; b < blocks; ++b) {
    const std::size_t end = std::min(table.size, (b + 1) * kBlock);
    ArgMax local{-1.0, 0};
    for (std::size_t k = b * kBlock; k < end; ++k) {
      const double r = detail::regret_of_row(table.row(k).data(), table.best[k], f);
      if (r > local.value) local = {r, k};
    }
    partial[b] = local;
  }
  ArgMax best{-1.0, 0};
  for (const ArgMax& p : partial) {
    if (p.value > best.value) best = p;
  }
  return best;
}

std::vector<double> mixture_signed_mass(const RegretTable& table, std::span<const double> w) {
  const std::size_t width = table.n + 1;
  const auto blocks = static_cast<std::ptrdiff_t>((table.size + kBlock - 1) / kBlock);
  std::vector<double> partial(blocks * width, 0.0);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t b = 0; b < blocks; ++b) {
    double* acc = partial.data() + b * width;
    const std::size_t end = std::min(table.size, (b + 1) * kBlock);
    for (std::size_t k = b * kBlock; k < end; ++k) {
      const auto d = table.row(k);
      for (std::size_t x = 0; x < width; ++x) acc[x] += w[k] * d[x];
    }
  }
  std::vector<double> out(width, 0.0);
  for (std::ptrdiff_t b = 0; b < blocks; ++b) {
    for (std::size_t x = 0; x < width; ++x) out[x] += partial[b * width + x];
  }
  return out;
}

void hedge_step(const RegretTable& table, std::span<const double> f, double eta,
                std::span<double> log_w) {
  const auto count = static_cast<std::ptrdiff_t>(table.size);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t k = 0; k < count; ++k) {
    log_w[k] += eta * detail::regret_of_row(table.row(k).data(), table.best[k], f);
  }
}

bool threshold_lattice_holds(double lambda, int n, int resolution, double epsilon) {
  const std::vector<double> q = detail::threshold_lattice(lambda, resolution, epsilon);
  const auto count = static_cast<std::ptrdiff_t>(q.size());
  std::vector<detail::ThresholdSides> sides(q.size());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < count; ++i) sides[i] = detail::threshold_sides(lambda, n, q[i]);
  bool holds = true;
#pragma omp parallel for schedule(dynamic, 16) reduction(&& : holds)
  for (std::ptrdiff_t i = 0; i < count; ++i) {
    for (std::ptrdiff_t j = i; j < count && holds; ++j) {
      if (sides[j].log_lhs > sides[i].log_rhs + detail::kLogSlack) holds = false;
    }
  }
  return holds;
}

}  // namespace robagg::kernels
