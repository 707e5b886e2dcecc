#include <algorithm>
#include <cmath>

#include "robagg/kernels.hpp"

namespace robagg::kernels::reference {

RegretTable regret_table(std::span<const ThreeSignalStructure> structures,
                         RationalityLevel lambda, int n) {
  RegretTable t;
  t.n = n;
  t.size = structures.size();
  t.signed_mass.resize(t.size * (n + 1));
  t.best.resize(t.size);
  for (std::size_t k = 0; k < t.size; ++k) {
    detail::fill_row(structures[k], lambda, n, t.signed_mass.data() + k * (n + 1), &t.best[k]);
  }
  return t;
}

ArgMax max_regret(const RegretTable& table, std::span<const double> f) {
  ArgMax best{-1.0, 0};
  for (std::size_t k = 0; k < table.size; ++k) {
    const double r = detail::regret_of_row(table.row(k).data(), table.best[k], f);
    if (r > best.value) best = {r, k};
  }
  return best;
}

std::vector<double> mixture_signed_mass(const RegretTable& table, std::span<const double> w) {
  const std::size_t width = table.n + 1;
  std::vector<double> out(width, 0.0);
  std::vector<double> block(width);
  for (std::size_t start = 0; start < table.size; start += kBlock) {
    std::fill(block.begin(), block.end(), 0.0);
    const std::size_t end = std::min(table.size, start + kBlock);
    for (std::size_t k = start; k < end; ++k) {
      const auto d = table.row(k);
      for (std::size_t x = 0; x < width; ++x) block[x] += w[k] * d[x];
    }
    for (std::size_t x = 0; x < width; ++x) out[x] += block[x];
  }
  return out;
}

void hedge_step(const RegretTable& table, std::span<const double> f, double eta,
                std::span<double> log_w) {
  for (std::size_t k = 0; k < table.size; ++k) {
    log_w[k] += eta * detail::regret_of_row(table.row(k).data(), table.best[k], f);
  }
}

bool threshold_lattice_holds(double lambda, int n, int resolution, double epsilon) {
  const std::vector<double> q = detail::threshold_lattice(lambda, resolution, epsilon);
  std::vector<detail::ThresholdSides> sides(q.size());
  for (std::size_t i = 0; i < q.size(); ++i) sides[i] = detail::threshold_sides(lambda, n, q[i]);
  for (std::size_t i = 0; i < q.size(); ++i) {
    for (std::size_t j = i; j < q.size(); ++j) {
      if (sides[j].log_lhs > sides[i].log_rhs + detail::kLogSlack) return false;
    }
  }
  return true;
}

}  // namespace robagg::kernels::reference
