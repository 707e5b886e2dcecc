#include "robagg/reduce.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <vector>

#include "robagg/config.hpp"
#include "robagg/error.hpp"

namespace robagg {
namespace {

void require_positive_lambda(double lambda, const char* who) {
  if (!(lambda > 0.0) || !std::isfinite(lambda)) {
    throw ValidationError(std::string(who) + " needs a finite lambda > 0");
  }
}

double max_abs_diff(const std::array<double, 3>& a, const std::array<double, 3>& b) {
  double m = 0.0;
  for (int i = 0; i < 3; ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

// Solves a 3x3 system in place by Gaussian elimination with partial pivoting.
std::array<double, 3> solve3(std::array<std::array<double, 3>, 3> a, std::array<double, 3> b) {
  for (int col = 0; col < 3; ++col) {
    int piv = col;
    for (int r = col + 1; r < 3; ++r) {
      if (std::abs(a[r][col]) > std::abs(a[piv][col])) piv = r;
    }
    if (a[piv][col] == 0.0) throw NumericError("two_to_three: singular system");
    std::swap(a[piv], a[col]);
    std::swap(b[piv], b[col]);
    for (int r = col + 1; r < 3; ++r) {
      const double f = a[r][col] / a[col][col];
      for (int k = col; k < 3; ++k) a[r][k] -= f * a[col][k];
      b[r] -= f * b[col];
    }
  }
  std::array<double, 3> x{};
  for (int r = 2; r >= 0; --r) {
    double acc = b[r];
    for (int k = r + 1; k < 3; ++k) acc -= a[r][k] * x[k];
    x[r] = acc / a[r][r];
  }
  return x;
}

double clamp_weight(double w, const char* name) {
  if (w >= 0.0) return w;
  if (w >= -kTol.weight_clamp) return 0.0;
  std::ostringstream os;
  os << "two_to_three: weight " << name << " = " << w << " is negative";
  throw NumericError(os.str());
}

}  // namespace

CurvePoint curve_point(double lambda, double s) {
  require_positive_lambda(lambda, "curve_point");
  const double r = psi(lambda, s);
  return CurvePoint{s, {s, r, s * r}};
}

std::array<double, 3> encode(const GeneralSignalStructure& s, double lambda) {
  std::array<double, 3> v{};
  for (const auto& atom : s.atoms) {
    const double r = psi(lambda, atom.posterior);
    v[0] += atom.mass * atom.posterior;
    v[1] += atom.mass * r;
    v[2] += atom.mass * atom.posterior * r;
  }
  return v;
}

double det_m(double lambda, double a, double b, double c, double d) {
  require_positive_lambda(lambda, "det_m");
  // Near psi = 1 the raw row [1, s, psi, s psi] loses 1 - psi to rounding.
  // Dividing the row by 1 - psi and subtracting columns 3, 4 from 1, 2 gives
  // [1, s, e^t, s e^t] with t = 2 lambda (2s - 1); rows with t > 0 are further
  // divided by e^t. Both steps are exact up to the positive factor
  // max(psi, 1 - psi) per row, and every entry stays in [0, 1].
  using Wide = __float128;  // elimination cancels ~17 digits at lambda = 20
  std::array<std::array<Wide, 4>, 4> m{};
  const double s[4] = {a, b, c, d};
  double scale = 1.0;
  for (int i = 0; i < 4; ++i) {
    const double t = 2.0 * lambda * (2.0 * s[i] - 1.0);
    const double e = std::exp(-std::abs(t));
    if (t <= 0.0) {
      m[i] = {1.0, s[i], e, s[i] * e};
      scale *= 1.0 - psi(lambda, s[i]);
    } else {
      m[i] = {e, s[i] * e, 1.0, s[i]};
      scale *= psi(lambda, s[i]);
    }
  }
  const auto mag = [](Wide x) { return x < 0 ? -x : x; };
  Wide det = 1;
  for (int col = 0; col < 4; ++col) {
    int piv = col;
    for (int r = col + 1; r < 4; ++r) {
      if (mag(m[r][col]) > mag(m[piv][col])) piv = r;
    }
    if (m[piv][col] == 0) return 0.0;
    if (piv != col) {
      std::swap(m[piv], m[col]);
      det = -det;
    }
    det *= m[col][col];
    for (int r = col + 1; r < 4; ++r) {
      const Wide f = m[r][col] / m[col][col];
      for (int k = col; k < 4; ++k) m[r][k] -= f * m[col][k];
    }
  }
  return scale * static_cast<double>(det);
}

GeneralSignalStructure merge_equal_posteriors(const GeneralSignalStructure& s, double tol) {
  std::vector<SignalAtom> atoms = s.atoms;
  std::sort(atoms.begin(), atoms.end(),
            [](const SignalAtom& l, const SignalAtom& r) { return l.posterior < r.posterior; });
  std::vector<SignalAtom> merged;
  std::size_t i = 0;
  while (i < atoms.size()) {
    const double anchor = atoms[i].posterior;
    double mass = 0.0;
    double weighted = 0.0;
    double plain = 0.0;
    std::size_t j = i;
    for (; j < atoms.size() && atoms[j].posterior - anchor <= tol; ++j) {
      mass += atoms[j].mass;
      weighted += atoms[j].mass * atoms[j].posterior;
      plain += atoms[j].posterior;
    }
    const double posterior = mass > 0.0 ? weighted / mass : plain / (j - i);
    merged.push_back({std::clamp(posterior, 0.0, 1.0), mass});
    i = j;
  }
  return GeneralSignalStructure{s.mu, std::move(merged)};
}

Decomposition two_to_three(double lambda, double p1, double p2, double q) {
  require_positive_lambda(lambda, "two_to_three");
  if (!(p1 > 0.0 && p1 < p2 && p2 < 1.0)) {
    throw ValidationError("two_to_three needs 0 < p1 < p2 < 1");
  }
  require_probability(q, "q");
  if (q == 0.0) return Decomposition{p2, 1.0, 0.0, 0.0, 0.0};
  if (q == 1.0) return Decomposition{p1, 1.0, 0.0, 0.0, 0.0};

  const auto h = [&](double p) {
    return q * det_m(lambda, 0.0, p1, p, 1.0) + (1.0 - q) * det_m(lambda, 0.0, p2, p, 1.0);
  };
  double lo = p1;
  double hi = p2;
  double h_lo = h(lo);
  const double h_hi = h(hi);
  if (h_lo * h_hi > 0.0) {
    std::ostringstream os;
    os << "two_to_three: root not bracketed (lambda=" << lambda << ", p1=" << p1
       << ", p2=" << p2 << ", q=" << q << ", h(p1)=" << h_lo << ", h(p2)=" << h_hi << ")";
    throw NumericError(os.str());
  }
  while (hi - lo >= 1e-12) {
    const double mid = 0.5 * (lo + hi);
    const double h_mid = h(mid);
    if (h_mid == 0.0) {
      lo = hi = mid;
      break;
    }
    if ((h_mid > 0.0) == (h_lo > 0.0)) {
      lo = mid;
      h_lo = h_mid;
    } else {
      hi = mid;
    }
  }
  const double p = 0.5 * (lo + hi);

  const auto v1 = curve_point(lambda, p1).coordinates;
  const auto v2 = curve_point(lambda, p2).coordinates;
  const auto vp = curve_point(lambda, p).coordinates;
  const auto v0 = curve_point(lambda, 0.0).coordinates;
  const auto vone = curve_point(lambda, 1.0).coordinates;
  std::array<double, 3> target{};
  for (int i = 0; i < 3; ++i) target[i] = q * v1[i] + (1.0 - q) * v2[i];

  // Unknowns (x, y, z); rows: total weight, first and third coordinate. The
  // second coordinate holds because the four points are coplanar.
  const auto w = solve3({{{1.0, 1.0, 1.0}, {vp[0], v0[0], vone[0]}, {vp[2], v0[2], vone[2]}}},
                        {1.0, target[0], target[2]});
  Decomposition dec{p, clamp_weight(w[0], "x"), clamp_weight(w[1], "y"),
                    clamp_weight(w[2], "z"), 0.0};
  std::array<double, 3> rebuilt{};
  for (int i = 0; i < 3; ++i) rebuilt[i] = dec.x * vp[i] + dec.y * v0[i] + dec.z * vone[i];
  dec.residual =
      std::max(max_abs_diff(rebuilt, target), std::abs(dec.x + dec.y + dec.z - 1.0));
  if (dec.residual > kTol.cross_path) {
    std::ostringstream os;
    os << "two_to_three: reconstruction residual " << dec.residual << " exceeds "
       << kTol.cross_path;
    throw NumericError(os.str());
  }
  return dec;
}

Canonicalization canonicalize(const GeneralSignalStructure& s, double lambda) {
  require_positive_lambda(lambda, "canonicalize");
  if (s.atoms.empty()) throw ValidationError("canonicalize needs at least one atom");
  constexpr double kMergeTol = 1e-12;

  double mass0 = 0.0;
  double mass1 = 0.0;
  std::vector<SignalAtom> interior;
  for (const auto& a : merge_equal_posteriors(s, kMergeTol).atoms) {
    if (a.mass <= 0.0) continue;
    if (a.posterior <= kMergeTol) {
      mass0 += a.mass;
    } else if (a.posterior >= 1.0 - kMergeTol) {
      mass1 += a.mass;
    } else {
      interior.push_back(a);
    }
  }

  Canonicalization out;
  // Interior atoms stay sorted; the two smallest posteriors are replaced by
  // one interior atom plus mass at 0 and 1.
  while (interior.size() >= 2) {
    const SignalAtom a = interior[0];
    const SignalAtom b = interior[1];
    const double total = a.mass + b.mass;
    const Decomposition dec = two_to_three(lambda, a.posterior, b.posterior, a.mass / total);
    mass0 += total * dec.y;
    mass1 += total * dec.z;
    interior.erase(interior.begin(), interior.begin() + 2);
    if (dec.x > 0.0) {
      GeneralSignalStructure tmp{s.mu, std::move(interior)};
      tmp.atoms.push_back({dec.p, total * dec.x});
      interior = merge_equal_posteriors(tmp, kMergeTol).atoms;
    }
    ++out.steps;
  }

  double mu = mass1;
  double p = 0.5;
  double mass_p = 0.0;
  if (!interior.empty()) {
    p = interior[0].posterior;
    mass_p = interior[0].mass;
    mu += mass_p * p;
  }
  mu = std::clamp(mu, 0.0, 1.0);
  const double p1 = mu > 0.0 ? std::clamp(mass_p * p / mu, 0.0, 1.0) : 0.0;
  const double p0 = mu < 1.0 ? std::clamp(mass_p * (1.0 - p) / (1.0 - mu), 0.0, 1.0) : 0.0;
  out.structure = make_three_signal(mu, p0, p1);
  if (mass_p > 0.0) out.structure.p = p;

  out.encoding_residual = max_abs_diff(encode(s, lambda), encode(to_general(out.structure), lambda));
  const auto level = RationalityLevel::finite(lambda);
  const ReportStructure before = report_structure(s, level);
  const ReportStructure after = report_structure(out.structure, level);
  out.report_residual = std::max({std::abs(before.mu - after.mu), std::abs(before.q0 - after.q0),
                                  std::abs(before.q1 - after.q1)});
  if (out.encoding_residual > kTol.reduction || out.report_residual > kTol.reduction) {
    std::ostringstream os;
    os << "canonicalize: residuals " << out.encoding_residual << " / " << out.report_residual
       << " exceed " << kTol.reduction;
    throw NumericError(os.str());
  }
  return out;
}

}  // namespace robagg
