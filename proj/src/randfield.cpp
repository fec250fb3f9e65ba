#include "rbsgm/randfield.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace rbsgm::randfield {

namespace {

constexpr double kPi = std::numbers::pi;

// Bisection on [lo, hi] where fn changes sign; returns the midpoint once the
// bracket is below 1e-12 relative width.
template <class Fn>
double bisect(Fn&& fn, double lo, double hi) {
  double flo = fn(lo);
  const double fhi = fn(hi);
  if (flo == 0.0) return lo;
  if (fhi == 0.0) return hi;
  if ((flo > 0.0) == (fhi > 0.0)) throw std::logic_error("kl_1d: root bracket has no sign change");
  for (int it = 0; it < 200 && hi - lo > 1e-14 * std::max(1.0, std::abs(hi)); ++it) {
    const double mid = 0.5 * (lo + hi);
    const double fm = fn(mid);
    if (fm == 0.0) return mid;
    if ((fm > 0.0) == (flo > 0.0)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

}  // namespace

double Eigenpair1d::operator()(double x) const {
  const double arg = frequency * (x - midpoint);
  return norm_scale * (even ? std::cos(arg) : std::sin(arg));
}

std::vector<Eigenpair1d> kl_1d(double corr_len, double lo, double hi, int count) {
  if (!(corr_len > 0.0)) throw std::invalid_argument("kl_1d: correlation length must be positive");
  if (!(lo < hi)) throw std::invalid_argument("kl_1d: empty interval");
  if (count < 1) throw std::invalid_argument("kl_1d: need at least one mode");

  const double a = 0.5 * (hi - lo);
  const double b = 1.0 / corr_len;
  // Even modes solve b - w tan(w a) = 0, odd modes w + b tan(w a) = 0; both
  // are written without tan to keep the brackets pole-free.
  const auto even_fn = [a, b](double w) { return b * std::cos(w * a) - w * std::sin(w * a); };
  const auto odd_fn = [a, b](double w) { return w * std::cos(w * a) + b * std::sin(w * a); };

  std::vector<Eigenpair1d> modes;
  modes.reserve(static_cast<std::size_t>(count));
  for (int t = 0; t < count; ++t) {
    Eigenpair1d mode;
    mode.midpoint = 0.5 * (lo + hi);
    mode.even = t % 2 == 0;
    if (mode.even) {
      const double k = t / 2;
      mode.frequency = bisect(even_fn, k * kPi / a, (k * kPi + 0.5 * kPi) / a);
    } else {
      const double k = (t + 1) / 2;
      mode.frequency = bisect(odd_fn, (k * kPi - 0.5 * kPi) / a, k * kPi / a);
    }
    const double w = mode.frequency;
    mode.eigenvalue = 2.0 * b / (w * w + b * b);
    const double sinc_term = w > 0.0 ? std::sin(2.0 * w * a) / (2.0 * w) : a;
    mode.norm_scale = 1.0 / std::sqrt(mode.even ? a + sinc_term : a - sinc_term);
    modes.push_back(mode);
  }
  return modes;
}

int modes_per_axis(int m) { return static_cast<int>(std::ceil(std::sqrt(2.0 * m))) + 2; }

KlField kl_2d(double corr_len, const fem::GridMesh& mesh, int m, double mean, double scale) {
  if (m < 1) throw std::invalid_argument("kl_2d: m must be >= 1");
  const fem::Rectangle& rect = mesh.rect();

  struct Product {
    double eigenvalue;
    int ix;
    int iy;
  };
  std::vector<Eigenpair1d> modes_x;
  std::vector<Eigenpair1d> modes_y;
  std::vector<Product> products;
  int per_axis = modes_per_axis(m);
  for (;;) {
    modes_x = kl_1d(corr_len, rect.x0, rect.x1, per_axis);
    modes_y = kl_1d(corr_len, rect.y0, rect.y1, per_axis);
    products.clear();
    for (int ix = 0; ix < per_axis; ++ix)
      for (int iy = 0; iy < per_axis; ++iy)
        products.push_back({modes_x[ix].eigenvalue * modes_y[iy].eigenvalue, ix, iy});
    std::sort(products.begin(), products.end(), [](const Product& l, const Product& r) {
      if (l.eigenvalue != r.eigenvalue) return l.eigenvalue > r.eigenvalue;
      return std::pair(l.ix, l.iy) < std::pair(r.ix, r.iy);
    });
    if (static_cast<std::size_t>(m) > products.size())
      throw std::invalid_argument("kl_2d: m exceeds the number of available products");
    // Any product involving a mode we did not compute is bounded by these two.
    const double kept = products[static_cast<std::size_t>(m) - 1].eigenvalue;
    const auto next_x = kl_1d(corr_len, rect.x0, rect.x1, per_axis + 1).back().eigenvalue;
    const auto next_y = kl_1d(corr_len, rect.y0, rect.y1, per_axis + 1).back().eigenvalue;
    if (kept > next_x * modes_y[0].eigenvalue && kept > modes_x[0].eigenvalue * next_y) break;
    per_axis += 2;
  }

  const SparseMatrix mass = fem::assemble_mass(mesh, fem::Restriction::Full);
  KlField field;
  field.mean = mean;
  field.scale = scale;
  field.corr_len = corr_len;
  for (int k = 0; k < m; ++k) {
    const Product& prod = products[static_cast<std::size_t>(k)];
    const Eigenpair1d& fx = modes_x[static_cast<std::size_t>(prod.ix)];
    const Eigenpair1d& fy = modes_y[static_cast<std::size_t>(prod.iy)];
    Vector v = mesh.interpolate([&](double x, double y) { return fx(x) * fy(y); });
    v /= std::sqrt(v.dot(mass * v));
    field.eigenvalues.push_back(prod.eigenvalue);
    field.eigenfunctions.push_back(std::move(v));
    field.mode_pairs.emplace_back(prod.ix, prod.iy);
  }
  return field;
}

Vector KlField::term(int i) const {
  if (i < 0 || i > m()) throw std::out_of_range("KlField::term: index out of range");
  const Index nodes = eigenfunctions.empty() ? 0 : eigenfunctions.front().size();
  if (i == 0) return Vector::Constant(nodes, mean);
  return scale * std::sqrt(eigenvalues[static_cast<std::size_t>(i) - 1]) * eigenfunctions[static_cast<std::size_t>(i) - 1];
}

Vector evaluate_field(const KlField& field, const Vector& xi) {
  if (xi.size() != field.m())
    throw std::invalid_argument("evaluate_field: expected " + std::to_string(field.m()) + " variables, got " +
                                std::to_string(xi.size()));
  Vector out = field.term(0);
  for (int i = 1; i <= field.m(); ++i) out += xi(i - 1) * field.term(i);
  return out;
}

double worst_case_minimum(const KlField& field) {
  Vector bound = field.term(0);
  for (int i = 1; i <= field.m(); ++i) bound -= field.term(i).cwiseAbs();
  return bound.minCoeff();
}

}  // namespace rbsgm::randfield
