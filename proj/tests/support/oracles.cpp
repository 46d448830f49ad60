#include "oracles.hpp"

#include <cmath>

namespace oracle {

Matrix identity(std::size_t n) {
  Matrix m(n, Vector(n, 0.0));
  for (std::size_t i = 0; i < n; ++i) m[i][i] = 1.0;
  return m;
}

Matrix multiply(const Matrix& a, const Matrix& b) {
  const std::size_t n = a.size();
  const std::size_t k = b.size();
  const std::size_t m = b.front().size();
  Matrix c(n, Vector(m, 0.0));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t l = 0; l < k; ++l)
      for (std::size_t j = 0; j < m; ++j) c[i][j] += a[i][l] * b[l][j];
  return c;
}

Matrix scale(const Matrix& a, double s) {
  Matrix c = a;
  for (auto& row : c)
    for (auto& v : row) v *= s;
  return c;
}

Matrix expm(const Matrix& q, double t) {
  const std::size_t n = q.size();
  double norm = 0.0;
  for (const auto& row : q) {
    double s = 0.0;
    for (double v : row) s += std::abs(v);
    norm = std::max(norm, s * std::abs(t));
  }
  int squarings = 0;
  while (norm > 0.25) {
    norm *= 0.5;
    ++squarings;
  }
  Matrix a = scale(q, t / std::ldexp(1.0, squarings));
  Matrix result = identity(n);
  Matrix term = identity(n);
  for (int k = 1; k <= 24; ++k) {
    term = scale(multiply(term, a), 1.0 / k);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) result[i][j] += term[i][j];
  }
  for (int s = 0; s < squarings; ++s) result = multiply(result, result);
  return result;
}

Vector left_apply(const Vector& p, const Matrix& m) {
  Vector out(m.front().size(), 0.0);
  for (std::size_t i = 0; i < p.size(); ++i)
    for (std::size_t j = 0; j < out.size(); ++j) out[j] += p[i] * m[i][j];
  return out;
}

Vector right_apply(const Matrix& m, const Vector& v) {
  Vector out(m.size(), 0.0);
  for (std::size_t i = 0; i < m.size(); ++i)
    for (std::size_t j = 0; j < v.size(); ++j) out[i] += m[i][j] * v[j];
  return out;
}

namespace {

Vector axpy(const Vector& x, double a, const Vector& y) {
  Vector out = x;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += a * y[i];
  return out;
}

}  // namespace

std::vector<Vector> forward_kolmogorov(const std::function<Matrix(double t, const Vector& p)>& q, const Vector& p0,
                                       double horizon, std::size_t steps) {
  auto rhs = [&](double t, const Vector& p) { return left_apply(p, q(t, p)); };
  const double h = horizon / static_cast<double>(steps);
  std::vector<Vector> out{p0};
  Vector p = p0;
  for (std::size_t k = 0; k < steps; ++k) {
    double t = static_cast<double>(k) * h;
    Vector k1 = rhs(t, p);
    Vector k2 = rhs(t + 0.5 * h, axpy(p, 0.5 * h, k1));
    Vector k3 = rhs(t + 0.5 * h, axpy(p, 0.5 * h, k2));
    Vector k4 = rhs(t + h, axpy(p, h, k3));
    for (std::size_t i = 0; i < p.size(); ++i) p[i] += h / 6.0 * (k1[i] + 2 * k2[i] + 2 * k3[i] + k4[i]);
    out.push_back(p);
  }
  return out;
}

std::vector<Vector> backward_kolmogorov(const std::function<Matrix(double t)>& q,
                                        const std::function<Vector(double t)>& f, const Vector& h, double horizon,
                                        std::size_t steps) {
  auto rhs = [&](double t, const Vector& v) {
    Vector out = right_apply(q(t), v);
    Vector ft = f(t);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = -(out[i] + ft[i]);
    return out;
  };
  const double dt = horizon / static_cast<double>(steps);
  std::vector<Vector> out(steps + 1);
  Vector v = h;
  out[steps] = v;
  for (std::size_t k = steps; k > 0; --k) {
    double t = static_cast<double>(k) * dt;
    double s = -dt;
    Vector k1 = rhs(t, v);
    Vector k2 = rhs(t + 0.5 * s, axpy(v, 0.5 * s, k1));
    Vector k3 = rhs(t + 0.5 * s, axpy(v, 0.5 * s, k2));
    Vector k4 = rhs(t + s, axpy(v, s, k3));
    for (std::size_t i = 0; i < v.size(); ++i) v[i] += s / 6.0 * (k1[i] + 2 * k2[i] + 2 * k3[i] + k4[i]);
    out[k - 1] = v;
  }
  return out;
}

double grid_scan_argmax(const std::function<double(double)>& fn, double lo, double hi, std::size_t n) {
  double best_x = lo;
  double best = fn(lo);
  for (std::size_t k = 1; k < n; ++k) {
    double x = lo + (hi - lo) * static_cast<double>(k) / static_cast<double>(n - 1);
    double v = fn(x);
    if (v > best) {
      best = v;
      best_x = x;
    }
  }
  return best_x;
}

double log_log_slope(const std::vector<double>& steps, const std::vector<double>& errors) {
  const double n = static_cast<double>(steps.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t k = 0; k < steps.size(); ++k) {
    double x = std::log(steps[k]);
    double y = std::log(errors[k]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

}  // namespace oracle
