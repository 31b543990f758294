#include "oscillant/common.hpp"

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>

#include <omp.h>

namespace osc {

NumericPolicy& policy() {
  static NumericPolicy p;
  return p;
}

double sup_norm(const MatC& z) {
  if (z.size() == 0) return 0.0;
  return z.cwiseAbs().rowwise().sum().maxCoeff();
}

double sup_norm(const VecC& v) {
  if (v.size() == 0) return 0.0;
  return v.cwiseAbs().maxCoeff();
}

int numerical_rank(const MatC& z, double rel_tol) {
  if (z.size() == 0) return 0;
  Eigen::JacobiSVD<MatC> svd(z);
  const auto& s = svd.singularValues();
  if (s.size() == 0 || s(0) == 0.0) return 0;
  int r = 0;
  for (int i = 0; i < s.size(); ++i)
    if (s(i) > rel_tol * s(0)) ++r;
  return r;
}

int configure_threads() {
  int n = omp_get_max_threads();
  if (const char* env = std::getenv("OSCILLANT_THREADS")) {
    int cap = std::atoi(env);
    if (cap > 0 && cap < n) n = cap;
  }
  omp_set_num_threads(n);
  return n;
}

void write_file_atomic(const std::string& path, const std::string& content) {
  namespace fs = std::filesystem;
  fs::path target(path);
  if (target.has_parent_path()) fs::create_directories(target.parent_path());
  fs::path tmp = target;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw InputError("cannot open " + tmp.string() + " for writing");
    out << content;
    if (!out) throw InputError("write failed: " + tmp.string());
  }
  fs::rename(tmp, target);
}

std::vector<double> linspace(double a, double b, int n) {
  std::vector<double> x(n);
  if (n == 1) {
    x[0] = a;
    return x;
  }
  for (int i = 0; i < n; ++i) x[i] = a + (b - a) * i / (n - 1);
  return x;
}

double fit_slope(const std::vector<double>& x, const std::vector<double>& y) {
  const std::size_t n = x.size();
  if (n < 2 || y.size() != n) return 0.0;
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0, sxx = 0;
  for (std::size_t i = 0; i < n; ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
  }
  return sxx > 0 ? sxy / sxx : 0.0;
}

}  // namespace osc
