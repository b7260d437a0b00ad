#include "ric/ensemble.hpp"

#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "ric/rng.hpp"

namespace ric {

std::string to_string(Normalization n) {
  return n == Normalization::raw ? "raw" : "unit_columns";
}

std::string to_string(Branch b) {
  return b == Branch::minimum ? "min" : "max";
}

Normalization normalization_from_string(const std::string& s) {
  if (s == "raw") return Normalization::raw;
  if (s == "unit_columns") return Normalization::unit_columns;
  throw std::invalid_argument("unknown normalization: " + s);
}

Branch branch_from_string(const std::string& s) {
  if (s == "min") return Branch::minimum;
  if (s == "max") return Branch::maximum;
  throw std::invalid_argument("unknown branch: " + s);
}

long EnsembleSpec::n_rows() const {
  return static_cast<long>(std::lround(static_cast<double>(n_cols) * alpha));
}

void EnsembleSpec::validate() const {
  if (n_cols < 2) throw std::invalid_argument("EnsembleSpec: N must be >= 2");
  if (!(alpha > 0.0) || alpha > 1.0)
    throw std::invalid_argument("EnsembleSpec: alpha must be in (0, 1]");
  if (n_rows() < 1) throw std::invalid_argument("EnsembleSpec: M = round(N*alpha) must be >= 1");
}

void SubsetSelection::validate(long n_cols) const {
  if (indices.empty()) throw std::invalid_argument("SubsetSelection: empty");
  int prev = -1;
  for (int idx : indices) {
    if (idx <= prev)
      throw std::invalid_argument("SubsetSelection: indices must be strictly increasing");
    if (idx < 0 || idx >= n_cols)
      throw std::invalid_argument("SubsetSelection: index out of range");
    prev = idx;
  }
}

MeasurementMatrix generate(const EnsembleSpec& spec) {
  spec.validate();
  const long m = spec.n_rows();
  const long n = spec.n_cols;
  const double sd = 1.0 / std::sqrt(static_cast<double>(m));

  MeasurementMatrix out;
  out.spec = spec;
  out.entries.resize(m, n);
  SplitMix64 rng(derive_stream(spec.seed, 0));
  // column-major fill: the entry stream is part of the reproducibility
  // contract, so the order is fixed here.
  for (long j = 0; j < n; ++j)
    for (long i = 0; i < m; ++i) out.entries(i, j) = sd * rng.normal();

  if (spec.normalization == Normalization::unit_columns) {
    for (long j = 0; j < n; ++j) {
      const double norm = out.entries.col(j).norm();
      if (norm == 0.0) throw Error("generate: zero column cannot be normalized");
      out.entries.col(j) /= norm;
    }
  }
  return out;
}

Mat gram(const MeasurementMatrix& mat, const SubsetSelection& sel) {
  sel.validate(mat.spec.n_cols);
  const int s = sel.size();
  Mat g(s, s);
  for (int a = 0; a < s; ++a) {
    for (int b = a; b < s; ++b) {
      const double v = mat.entries.col(sel.indices[a]).dot(mat.entries.col(sel.indices[b]));
      g(a, b) = v;
      g(b, a) = v;
    }
  }
  if (!g.allFinite()) throw std::invalid_argument("gram: non-finite entries");
  return g;
}

std::pair<double, double> extreme_eigenvalues(const Mat& g) {
  if (g.rows() != g.cols() || g.rows() < 1)
    throw std::invalid_argument("extreme_eigenvalues: need a square matrix");
  if (!g.allFinite())
    throw std::invalid_argument("extreme_eigenvalues: non-finite entries");
  Eigen::SelfAdjointEigenSolver<Mat> es(g, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success)
    throw Error("extreme_eigenvalues: eigensolver failed");
  double lo = es.eigenvalues()(0);
  const double hi = es.eigenvalues()(g.rows() - 1);
  // Gram matrices are PSD; clamp round-off noise at the bottom.
  const double scale = std::max(1.0, std::abs(hi));
  if (lo < 0.0 && lo > -1e-10 * scale) lo = 0.0;
  return {lo, hi};
}

double extreme_eigenvalue(const Mat& g, Branch which) {
  const auto [lo, hi] = extreme_eigenvalues(g);
  return which == Branch::minimum ? lo : hi;
}

double extreme_eigenvalue_power(const Mat& g, Branch which, Vec* warm_start,
                                double tol, int max_iter) {
  if (g.rows() != g.cols() || g.rows() < 1)
    throw std::invalid_argument("extreme_eigenvalue_power: need a square matrix");
  const long s = g.rows();
  // Shift so the sought eigenvalue becomes the dominant one of a PSD matrix:
  // Gershgorin bound c >= lambda_max(g), then for the minimum branch iterate
  // on c*I - g (dominant eigenvalue c - lambda_min), for the maximum branch
  // on g + c*I (dominant c + lambda_max, keeps the spectrum positive).
  double c = 0.0;
  for (long i = 0; i < s; ++i) {
    double row = 0.0;
    for (long j = 0; j < s; ++j) row += std::abs(g(i, j));
    c = std::max(c, row);
  }
  c += 1.0;
  Mat h = (which == Branch::minimum) ? Mat(c * Mat::Identity(s, s) - g)
                                     : Mat(g + c * Mat::Identity(s, s));
  Vec v;
  if (warm_start && warm_start->size() == s && warm_start->norm() > 0.0)
    v = *warm_start / warm_start->norm();
  else {
    // fixed deterministic start; mildly incommensurate so it is never
    // orthogonal to the dominant eigenvector in practice
    v.resize(s);
    for (long i = 0; i < s; ++i) v[i] = 1.0 + 0.1 * std::sin(1.0 + static_cast<double>(i));
    v /= v.norm();
  }
  double mu_prev = 0.0;
  for (int it = 0; it < max_iter; ++it) {
    Vec w = h * v;
    const double mu = v.dot(w);  // Rayleigh quotient
    const double wn = w.norm();
    if (wn == 0.0) break;  // v is in the kernel: dominant eigenvalue 0
    v = w / wn;
    // residual ||h v - mu v|| bounds the eigenvalue error for symmetric h
    if (it > 0 && std::abs(mu - mu_prev) < 0.1 * tol) {
      const double res = (h * v - v.dot(h * v) * v).norm();
      if (res < tol) break;
    }
    mu_prev = mu;
  }
  if (warm_start) *warm_start = v;
  const double dom = v.dot(h * v);
  double lam = (which == Branch::minimum) ? c - dom : dom - c;
  const double scale = std::max(1.0, std::abs(c));
  if (which == Branch::minimum && lam < 0.0 && lam > -1e-9 * scale) lam = 0.0;
  return lam;
}

std::pair<double, double> mp_support_edges(double alpha, double rho) {
  if (!(rho > 0.0) || !(alpha > 0.0) || rho > alpha || alpha > 1.0)
    throw std::invalid_argument("mp_support_edges: need 0 < rho <= alpha <= 1");
  const double r = std::sqrt(rho / alpha);
  return {(1.0 - r) * (1.0 - r), (1.0 + r) * (1.0 + r)};
}

void save_matrix(const std::string& path, const MeasurementMatrix& mat,
                 bool binary) {
  const auto& spec = mat.spec;
  char header[256];
  std::snprintf(header, sizeof(header), "%ld %ld %.17g %s %llu\n", spec.n_cols,
                spec.n_rows(), spec.alpha, to_string(spec.normalization).c_str(),
                static_cast<unsigned long long>(spec.seed));
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("save_matrix: cannot open " + path);
  out << header;
  if (binary) {
    // payload: M*N little-endian doubles, column-major; the loader tells the
    // two modes apart by the exact payload size
    const long m = mat.entries.rows(), n = mat.entries.cols();
    for (long j = 0; j < n; ++j)
      out.write(reinterpret_cast<const char*>(mat.entries.col(j).data()),
                static_cast<std::streamsize>(sizeof(double) * m));
  } else {
    char buf[64];
    for (long i = 0; i < mat.entries.rows(); ++i) {
      for (long j = 0; j < mat.entries.cols(); ++j) {
        std::snprintf(buf, sizeof(buf), "%.17g", mat.entries(i, j));
        out << buf << (j + 1 < mat.entries.cols() ? "," : "\n");
      }
    }
  }
  if (!out) throw IoError("save_matrix: write failed for " + path);
}

MeasurementMatrix load_matrix(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("load_matrix: cannot open " + path);
  std::string header;
  if (!std::getline(in, header)) throw IoError("load_matrix: missing header in " + path);
  std::istringstream hs(header);
  long n = 0, m = 0;
  double alpha = 0.0;
  std::string norm;
  unsigned long long seed = 0;
  if (!(hs >> n >> m >> alpha >> norm >> seed))
    throw IoError("load_matrix: malformed header in " + path);

  MeasurementMatrix out;
  out.spec.n_cols = n;
  out.spec.alpha = alpha;
  out.spec.normalization = normalization_from_string(norm);
  out.spec.seed = seed;
  out.spec.validate();
  if (out.spec.n_rows() != m)
    throw IoError("load_matrix: header M inconsistent with N*alpha in " + path);
  out.entries.resize(m, n);

  const std::streampos data_start = in.tellg();
  in.seekg(0, std::ios::end);
  const std::streamoff payload = in.tellg() - data_start;
  in.seekg(data_start);
  const bool binary =
      payload == static_cast<std::streamoff>(sizeof(double)) * m * n;

  if (binary) {
    for (long j = 0; j < n; ++j) {
      in.read(reinterpret_cast<char*>(out.entries.col(j).data()),
              static_cast<std::streamsize>(sizeof(double) * m));
    }
    if (!in) throw IoError("load_matrix: truncated data in " + path);
  } else {
    for (long i = 0; i < m; ++i) {
      std::string line;
      if (!std::getline(in, line)) throw IoError("load_matrix: truncated data in " + path);
      std::istringstream ls(line);
      std::string cell;
      for (long j = 0; j < n; ++j) {
        if (!std::getline(ls, cell, ',')) throw IoError("load_matrix: short row in " + path);
        out.entries(i, j) = std::stod(cell);
      }
    }
  }
  if (!out.entries.allFinite()) throw IoError("load_matrix: non-finite entries in " + path);
  return out;
}

}  // namespace ric
