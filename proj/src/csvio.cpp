#include "ric/csvio.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "ric/version.hpp"

namespace ric {

namespace {

std::string fmt_g(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream f(path);
  if (!f) throw IoError("cannot open for writing: " + path);
  return f;
}

std::ifstream open_in(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw IoError("cannot open for reading: " + path);
  return f;
}

void finish(std::ofstream& f, const std::string& path) {
  f.flush();
  if (!f) throw IoError("write failure: " + path);
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == sep) {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

double to_double(const std::string& s, const std::string& path) {
  try {
    return std::stod(s);
  } catch (const std::exception&) {
    throw IoError("bad number '" + s + "' in " + path);
  }
}

std::string next_line(std::ifstream& f, const std::string& path,
                      const char* what) {
  std::string line;
  if (!std::getline(f, line))
    throw IoError(std::string("missing ") + what + " in " + path);
  if (!line.empty() && line.back() == '\r') line.pop_back();
  return line;
}

}  // namespace

std::uint64_t fnv1a64(const std::string& s) {
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(v));
  return buf;
}

std::string metadata_comment(const Metadata& meta) {
  std::string line = std::string("# ") + kToolName + " " + kVersion;
  for (const auto& [k, v] : meta) {
    if (k == "tool" || k == "version") continue;
    line += " " + k + "=" + v;
  }
  return line;
}

Metadata parse_metadata_comment(const std::string& line) {
  if (line.empty() || line[0] != '#')
    throw IoError("expected a leading '#' metadata comment");
  Metadata meta;
  std::istringstream in(line.substr(1));
  std::string tok;
  int bare = 0;
  while (in >> tok) {
    const auto eq = tok.find('=');
    if (eq == std::string::npos) {
      meta[bare == 0 ? "tool" : "version"] = tok;
      ++bare;
    } else {
      meta[tok.substr(0, eq)] = tok.substr(eq + 1);
    }
  }
  return meta;
}

void write_rs_csv(const std::string& path, const std::vector<RsPoint>& points,
                  const Metadata& meta) {
  auto f = open_out(path);
  f << metadata_comment(meta) << "\n";
  f << "mu,q,chi,Q_hat,q0_hat,Delta_hat,K,phi,lambda,sigma,residual_max,iters\n";
  for (const RsPoint& p : points) {
    f << fmt_g(p.mu) << ',' << fmt_g(p.saddle.q) << ',' << fmt_g(p.saddle.chi)
      << ',' << fmt_g(p.saddle.Q_hat) << ',' << fmt_g(p.saddle.q0_hat) << ','
      << fmt_g(p.saddle.Delta_hat) << ',' << fmt_g(p.saddle.K) << ','
      << fmt_g(p.phi) << ',' << fmt_g(p.lambda) << ',' << fmt_g(p.sigma) << ','
      << fmt_g(p.residual_max) << ',' << p.iters << "\n";
  }
  finish(f, path);
}

RsCsv read_rs_csv(const std::string& path) {
  auto f = open_in(path);
  RsCsv out;
  out.meta = parse_metadata_comment(next_line(f, path, "metadata comment"));
  const std::string header = next_line(f, path, "column header");
  if (header.rfind("mu,", 0) != 0)
    throw IoError("unexpected column header in " + path);
  std::string line;
  while (std::getline(f, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto cols = split(line, ',');
    if (cols.size() != 12) throw IoError("bad row width in " + path);
    RsPoint p;
    p.mu = to_double(cols[0], path);
    p.saddle.q = to_double(cols[1], path);
    p.saddle.chi = to_double(cols[2], path);
    p.saddle.Q_hat = to_double(cols[3], path);
    p.saddle.q0_hat = to_double(cols[4], path);
    p.saddle.Delta_hat = to_double(cols[5], path);
    p.saddle.K = to_double(cols[6], path);
    p.phi = to_double(cols[7], path);
    p.lambda = to_double(cols[8], path);
    p.sigma = to_double(cols[9], path);
    p.residual_max = to_double(cols[10], path);
    p.iters = static_cast<int>(to_double(cols[11], path));
    out.points.push_back(p);
  }
  return out;
}

void write_ric_csv(const std::string& path,
                   const std::vector<RicEstimate>& rows, const Metadata& meta) {
  auto f = open_out(path);
  f << metadata_comment(meta) << "\n";
  f << "alpha,rho,lambda_star_min,lambda_star_max,delta_min,delta_max,"
       "delta_sym\n";
  for (const RicEstimate& r : rows) {
    f << fmt_g(r.alpha) << ',' << fmt_g(r.rho) << ',' << fmt_g(r.lambda_star_min)
      << ',' << fmt_g(r.lambda_star_max) << ',' << fmt_g(r.delta_min) << ','
      << fmt_g(r.delta_max) << ',' << fmt_g(r.delta_sym) << "\n";
  }
  finish(f, path);
}

void write_phase_csv(const std::string& path, const std::vector<double>& alphas,
                     const std::map<Condition, std::vector<double>>& rho_star,
                     const Metadata& meta) {
  auto f = open_out(path);
  f << metadata_comment(meta) << "\n";
  f << "alpha,rho_star_l0,rho_star_l1_sym,rho_star_l1_asym\n";
  const double nan = std::nan("");
  auto at = [&](Condition c, std::size_t i) {
    const auto it = rho_star.find(c);
    if (it == rho_star.end() || i >= it->second.size()) return nan;
    return it->second[i];
  };
  for (std::size_t i = 0; i < alphas.size(); ++i) {
    f << fmt_g(alphas[i]) << ',' << fmt_g(at(Condition::l0, i)) << ','
      << fmt_g(at(Condition::l1_symmetric, i)) << ','
      << fmt_g(at(Condition::l1_asymmetric, i)) << "\n";
  }
  finish(f, path);
}

void write_histogram(const std::string& path, const EnergyHistogram& h,
                     const Metadata& meta) {
  auto f = open_out(path);
  f << metadata_comment(meta) << "\n";
  f << "mu N S branch total_samples\n";
  f << fmt_g(h.mu) << ' ' << h.n_cols << ' ' << h.subset_size << ' '
    << to_string(h.branch) << ' ' << h.total_samples() << "\n";
  for (int b = 0; b < h.bins(); ++b)
    f << fmt_g(h.center(b)) << ',' << h.counts[b] << "\n";
  finish(f, path);
}

HistogramFile read_histogram(const std::string& path) {
  auto f = open_in(path);
  HistogramFile out;
  out.meta = parse_metadata_comment(next_line(f, path, "metadata comment"));
  const std::string header = next_line(f, path, "field header");
  if (header != "mu N S branch total_samples")
    throw IoError("unexpected field header in " + path);
  std::istringstream vals(next_line(f, path, "field values"));
  std::string branch_s;
  long long total = 0;
  EnergyHistogram& h = out.histogram;
  if (!(vals >> h.mu >> h.n_cols >> h.subset_size >> branch_s >> total))
    throw IoError("bad field values in " + path);
  h.branch = branch_from_string(branch_s);
  std::vector<double> centers;
  std::string line;
  while (std::getline(f, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto cols = split(line, ',');
    if (cols.size() != 2) throw IoError("bad histogram row in " + path);
    centers.push_back(to_double(cols[0], path));
    h.counts.push_back(
        static_cast<long long>(std::llround(to_double(cols[1], path))));
  }
  if (centers.size() < 2)
    throw IoError("histogram needs at least two bins: " + path);
  const double width = centers[1] - centers[0];
  if (!(width > 0.0)) throw IoError("non-increasing bin centers in " + path);
  h.lambda_lo = centers.front() - width / 2.0;
  h.lambda_hi = centers.back() + width / 2.0;
  if (h.total_samples() != total)
    throw IoError("total_samples mismatch in " + path);
  return out;
}

void write_dos(const std::string& path, const DensityOfStates& dos,
               const Metadata& meta) {
  auto f = open_out(path);
  f << metadata_comment(meta) << "\n";
  f << "branch N S normalization\n";
  f << to_string(dos.branch) << ' ' << dos.n_cols << ' ' << dos.subset_size
    << ' ' << fmt_g(std::exp(dos.log_normalization)) << "\n";
  const double nd = static_cast<double>(dos.n_cols);
  for (int b = 0; b < dos.bins(); ++b)
    f << fmt_g(dos.bin_centers[b]) << ',' << fmt_g(dos.log_counts[b] / nd)
      << ',' << dos.samples[b] << ',' << (dos.support[b] ? 1 : 0) << "\n";
  finish(f, path);
}

DosFile read_dos(const std::string& path) {
  auto f = open_in(path);
  DosFile out;
  out.meta = parse_metadata_comment(next_line(f, path, "metadata comment"));
  const std::string header = next_line(f, path, "field header");
  if (header != "branch N S normalization")
    throw IoError("unexpected field header in " + path);
  std::istringstream vals(next_line(f, path, "field values"));
  std::string branch_s;
  double norm = 0.0;
  DensityOfStates& dos = out.dos;
  if (!(vals >> branch_s >> dos.n_cols >> dos.subset_size >> norm))
    throw IoError("bad field values in " + path);
  dos.branch = branch_from_string(branch_s);
  dos.log_normalization = std::log(norm);
  const double nd = static_cast<double>(dos.n_cols);
  std::string line;
  while (std::getline(f, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto cols = split(line, ',');
    if (cols.size() != 4) throw IoError("bad density row in " + path);
    dos.bin_centers.push_back(to_double(cols[0], path));
    dos.log_counts.push_back(to_double(cols[1], path) * nd);
    dos.samples.push_back(
        static_cast<long long>(std::llround(to_double(cols[2], path))));
    // The producer knows what counts as supported (exact enumeration counts
    // are their own support; sampled densities need enough samples), so the
    // mask travels with the file rather than being re-guessed here.
    dos.support.push_back(to_double(cols[3], path) != 0.0 ? 1 : 0);
  }
  return out;
}

void write_compare_csv(const std::string& path,
                       const std::vector<ComparePoint>& rows,
                       const Metadata& meta) {
  auto f = open_out(path);
  f << metadata_comment(meta) << "\n";
  f << "lambda,sigma_rs,sigma_emc\n";
  for (const ComparePoint& r : rows)
    f << fmt_g(r.lambda) << ',' << fmt_g(r.sigma_rs) << ','
      << fmt_g(r.sigma_emc) << "\n";
  finish(f, path);
}

void write_manifest(const std::string& path, const Metadata& meta) {
  auto f = open_out(path);
  for (const auto& [k, v] : meta) f << k << '=' << v << "\n";
  finish(f, path);
}

namespace {

void plot_preamble(std::ofstream& f, const std::string& out_png) {
  f << "# " << kToolName << " " << kVersion << " gnuplot script\n"
    << "set terminal pngcairo size 960,640 enhanced\n"
    << "set output '" << out_png << "'\n"
    << "set datafile separator ','\n"
    << "set grid\n";
}

std::string png_name(const std::string& script_path) {
  std::string base = script_path;
  const auto dot = base.rfind('.');
  if (dot != std::string::npos) base = base.substr(0, dot);
  return base + ".png";
}

}  // namespace

void write_entropy_plot_script(const std::string& path,
                               const std::string& rs_csv, double alpha,
                               double rho) {
  auto f = open_out(path);
  plot_preamble(f, png_name(path));
  f << "set xlabel 'lambda'\n"
    << "set ylabel 'sigma(lambda)'\n"
    << "set title 'Subset eigenvalue entropy density, alpha=" << fmt_g(alpha)
    << " rho=" << fmt_g(rho) << "'\n"
    << "plot '" << rs_csv
    << "' every ::1 using 9:10 with lines lw 2 title 'RS', 0 with lines dt 2 "
       "lc 'gray' notitle\n";
  finish(f, path);
}

void write_compare_plot_script(const std::string& path,
                               const std::string& compare_csv, double alpha,
                               double rho) {
  auto f = open_out(path);
  plot_preamble(f, png_name(path));
  const double r = std::sqrt(rho / alpha);
  const double edge_lo = (1.0 - r) * (1.0 - r);
  const double edge_hi = (1.0 + r) * (1.0 + r);
  f << "set xlabel 'lambda'\n"
    << "set ylabel 'sigma(lambda)'\n"
    << "set title 'RS vs sampled entropy, alpha=" << fmt_g(alpha)
    << " rho=" << fmt_g(rho) << "'\n"
    << "set arrow 1 from " << fmt_g(edge_lo) << ", graph 0 to "
    << fmt_g(edge_lo) << ", graph 1 nohead dt 3\n"
    << "set arrow 2 from " << fmt_g(edge_hi) << ", graph 0 to "
    << fmt_g(edge_hi) << ", graph 1 nohead dt 3\n"
    << "plot '" << compare_csv
    << "' every ::1 using 1:2 with lines lw 2 title 'RS', '" << compare_csv
    << "' every ::1 using 1:3 with points pt 7 ps 0.5 title 'EMC+WHAM', 0 "
       "with lines dt 2 lc 'gray' notitle\n";
  finish(f, path);
}

void write_ric_plot_script(const std::string& path, const std::string& ric_csv,
                           double alpha) {
  auto f = open_out(path);
  plot_preamble(f, png_name(path));
  f << "set xlabel 'rho'\n"
    << "set ylabel 'restricted isometry constant'\n"
    << "set title 'RIC estimates, alpha=" << fmt_g(alpha) << "'\n"
    << "plot '" << ric_csv
    << "' every ::1 using 2:5 with linespoints title 'delta_{min}', '"
    << ric_csv
    << "' every ::1 using 2:6 with linespoints title 'delta_{max}', '"
    << ric_csv
    << "' every ::1 using 2:7 with linespoints title 'delta_{sym}', "
    << "sqrt(2)-1 with lines dt 2 title 'sqrt(2)-1', 1 with lines dt 3 "
       "notitle\n";
  finish(f, path);
}

void write_phase_plot_script(const std::string& path,
                             const std::string& phase_csv) {
  auto f = open_out(path);
  plot_preamble(f, png_name(path));
  f << "set xlabel 'alpha = M/N'\n"
    << "set ylabel 'rho = k/N'\n"
    << "set title 'Recovery phase boundaries'\n"
    << "set key left top\n"
    << "plot '" << phase_csv
    << "' every ::1 using 1:2 with linespoints title 'l0', '" << phase_csv
    << "' every ::1 using 1:3 with linespoints title 'l1 symmetric', '"
    << phase_csv
    << "' every ::1 using 1:4 with linespoints title 'l1 asymmetric'\n";
  finish(f, path);
}

}  // namespace ric
