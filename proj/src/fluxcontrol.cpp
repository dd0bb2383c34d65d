#include "tcsim/fluxcontrol.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>
#include <sstream>

#include "tcsim/error.hpp"

namespace tcsim {

void FluxPulse::validate() const {
  if (!std::isfinite(phi_dc) || !std::isfinite(amplitude) || !std::isfinite(phase)) {
    fail(ErrorCode::InvalidArgument, "flux pulse values must be finite");
  }
  if (!(mod_freq >= 0.0)) fail(ErrorCode::InvalidArgument, "modulation frequency must be >= 0");
  if (!(ramp >= 0.0) || !(duration >= 2.0 * ramp)) {
    fail(ErrorCode::InvalidArgument, "pulse duration must be at least twice the ramp");
  }
}

double FluxPulse::envelope(double t) const {
  if (t <= 0.0 || t >= duration) return 0.0;
  if (ramp <= 0.0) return 1.0;
  if (t < ramp) return 0.5 * (1.0 - std::cos(std::numbers::pi * t / ramp));
  if (t > duration - ramp) return 0.5 * (1.0 - std::cos(std::numbers::pi * (duration - t) / ramp));
  return 1.0;
}

double FluxPulse::flux_at(double t) const {
  const double u = envelope(t);
  if (u == 0.0) return phi_dc;
  if (mod_freq == 0.0) return phi_dc + amplitude * u;
  return phi_dc + amplitude * u * std::sin(2.0 * std::numbers::pi * mod_freq * t + phase);
}

double instantaneous_flux(const FluxPulse& pulse, double t) {
  pulse.validate();
  if (!(t >= 0.0) || !(t <= pulse.duration)) {
    fail(ErrorCode::InvalidArgument, "time outside the pulse window");
  }
  return pulse.flux_at(t);
}

void CrosstalkMatrix::validate() const {
  if (c.rows() == 0 || c.rows() != c.cols()) fail(ErrorCode::InvalidArgument, "crosstalk matrix must be square");
  if (!labels.empty() && static_cast<Eigen::Index>(labels.size()) != c.rows()) {
    fail(ErrorCode::InvalidArgument, "crosstalk labels do not match matrix size");
  }
  for (Eigen::Index i = 0; i < c.rows(); ++i) {
    if (c(i, i) != 1.0) fail(ErrorCode::InvalidArgument, "crosstalk matrix diagonal must be 1");
  }
}

double CrosstalkMatrix::condition_number() const {
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(c);
  const auto& s = svd.singularValues();
  const double smin = s[s.size() - 1];
  return smin > 0.0 ? s[0] / smin : std::numeric_limits<double>::infinity();
}

Eigen::VectorXd compensate_crosstalk(const CrosstalkMatrix& m, const Eigen::VectorXd& target) {
  m.validate();
  if (target.size() != m.c.rows()) fail(ErrorCode::InvalidArgument, "target size does not match matrix");
  if (!(m.condition_number() < 1e12)) fail(ErrorCode::Numeric, "crosstalk matrix is singular");
  return m.c.fullPivLu().solve(target);
}

CrosstalkMatrix crosstalk_from_periods(const Eigen::VectorXd& ref_periods,
                                       const Eigen::MatrixXd& cross_periods,
                                       const Eigen::MatrixXd& signs, std::vector<std::string> labels) {
  const Eigen::Index n = ref_periods.size();
  if (cross_periods.rows() != n || cross_periods.cols() != n || signs.rows() != n || signs.cols() != n) {
    fail(ErrorCode::InvalidArgument, "period and sign matrices must be n x n");
  }
  CrosstalkMatrix out;
  out.c = Eigen::MatrixXd::Identity(n, n);
  out.labels = std::move(labels);
  for (Eigen::Index i = 0; i < n; ++i) {
    if (!(ref_periods[i] > 0.0) || !std::isfinite(ref_periods[i])) {
      fail(ErrorCode::InvalidArgument, "reference periods must be positive");
    }
    for (Eigen::Index j = 0; j < n; ++j) {
      if (i == j) continue;
      const double p = cross_periods(i, j);
      if (!(p > 0.0)) fail(ErrorCode::InvalidArgument, "zero or negative crosstalk period");
      const double s = signs(i, j) < 0.0 ? -1.0 : 1.0;
      out.c(i, j) = std::isinf(p) ? 0.0 : s * ref_periods[i] / p;
    }
  }
  return out;
}

Eigen::MatrixXd periods_from_matrix(const Eigen::MatrixXd& matrix, const Eigen::VectorXd& ref_periods) {
  const Eigen::Index n = matrix.rows();
  Eigen::MatrixXd out(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      const double r = matrix(i, j) / matrix(i, i);
      out(i, j) = r == 0.0 ? std::numeric_limits<double>::infinity() : ref_periods[i] / std::abs(r);
    }
  }
  return out;
}

namespace {

std::vector<std::vector<std::string>> read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::Io, "cannot open '" + path + "'");
  std::vector<std::vector<std::string>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      const auto b = cell.find_first_not_of(" \t");
      const auto e = cell.find_last_not_of(" \t");
      cells.push_back(b == std::string::npos ? "" : cell.substr(b, e - b + 1));
    }
    rows.push_back(std::move(cells));
  }
  return rows;
}

double to_number(const std::string& s, const std::string& where) {
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    fail(ErrorCode::Parse, where + ": invalid number '" + s + "'");
  }
  return v;
}

}  // namespace

// Format: header "line,<label1>,...,<labeln>", then one row per loop.
CrosstalkMatrix load_crosstalk_csv(const std::string& path) {
  const auto rows = read_csv(path);
  if (rows.size() < 2) fail(ErrorCode::Parse, path + ": expected a header and at least one row");
  const std::size_t n = rows[0].size() - 1;
  if (rows.size() != n + 1) fail(ErrorCode::Parse, path + ": matrix must be square");
  CrosstalkMatrix m;
  m.labels.assign(rows[0].begin() + 1, rows[0].end());
  m.c.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) {
    if (rows[i + 1].size() != n + 1) fail(ErrorCode::Parse, path + ": row " + std::to_string(i + 1) + " has wrong width");
    for (std::size_t j = 0; j < n; ++j) {
      m.c(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          to_number(rows[i + 1][j + 1], path + " row " + std::to_string(i + 1));
    }
  }
  m.validate();
  return m;
}

std::string crosstalk_to_csv(const CrosstalkMatrix& m) {
  std::ostringstream o;
  o.precision(17);
  o << "line";
  for (Eigen::Index j = 0; j < m.c.cols(); ++j) {
    o << "," << (m.labels.empty() ? "l" + std::to_string(j) : m.labels[static_cast<std::size_t>(j)]);
  }
  o << "\n";
  for (Eigen::Index i = 0; i < m.c.rows(); ++i) {
    o << (m.labels.empty() ? "l" + std::to_string(i) : m.labels[static_cast<std::size_t>(i)]);
    for (Eigen::Index j = 0; j < m.c.cols(); ++j) o << "," << m.c(i, j);
    o << "\n";
  }
  return o.str();
}

void TransferTable::validate() const {
  if (freq.size() != ratio.size() || freq.empty()) fail(ErrorCode::InvalidArgument, "transfer table is empty or ragged");
  for (std::size_t i = 0; i < freq.size(); ++i) {
    if (!(ratio[i] > 0.0) || ratio[i] > 1.5) fail(ErrorCode::InvalidArgument, "transfer ratios must lie in (0, 1.5]");
    if (i > 0 && !(freq[i] > freq[i - 1])) fail(ErrorCode::InvalidArgument, "transfer frequencies must increase strictly");
  }
}

double apply_transfer(const TransferTable& table, double requested_amp, double mod_freq) {
  table.validate();
  if (!(mod_freq >= table.freq.front()) || !(mod_freq <= table.freq.back())) {
    fail(ErrorCode::InvalidArgument, "modulation frequency outside the transfer table range");
  }
  const auto it = std::lower_bound(table.freq.begin(), table.freq.end(), mod_freq);
  const std::size_t k = static_cast<std::size_t>(it - table.freq.begin());
  if (table.freq[k] == mod_freq) return requested_amp * table.ratio[k];
  const double w = (mod_freq - table.freq[k - 1]) / (table.freq[k] - table.freq[k - 1]);
  return requested_amp * ((1.0 - w) * table.ratio[k - 1] + w * table.ratio[k]);
}

// Format: header "freq_ghz,ratio", then one row per knot.
TransferTable load_transfer_csv(const std::string& path) {
  const auto rows = read_csv(path);
  if (rows.size() < 2) fail(ErrorCode::Parse, path + ": expected a header and at least one row");
  TransferTable t;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    if (rows[i].size() != 2) fail(ErrorCode::Parse, path + ": row " + std::to_string(i) + " must have two columns");
    t.freq.push_back(to_number(rows[i][0], path));
    t.ratio.push_back(to_number(rows[i][1], path));
  }
  t.validate();
  return t;
}

}  // namespace tcsim
