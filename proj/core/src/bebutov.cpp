#include "semiflow/bebutov.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <stdexcept>

#include "semiflow/report.hpp"

namespace semiflow {
namespace {

double metric_or_euclid(const StateMetric& m, const StateVector& a, const StateVector& b) {
  return m ? m(a, b) : euclid_dist(a, b);
}

int index_of_time(const TimeSeries& s, double t) {
  const double x = (t - s.t0) / s.dt;
  const int i = static_cast<int>(std::lround(x));
  if (i < 0 || i >= s.size() || std::abs(x - i) > 1e-6)
    throw std::invalid_argument("time record does not contain the requested time");
  return i;
}

// Distances of one centered segment pair, folded into the truncated sum.
double folded_distance(const std::vector<double>& d_by_offset, int per_unit, int n_max) {
  double total = 0;
  double d_running = 0;
  int upto = 0;
  const int half = (static_cast<int>(d_by_offset.size()) - 1) / 2;
  for (int n = 1; n <= n_max; ++n) {
    const int lim = std::min(n * per_unit, half);
    for (; upto <= lim; ++upto) {
      d_running = std::max(d_running, d_by_offset[static_cast<std::size_t>(half + upto)]);
      if (upto > 0)
        d_running = std::max(d_running, d_by_offset[static_cast<std::size_t>(half - upto)]);
    }
    total += std::pow(0.5, n) * d_running / (1.0 + d_running);
  }
  return total;
}

}  // namespace

BebutovDistance bebutov_distance(const TimeSeries& u, const TimeSeries& v, int n_max,
                                 const StateMetric& metric) {
  if (n_max < 1) throw std::invalid_argument("bebutov_distance: n_max must be >= 1");
  if (u.dt <= 0 || v.dt <= 0 || u.dt != v.dt)
    throw std::invalid_argument("bebutov_distance: records need one shared positive dt");
  if (u.t0 > -static_cast<double>(n_max) || u.t_end() < n_max ||
      v.t0 > -static_cast<double>(n_max) || v.t_end() < n_max)
    throw std::invalid_argument("bebutov_distance: records must cover [-n_max, n_max]");

  const int per_unit = static_cast<int>(std::lround(1.0 / u.dt));
  if (per_unit < 1 || std::abs(per_unit * u.dt - 1.0) > 1e-9)
    throw std::invalid_argument("bebutov_distance: dt must divide 1");

  const int half = n_max * per_unit;
  const int cu = index_of_time(u, 0.0), cv = index_of_time(v, 0.0);
  std::vector<double> d(static_cast<std::size_t>(2 * half + 1));
  for (int j = -half; j <= half; ++j)
    d[static_cast<std::size_t>(half + j)] =
        metric_or_euclid(metric, u.samples[static_cast<std::size_t>(cu + j)],
                         v.samples[static_cast<std::size_t>(cv + j)]);

  BebutovDistance out;
  out.value = folded_distance(d, per_unit, n_max);
  out.truncation_bound = std::pow(0.5, n_max);
  return out;
}

namespace {

// Distance profile D(center) against the reference segment centered at the
// first admissible center.
std::vector<double> center_distances(const TimeSeries& rec, int n_max,
                                     const StateMetric& metric, int& first_center,
                                     int& per_unit_out) {
  if (rec.dt <= 0) throw std::invalid_argument("recurrence: record needs dt > 0");
  const int per_unit = static_cast<int>(std::lround(1.0 / rec.dt));
  if (per_unit < 1 || std::abs(per_unit * rec.dt - 1.0) > 1e-9)
    throw std::invalid_argument("recurrence: dt must divide 1");
  const int half = n_max * per_unit;
  if (rec.size() < 2 * half + 1)
    throw std::invalid_argument("recurrence: record shorter than 2*n_max");

  first_center = half;
  per_unit_out = per_unit;
  const int last_center = rec.size() - 1 - half;
  std::vector<double> D(static_cast<std::size_t>(last_center - first_center + 1));
  std::vector<double> d(static_cast<std::size_t>(2 * half + 1));
  for (int c = first_center; c <= last_center; ++c) {
    for (int j = -half; j <= half; ++j)
      d[static_cast<std::size_t>(half + j)] =
          metric_or_euclid(metric, rec.samples[static_cast<std::size_t>(c + j)],
                           rec.samples[static_cast<std::size_t>(first_center + j)]);
    D[static_cast<std::size_t>(c - first_center)] = folded_distance(d, per_unit, n_max);
  }
  return D;
}

}  // namespace

std::string RecurrenceReport::csv() const {
  std::string out = "l,eps,worst_gap,pass\n";
  for (const auto& r : rows) {
    out += fmt_double(r.l) + ',' + fmt_double(eps) + ',' + fmt_double(worst_gap) + ',' +
           (r.pass ? "1" : "0") + '\n';
  }
  return out;
}

RecurrenceReport recurrence_test(const TimeSeries& record, double eps,
                                 const std::vector<double>& l_grid, int n_max,
                                 const StateMetric& metric) {
  if (l_grid.empty()) throw std::invalid_argument("recurrence_test: empty l grid");
  const double l_max = *std::max_element(l_grid.begin(), l_grid.end());
  const double T = record.t_end() - record.t0;
  if (T < 3.0 * l_max)
    throw std::invalid_argument("recurrence_test: record must cover at least 3*max(l)");

  int first_center = 0, per_unit = 0;
  const std::vector<double> D = center_distances(record, n_max, metric, first_center, per_unit);

  RecurrenceReport rep;
  rep.eps = eps;
  rep.centers = static_cast<int>(D.size());

  // Largest gap (in time) between consecutive eps-close centers, counting
  // the window edges.
  double worst_gap = 0;
  double prev_good = record.t0 + record.dt * first_center;  // window start edge
  bool any_good = false;
  for (std::size_t i = 0; i < D.size(); ++i) {
    if (D[i] < eps) {
      ++rep.good_centers;
      const double t = record.t0 + record.dt * (first_center + static_cast<int>(i));
      worst_gap = std::max(worst_gap, t - prev_good);
      prev_good = t;
      any_good = true;
    }
  }
  const double t_last = record.t0 + record.dt * (first_center + static_cast<int>(D.size()) - 1);
  worst_gap = std::max(worst_gap, t_last - prev_good);
  if (!any_good) worst_gap = t_last - (record.t0 + record.dt * first_center);
  rep.worst_gap = worst_gap;

  rep.smallest_passing_l = std::numeric_limits<double>::quiet_NaN();
  std::vector<double> ls = l_grid;
  std::sort(ls.begin(), ls.end());
  for (double l : ls) {
    const bool pass = any_good && worst_gap <= l;
    rep.rows.push_back({l, pass});
    if (pass && std::isnan(rep.smallest_passing_l)) rep.smallest_passing_l = l;
  }
  rep.pass = !std::isnan(rep.smallest_passing_l);
  return rep;
}

double recurrence_defect(const TimeSeries& record, double l_ref, int n_max,
                         const StateMetric& metric) {
  int first_center = 0, per_unit = 0;
  const std::vector<double> D = center_distances(record, n_max, metric, first_center, per_unit);
  const int w = std::max(1, static_cast<int>(std::floor(l_ref / record.dt)));
  if (static_cast<int>(D.size()) <= w) {
    // One window covers everything; the defect is the overall minimum.
    return *std::min_element(D.begin(), D.end());
  }

  // Sliding-window minimum; the defect is the worst window.
  std::deque<int> q;
  double defect = 0;
  for (int i = 0; i < static_cast<int>(D.size()); ++i) {
    while (!q.empty() && D[static_cast<std::size_t>(q.back())] >= D[static_cast<std::size_t>(i)])
      q.pop_back();
    q.push_back(i);
    while (q.front() <= i - w - 1) q.pop_front();
    if (i >= w) defect = std::max(defect, D[static_cast<std::size_t>(q.front())]);
  }
  return defect;
}

}  // namespace semiflow
