#include "pulsejet/analysis.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <string_view>

#include <fmt/format.h>
#include <fmt/ostream.h>

#include "pulsejet/errors.hpp"

namespace pulsejet {

namespace {

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string_view> split(std::string_view line, char delimiter) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(delimiter, start);
    fields.push_back(trim(line.substr(start, pos == std::string_view::npos ? pos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return fields;
}

std::optional<double> parse_double(std::string_view s) {
  double value = 0.0;
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc{} || ptr != s.data() + s.size() || s.empty()) return std::nullopt;
  return value;
}

std::optional<std::size_t> find_column(const std::vector<std::string_view>& header,
                                       const std::vector<std::string>& names) {
  for (std::size_t i = 0; i < header.size(); ++i) {
    for (const auto& n : names) {
      if (header[i] == n) return i;
    }
  }
  return std::nullopt;
}

}  // namespace

Trace ingest(std::istream& is, const IngestOptions& options, std::string source) {
  std::vector<double> t, x, y;
  std::size_t col_t = 0, col_x = 1;
  std::optional<std::size_t> col_y;
  bool layout_known = false;
  std::string line;
  std::size_t line_no = 0;

  while (std::getline(is, line)) {
    ++line_no;
    const std::string_view text = trim(line);
    if (text.empty() || text.front() == '#') continue;
    const auto fields = split(text, options.delimiter);

    if (!layout_known) {
      layout_known = true;
      if (!parse_double(fields.front())) {
        const auto ct = find_column(fields, options.time_columns);
        const auto cx = find_column(fields, options.position_columns);
        if (!ct || !cx) throw ParseError("header lacks a time or position column", line_no);
        col_t = *ct;
        col_x = *cx;
        col_y = find_column(fields, options.lateral_columns);
        continue;
      }
      if (fields.size() >= 3) col_y = 2;
    }

    const std::size_t needed = std::max({col_t, col_x, col_y.value_or(0)}) + 1;
    if (fields.size() < needed) {
      throw ParseError(fmt::format("expected at least {} columns, found {}", needed, fields.size()),
                       line_no);
    }
    const auto tv = parse_double(fields[col_t]);
    const auto xv = parse_double(fields[col_x]);
    if (!tv || !xv) throw ParseError(fmt::format("non-numeric value in '{}'", text), line_no);
    if (!t.empty() && !(*tv > t.back())) {
      throw ParseError(fmt::format("timestamp {} does not increase (previous {})", *tv, t.back()),
                       line_no);
    }
    t.push_back(*tv);
    x.push_back(*xv);
    if (col_y) {
      const auto yv = parse_double(fields[*col_y]);
      if (!yv) throw ParseError(fmt::format("non-numeric y in '{}'", text), line_no);
      y.push_back(*yv);
    }
  }

  if (t.size() < 3) throw DomainError(fmt::format("trace has {} samples, need at least 3", t.size()));
  Trace trace;
  trace.t = Eigen::Map<Eigen::VectorXd>(t.data(), static_cast<Eigen::Index>(t.size()));
  trace.x = Eigen::Map<Eigen::VectorXd>(x.data(), static_cast<Eigen::Index>(x.size()));
  if (col_y) trace.y = Eigen::Map<Eigen::VectorXd>(y.data(), static_cast<Eigen::Index>(y.size()));
  trace.source = std::move(source);
  return trace;
}

Trace ingest(const std::filesystem::path& path, const IngestOptions& options) {
  std::ifstream in(path);
  if (!in) throw IoError(fmt::format("cannot open '{}'", path.string()));
  return ingest(in, options, path.filename().string());
}

void emit(std::ostream& os, const Trace& trace, int digits) {
  os << "t,x\n";
  for (Eigen::Index i = 0; i < trace.size(); ++i) {
    fmt::print(os, "{:.{}g},{:.{}g}\n", trace.t(i), digits, trace.x(i), digits);
  }
}

void write_trajectory_csv(std::ostream& os, const Trajectory& trajectory) {
  os << "t_s,x_m,v_mps,s,V_m3,phase\n";
  for (const auto& st : trajectory.states) {
    fmt::print(os, "{},{},{},{},{},{}\n", st.t, st.x, st.v, st.s, st.V, phase_name(st.phase));
  }
}

Trace to_trace(const Trajectory& trajectory, std::string source) {
  return make_trace(trajectory.times(), trajectory.positions(), std::move(source));
}

Eigen::VectorXd interpolate(const Eigen::VectorXd& xs, const Eigen::VectorXd& ys,
                            const Eigen::VectorXd& xq) {
  Eigen::VectorXd out(xq.size());
  const Eigen::Index n = xs.size();
  for (Eigen::Index k = 0; k < xq.size(); ++k) {
    const double q = xq(k);
    if (q <= xs(0)) {
      out(k) = ys(0);
    } else if (q >= xs(n - 1)) {
      out(k) = ys(n - 1);
    } else {
      const auto it = std::upper_bound(xs.data(), xs.data() + n, q);
      const Eigen::Index i = it - xs.data();
      const double w = (q - xs(i - 1)) / (xs(i) - xs(i - 1));
      out(k) = ys(i - 1) + w * (ys(i) - ys(i - 1));
    }
  }
  return out;
}

namespace {

double interpolate_at(const Eigen::VectorXd& xs, const Eigen::VectorXd& ys, double q) {
  return interpolate(xs, ys, Eigen::VectorXd::Constant(1, q))(0);
}

}  // namespace

MetricsReport metrics(const Trace& trace, const MetricsOptions& options) {
  trace.validate();
  const Eigen::VectorXd v = velocity(trace, clamp_window(options.window, trace.size()));
  const Eigen::Index n = trace.size();
  const double t0 = trace.t(0);
  const double t_end = trace.t(n - 1);

  MetricsReport report;
  report.peak_speed = v.maxCoeff();
  report.distance = trace.x(n - 1) - trace.x(0);
  report.duration = t_end - t0;
  report.avg_speed = report.distance / report.duration;

  if (options.query_distance) {
    const double d = *options.query_distance;
    for (Eigen::Index i = 0; i < n; ++i) {
      if (trace.x(i) - trace.x(0) >= d) {
        if (i == 0) {
          report.time_to_distance = 0.0;
        } else {
          const double x0 = trace.x(i - 1) - trace.x(0);
          const double x1 = trace.x(i) - trace.x(0);
          const double w = (d - x0) / (x1 - x0);
          report.time_to_distance = trace.t(i - 1) + w * (trace.t(i) - trace.t(i - 1)) - t0;
        }
        break;
      }
    }
    if (!report.time_to_distance) {
      throw RangeError(fmt::format("distance {} m not reached; trace covers at most {} m", d,
                                   (trace.x.array() - trace.x(0)).maxCoeff()));
    }
  }

  if (options.schedule) {
    const CycleSchedule& s = *options.schedule;
    const std::pair<Phase, double> phases[] = {
        {Phase::Expulsion, s.t_expulsion}, {Phase::Glide, s.t_glide}, {Phase::Refill, s.t_refill}};
    double begin = t0;
    constexpr double kEps = 1e-9;
    for (int cycle = 0; begin < t_end; ++cycle) {
      for (const auto& [phase, duration] : phases) {
        if (duration <= 0.0) continue;
        const double end = begin + duration;
        if (phase == Phase::Refill && !report.refill_onset_speed && begin <= t_end + kEps) {
          report.refill_onset_speed = interpolate_at(trace.t, v, begin);
        }
        if (end <= t_end + kEps) {
          const double dv = interpolate_at(trace.t, v, end) - interpolate_at(trace.t, v, begin);
          report.phase_deltas.push_back({phase, cycle, begin - t0, end - t0, dv});
        }
        begin = end;
      }
    }
  }
  return report;
}

void write_report(std::ostream& os, const MetricsReport& r) {
  fmt::print(os, "peak_speed_mps={:.10g}\n", r.peak_speed);
  fmt::print(os, "avg_speed_mps={:.10g}\n", r.avg_speed);
  fmt::print(os, "distance_m={:.10g}\n", r.distance);
  fmt::print(os, "duration_s={:.10g}\n", r.duration);
  if (r.refill_onset_speed) fmt::print(os, "refill_onset_mps={:.10g}\n", *r.refill_onset_speed);
  if (r.time_to_distance) fmt::print(os, "time_to_distance_s={:.10g}\n", *r.time_to_distance);
  for (const auto& d : r.phase_deltas) {
    fmt::print(os, "dv_{}_{}_mps={:.10g}\n", phase_name(d.phase), d.cycle, d.dv);
  }
}

ComparisonReport compare(const Trace& reference, const Eigen::VectorXd& reference_v,
                         const Trace& other, const Eigen::VectorXd& other_v) {
  const double begin = std::max(reference.t(0), other.t(0));
  const double end = std::min(reference.t(reference.size() - 1), other.t(other.size() - 1));
  if (!(begin < end)) {
    throw DomainError(fmt::format("compare: time ranges do not overlap ([{}, {}] vs [{}, {}])",
                                  reference.t(0), reference.t(reference.size() - 1), other.t(0),
                                  other.t(other.size() - 1)));
  }
  std::vector<Eigen::Index> keep;
  for (Eigen::Index i = 0; i < reference.size(); ++i) {
    if (reference.t(i) >= begin && reference.t(i) <= end) keep.push_back(i);
  }
  const auto m = static_cast<Eigen::Index>(keep.size());
  if (m < 2) throw DomainError("compare: fewer than two reference samples in the overlap");
  Eigen::VectorXd tq(m), x_ref(m), v_ref(m);
  for (Eigen::Index k = 0; k < m; ++k) {
    tq(k) = reference.t(keep[static_cast<std::size_t>(k)]);
    x_ref(k) = reference.x(keep[static_cast<std::size_t>(k)]);
    v_ref(k) = reference_v(keep[static_cast<std::size_t>(k)]);
  }
  const Eigen::VectorXd x_oth = interpolate(other.t, other.x, tq);
  const Eigen::VectorXd v_oth = interpolate(other.t, other_v, tq);
  const Eigen::ArrayXd ex = x_oth - x_ref;
  const Eigen::ArrayXd ev = v_oth - v_ref;

  ComparisonReport r;
  r.t_begin = tq(0);
  r.t_end = tq(m - 1);
  r.samples = m;
  r.rmse_x = std::sqrt(ex.square().mean());
  r.max_error_x = ex.abs().maxCoeff();
  r.rmse_v = std::sqrt(ev.square().mean());
  r.max_error_v = ev.abs().maxCoeff();
  auto rel = [](double other_value, double ref_value) {
    return ref_value != 0.0 ? (other_value - ref_value) / ref_value
                            : (other_value == 0.0 ? 0.0 : std::numeric_limits<double>::infinity());
  };
  const double span = tq(m - 1) - tq(0);
  const double d_ref = x_ref(m - 1) - x_ref(0);
  const double d_oth = x_oth(m - 1) - x_oth(0);
  r.rel_distance = rel(d_oth, d_ref);
  r.rel_avg_speed = rel(d_oth / span, d_ref / span);
  r.rel_peak_speed = rel(v_oth.maxCoeff(), v_ref.maxCoeff());
  return r;
}

ComparisonReport compare(const Trace& reference, const Trace& other, int window) {
  return compare(reference, velocity(reference, clamp_window(window, reference.size())), other,
                 velocity(other, clamp_window(window, other.size())));
}

ComparisonReport compare(const Trajectory& sim, const Trace& exp, int window) {
  return compare(exp, velocity(exp, clamp_window(window, exp.size())), to_trace(sim), sim.velocities());
}

void write_report(std::ostream& os, const ComparisonReport& r) {
  fmt::print(os, "t_begin_s={:.10g}\nt_end_s={:.10g}\nsamples={}\n", r.t_begin, r.t_end, r.samples);
  fmt::print(os, "rmse_x_m={:.10g}\nmax_error_x_m={:.10g}\n", r.rmse_x, r.max_error_x);
  fmt::print(os, "rmse_v_mps={:.10g}\nmax_error_v_mps={:.10g}\n", r.rmse_v, r.max_error_v);
  fmt::print(os, "rel_peak_speed={:.10g}\nrel_avg_speed={:.10g}\nrel_distance={:.10g}\n",
             r.rel_peak_speed, r.rel_avg_speed, r.rel_distance);
}

}  // namespace pulsejet
