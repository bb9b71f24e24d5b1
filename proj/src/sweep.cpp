#include "cvqss/sweep.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "cvqss/keyrate.hpp"
#include "cvqss/model_core.hpp"
#include "cvqss/parallel.hpp"

namespace cvqss {

namespace {

void format_double(std::string& out, double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  out.append(buf, res.ptr);
}

std::vector<double> length_grid(double from, double to, double step) {
  std::vector<double> out;
  for (int i = 0;; ++i) {
    const double l = from + step * i;
    if (l > to + 1e-9) break;
    out.push_back(l);
  }
  return out;
}

}  // namespace

void SweepSpec::validate() const {
  if (lengths.empty()) throw ConfigError("sweep needs at least one length");
  if (players.empty()) throw ConfigError("sweep needs at least one player count");
  if (deltas.empty()) throw ConfigError("sweep needs at least one delta");
  for (double l : lengths)
    if (!(l >= 0.0)) throw ConfigError("sweep lengths must be >= 0");
  for (int n : players)
    if (n < 1) throw ConfigError("sweep player counts must be >= 1");
  for (double d : deltas)
    if (!(d >= 0.0)) throw ConfigError("sweep deltas must be >= 0");
  params.validate();
}

std::vector<SweepRow> run_sweep(const SweepSpec& spec) {
  spec.validate();
  struct Point {
    int n;
    double delta;
    double length;
  };
  std::vector<Point> points;
  for (int n : spec.players)
    for (double delta : spec.deltas)
      for (double length : spec.lengths) points.push_back({n, delta, length});

  std::vector<SweepRow> rows(points.size());
  detail::parallel_chunks(
      points.size(), 1, spec.threads, [&](std::size_t c, std::size_t, std::size_t) {
        const Point& pt = points[c];
        SystemParams params = spec.params;
        params.delta = pt.delta;
        const NetworkLayout layout = NetworkLayout::equal_spacing(pt.n, pt.length);
        const OptimizationResult opt = optimize_va(layout, params, spec.optimizer);
        const KeyRateReport report = qss_rate(layout, params, opt.va_opt);
        const PlayerRate& limiting =
            report.per_player[static_cast<std::size_t>(report.argmin - 1)];
        SweepRow& row = rows[c];
        row.length = pt.length;
        row.n = pt.n;
        row.delta = pt.delta;
        row.va_opt = opt.va_opt;
        row.i_ab = limiting.i_ab;
        row.chi_be = limiting.chi_be;
        row.r_raw = report.r_qss;
        row.r_clamped = std::max(report.r_qss, 0.0);
        row.argmin = report.argmin;
        row.va_at_boundary = opt.at_boundary;
      });

  std::sort(rows.begin(), rows.end(), [](const SweepRow& a, const SweepRow& b) {
    if (a.n != b.n) return a.n < b.n;
    if (a.delta != b.delta) return a.delta < b.delta;
    return a.length < b.length;
  });
  return rows;
}

void write_sweep_csv(const std::vector<SweepRow>& rows, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path + " for writing");
  out << kSweepCsvHeader << '\n';
  std::string line;
  for (const SweepRow& row : rows) {
    line.clear();
    format_double(line, row.length);
    line += ',';
    line += std::to_string(row.n);
    line += ',';
    format_double(line, row.delta);
    for (double v : {row.va_opt, row.i_ab, row.chi_be, row.r_raw, row.r_clamped}) {
      line += ',';
      format_double(line, v);
    }
    line += ',';
    line += std::to_string(row.argmin);
    line += ',';
    line += row.va_at_boundary ? '1' : '0';
    line += '\n';
    out << line;
  }
  if (!out) throw IoError("write failed on " + path);
}

std::vector<SweepRow> read_sweep_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  std::string header;
  if (!std::getline(in, header) || header != kSweepCsvHeader)
    throw IoError("unexpected sweep CSV header in " + path);
  std::vector<SweepRow> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ss(line);
    std::string field;
    std::vector<std::string> fields;
    while (std::getline(ss, field, ',')) fields.push_back(field);
    if (fields.size() != 10) throw IoError("malformed sweep row in " + path);
    SweepRow row;
    row.length = std::stod(fields[0]);
    row.n = std::stoi(fields[1]);
    row.delta = std::stod(fields[2]);
    row.va_opt = std::stod(fields[3]);
    row.i_ab = std::stod(fields[4]);
    row.chi_be = std::stod(fields[5]);
    row.r_raw = std::stod(fields[6]);
    row.r_clamped = std::stod(fields[7]);
    row.argmin = std::stoi(fields[8]);
    row.va_at_boundary = fields[9] == "1";
    rows.push_back(row);
  }
  return rows;
}

std::optional<double> max_distance(const std::vector<SweepRow>& rows, int n,
                                   double rate_floor, double delta) {
  std::optional<double> best;
  for (const SweepRow& row : rows) {
    if (row.n != n || row.delta != delta) continue;
    if (row.r_raw > rate_floor && (!best || row.length > *best)) best = row.length;
  }
  return best;
}

void emit_plot_script(const std::string& csv_path, const std::string& script_path) {
  const std::vector<SweepRow> rows = read_sweep_csv(csv_path);
  if (rows.empty()) throw IoError("no rows in " + csv_path);

  std::set<std::pair<int, double>> series;
  std::set<double> deltas;
  for (const SweepRow& row : rows) {
    series.insert({row.n, row.delta});
    deltas.insert(row.delta);
  }

  std::ofstream out(script_path, std::ios::binary);
  if (!out) throw IoError("cannot open " + script_path + " for writing");
  out << "# gnuplot script generated from " << csv_path << "\n"
      << "set datafile separator ','\n"
      << "set logscale y\n"
      << "set xlabel 'fiber length L (km)'\n"
      << "set ylabel 'secure key rate (bits/pulse)'\n"
      << "set key top right\n"
      << "plot \\\n";
  std::size_t i = 0;
  for (const auto& [n, delta] : series) {
    std::string dstr;
    format_double(dstr, delta);
    out << "  '" << csv_path << "' using (column(2)==" << n
        << " && column(3)==" << dstr << " ? column(1) : NaN)"
        << ":(column(7) > 0 ? column(7) : NaN) with lines title 'n=" << n;
    if (deltas.size() > 1) out << ", delta=" << dstr;
    out << "'";
    if (++i < series.size()) out << ", \\";
    out << "\n";
  }
  if (!out) throw IoError("write failed on " + script_path);
}

SweepSpec figure3_spec() {
  SweepSpec spec;
  spec.params.gamma = 0.2;
  spec.params.epsilon0 = 0.01;
  spec.params.nu_el = 0.1;
  spec.params.eta_d = 0.5;
  spec.params.f_rec = 0.95;
  spec.params.t_b = 1.0;
  spec.players = {2, 5, 10, 20};
  spec.deltas = {0.0};
  spec.lengths = length_grid(0.0, 100.0, 1.0);
  return spec;
}

SweepSpec figure4_spec() {
  SweepSpec spec = figure3_spec();
  spec.params.epsilon0 = 0.001;
  spec.players = {10, 20, 50, 100};
  return spec;
}

SweepSpec figure5_spec() {
  SweepSpec spec = figure3_spec();
  spec.params.epsilon0 = 0.001;
  spec.players = {20};
  spec.deltas = {0.0, 1e-4, 1e-3};
  return spec;
}

}  // namespace cvqss
