#include "cvqss/montecarlo.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "cvqss/model_core.hpp"
#include "cvqss/parallel.hpp"
#include "cvqss/rng.hpp"

namespace cvqss {

namespace {

constexpr std::size_t kChunk = 1 << 16;

struct Channel {
  std::vector<double> sqrt_t;
  double sym_sd, exc_sd, det_sd, amp, delta;
};

Channel make_channel(const NetworkLayout& layout, const SystemParams& params, double va) {
  params.validate();
  layout.validate();
  if (!(va > 0.0)) throw ConfigError("V_A must be > 0");
  Channel ch;
  ch.sqrt_t.resize(static_cast<std::size_t>(layout.n));
  for (int k = 1; k <= layout.n; ++k)
    ch.sqrt_t[static_cast<std::size_t>(k - 1)] = std::sqrt(transmittance(layout, params, k));
  ch.sym_sd = std::sqrt(va * params.n0);
  ch.exc_sd = std::sqrt(params.epsilon0 * params.n0);
  ch.det_sd = std::sqrt((1.0 + params.nu_el) * params.n0);
  ch.amp = std::sqrt(params.eta_d / 2.0);
  ch.delta = params.delta;
  return ch;
}

/// One pulse: symbols (announced), rotated propagation, dealer outcome.
void generate_pulse(const Channel& ch, std::uint64_t seed, std::size_t pulse,
                    std::span<double> x, std::span<double> p, double& xd, double& pd,
                    double* ex_out, double* ep_out) {
  const int n = static_cast<int>(ch.sqrt_t.size());
  const double phase_sd = std::sqrt(ch.delta);
  double sum_x = 0.0, sum_p = 0.0;
  for (int k = 0; k < n; ++k) {
    const auto player = static_cast<std::uint32_t>(k + 1);
    const auto sym = SubstreamDraw(seed, pulse, player, Stream::kSymbol).normals();
    const double xs = ch.sym_sd * sym[0];
    const double ps = ch.sym_sd * sym[1];
    x[static_cast<std::size_t>(k)] = xs;
    p[static_cast<std::size_t>(k)] = ps;

    double xr = xs, pr = ps;
    if (ch.delta > 0.0) {
      const double theta =
          phase_sd * SubstreamDraw(seed, pulse, player, Stream::kPhase).normals()[0];
      const double c = std::cos(theta), s = std::sin(theta);
      xr = xs * c - ps * s;
      pr = xs * s + ps * c;
    }
    const auto exc = SubstreamDraw(seed, pulse, player, Stream::kExcess).normals();
    const double ex = ch.exc_sd * exc[0];
    const double ep = ch.exc_sd * exc[1];
    if (ex_out) ex_out[k] = ex;
    if (ep_out) ep_out[k] = ep;
    sum_x += ch.sqrt_t[static_cast<std::size_t>(k)] * (xr + ex);
    sum_p += ch.sqrt_t[static_cast<std::size_t>(k)] * (pr + ep);
  }
  const auto det = SubstreamDraw(seed, pulse, 0, Stream::kDetector).normals();
  xd = ch.amp * sum_x + ch.det_sd * det[0];
  pd = ch.amp * sum_p + ch.det_sd * det[1];
}

void format_double(std::string& out, double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  out.append(buf, res.ptr);
}

}  // namespace

void draw_symbols(std::uint64_t seed, double va, double n0, std::size_t pulses, int n,
                  std::vector<std::vector<double>>& x, std::vector<std::vector<double>>& p) {
  if (!(va > 0.0)) throw ConfigError("V_A must be > 0");
  if (pulses < 1) throw ConfigError("pulses must be >= 1");
  const double sd = std::sqrt(va * n0);
  x.assign(static_cast<std::size_t>(n), std::vector<double>(pulses));
  p.assign(static_cast<std::size_t>(n), std::vector<double>(pulses));
  for (int k = 0; k < n; ++k) {
    for (std::size_t i = 0; i < pulses; ++i) {
      const auto z =
          SubstreamDraw(seed, i, static_cast<std::uint32_t>(k + 1), Stream::kSymbol).normals();
      x[static_cast<std::size_t>(k)][i] = sd * z[0];
      p[static_cast<std::size_t>(k)][i] = sd * z[1];
    }
  }
}

void apply_phase_error(std::uint64_t seed, double delta,
                       std::vector<std::vector<double>>& x,
                       std::vector<std::vector<double>>& p) {
  if (!(delta >= 0.0)) throw ConfigError("delta must be >= 0");
  if (delta == 0.0) return;
  const double sd = std::sqrt(delta);
  for (std::size_t k = 0; k < x.size(); ++k) {
    for (std::size_t i = 0; i < x[k].size(); ++i) {
      const double theta =
          sd * SubstreamDraw(seed, i, static_cast<std::uint32_t>(k + 1), Stream::kPhase)
                   .normals()[0];
      const double c = std::cos(theta), s = std::sin(theta);
      const double xs = x[k][i], ps = p[k][i];
      x[k][i] = xs * c - ps * s;
      p[k][i] = xs * s + ps * c;
    }
  }
}

void propagate_and_measure(const NetworkLayout& layout, const SystemParams& params,
                           std::uint64_t seed,
                           const std::vector<std::vector<double>>& x,
                           const std::vector<std::vector<double>>& p,
                           std::vector<double>& xd, std::vector<double>& pd,
                           std::vector<std::vector<double>>* ex,
                           std::vector<std::vector<double>>* ep) {
  const std::size_t pulses = x.empty() ? 0 : x.front().size();
  const std::size_t n = x.size();
  const double exc_sd = std::sqrt(params.epsilon0 * params.n0);
  const double det_sd = std::sqrt((1.0 + params.nu_el) * params.n0);
  const double amp = std::sqrt(params.eta_d / 2.0);
  std::vector<double> sqrt_t(n);
  for (int k = 1; k <= static_cast<int>(n); ++k)
    sqrt_t[static_cast<std::size_t>(k - 1)] = std::sqrt(transmittance(layout, params, k));

  xd.resize(pulses);
  pd.resize(pulses);
  if (ex) ex->assign(n, std::vector<double>(pulses));
  if (ep) ep->assign(n, std::vector<double>(pulses));
  for (std::size_t i = 0; i < pulses; ++i) {
    double sum_x = 0.0, sum_p = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      const auto exc =
          SubstreamDraw(seed, i, static_cast<std::uint32_t>(k + 1), Stream::kExcess).normals();
      const double e_x = exc_sd * exc[0];
      const double e_p = exc_sd * exc[1];
      if (ex) (*ex)[k][i] = e_x;
      if (ep) (*ep)[k][i] = e_p;
      sum_x += sqrt_t[k] * (x[k][i] + e_x);
      sum_p += sqrt_t[k] * (p[k][i] + e_p);
    }
    const auto det = SubstreamDraw(seed, i, 0, Stream::kDetector).normals();
    xd[i] = amp * sum_x + det_sd * det[0];
    pd[i] = amp * sum_p + det_sd * det[1];
  }
}

void normalize(const SystemParams& params, const std::vector<double>& xd,
               const std::vector<double>& pd, std::vector<double>& xd_norm,
               std::vector<double>& pd_norm) {
  const double inv_amp = 1.0 / std::sqrt(params.eta_d / 2.0);
  xd_norm.resize(xd.size());
  pd_norm.resize(pd.size());
  for (std::size_t i = 0; i < xd.size(); ++i) {
    xd_norm[i] = xd[i] * inv_amp;
    pd_norm[i] = pd[i] * inv_amp;
  }
}

TrialBatch simulate_batch(const NetworkLayout& layout, const SystemParams& params,
                          const SimOptions& options) {
  const Channel ch = make_channel(layout, params, options.va);
  const std::size_t pulses = options.pulses;
  if (pulses < 1) throw ConfigError("pulses must be >= 1");
  const auto n = static_cast<std::size_t>(layout.n);

  TrialBatch batch;
  batch.seed = options.seed;
  batch.pulses = pulses;
  batch.n = layout.n;
  batch.va = options.va;
  batch.x.assign(n, std::vector<double>(pulses));
  batch.p.assign(n, std::vector<double>(pulses));
  batch.ex.assign(n, std::vector<double>(pulses));
  batch.ep.assign(n, std::vector<double>(pulses));
  batch.xd.resize(pulses);
  batch.pd.resize(pulses);

  detail::parallel_chunks(pulses, kChunk, options.threads,
                          [&](std::size_t, std::size_t begin, std::size_t end) {
                            std::vector<double> x(n), p(n), e_x(n), e_p(n);
                            for (std::size_t i = begin; i < end; ++i) {
                              generate_pulse(ch, options.seed, i, x, p, batch.xd[i],
                                             batch.pd[i], e_x.data(), e_p.data());
                              for (std::size_t k = 0; k < n; ++k) {
                                batch.x[k][i] = x[k];
                                batch.p[k][i] = p[k];
                                batch.ex[k][i] = e_x[k];
                                batch.ep[k][i] = e_p[k];
                              }
                            }
                          });
  normalize(params, batch.xd, batch.pd, batch.xd_norm, batch.pd_norm);
  return batch;
}

void MaterializedBatch::load(std::size_t pulse, std::span<double> x, std::span<double> p,
                             double& xd_norm, double& pd_norm) const {
  for (std::size_t k = 0; k < static_cast<std::size_t>(batch_.n); ++k) {
    x[k] = batch_.x[k][pulse];
    p[k] = batch_.p[k][pulse];
  }
  xd_norm = batch_.xd_norm[pulse];
  pd_norm = batch_.pd_norm[pulse];
}

GeneratedBatch::GeneratedBatch(const NetworkLayout& layout, const SystemParams& params,
                               std::uint64_t seed, std::size_t pulses, double va)
    : pulses_(pulses), n_(layout.n), va_(va), seed_(seed), n0_(params.n0),
      delta_(params.delta) {
  const Channel ch = make_channel(layout, params, va);
  sym_sd_ = ch.sym_sd;
  exc_sd_ = ch.exc_sd;
  det_sd_ = ch.det_sd;
  amp_ = ch.amp;
  inv_amp_ = 1.0 / ch.amp;
  sqrt_t_ = ch.sqrt_t;
}

void GeneratedBatch::load(std::size_t pulse, std::span<double> x, std::span<double> p,
                          double& xd_norm, double& pd_norm) const {
  Channel ch;
  ch.sqrt_t = sqrt_t_;
  ch.sym_sd = sym_sd_;
  ch.exc_sd = exc_sd_;
  ch.det_sd = det_sd_;
  ch.amp = amp_;
  ch.delta = delta_;
  double xd = 0.0, pd = 0.0;
  generate_pulse(ch, seed_, pulse, x, p, xd, pd, nullptr, nullptr);
  xd_norm = xd * inv_amp_;
  pd_norm = pd * inv_amp_;
}

void TamperedBatch::load(std::size_t pulse, std::span<double> x, std::span<double> p,
                         double& xd_norm, double& pd_norm) const {
  base_.load(pulse, x, p, xd_norm, pd_norm);
  const auto k = static_cast<std::size_t>(player_ - 1);
  x[k] *= scale_;
  p[k] *= scale_;
}

void write_batch_csv(const TrialBatch& batch, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path + " for writing");
  std::string line = "pulse_id";
  for (int k = 1; k <= batch.n; ++k)
    line += ",x_" + std::to_string(k) + ",p_" + std::to_string(k);
  line += ",x_d,p_d,x_d_norm,p_d_norm\n";
  out << line;
  for (std::size_t i = 0; i < batch.pulses; ++i) {
    line.clear();
    line += std::to_string(i);
    for (int k = 0; k < batch.n; ++k) {
      line += ',';
      format_double(line, batch.x[static_cast<std::size_t>(k)][i]);
      line += ',';
      format_double(line, batch.p[static_cast<std::size_t>(k)][i]);
    }
    for (double v : {batch.xd[i], batch.pd[i], batch.xd_norm[i], batch.pd_norm[i]}) {
      line += ',';
      format_double(line, v);
    }
    line += '\n';
    out << line;
  }
  if (!out) throw IoError("write failed on " + path);
}

TrialBatch read_batch_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  std::string header;
  if (!std::getline(in, header)) throw IoError("empty batch file " + path);

  int columns = 1;
  for (char c : header) columns += (c == ',');
  const int n = (columns - 5) / 2;
  if (n < 1 || columns != 2 * n + 5)
    throw IoError("unexpected batch CSV header in " + path);

  TrialBatch batch;
  batch.n = n;
  batch.x.assign(static_cast<std::size_t>(n), {});
  batch.p.assign(static_cast<std::size_t>(n), {});
  std::string line;
  std::vector<double> row(static_cast<std::size_t>(columns));
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const char* ptr = line.data();
    const char* end = line.data() + line.size();
    for (int c = 0; c < columns; ++c) {
      if (c > 0) {
        if (ptr >= end || *ptr != ',') throw IoError("malformed batch row in " + path);
        ++ptr;
      }
      auto res = std::from_chars(ptr, end, row[static_cast<std::size_t>(c)]);
      if (res.ec != std::errc()) throw IoError("malformed number in " + path);
      ptr = res.ptr;
    }
    for (int k = 0; k < n; ++k) {
      batch.x[static_cast<std::size_t>(k)].push_back(row[static_cast<std::size_t>(1 + 2 * k)]);
      batch.p[static_cast<std::size_t>(k)].push_back(row[static_cast<std::size_t>(2 + 2 * k)]);
    }
    batch.xd.push_back(row[static_cast<std::size_t>(columns - 4)]);
    batch.pd.push_back(row[static_cast<std::size_t>(columns - 3)]);
    batch.xd_norm.push_back(row[static_cast<std::size_t>(columns - 2)]);
    batch.pd_norm.push_back(row[static_cast<std::size_t>(columns - 1)]);
  }
  batch.pulses = batch.xd.size();
  return batch;
}

}  // namespace cvqss
