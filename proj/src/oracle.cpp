#include "trimode/oracle.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <mutex>
#include <optional>
#include <thread>

#include <unsupported/Eigen/MatrixFunctions>

#include "trimode/rng.hpp"

namespace trimode {

namespace {

constexpr int kAug = 11;  // x (3), integral of x (3), W (5)
using AugMatrix = Eigen::Matrix<double, kAug, kAug>;
using AugVector = Eigen::Matrix<double, kAug, 1>;
// Sampled per step: x noise, step-average noise, and the two alpha
// increments (the only inputs that feed the outputs directly).
constexpr int kDraw = 8;
using DrawMatrix = Eigen::Matrix<double, kDraw, kDraw>;
using DrawVector = Eigen::Matrix<double, kDraw, 1>;

// FFTW's planner is not reentrant.
std::mutex& fftw_planner_mutex() {
  static std::mutex m;
  return m;
}

class RealFft {
 public:
  explicit RealFft(std::size_t n) : n_(n) {
    std::lock_guard<std::mutex> lock(fftw_planner_mutex());
    in_ = fftw_alloc_real(n);
    out_ = fftw_alloc_complex(n / 2 + 1);
    plan_ = fftw_plan_dft_r2c_1d(static_cast<int>(n), in_, out_, FFTW_ESTIMATE);
  }
  ~RealFft() {
    std::lock_guard<std::mutex> lock(fftw_planner_mutex());
    fftw_destroy_plan(plan_);
    fftw_free(in_);
    fftw_free(out_);
  }
  RealFft(const RealFft&) = delete;
  RealFft& operator=(const RealFft&) = delete;

  // Windowed forward transform (e^{-i 2 pi k n / N}).
  void transform(const double* data, const std::vector<double>& window,
                 std::vector<cplx>& result) {
    for (std::size_t i = 0; i < n_; ++i) in_[i] = data[i] * window[i];
    fftw_execute(plan_);
    result.resize(n_ / 2 + 1);
    for (std::size_t k = 0; k < result.size(); ++k)
      result[k] = {out_[k][0], out_[k][1]};
  }

 private:
  std::size_t n_;
  double* in_;
  fftw_complex* out_;
  fftw_plan plan_;
};

std::vector<double> make_window(std::size_t n, Window window) {
  std::vector<double> w(n, 1.0);
  if (window == Window::Hann) {
    // Periodic Hann: a constant leaks only into bins 0 and 1.
    for (std::size_t i = 0; i < n; ++i)
      w[i] = 0.5 * (1.0 - std::cos(2.0 * constants::pi * static_cast<double>(i) /
                                   static_cast<double>(n)));
  }
  return w;
}

double window_power(const std::vector<double>& w) {
  double s = 0.0;
  for (double v : w) s += v * v;
  return s;
}

double bin_omega(std::size_t k, std::size_t n, double dt) {
  return 2.0 * constants::pi * static_cast<double>(k) /
         (static_cast<double>(n) * dt);
}

struct Discretization {
  Eigen::Matrix3d phi;
  Eigen::Matrix3d psi;      // step average from x_k
  Eigen::Vector3d gamma_f;  // state response to a held unit force
  Eigen::Vector3d lambda_f;  // step-average response to it
  DrawMatrix root;          // covariance square root, scaled variables
  double dt = 0.0;
};

// Exact one-step propagator of (x, int x, W) with Van Loan's construction.
// The noise vector returned by root * n is (x noise, step-average noise,
// W_alpha / sqrt(dt)).
Discretization discretize(const SdeSystem& sys, double dt) {
  AugMatrix Az = AugMatrix::Zero();
  Az.block<3, 3>(0, 0) = sys.drift;
  Az.block<3, 3>(3, 0) = Eigen::Matrix3d::Identity();
  Eigen::Matrix<double, kAug, 5> Bz = Eigen::Matrix<double, kAug, 5>::Zero();
  Bz.block<3, 5>(0, 0) = sys.noise;
  Bz.block<5, 5>(6, 0) = Eigen::Matrix<double, 5, 5>::Identity();

  Eigen::Matrix<double, kAug + 1, kAug + 1> det =
      Eigen::Matrix<double, kAug + 1, kAug + 1>::Zero();
  det.block<kAug, kAug>(0, 0) = Az * dt;
  det.block<3, 1>(0, kAug) = sys.signal_input * dt;
  const Eigen::Matrix<double, kAug + 1, kAug + 1> det_exp = det.exp();

  Eigen::Matrix<double, 2 * kAug, 2 * kAug> vl =
      Eigen::Matrix<double, 2 * kAug, 2 * kAug>::Zero();
  vl.block<kAug, kAug>(0, 0) = -Az * dt;
  vl.block<kAug, kAug>(0, kAug) = 0.5 * Bz * Bz.transpose() * dt;
  vl.block<kAug, kAug>(kAug, kAug) = Az.transpose() * dt;
  const Eigen::Matrix<double, 2 * kAug, 2 * kAug> vl_exp = vl.exp();
  const AugMatrix phi_z = vl_exp.block<kAug, kAug>(kAug, kAug).transpose();
  AugMatrix Q = phi_z * vl_exp.block<kAug, kAug>(0, kAug);
  Q = 0.5 * (Q + Q.transpose()).eval();

  AugVector scale;
  for (int i = 0; i < 3; ++i) scale(i) = 1.0;
  for (int i = 3; i < 6; ++i) scale(i) = 1.0 / dt;
  for (int i = 6; i < kAug; ++i) scale(i) = 1.0 / std::sqrt(dt);
  const AugMatrix Qs = scale.asDiagonal() * Q * scale.asDiagonal();
  const DrawMatrix Qd = Qs.topLeftCorner<kDraw, kDraw>();

  Eigen::SelfAdjointEigenSolver<DrawMatrix> eig(Qd);
  const DrawVector vals = eig.eigenvalues().cwiseMax(0.0).cwiseSqrt();

  Discretization d;
  d.dt = dt;
  d.root = eig.eigenvectors() * vals.asDiagonal();
  d.phi = det_exp.block<3, 3>(0, 0);
  d.psi = det_exp.block<3, 3>(3, 0) / dt;
  d.gamma_f = det_exp.block<3, 1>(0, kAug);
  d.lambda_f = det_exp.block<3, 1>(3, kAug) / dt;
  return d;
}

struct PortSamples {
  std::vector<double> plus, minus, state;
};

PortSamples run_system(const SdeSystem& sys, const SimulationOptions& opt,
                       double dt, std::size_t burn, std::size_t steps,
                       std::uint32_t channel, double signal_weight) {
  PortSamples out;
  out.plus.resize(steps);
  out.minus.resize(steps);
  if (opt.record_state) out.state.resize(3 * steps);

  NormalStream rng(opt.seed, opt.trial, channel);
  Eigen::Vector3d x = Eigen::Vector3d::Zero();
  const double sqrt_dt = std::sqrt(dt);
  const bool has_signal = static_cast<bool>(opt.signal) && signal_weight != 0.0;
  const std::size_t total = burn + steps;

  auto force = [&](std::size_t k) {
    if (!has_signal) return 0.0;
    const double t = (static_cast<double>(k) - static_cast<double>(burn) + 0.5) * dt;
    return signal_weight * opt.signal(t);
  };
  auto emit = [&](std::size_t k, const Eigen::Vector3d& avg,
                  const Eigen::Matrix<double, 5, 1>& white) {
    if (k < burn) return;
    const std::size_t i = k - burn;
    const Eigen::Vector2d y = sys.output_state * avg + sys.output_feed * white;
    out.plus[i] = y(0);
    out.minus[i] = y(1);
    if (opt.record_state)
      for (int s = 0; s < 3; ++s) out.state[3 * i + s] = x(s);
  };

  if (opt.integrator == Integrator::Exact) {
    const Discretization disc = discretize(sys, dt);
    DrawVector n;
    Eigen::Matrix<double, 5, 1> white = Eigen::Matrix<double, 5, 1>::Zero();
    for (std::size_t k = 0; k < total; ++k) {
      const auto b0 = rng.next_block();
      const auto b1 = rng.next_block();
      n << b0[0], b0[1], b0[2], b0[3], b1[0], b1[1], b1[2], b1[3];
      const DrawVector e = disc.root * n;
      const double f = force(k);
      const Eigen::Vector3d avg =
          disc.psi * x + disc.lambda_f * f + e.segment<3>(3);
      white(0) = e(6) / sqrt_dt;
      white(1) = e(7) / sqrt_dt;
      emit(k, avg, white);
      x = disc.phi * x + disc.gamma_f * f + e.segment<3>(0);
    }
  } else {
    const double w_scale = std::sqrt(0.5 * dt);
    Eigen::Matrix<double, 5, 1> dw;
    for (std::size_t k = 0; k < total; ++k) {
      const auto b0 = rng.next_block();
      const auto b1 = rng.next_block();
      dw << b0[0], b0[1], b0[2], b0[3], b1[0];
      dw *= w_scale;
      const double f = force(k);
      const Eigen::Vector3d next =
          x + dt * (sys.drift * x + sys.signal_input * f) + sys.noise * dw;
      emit(k, 0.5 * (x + next), Eigen::Matrix<double, 5, 1>(dw / dt));
      x = next;
    }
  }
  return out;
}

struct FamilySystems {
  std::array<double, 2> weights;
  std::array<std::optional<SdeSystem>, 2> systems;

  double largest_rate() const {
    double r = 0.0;
    for (const auto& s : systems)
      if (s) r = std::max(r, s->largest_rate());
    return r;
  }
  double slowest_optical_rate() const {
    double r = std::numeric_limits<double>::infinity();
    for (const auto& s : systems)
      if (s) r = std::min(r, s->slowest_optical_rate());
    return r;
  }
};

FamilySystems family_systems(const SystemConfig& config,
                             const SqueezeConfig& squeeze,
                             const QuadratureFamily& family,
                             const std::array<double, 5>& gains) {
  FamilySystems fs;
  fs.weights = family.weights();
  for (int q = 0; q < 2; ++q) {
    if (fs.weights[q] == 0.0) continue;
    fs.systems[q] = SdeSystem::build(config, squeeze, static_cast<Quadrature>(q));
    fs.systems[q]->scale_inputs(gains);
  }
  return fs;
}

double auto_dt(double largest_rate) { return 0.05 / largest_rate; }

// Smallest even 2^a 3^b 5^c >= n, a size FFTW handles quickly.
std::size_t smooth_length(std::size_t n) {
  for (std::size_t m = std::max<std::size_t>(n, 2);; ++m) {
    if (m % 2) continue;
    std::size_t r = m;
    for (std::size_t p : {2, 3, 5})
      while (r % p == 0) r /= p;
    if (r == 1) return m;
  }
}

SqueezeConfig perturbed(const SqueezeConfig& squeeze, double delta) {
  if (delta == 0.0) return squeeze;
  if (auto* dg = std::get_if<DegenerateSqueezing>(&squeeze))
    return DegenerateSqueezing{dg->upsilon + delta};
  return TwoPhotonSqueezing{squeeze_rate(squeeze) + delta};
}

// Periodogram values of mechanical + conj(h) * open at the requested bins,
// FFTW sign convention.
void segment_periodogram(RealFft& fft, const double* mech, const double* open,
                         const std::vector<double>& window, double norm,
                         const std::vector<std::size_t>& bins,
                         const std::vector<cplx>& filter_conj,
                         std::vector<cplx>& buf_m, std::vector<cplx>& buf_o,
                         double* result) {
  fft.transform(mech, window, buf_m);
  const bool filtered = !filter_conj.empty();
  if (filtered) fft.transform(open, window, buf_o);
  for (std::size_t i = 0; i < bins.size(); ++i) {
    cplx v = buf_m[bins[i]];
    if (filtered) v += filter_conj[i] * buf_o[bins[i]];
    result[i] = norm * std::norm(v);
  }
}

void mean_and_stderr(const std::vector<double>& rows, std::size_t segments,
                     std::size_t width, std::vector<double>& mean,
                     std::vector<double>& err) {
  mean.assign(width, 0.0);
  err.assign(width, 0.0);
  for (std::size_t s = 0; s < segments; ++s)
    for (std::size_t i = 0; i < width; ++i) mean[i] += rows[s * width + i];
  for (auto& m : mean) m /= static_cast<double>(segments);
  for (std::size_t s = 0; s < segments; ++s)
    for (std::size_t i = 0; i < width; ++i) {
      const double d = rows[s * width + i] - mean[i];
      err[i] += d * d;
    }
  const double M = static_cast<double>(segments);
  for (auto& e : err) e = std::sqrt(e / (M - 1.0) / M);
}

}  // namespace

SdeSystem SdeSystem::build(const SystemConfig& config,
                           const SqueezeConfig& squeeze, Quadrature quadrature) {
  const auto& cav = config.cavity();
  const double g0 = cav.gamma0, ge = cav.gamma_e, g = cav.gamma();
  const double gm = config.mechanical().gamma_m;
  const double nT = config.derived().n_thermal;
  const double coupling =
      std::sqrt(2.0 * config.K0() * g * (g0 - ge) / (4.0 * g0));  // sqrt2 eta C0

  const bool amp = quadrature == Quadrature::Amplitude;
  double rate_plus, rate_minus;
  if (auto* dg = std::get_if<DegenerateSqueezing>(&squeeze)) {
    const double u = amp ? dg->upsilon : -dg->upsilon;
    rate_plus = rate_minus = g + u;
  } else {
    const double k = squeeze_rate(squeeze);
    rate_plus = amp ? g - k : g + k;
    rate_minus = amp ? g + k : g - k;
  }

  SdeSystem s;
  s.quadrature = quadrature;
  s.drift(0, 0) = -rate_plus;
  s.drift(1, 1) = -rate_minus;
  s.drift(2, 2) = -gm;
  // The mechanical mode reads one optical combination and pushes the other.
  const int pushed = amp ? 1 : 0;
  const int read = amp ? 0 : 1;
  s.drift(pushed, 2) = -coupling;
  s.drift(2, read) = coupling;

  s.noise(0, 0) = std::sqrt(2.0 * g0);
  s.noise(1, 1) = std::sqrt(2.0 * g0);
  s.noise(0, 2) = std::sqrt(2.0 * ge);
  s.noise(1, 3) = std::sqrt(2.0 * ge);
  s.noise(2, 4) = std::sqrt(2.0 * gm * (2.0 * nT + 1.0));
  s.signal_input(2) = 1.0;

  s.output_state(0, 0) = std::sqrt(2.0 * g0);
  s.output_state(1, 1) = std::sqrt(2.0 * g0);
  s.output_feed(0, 0) = -1.0;
  s.output_feed(1, 1) = -1.0;

  const Eigen::Vector3cd eig = s.drift.eigenvalues();
  for (int i = 0; i < 3; ++i)
    if (eig(i).real() > 1e-12 * s.largest_rate())
      throw StabilityError("drift has an eigenvalue with positive real part");
  return s;
}

void SdeSystem::scale_inputs(const std::array<double, kInputs>& gains) {
  for (int j = 0; j < kInputs; ++j) {
    noise.col(j) *= gains[j];
    output_feed.col(j) *= gains[j];
  }
}

double SdeSystem::largest_rate() const {
  double r = 0.0;
  const Eigen::Vector3cd eig = drift.eigenvalues();
  for (int i = 0; i < 3; ++i) r = std::max(r, std::abs(eig(i)));
  for (int i = 0; i < 3; ++i) r = std::max(r, std::abs(drift(i, i)));
  return r;
}

double SdeSystem::slowest_optical_rate() const {
  return std::min(-drift(0, 0), -drift(1, 1));
}

OutputSeries simulate(const SystemConfig& config, const QuadratureFamily& family,
                      const SimulationOptions& options) {
  return simulate(config, config.squeeze(), family, options);
}

OutputSeries simulate(const SystemConfig& config, const SqueezeConfig& squeeze,
                      const QuadratureFamily& family,
                      const SimulationOptions& options) {
  const FamilySystems fs =
      family_systems(config, squeeze, family, options.input_gains);
  const double limit = auto_dt(fs.largest_rate());
  const double dt = options.dt > 0.0 ? options.dt : limit;
  if (dt > limit * (1.0 + 1e-12))
    throw ConfigError("dt exceeds 0.05 / largest rate");
  const double corr = 1.0 / fs.slowest_optical_rate();
  if (options.duration < 100.0 * corr)
    throw ConfigError("duration must cover at least 100 correlation times");
  const double burn_time = options.burn_in >= 0.0 ? options.burn_in : 20.0 * corr;
  const auto burn = static_cast<std::size_t>(std::ceil(burn_time / dt));
  const auto steps = static_cast<std::size_t>(std::llround(options.duration / dt));

  OutputSeries out;
  out.dt = dt;
  out.mechanical.assign(steps, 0.0);
  out.open.assign(steps, 0.0);
  bool state_taken = false;
  for (int q = 0; q < 2; ++q) {
    if (!fs.systems[q]) continue;
    const SdeSystem& sys = *fs.systems[q];
    const double w = fs.weights[q];
    auto samples = run_system(sys, options, dt, burn, steps,
                              static_cast<std::uint32_t>(q), w);
    const auto& mech = sys.mechanical_row() == 0 ? samples.plus : samples.minus;
    const auto& open = sys.mechanical_row() == 0 ? samples.minus : samples.plus;
    for (std::size_t i = 0; i < steps; ++i) {
      out.mechanical[i] += w * mech[i];
      out.open[i] += w * open[i];
    }
    if (options.record_state && !state_taken) {
      out.state = std::move(samples.state);
      state_taken = true;
    }
  }
  return out;
}

std::vector<std::size_t> select_bins(std::size_t segment_length, double dt,
                                     const std::vector<double>& omegas) {
  std::vector<std::size_t> bins;
  const double spacing = bin_omega(1, segment_length, dt);
  const std::size_t last = segment_length / 2 - 1;
  for (double w : omegas) {
    const auto k = static_cast<std::size_t>(std::llround(w / spacing));
    if (k < 3 || k > last) continue;
    if (bins.empty() || bins.back() != k) bins.push_back(k);
  }
  std::sort(bins.begin(), bins.end());
  bins.erase(std::unique(bins.begin(), bins.end()), bins.end());
  return bins;
}

OracleEstimate estimate_psd(const std::vector<double>& series, double dt,
                            std::size_t segment_length, Window window) {
  OutputSeries s;
  s.dt = dt;
  s.mechanical = series;
  return estimate_psd(s, segment_length, window, PortFilter{});
}

OracleEstimate estimate_psd(const OutputSeries& series,
                            std::size_t segment_length, Window window,
                            const PortFilter& open_filter) {
  if (segment_length < 8) throw ConfigError("segment length too short");
  const std::size_t segments = series.mechanical.size() / segment_length;
  if (segments < 32)
    throw ConfigError("PSD estimate needs at least 32 segments, got " +
                      std::to_string(segments));
  if (open_filter && series.open.size() != series.mechanical.size())
    throw ConfigError("filtered estimate needs both ports");

  const std::size_t n = segment_length;
  const auto w = make_window(n, window);
  const double norm = 2.0 * series.dt / window_power(w);
  std::vector<std::size_t> bins;
  for (std::size_t k = 1; k < n / 2; ++k) bins.push_back(k);
  std::vector<cplx> filter_conj;
  if (open_filter)
    for (auto k : bins)
      filter_conj.push_back(std::conj(open_filter(bin_omega(k, n, series.dt))));

  std::vector<double> rows(segments * bins.size());
  RealFft fft(n);
  std::vector<cplx> bm, bo;
  for (std::size_t s = 0; s < segments; ++s) {
    const double* open = open_filter ? series.open.data() + s * n : nullptr;
    segment_periodogram(fft, series.mechanical.data() + s * n, open, w, norm,
                        bins, filter_conj, bm, bo, rows.data() + s * bins.size());
  }

  OracleEstimate est;
  est.segments = segments;
  est.dt = series.dt;
  for (auto k : bins) est.grid.push_back(bin_omega(k, n, series.dt));
  mean_and_stderr(rows, segments, bins.size(), est.psd, est.stderr_);
  return est;
}

SegmentPlan plan_segments(const SystemConfig& config,
                          const MeasurementCase& mcase,
                          const ValidationOptions& opt) {
  const auto& cav = config.cavity();
  const SqueezeConfig sim_squeeze =
      perturbed(mcase.squeeze, opt.perturb_kappa_g0 * cav.gamma0);
  const FamilySystems fs =
      family_systems(config, sim_squeeze, mcase.family, {1, 1, 1, 1, 1});
  SegmentPlan plan;
  plan.dt = opt.dt > 0.0 ? opt.dt : auto_dt(fs.largest_rate());
  const double omega_lo = opt.omega_lo_g0 * cav.gamma0;
  if (!(omega_lo > 0.0)) throw ConfigError("lowest frequency must be positive");
  plan.length = smooth_length(static_cast<std::size_t>(
      std::ceil(2.0 * constants::pi * 10.0 / (omega_lo * plan.dt))));
  return plan;
}

ValidationReport validate(const SystemConfig& config,
                          const MeasurementCase& mcase,
                          const ValidationOptions& opt) {
  check_case(mcase, config);
  if (opt.segments < 32)
    throw ConfigError("validation needs at least 32 segments");

  const auto& cav = config.cavity();
  const SqueezeConfig sim_squeeze =
      perturbed(mcase.squeeze, opt.perturb_kappa_g0 * cav.gamma0);
  const auto plan = plan_segments(config, mcase, opt);
  const std::size_t n = plan.length;
  const double dt = plan.dt;

  const double omega_lo = opt.omega_lo_g0 * cav.gamma0;
  const double nyquist_guard = 0.5 * constants::pi / dt;
  const double omega_hi = std::min(opt.omega_hi_g0 * cav.gamma0, nyquist_guard);
  const auto bins = select_bins(n, dt, log_grid(omega_lo, omega_hi, opt.grid_points));

  std::vector<double> omegas, expected, gain2;
  std::vector<cplx> filter_conj;
  const bool subtracted = mcase.combination == Combination::Subtracted;
  for (auto k : bins) {
    const double w = bin_omega(k, n, dt);
    omegas.push_back(w);
    expected.push_back(closed_form_psd(mcase, config, w));
    gain2.push_back(std::norm(output_transfer(mcase, config, w).signal_gain()));
    if (subtracted)
      filter_conj.push_back(std::conj(subtraction_filter(mcase, config, w)));
  }
  const bool want_mech = subtracted || mcase.combination == mcase.signal_port();

  const std::size_t width = bins.size();
  std::vector<double> rows(opt.segments * width);
  const auto window = make_window(n, Window::Hann);
  const double norm = 2.0 * dt / window_power(window);

  auto worker = [&](std::size_t first, std::size_t stride) {
    RealFft fft(n);
    std::vector<cplx> bm, bo;
    for (std::size_t t = first; t < opt.segments; t += stride) {
      SimulationOptions so;
      so.duration = static_cast<double>(n) * dt;
      so.dt = dt;
      so.seed = opt.seed;
      so.trial = static_cast<std::uint32_t>(t);
      const auto out = simulate(config, sim_squeeze, mcase.family, so);
      const double* primary = want_mech ? out.mechanical.data() : out.open.data();
      double* row = rows.data() + t * width;
      segment_periodogram(fft, primary, out.open.data(), window, norm, bins,
                          filter_conj, bm, bo, row);
      for (std::size_t i = 0; i < width; ++i) row[i] /= gain2[i];
    }
  };
  const std::size_t threads = std::clamp<std::size_t>(
      std::thread::hardware_concurrency(), 1, opt.segments);
  if (threads == 1) {
    worker(0, 1);
  } else {
    std::vector<std::thread> pool;
    for (std::size_t i = 0; i < threads; ++i) pool.emplace_back(worker, i, threads);
    for (auto& th : pool) th.join();
  }

  std::vector<double> mean, err;
  mean_and_stderr(rows, opt.segments, width, mean, err);

  ValidationReport rep;
  rep.mcase = mcase;
  rep.segments = opt.segments;
  rep.segment_length = n;
  rep.dt = dt;
  rep.seed = opt.seed;
  rep.perturb_kappa_g0 = opt.perturb_kappa_g0;
  rep.tolerance = opt.tolerance;
  std::size_t agree = 0;
  for (std::size_t i = 0; i < width; ++i) {
    ValidationPoint p;
    p.omega = omegas[i];
    p.estimate = mean[i];
    p.stderr_ = err[i];
    p.expected = expected[i];
    const double band = std::max(3.0 * err[i], opt.tolerance * expected[i]);
    p.agrees = std::abs(mean[i] - expected[i]) <= band;
    agree += p.agrees ? 1 : 0;
    rep.points.push_back(p);
  }
  rep.agree_fraction = width ? static_cast<double>(agree) / static_cast<double>(width) : 0.0;
  rep.passed = width > 0 && rep.agree_fraction >= opt.pass_fraction;
  return rep;
}

Eigen::Matrix<cplx, 2, 6> state_space_response(const SdeSystem& sys,
                                               double omega) {
  const Eigen::Matrix3cd M =
      cplx{0.0, -omega} * Eigen::Matrix3cd::Identity() - sys.drift.cast<cplx>();
  Eigen::Matrix<cplx, 3, 6> B;
  B.leftCols<5>() = sys.noise.cast<cplx>();
  B.col(5) = sys.signal_input.cast<cplx>();
  Eigen::Matrix<cplx, 2, 6> H = sys.output_state.cast<cplx>() * M.partialPivLu().solve(B);
  H.leftCols<5>() += sys.output_feed.cast<cplx>();
  return H;
}

double state_space_psd(const SystemConfig& config, const MeasurementCase& mcase,
                       double omega) {
  check_case(mcase, config);
  const FamilySystems fs =
      family_systems(config, mcase.squeeze, mcase.family, {1, 1, 1, 1, 1});
  const bool subtracted = mcase.combination == Combination::Subtracted;
  const cplx h = subtracted ? subtraction_filter(mcase, config, omega) : cplx{};
  const bool want_mech = subtracted || mcase.combination == mcase.signal_port();
  double total = 0.0;
  for (int q = 0; q < 2; ++q) {
    if (!fs.systems[q]) continue;
    const auto& sys = *fs.systems[q];
    const auto H = state_space_response(sys, omega);
    const int mech = sys.mechanical_row();
    Eigen::Matrix<cplx, 1, 6> row = H.row(want_mech ? mech : 1 - mech);
    if (subtracted) row += h * H.row(1 - mech);
    for (int j = 0; j < 5; ++j) total += fs.weights[q] * fs.weights[q] * std::norm(row(j));
  }
  const double g2 = std::norm(output_transfer(mcase, config, omega).signal_gain());
  if (g2 == 0.0) throw ConfigError("port carries no signal");
  return total / g2;
}

Eigen::Matrix3d stationary_covariance(const SdeSystem& sys) {
  const Eigen::Matrix3d I = Eigen::Matrix3d::Identity();
  Eigen::Matrix<double, 9, 9> L;
  // vec(A P + P A^T) = (I (x) A + A (x) I) vec(P), column-major vec.
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      L.block<3, 3>(3 * i, 3 * j) = I(i, j) * sys.drift + sys.drift(i, j) * I;
  const Eigen::Matrix3d Q = 0.5 * sys.noise * sys.noise.transpose();
  const Eigen::Matrix<double, 9, 1> rhs =
      -Eigen::Map<const Eigen::Matrix<double, 9, 1>>(Q.data());
  const Eigen::Matrix<double, 9, 1> p = L.fullPivLu().solve(rhs);
  Eigen::Matrix3d P = Eigen::Map<const Eigen::Matrix3d>(p.data());
  return 0.5 * (P + P.transpose());
}

}  // namespace trimode
