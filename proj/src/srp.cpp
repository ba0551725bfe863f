#include "srp/srp.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

namespace srp {
namespace {

// Phasor recurrences are re-seeded from exact sin/cos this often.
constexpr std::size_t kReseedBins = 256;

void require_uniform_bins(const std::vector<double>& freqs) {
  if (freqs.size() < 2) return;
  const double step = freqs[1] - freqs[0];
  const double last = freqs.front() + step * static_cast<double>(freqs.size() - 1);
  if (std::abs(last - freqs.back()) > 1e-9 * std::max(1.0, std::abs(freqs.back())))
    throw InvalidInput("bin frequencies must be uniformly spaced");
}

double bin_step(const std::vector<double>& freqs) {
  return freqs.size() < 2 ? 0.0 : freqs[1] - freqs[0];
}

// sum_k Re[psi_k exp(j w_k tau)] with w_k = w0 + k dw.
double phasor_sum(const std::complex<double>* psi, std::size_t stride, std::size_t bins,
                  double w0, double dw, double tau) {
  const double step_re = std::cos(dw * tau);
  const double step_im = std::sin(dw * tau);
  double acc = 0.0;
  for (std::size_t start = 0; start < bins; start += kReseedBins) {
    const double phase = (w0 + static_cast<double>(start) * dw) * tau;
    double zr = std::cos(phase);
    double zi = std::sin(phase);
    const std::size_t end = std::min(bins, start + kReseedBins);
    for (std::size_t k = start; k < end; ++k) {
      const std::complex<double> v = psi[k * stride];
      acc += v.real() * zr - v.imag() * zi;
      const double nr = zr * step_re - zi * step_im;
      zi = zr * step_im + zi * step_re;
      zr = nr;
    }
  }
  return acc;
}

MicPair reference_pair(const MicArray& array, std::size_t m) {
  const double d = (array.position(m) - array.position(0)).norm();
  return {m, 0, d, d / array.speed_of_sound()};
}

// tdoa_{m,1}(i) for every microphone, from geometry.
std::vector<double> tdoa_to_reference(const MicArray& array, const CandidateGrid& grid,
                                      std::size_t candidate) {
  std::vector<double> t(array.size(), 0.0);
  for (std::size_t m = 1; m < array.size(); ++m)
    t[m] = grid.tdoa_of(array, reference_pair(array, m), candidate);
  return t;
}

}  // namespace

const char* to_string(SrpMethod method) {
  switch (method) {
    case SrpMethod::conventional: return "conventional";
    case SrpMethod::approximated: return "approx";
    case SrpMethod::oracle: return "oracle";
  }
  return "unknown";
}

std::size_t argmax_candidate(const SrpMap& map) {
  if (map.values.empty()) throw InvalidInput("argmax of an empty map");
  std::size_t best = 0;
  for (std::size_t i = 1; i < map.values.size(); ++i)
    if (map.values[i] > map.values[best]) best = i;
  return best;
}

double sinc(double x) {
  if (x == 0.0) return 1.0;
  if (x == std::nearbyint(x)) return 0.0;
  const double px = std::numbers::pi * x;
  return std::sin(px) / px;
}

double gcc_at_lag(const CrossSpectra& cross, std::size_t pair_index, double tau) {
  if (pair_index >= cross.pair_count()) throw InvalidInput("pair index out of range");
  if (cross.bins() == 0) return 0.0;
  require_uniform_bins(cross.bin_frequencies);
  const auto p = static_cast<Eigen::Index>(pair_index);
  // column-major P x K: consecutive bins of one pair are `rows` apart
  const std::complex<double>* base = cross.values.data() + p;
  return 2.0 * phasor_sum(base, static_cast<std::size_t>(cross.values.rows()), cross.bins(),
                          cross.bin_frequencies.front(), bin_step(cross.bin_frequencies), tau);
}

int lattice_half_width(const MicPair& pair, double sample_period) {
  if (!(sample_period > 0.0)) throw InvalidInput("sample period must be positive");
  // tolerate rounding when the bound is an exact multiple of the period
  return static_cast<int>(std::floor(pair.tdoa_bound / sample_period + 1e-9));
}

std::size_t GccLattice::total_count() const {
  std::size_t total = 0;
  for (const auto& p : pairs) total += p.count();
  return total;
}

double GccLattice::average_count() const {
  if (pairs.empty()) return 0.0;
  return static_cast<double>(total_count()) / static_cast<double>(pairs.size());
}

std::vector<std::size_t> lattice_counts(std::span<const MicPair> pairs, double sample_period,
                                        int n_aux) {
  if (n_aux < 0) throw InvalidInput("n_aux must be nonnegative");
  std::vector<std::size_t> counts;
  counts.reserve(pairs.size());
  for (const auto& pair : pairs)
    counts.push_back(static_cast<std::size_t>(2 * lattice_half_width(pair, sample_period) +
                                              2 * n_aux + 1));
  return counts;
}

GccLattice build_gcc_lattice(const CrossSpectra& cross, std::span<const MicPair> pairs,
                             double sample_period, int n_aux, MultiplyCounter* counter) {
  if (n_aux < 0) throw InvalidInput("n_aux must be nonnegative");
  if (pairs.size() != cross.pair_count())
    throw InvalidInput("pair list does not match the cross-spectra");
  GccLattice lattice;
  lattice.sample_period = sample_period;
  lattice.n_aux = n_aux;
  lattice.frame_index = cross.frame_index;
  lattice.pairs.reserve(pairs.size());
  for (std::size_t p = 0; p < pairs.size(); ++p) {
    PairLattice pl;
    pl.half_width = lattice_half_width(pairs[p], sample_period);
    pl.n_aux = n_aux;
    pl.samples.reserve(pl.count());
    for (int n = pl.first_index(); n <= pl.last_index(); ++n)
      pl.samples.push_back(gcc_at_lag(cross, p, static_cast<double>(n) * sample_period));
    if (counter) counter->complex_mults += pl.count() * cross.bins();
    lattice.pairs.push_back(std::move(pl));
  }
  return lattice;
}

SincTable precompute_sinc_table(const CandidateGrid& grid, std::span<const MicPair> pairs,
                                double sample_period, int n_aux) {
  if (!grid.has_tdoa_table() || grid.pair_count() != pairs.size())
    throw InvalidInput("grid has no TDOA table for these pairs");
  if (n_aux < 0) throw InvalidInput("n_aux must be nonnegative");
  SincTable table;
  table.sample_period_ = sample_period;
  table.n_aux_ = n_aux;
  table.candidates_ = grid.size();
  for (std::size_t p = 0; p < pairs.size(); ++p) {
    const int half = lattice_half_width(pairs[p], sample_period);
    const std::size_t count = static_cast<std::size_t>(2 * (half + n_aux) + 1);
    const int first = -(half + n_aux);
    std::vector<double> block(grid.size() * count);
    for (std::size_t i = 0; i < grid.size(); ++i) {
      const double x = grid.tdoa(i, p) / sample_period;
      for (std::size_t j = 0; j < count; ++j)
        block[i * count + j] = sinc(x - static_cast<double>(first + static_cast<int>(j)));
    }
    table.half_widths_.push_back(half);
    table.counts_.push_back(count);
    table.blocks_.push_back(std::move(block));
  }
  return table;
}

SrpMap srp_conventional(const CrossSpectra& cross, const CandidateGrid& grid,
                        MultiplyCounter* counter) {
  if (!grid.has_tdoa_table() || grid.pair_count() != cross.pair_count())
    throw InvalidInput("grid TDOA table does not match the cross-spectra");
  require_uniform_bins(cross.bin_frequencies);
  const std::size_t J = grid.size();
  const std::size_t P = cross.pair_count();
  const std::size_t K = cross.bins();
  const double w0 = K ? cross.bin_frequencies.front() : 0.0;
  const double dw = bin_step(cross.bin_frequencies);

  SrpMap map;
  map.method = SrpMethod::conventional;
  map.frame_index = cross.frame_index;
  map.values.assign(J, 0.0);

  // Candidates run in the inner loop so the per-bin update vectorizes.
  std::vector<double> zr(J), zi(J), sr(J), si(J), acc(J);
  std::vector<double> psi_re(K), psi_im(K);
  for (std::size_t p = 0; p < P; ++p) {
    for (std::size_t k = 0; k < K; ++k) {
      const auto v = cross.values(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(k));
      psi_re[k] = v.real();
      psi_im[k] = v.imag();
    }
    for (std::size_t i = 0; i < J; ++i) {
      const double tau = grid.tdoa(i, p);
      sr[i] = std::cos(dw * tau);
      si[i] = std::sin(dw * tau);
      acc[i] = 0.0;
    }
    for (std::size_t start = 0; start < K; start += kReseedBins) {
      const double w_start = w0 + static_cast<double>(start) * dw;
      for (std::size_t i = 0; i < J; ++i) {
        const double phase = w_start * grid.tdoa(i, p);
        zr[i] = std::cos(phase);
        zi[i] = std::sin(phase);
      }
      const std::size_t end = std::min(K, start + kReseedBins);
      for (std::size_t k = start; k < end; ++k) {
        const double a = psi_re[k];
        const double b = psi_im[k];
        double* __restrict zr_p = zr.data();
        double* __restrict zi_p = zi.data();
        double* __restrict acc_p = acc.data();
        const double* __restrict sr_p = sr.data();
        const double* __restrict si_p = si.data();
        for (std::size_t i = 0; i < J; ++i) {
          acc_p[i] += a * zr_p[i] - b * zi_p[i];
          const double nr = zr_p[i] * sr_p[i] - zi_p[i] * si_p[i];
          zi_p[i] = zr_p[i] * si_p[i] + zi_p[i] * sr_p[i];
          zr_p[i] = nr;
        }
      }
    }
    // SRP = 2 sum_p xi_p, xi_p = 2 sum_k Re[...]
    for (std::size_t i = 0; i < J; ++i) map.values[i] += 4.0 * acc[i];
  }
  if (counter) counter->complex_mults += static_cast<std::uint64_t>(J) * P * K;
  return map;
}

SrpMap srp_approx(const GccLattice& lattice, const SincTable& table, MultiplyCounter* counter) {
  if (lattice.n_aux != table.n_aux() || lattice.sample_period != table.sample_period())
    throw InvalidInput("lattice and sinc table disagree on n_aux or sample period");
  if (lattice.pairs.size() != table.pair_count())
    throw InvalidInput("lattice and sinc table disagree on the pair count");
  const std::size_t J = table.candidates();
  SrpMap map;
  map.method = SrpMethod::approximated;
  map.frame_index = lattice.frame_index;
  map.values.assign(J, 0.0);
  std::uint64_t mults = 0;
  for (std::size_t p = 0; p < lattice.pairs.size(); ++p) {
    const auto& samples = lattice.pairs[p].samples;
    const std::size_t count = table.count(p);
    if (samples.size() != count || lattice.pairs[p].half_width != table.half_width(p))
      throw InvalidInput("lattice and sinc table disagree on the sample range");
    for (std::size_t i = 0; i < J; ++i) {
      const auto w = table.row(p, i);
      double xi = 0.0;
      for (std::size_t j = 0; j < count; ++j) xi += samples[j] * w[j];
      map.values[i] += 2.0 * xi;
    }
    mults += static_cast<std::uint64_t>(count) * J;
  }
  if (counter) counter->real_mults += mults;
  return map;
}

SrpMap srp_approx_on_the_fly(const GccLattice& lattice, const CandidateGrid& grid,
                             MultiplyCounter* counter) {
  if (!grid.has_tdoa_table() || grid.pair_count() != lattice.pairs.size())
    throw InvalidInput("grid TDOA table does not match the lattice");
  const std::size_t J = grid.size();
  const double T = lattice.sample_period;
  SrpMap map;
  map.method = SrpMethod::approximated;
  map.frame_index = lattice.frame_index;
  map.values.assign(J, 0.0);
  std::uint64_t mults = 0;
  for (std::size_t p = 0; p < lattice.pairs.size(); ++p) {
    const auto& pl = lattice.pairs[p];
    const int first = pl.first_index();
    for (std::size_t i = 0; i < J; ++i) {
      const double x = grid.tdoa(i, p) / T;
      double xi = 0.0;
      for (std::size_t j = 0; j < pl.samples.size(); ++j)
        xi += pl.samples[j] * sinc(x - static_cast<double>(first + static_cast<int>(j)));
      map.values[i] += 2.0 * xi;
    }
    mults += static_cast<std::uint64_t>(pl.samples.size()) * J;
  }
  if (counter) counter->real_mults += mults;
  return map;
}

GccMatrices gcc_matrices(const SpectralFrame& frame, Weighting weighting,
                         std::optional<double> phat_floor) {
  const double floor = phat_floor.value_or(default_phat_floor(frame));
  const auto M = frame.spectra.rows();
  GccMatrices out;
  out.bin_frequencies = frame.bin_frequencies;
  out.per_bin.reserve(frame.bins());
  for (Eigen::Index k = 0; k < frame.spectra.cols(); ++k) {
    Eigen::MatrixXcd psi(M, M);
    for (Eigen::Index a = 0; a < M; ++a)
      for (Eigen::Index b = 0; b < M; ++b) {
        const std::complex<double> raw = frame.spectra(a, k) * std::conj(frame.spectra(b, k));
        psi(a, b) = weighting == Weighting::phat ? phat_normalize(raw, floor) : raw;
      }
    out.per_bin.push_back(std::move(psi));
  }
  return out;
}

GccMatrices gcc_matrices(const CrossSpectra& cross, std::span<const MicPair> pairs,
                         std::size_t mic_count, double diagonal) {
  if (pairs.size() != cross.pair_count())
    throw InvalidInput("pair list does not match the cross-spectra");
  const auto M = static_cast<Eigen::Index>(mic_count);
  GccMatrices out;
  out.bin_frequencies = cross.bin_frequencies;
  out.per_bin.reserve(cross.bins());
  for (std::size_t k = 0; k < cross.bins(); ++k) {
    Eigen::MatrixXcd psi = Eigen::MatrixXcd::Identity(M, M) * diagonal;
    for (std::size_t p = 0; p < pairs.size(); ++p) {
      const auto v = cross.values(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(k));
      const auto m = static_cast<Eigen::Index>(pairs[p].m);
      const auto mp = static_cast<Eigen::Index>(pairs[p].m_prime);
      psi(m, mp) = v;
      psi(mp, m) = std::conj(v);
    }
    out.per_bin.push_back(std::move(psi));
  }
  return out;
}

Eigen::VectorXcd steering_vector(double omega, std::span<const double> tdoa_to_reference) {
  Eigen::VectorXcd h(static_cast<Eigen::Index>(tdoa_to_reference.size()));
  for (std::size_t m = 0; m < tdoa_to_reference.size(); ++m)
    h(static_cast<Eigen::Index>(m)) = std::polar(1.0, -omega * tdoa_to_reference[m]);
  return h;
}

double srp_bin_quadratic(const Eigen::MatrixXcd& psi, double omega,
                         std::span<const double> tdoa_to_reference) {
  const Eigen::VectorXcd h = steering_vector(omega, tdoa_to_reference);
  return (h.adjoint() * psi * h)(0, 0).real() - psi.trace().real();
}

double srp_bin_pairwise(const Eigen::MatrixXcd& psi, double omega,
                        std::span<const double> tdoa_to_reference) {
  double sum = 0.0;
  const auto M = psi.rows();
  for (Eigen::Index mp = 0; mp < M; ++mp)
    for (Eigen::Index m = mp + 1; m < M; ++m) {
      const double dt = tdoa_to_reference[static_cast<std::size_t>(m)] -
                        tdoa_to_reference[static_cast<std::size_t>(mp)];
      sum += (psi(m, mp) * std::polar(1.0, omega * dt)).real();
    }
  return 2.0 * sum;
}

namespace {

template <typename BinFn>
SrpMap broadband(const GccMatrices& psi, const MicArray& array, const CandidateGrid& grid,
                 BinFn bin_fn) {
  for (const auto& mat : psi.per_bin)
    if (mat.rows() != static_cast<Eigen::Index>(array.size()) || mat.cols() != mat.rows())
      throw InvalidInput("GCC matrix size does not match the array");
  SrpMap map;
  map.method = SrpMethod::oracle;
  map.values.assign(grid.size(), 0.0);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const auto t = tdoa_to_reference(array, grid, i);
    double sum = 0.0;
    for (std::size_t k = 0; k < psi.per_bin.size(); ++k)
      sum += bin_fn(psi.per_bin[k], psi.bin_frequencies[k], std::span<const double>(t));
    // negative frequencies mirror the positive ones for real signals
    map.values[i] = 2.0 * sum;
  }
  return map;
}

}  // namespace

SrpMap srp_oracle(const GccMatrices& psi, const MicArray& array, const CandidateGrid& grid) {
  return broadband(psi, array, grid, srp_bin_quadratic);
}

SrpMap srp_pairwise_frequency(const GccMatrices& psi, const MicArray& array,
                              const CandidateGrid& grid) {
  return broadband(psi, array, grid, srp_bin_pairwise);
}

ComplexityReport complexity_report(std::size_t candidates, std::size_t pairs, std::size_t bins,
                                   std::span<const std::size_t> pair_counts, int n_aux) {
  if (candidates == 0 || pairs == 0 || bins == 0)
    throw InvalidInput("complexity dimensions must be positive");
  if (pair_counts.size() != pairs) throw InvalidInput("one sample count per pair required");
  ComplexityReport r;
  r.candidates = candidates;
  r.pairs = pairs;
  r.bins = bins;
  r.n_aux = n_aux;
  r.total_samples = std::accumulate(pair_counts.begin(), pair_counts.end(), std::uint64_t{0});
  r.average_samples = static_cast<double>(r.total_samples) / static_cast<double>(pairs);
  r.c_conv = static_cast<std::uint64_t>(candidates) * pairs * bins;
  r.c_samp = r.total_samples * bins;
  r.c_int = r.total_samples * candidates;
  r.r_samp = static_cast<double>(r.c_samp) / static_cast<double>(r.c_conv);
  r.r_int = static_cast<double>(r.c_int) / static_cast<double>(r.c_conv);
  r.r = r.r_samp + r.r_int;
  return r;
}

}  // namespace srp
