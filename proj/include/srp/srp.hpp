// Steered response power maps: conventional per-candidate evaluation, the
// critically sampled + sinc-interpolated approximation, and a quadratic-form
// frequency-domain reference. Also operation counting.
#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "srp/geometry.hpp"
#include "srp/spectral.hpp"

namespace srp {

enum class SrpMethod { conventional, approximated, oracle };

const char* to_string(SrpMethod method);

struct SrpMap {
  std::vector<double> values;
  SrpMethod method = SrpMethod::conventional;
  std::size_t frame_index = 0;

  std::size_t size() const { return values.size(); }
};

/// Lowest index attaining the maximum.
std::size_t argmax_candidate(const SrpMap& map);

/// Multiplication counts, one complex multiply per (bin, lag) IFT term and one
/// real multiply per (sample, candidate) interpolation term.
struct MultiplyCounter {
  std::uint64_t complex_mults = 0;
  std::uint64_t real_mults = 0;

  MultiplyCounter& operator+=(const MultiplyCounter& other) {
    complex_mults += other.complex_mults;
    real_mults += other.real_mults;
    return *this;
  }
};

/// Normalized sinc, sin(pi x) / (pi x); exactly 0 at nonzero integers.
double sinc(double x);

/// Discrete-frequency GCC xi(tau) = 2 * sum_k Re[psi(w_k) exp(j w_k tau)].
double gcc_at_lag(const CrossSpectra& cross, std::size_t pair_index, double tau);

/// floor(tdoa_bound / T) for one pair.
int lattice_half_width(const MicPair& pair, double sample_period);

/// Samples xi(nT), n in [-(N + aux), N + aux], of one pair.
struct PairLattice {
  int half_width = 0;  // N_{m,m'}
  int n_aux = 0;
  std::vector<double> samples;

  int first_index() const { return -(half_width + n_aux); }
  int last_index() const { return half_width + n_aux; }
  std::size_t count() const { return static_cast<std::size_t>(2 * (half_width + n_aux) + 1); }
  double at(int n) const { return samples[static_cast<std::size_t>(n - first_index())]; }
};

struct GccLattice {
  double sample_period = 0.0;
  int n_aux = 0;
  std::vector<PairLattice> pairs;
  std::size_t frame_index = 0;

  std::size_t total_count() const;
  /// Average samples per pair, (2/P) sum N_{m,m'} + 2 N_aux + 1.
  double average_count() const;
};

/// Per-pair sample counts 2 N_{m,m'} + 2 N_aux + 1 implied by the geometry.
std::vector<std::size_t> lattice_counts(std::span<const MicPair> pairs, double sample_period,
                                        int n_aux);

GccLattice build_gcc_lattice(const CrossSpectra& cross, std::span<const MicPair> pairs,
                             double sample_period, int n_aux,
                             MultiplyCounter* counter = nullptr);

/// Precomputed interpolation weights sinc(tdoa(i)/T - n), one J x count block
/// per pair (row-major).
class SincTable {
 public:
  double sample_period() const { return sample_period_; }
  int n_aux() const { return n_aux_; }
  std::size_t candidates() const { return candidates_; }
  std::size_t pair_count() const { return blocks_.size(); }
  std::size_t count(std::size_t pair) const { return counts_[pair]; }
  int half_width(std::size_t pair) const { return half_widths_[pair]; }
  std::span<const double> row(std::size_t pair, std::size_t candidate) const {
    return {blocks_[pair].data() + candidate * counts_[pair], counts_[pair]};
  }

 private:
  friend SincTable precompute_sinc_table(const CandidateGrid&, std::span<const MicPair>, double,
                                         int);
  double sample_period_ = 0.0;
  int n_aux_ = 0;
  std::size_t candidates_ = 0;
  std::vector<int> half_widths_;
  std::vector<std::size_t> counts_;
  std::vector<std::vector<double>> blocks_;
};

SincTable precompute_sinc_table(const CandidateGrid& grid, std::span<const MicPair> pairs,
                                double sample_period, int n_aux);

/// SRP(i) = 2 sum_p xi_p(tdoa_p(i)), one IFT per candidate and pair.
SrpMap srp_conventional(const CrossSpectra& cross, const CandidateGrid& grid,
                        MultiplyCounter* counter = nullptr);

/// SRP_appr(i) = 2 sum_p sum_n xi_p(nT) w_p(i, n) from a precomputed table.
SrpMap srp_approx(const GccLattice& lattice, const SincTable& table,
                  MultiplyCounter* counter = nullptr);

/// Same as srp_approx, recomputing the sinc weights instead of storing them.
SrpMap srp_approx_on_the_fly(const GccLattice& lattice, const CandidateGrid& grid,
                             MultiplyCounter* counter = nullptr);

/// Full M x M GCC matrices Psi(w_k), Hermitian, one per bin.
struct GccMatrices {
  std::vector<Eigen::MatrixXcd> per_bin;
  std::vector<double> bin_frequencies;
};

/// Psi with diagonal |y_m|^2 weighted like the off-diagonal entries.
GccMatrices gcc_matrices(const SpectralFrame& frame, Weighting weighting,
                         std::optional<double> phat_floor = std::nullopt);
/// Psi assembled from stored pairs; diagonal set to `diagonal`.
GccMatrices gcc_matrices(const CrossSpectra& cross, std::span<const MicPair> pairs,
                         std::size_t mic_count, double diagonal = 1.0);

/// Steering vector h(w, i) with entries exp(-j w tdoa_{m,1}(i)), mic 0 as reference.
Eigen::VectorXcd steering_vector(double omega, std::span<const double> tdoa_to_reference);

/// h^H Psi h - tr(Psi) for one bin.
double srp_bin_quadratic(const Eigen::MatrixXcd& psi, double omega,
                         std::span<const double> tdoa_to_reference);

/// 2 sum_{m>m'} Re[psi_{m,m'} exp(j w tdoa_{m,m'})] for one bin.
double srp_bin_pairwise(const Eigen::MatrixXcd& psi, double omega,
                        std::span<const double> tdoa_to_reference);

/// Broadband quadratic-form SRP over the two-sided band, using the
/// conjugate symmetry of real-signal spectra: SRP(i) = 2 sum_k SRP(w_k, i).
/// TDOAs are recomputed from the array geometry, independently of the table.
SrpMap srp_oracle(const GccMatrices& psi, const MicArray& array, const CandidateGrid& grid);

/// Broadband pairwise frequency-domain sum, the same quantity without the
/// quadratic form.
SrpMap srp_pairwise_frequency(const GccMatrices& psi, const MicArray& array,
                              const CandidateGrid& grid);

struct ComplexityReport {
  std::size_t candidates = 0;  // J
  std::size_t pairs = 0;       // P
  std::size_t bins = 0;        // K
  int n_aux = 0;
  double average_samples = 0.0;  // N
  std::uint64_t total_samples = 0;
  std::uint64_t c_conv = 0;
  std::uint64_t c_samp = 0;
  std::uint64_t c_int = 0;
  double r_samp = 0.0;
  double r_int = 0.0;
  double r = 0.0;
  std::uint64_t measured_mults_conventional = 0;
  std::uint64_t measured_mults_approx_sampling = 0;
  std::uint64_t measured_mults_approx_interpolation = 0;
  bool measured = false;
};

ComplexityReport complexity_report(std::size_t candidates, std::size_t pairs, std::size_t bins,
                                   std::span<const std::size_t> pair_counts, int n_aux);

}  // namespace srp
