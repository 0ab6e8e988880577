#ifndef PHASESIM_MEASUREMENT_HPP
#define PHASESIM_MEASUREMENT_HPP

#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "phasesim/errors.hpp"

namespace phasesim {

/// Instrument sensitivity as a positive fraction num/den in lowest terms.
/// Readings live on the lattice (num/den) * Z.
struct RationalStep {
    long long numerator = 1;
    long long denominator = 1;

    RationalStep() = default;
    RationalStep(long long num, long long den);

    /// Accepts "3/10" or a bare positive integer "2".
    static RationalStep parse(std::string_view text);

    double value() const {
        return static_cast<double>(numerator) / static_cast<double>(denominator);
    }
    /// Lattice value step * m with one rounding.
    double value_at(long long index) const {
        return static_cast<double>(index * numerator) / static_cast<double>(denominator);
    }
    /// Half-point lattice value step * (index - 1/2).
    double half_value_at(long long index) const {
        return (static_cast<double>(index) - 0.5) * value();
    }
    std::string to_string() const;
    bool operator==(const RationalStep&) const = default;
};

/// Nearest lattice index to x; exact half-point ties round to the even index.
long long quantize(double x, RationalStep step);

class MeasurementDevice {
   public:
    MeasurementDevice(RationalStep step, double sigma_syst, double sigma_rand,
                      double systematic_offset = 0.0);

    /// Same device but with the fixed offset drawn once from
    /// Normal(0, sigma_syst^2) under the given seed.
    static MeasurementDevice with_random_offset(RationalStep step, double sigma_syst,
                                                double sigma_rand, std::uint64_t seed);

    RationalStep step() const { return step_; }
    double sigma_syst() const { return sigma_syst_; }
    double sigma_rand() const { return sigma_rand_; }
    double systematic_offset() const { return systematic_offset_; }
    double sigma_total_sq() const {
        return sigma_syst_ * sigma_syst_ + sigma_rand_ * sigma_rand_;
    }

   private:
    RationalStep step_;
    double sigma_syst_;
    double sigma_rand_;
    double systematic_offset_;
};

/// Readings stored as exact integer lattice indices sharing one step.
struct SampleSet {
    RationalStep step;
    std::vector<long long> indices;

    long long n() const { return static_cast<long long>(indices.size()); }
    double value(size_t i) const { return step.value_at(indices[i]); }
};

/// Readings for a fixed true value: quantize(x_true + offset + eps_i) with
/// eps_i i.i.d. Normal(0, sigma_rand^2). Deterministic per seed.
SampleSet sample_measurements(const MeasurementDevice& dev, double x_true, long long n,
                              std::uint64_t seed);

struct DiscreteDistribution {
    RationalStep step;
    std::map<long long, double> probs;

    double total() const;
};

enum class DensityKind { Model, FiniteN, Limit };

/// Normal density summarizing a measurement model or reconstruction.
class ReconstructionDensity {
   public:
    ReconstructionDensity(double mean, double variance, DensityKind kind);

    double mean() const { return mean_; }
    double variance() const { return variance_; }
    double sigma() const;
    DensityKind kind() const { return kind_; }

    double pdf(double x) const;
    double cdf(double x) const;

   private:
    double mean_;
    double variance_;
    DensityKind kind_;
};

/// Per-cell mass of the density over [step*(m-1/2), step*(m+1/2)] for every
/// index in [window_lo, window_hi]. Throws NumericalError when more than 1e-6
/// of the mass falls outside the window.
DiscreteDistribution cell_probabilities(const ReconstructionDensity& density,
                                        RationalStep step, long long window_lo,
                                        long long window_hi);

struct EstimateResult {
    double mean_est = 0.0;   // sample mean
    double s2_rand = 0.0;    // unbiased sample variance, 1/(n-1)
    double s2_total = 0.0;   // s2_rand / n + sigma_syst^2
    long long n = 0;
    ReconstructionDensity density{0.0, 1.0, DensityKind::FiniteN};  // Normal(mean_est, s2_total)
};

/// Sample statistics plus the reconstruction they induce. Needs n >= 2;
/// rejects a zero-variance reconstruction.
EstimateResult estimate(const SampleSet& s, double sigma_syst);

/// Large-n limit of the reconstruction: Normal(mean_est, sigma_syst^2).
ReconstructionDensity rho_infinity(double mean_est, double sigma_syst);

/// Interval with endpoints on the half-point lattice: [step*(m-1/2), step*(l-1/2)].
struct LatticeInterval {
    RationalStep step;
    long long m = 0;
    long long l = 0;

    static LatticeInterval from_indices(RationalStep step, long long m, long long l);
    /// Validates that a and b sit on the half-point lattice (tolerance 1e-9
    /// on the recovered index, since callers pass decimals).
    static LatticeInterval from_values(RationalStep step, double a, double b);

    double a() const { return step.half_value_at(m); }
    double b() const { return step.half_value_at(l); }
    /// Lattice index k lies inside [a, b] exactly when m <= k <= l - 1.
    bool contains_index(long long k) const { return k >= m && k < l; }
};

double interval_probability(const ReconstructionDensity& density, const LatticeInterval& iv);

struct ConvergenceRow {
    long long n = 0;
    double mean_gap = 0.0;        // mean over trials of |empirical - model|
    double se_gap = 0.0;          // standard error of that mean
    double mean_empirical = 0.0;  // mean in-interval frequency
    double mean_model = 0.0;      // mean reconstructed interval probability
};

using ConvergenceReport = std::vector<ConvergenceRow>;

/// For each n in the schedule and each trial: estimate from n readings, build
/// the limit reconstruction, then compare its interval probability with the
/// in-interval frequency of n fresh readings. Deterministic per seed via
/// per-(n, trial) substreams.
ConvergenceReport convergence_experiment(const MeasurementDevice& dev, double x_true,
                                         const std::vector<long long>& n_schedule,
                                         long long trials, std::uint64_t seed,
                                         const LatticeInterval& iv);

/// Normalized histogram n_m / n over the lattice indices present.
DiscreteDistribution empirical_cell_frequencies(const SampleSet& s);

}  // namespace phasesim

#endif
