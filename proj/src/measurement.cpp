#include "phasesim/measurement.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numbers>
#include <numeric>
#include <random>

#include "phasesim/rng.hpp"

namespace phasesim {

namespace {

constexpr std::uint64_t kOffsetStream = 0x0FF5;
constexpr std::uint64_t kReadingStream = 0x3EAD;
constexpr std::uint64_t kEstimateStream = 0xE571;
constexpr std::uint64_t kFreshStream = 0xF9E5;

long long parse_positive_int(std::string_view text) {
    long long out = 0;
    const char* first = text.data();
    const char* last = text.data() + text.size();
    auto [ptr, ec] = std::from_chars(first, last, out);
    if (ec != std::errc{} || ptr != last || out <= 0) {
        throw ValidationError("expected a positive integer, got '" + std::string(text) + "'");
    }
    return out;
}

}  // namespace

RationalStep::RationalStep(long long num, long long den) : numerator(num), denominator(den) {
    if (num <= 0 || den <= 0) {
        throw ValidationError("rational step requires positive numerator and denominator");
    }
    const long long g = std::gcd(num, den);
    numerator = num / g;
    denominator = den / g;
}

RationalStep RationalStep::parse(std::string_view text) {
    const auto trim = [](std::string_view sv) {
        while (!sv.empty() && (sv.front() == ' ' || sv.front() == '\t')) sv.remove_prefix(1);
        while (!sv.empty() && (sv.back() == ' ' || sv.back() == '\t')) sv.remove_suffix(1);
        return sv;
    };
    const std::string_view body = trim(text);
    if (body.empty()) {
        throw ValidationError("empty rational step");
    }
    const size_t slash = body.find('/');
    if (slash == std::string_view::npos) {
        return RationalStep(parse_positive_int(body), 1);
    }
    return RationalStep(parse_positive_int(trim(body.substr(0, slash))),
                        parse_positive_int(trim(body.substr(slash + 1))));
}

std::string RationalStep::to_string() const {
    if (denominator == 1) return std::to_string(numerator);
    return std::to_string(numerator) + "/" + std::to_string(denominator);
}

long long quantize(double x, RationalStep step) {
    if (!std::isfinite(x)) {
        throw ValidationError("cannot quantize a non-finite value");
    }
    // x / (num/den) with one multiply and one divide; llrint inherits the
    // round-to-nearest-even mode, which is the documented tie rule
    return std::llrint(x * static_cast<double>(step.denominator) /
                       static_cast<double>(step.numerator));
}

MeasurementDevice::MeasurementDevice(RationalStep step, double sigma_syst, double sigma_rand,
                                     double systematic_offset)
    : step_(step),
      sigma_syst_(sigma_syst),
      sigma_rand_(sigma_rand),
      systematic_offset_(systematic_offset) {
    if (sigma_syst < 0.0 || sigma_rand < 0.0) {
        throw ValidationError("error dispersions must be >= 0");
    }
    if (!(sigma_syst * sigma_syst + sigma_rand * sigma_rand > 0.0)) {
        throw ValidationError("device needs sigma_syst^2 + sigma_rand^2 > 0");
    }
}

MeasurementDevice MeasurementDevice::with_random_offset(RationalStep step, double sigma_syst,
                                                        double sigma_rand,
                                                        std::uint64_t seed) {
    double offset = 0.0;
    if (sigma_syst > 0.0) {
        auto eng = make_engine(substream_seed(seed, kOffsetStream));
        std::normal_distribution<double> unit(0.0, 1.0);
        offset = sigma_syst * unit(eng);
    }
    return MeasurementDevice(step, sigma_syst, sigma_rand, offset);
}

SampleSet sample_measurements(const MeasurementDevice& dev, double x_true, long long n,
                              std::uint64_t seed) {
    if (n < 1) {
        throw ValidationError("need at least one measurement");
    }
    SampleSet out;
    out.step = dev.step();
    out.indices.reserve(static_cast<size_t>(n));
    const double base = x_true + dev.systematic_offset();
    if (dev.sigma_rand() > 0.0) {
        auto eng = make_engine(substream_seed(seed, kReadingStream));
        std::normal_distribution<double> unit(0.0, 1.0);
        const double sd = dev.sigma_rand();
        for (long long i = 0; i < n; ++i) {
            out.indices.push_back(quantize(base + sd * unit(eng), dev.step()));
        }
    } else {
        const long long index = quantize(base, dev.step());
        out.indices.assign(static_cast<size_t>(n), index);
    }
    return out;
}

double DiscreteDistribution::total() const {
    double sum = 0.0;
    for (const auto& [index, prob] : probs) sum += prob;
    return sum;
}

ReconstructionDensity::ReconstructionDensity(double mean, double variance, DensityKind kind)
    : mean_(mean), variance_(variance), kind_(kind) {
    if (!(variance > 0.0) || !std::isfinite(variance) || !std::isfinite(mean)) {
        throw ValidationError("reconstruction density needs finite mean and variance > 0");
    }
}

double ReconstructionDensity::sigma() const { return std::sqrt(variance_); }

double ReconstructionDensity::pdf(double x) const {
    const double d = x - mean_;
    return std::exp(-d * d / (2.0 * variance_)) /
           std::sqrt(2.0 * std::numbers::pi * variance_);
}

double ReconstructionDensity::cdf(double x) const {
    return 0.5 * std::erfc((mean_ - x) / (sigma() * std::numbers::sqrt2));
}

DiscreteDistribution cell_probabilities(const ReconstructionDensity& density,
                                        RationalStep step, long long window_lo,
                                        long long window_hi) {
    if (window_lo > window_hi) {
        throw ValidationError("cell window is empty");
    }
    DiscreteDistribution dist;
    dist.step = step;
    double lower_cdf = density.cdf(step.half_value_at(window_lo));
    double sum = 0.0;
    for (long long m = window_lo; m <= window_hi; ++m) {
        const double upper_cdf = density.cdf(step.half_value_at(m + 1));
        const double p = std::max(0.0, upper_cdf - lower_cdf);
        dist.probs.emplace(m, p);
        sum += p;
        lower_cdf = upper_cdf;
    }
    if (1.0 - sum > 1e-6) {
        throw NumericalError("cell window keeps only " + std::to_string(sum) +
                             " of the mass; widen the index window");
    }
    return dist;
}

EstimateResult estimate(const SampleSet& s, double sigma_syst) {
    const long long n = s.n();
    if (n < 2) {
        throw ValidationError("estimate needs at least 2 samples for the 1/(n-1) variance");
    }
    if (sigma_syst < 0.0) {
        throw ValidationError("sigma_syst must be >= 0");
    }
    // Work on the integer indices: sums stay exact, so constant readings
    // yield s2_rand == 0 rather than rounding dust, and the degenerate
    // reconstruction below is detected reliably.
    const double dn = static_cast<double>(n);
    double index_sum = 0.0;
    for (long long idx : s.indices) index_sum += static_cast<double>(idx);
    const double index_mean = index_sum / dn;
    double index_ss = 0.0;
    for (long long idx : s.indices) {
        const double d = static_cast<double>(idx) - index_mean;
        index_ss += d * d;
    }
    const double scale = s.step.value();
    EstimateResult res;
    res.mean_est = index_mean * scale;
    res.s2_rand = index_ss / (dn - 1.0) * (scale * scale);
    res.s2_total = res.s2_rand / dn + sigma_syst * sigma_syst;
    res.n = n;
    if (res.s2_total == 0.0) {
        throw NumericalError(
            "zero total variance: the reconstruction would degenerate to a point mass");
    }
    res.density = ReconstructionDensity(res.mean_est, res.s2_total, DensityKind::FiniteN);
    return res;
}

ReconstructionDensity rho_infinity(double mean_est, double sigma_syst) {
    if (!(sigma_syst > 0.0)) {
        throw ValidationError("the limit reconstruction needs sigma_syst > 0");
    }
    return ReconstructionDensity(mean_est, sigma_syst * sigma_syst, DensityKind::Limit);
}

LatticeInterval LatticeInterval::from_indices(RationalStep step, long long m, long long l) {
    if (m > l) {
        throw ValidationError("lattice interval needs m <= l");
    }
    return LatticeInterval{step, m, l};
}

LatticeInterval LatticeInterval::from_values(RationalStep step, double a, double b) {
    const auto to_index = [&step](double x, const char* name) {
        const double r = x * static_cast<double>(step.denominator) /
                             static_cast<double>(step.numerator) +
                         0.5;
        const double nearest = std::round(r);
        if (std::abs(r - nearest) > 1e-9) {
            throw ValidationError(std::string("interval endpoint ") + name +
                                  " is not on the half-point lattice of step " +
                                  step.to_string());
        }
        return static_cast<long long>(nearest);
    };
    return from_indices(step, to_index(a, "a"), to_index(b, "b"));
}

double interval_probability(const ReconstructionDensity& density, const LatticeInterval& iv) {
    return std::max(0.0, density.cdf(iv.b()) - density.cdf(iv.a()));
}

ConvergenceReport convergence_experiment(const MeasurementDevice& dev, double x_true,
                                         const std::vector<long long>& n_schedule,
                                         long long trials, std::uint64_t seed,
                                         const LatticeInterval& iv) {
    if (n_schedule.empty()) {
        throw ValidationError("empty sample-size schedule");
    }
    for (size_t k = 0; k < n_schedule.size(); ++k) {
        if (n_schedule[k] < 2 || (k > 0 && n_schedule[k] <= n_schedule[k - 1])) {
            throw ValidationError("sample sizes must be increasing and >= 2");
        }
    }
    if (trials < 1) {
        throw ValidationError("need at least one trial");
    }
    if (!(iv.step == dev.step())) {
        throw ValidationError("interval lattice must match the device step");
    }

    ConvergenceReport report;
    report.reserve(n_schedule.size());
    for (size_t k = 0; k < n_schedule.size(); ++k) {
        const long long n = n_schedule[k];
        double gap_sum = 0.0, gap_sq_sum = 0.0, emp_sum = 0.0, model_sum = 0.0;
        for (long long t = 0; t < trials; ++t) {
            const std::uint64_t est_seed =
                substream_seed(seed, kEstimateStream, static_cast<std::uint64_t>(k),
                               static_cast<std::uint64_t>(t));
            const SampleSet est_samples = sample_measurements(dev, x_true, n, est_seed);
            const EstimateResult est = estimate(est_samples, dev.sigma_syst());
            const ReconstructionDensity limit = rho_infinity(est.mean_est, dev.sigma_syst());
            const double model = interval_probability(limit, iv);

            const std::uint64_t fresh_seed =
                substream_seed(seed, kFreshStream, static_cast<std::uint64_t>(k),
                               static_cast<std::uint64_t>(t));
            const SampleSet fresh = sample_measurements(dev, x_true, n, fresh_seed);
            long long hits = 0;
            for (const long long index : fresh.indices) {
                if (iv.contains_index(index)) ++hits;
            }
            const double empirical = static_cast<double>(hits) / static_cast<double>(n);

            const double gap = std::abs(empirical - model);
            gap_sum += gap;
            gap_sq_sum += gap * gap;
            emp_sum += empirical;
            model_sum += model;
        }
        const double dt = static_cast<double>(trials);
        ConvergenceRow row;
        row.n = n;
        row.mean_gap = gap_sum / dt;
        const double var = std::max(0.0, gap_sq_sum / dt - row.mean_gap * row.mean_gap);
        row.se_gap = trials > 1 ? std::sqrt(var / (dt - 1.0)) : 0.0;
        row.mean_empirical = emp_sum / dt;
        row.mean_model = model_sum / dt;
        report.push_back(row);
    }
    return report;
}

DiscreteDistribution empirical_cell_frequencies(const SampleSet& s) {
    if (s.indices.empty()) {
        throw ValidationError("empty sample set");
    }
    DiscreteDistribution dist;
    dist.step = s.step;
    std::map<long long, long long> counts;
    for (const long long index : s.indices) ++counts[index];
    const double dn = static_cast<double>(s.n());
    for (const auto& [index, count] : counts) {
        dist.probs.emplace(index, static_cast<double>(count) / dn);
    }
    return dist;
}

}  // namespace phasesim
