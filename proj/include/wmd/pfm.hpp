#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace wmd {

/// Pulse-frequency-modulation pattern: n1 inverter periods at the fast
/// frequency f/(2*order-1) followed by n2 periods at the slow frequency
/// f/(2*order+1). With the default order 1 these are f and f/3.
struct PfmPattern {
    std::size_t n1 = 1;
    std::size_t n2 = 0;
    double base_frequency = 85.0e3;
    unsigned order = 1;

    [[nodiscard]] double duty() const { return static_cast<double>(n1) / static_cast<double>(n1 + n2); }
    [[nodiscard]] unsigned fast_divisor() const { return 2 * order - 1; }
    [[nodiscard]] unsigned slow_divisor() const { return 2 * order + 1; }
    /// Pattern length measured in base periods 1/f.
    [[nodiscard]] std::size_t length_in_base_periods() const { return n1 * fast_divisor() + n2 * slow_divisor(); }
    [[nodiscard]] double period() const {
        return static_cast<double>(length_in_base_periods()) / base_frequency;
    }
};

/// Validated constructor (n1 + n2 >= 1, f > 0, order >= 1).
[[nodiscard]] PfmPattern make_pattern(std::size_t n1, std::size_t n2, double base_frequency, unsigned order = 1);

/// Smallest (n1, n2) whose duty ratio n1/(n1+n2) is the best rational
/// approximation of `duty` with denominator <= max_denominator.
[[nodiscard]] PfmPattern pattern_from_duty(double duty, std::size_t max_denominator,
                                           double base_frequency = 85.0e3);

struct Segment {
    double level = 0.0;     // V
    double duration = 0.0;  // s
};

/// Piecewise-constant inverter output over one pattern period.
struct SquareWaveSegmentTrain {
    std::vector<Segment> segments;

    [[nodiscard]] double period() const;
    [[nodiscard]] double mean() const;
    /// Start times of each segment, same length as `segments`.
    [[nodiscard]] std::vector<double> start_times() const;
};

/// Block-ordered train: n1 fast +/-E periods, then n2 slow ones, each with
/// 50 % intra-period symmetry (positive half first).
[[nodiscard]] SquareWaveSegmentTrain synthesize(const PfmPattern& pattern, double amplitude);

/// RMS of an ideal +/-E square wave's fundamental, 2*sqrt(2)*E/pi.
[[nodiscard]] double square_wave_fundamental_rms(double amplitude);

/// Closed-form RMS content at f for duty ratio `duty` when the pattern mixes
/// pulses at f/(2n-1) and f/(2n+1):
///   2*sqrt(2)*E / (pi * (duty*(2n-1) + (1-duty)*(2n+1))).
[[nodiscard]] double harmonic_rms(double amplitude, double duty, unsigned n);

struct SpectralLine {
    double frequency = 0.0;
    double rms = 0.0;
    std::complex<double> coefficient;  // complex Fourier coefficient over one pattern period
    bool periodic = true;              // false: not a harmonic of the pattern period
};

/// Exact Fourier integration of the piecewise-constant train over one
/// pattern period at each requested frequency. Frequencies that are not
/// multiples of 1/period are evaluated as a windowed projection and flagged.
[[nodiscard]] std::vector<SpectralLine> spectrum(const SquareWaveSegmentTrain& train,
                                                 std::span<const double> frequencies);

/// Lines at k/period for k = 1..count.
[[nodiscard]] std::vector<SpectralLine> pattern_harmonics(const SquareWaveSegmentTrain& train, std::size_t count);

/// Root-sum-square of the pattern harmonics lying strictly inside (f_lo, f_hi).
[[nodiscard]] double band_rms(const SquareWaveSegmentTrain& train, double f_lo, double f_hi);

/// Closed-form estimate next to the exact spectrum value at f. The estimate
/// is demoted when the two disagree by more than 5 %.
struct EstimateCheck {
    double analytic = 0.0;
    double exact = 0.0;
    double relative_gap = 0.0;
    bool demoted = false;
};

[[nodiscard]] EstimateCheck check_estimate(const PfmPattern& pattern, double amplitude);

}  // namespace wmd
