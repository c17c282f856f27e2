#include "wmd/pfm.hpp"

#include "wmd/circuit.hpp"
#include "wmd/error.hpp"

#include <cmath>
#include <numeric>
#include <string>

namespace wmd {

namespace {

constexpr double kExactFractionTolerance = 1e-12;
constexpr double kEstimateDemotionGap = 0.05;

void require_amplitude(double amplitude) {
    if (!(amplitude > 0.0) || !std::isfinite(amplitude)) {
        throw DomainError("PFM amplitude must be positive");
    }
}

void append_periods(std::vector<Segment>& out, std::size_t count, double period, double amplitude) {
    for (std::size_t i = 0; i < count; ++i) {
        out.push_back(Segment{amplitude, 0.5 * period});
        out.push_back(Segment{-amplitude, 0.5 * period});
    }
}

}  // namespace

PfmPattern make_pattern(std::size_t n1, std::size_t n2, double base_frequency, unsigned order) {
    if (n1 + n2 == 0) {
        throw DomainError("PFM pattern needs at least one pulse period");
    }
    if (!(base_frequency > 0.0) || !std::isfinite(base_frequency)) {
        throw DomainError("PFM base frequency must be positive");
    }
    if (order == 0) {
        throw DomainError("PFM order must be >= 1");
    }
    return PfmPattern{n1, n2, base_frequency, order};
}

PfmPattern pattern_from_duty(double duty, std::size_t max_denominator, double base_frequency) {
    if (!(duty >= 0.0 && duty <= 1.0)) {
        throw DomainError("duty ratio must lie in [0, 1]");
    }
    if (max_denominator < 1) {
        throw DomainError("max denominator must be >= 1");
    }
    // Continued-fraction convergents p/q; stop once q would exceed the bound.
    std::size_t p0 = 0, q0 = 1, p1 = 1, q1 = 0;
    double y = duty;
    for (;;) {
        const double a_real = std::floor(y);
        const auto a = static_cast<std::size_t>(a_real);
        const std::size_t q2 = q0 + a * q1;
        if (q2 > max_denominator) {
            break;
        }
        const std::size_t p2 = p0 + a * p1;
        p0 = p1;
        q0 = q1;
        p1 = p2;
        q1 = q2;
        const double frac = y - a_real;
        if (frac < kExactFractionTolerance) {
            break;
        }
        y = 1.0 / frac;
        if (y > static_cast<double>(max_denominator) * 4.0) {
            // Next partial quotient alone exceeds any admissible denominator.
            break;
        }
    }
    std::size_t p = p1;
    std::size_t q = q1;
    {
        // Best semiconvergent below the bound competes with the last convergent.
        const std::size_t k = (max_denominator - q0) / q1;
        const std::size_t ps = p0 + k * p1;
        const std::size_t qs = q0 + k * q1;
        if (k > 0 && qs <= max_denominator) {
            const double err_conv = std::abs(duty - static_cast<double>(p1) / static_cast<double>(q1));
            const double err_semi = std::abs(duty - static_cast<double>(ps) / static_cast<double>(qs));
            if (err_semi < err_conv) {
                p = ps;
                q = qs;
            }
        }
    }
    const std::size_t g = std::gcd(p, q);
    p /= g;
    q /= g;
    return make_pattern(p, q - p, base_frequency);
}

double SquareWaveSegmentTrain::period() const {
    double t = 0.0;
    for (const auto& s : segments) {
        t += s.duration;
    }
    return t;
}

double SquareWaveSegmentTrain::mean() const {
    double area = 0.0;
    for (const auto& s : segments) {
        area += s.level * s.duration;
    }
    const double t = period();
    return t > 0.0 ? area / t : 0.0;
}

std::vector<double> SquareWaveSegmentTrain::start_times() const {
    std::vector<double> starts;
    starts.reserve(segments.size());
    double t = 0.0;
    for (const auto& s : segments) {
        starts.push_back(t);
        t += s.duration;
    }
    return starts;
}

SquareWaveSegmentTrain synthesize(const PfmPattern& pattern, double amplitude) {
    require_amplitude(amplitude);
    const PfmPattern p = make_pattern(pattern.n1, pattern.n2, pattern.base_frequency, pattern.order);
    SquareWaveSegmentTrain train;
    const double base = 1.0 / p.base_frequency;
    append_periods(train.segments, p.n1, base * p.fast_divisor(), amplitude);
    append_periods(train.segments, p.n2, base * p.slow_divisor(), amplitude);
    return train;
}

double square_wave_fundamental_rms(double amplitude) { return 2.0 * std::sqrt(2.0) * amplitude / kPi; }

double harmonic_rms(double amplitude, double duty, unsigned n) {
    require_amplitude(amplitude);
    if (!(duty >= 0.0 && duty <= 1.0)) {
        throw DomainError("duty ratio must lie in [0, 1]");
    }
    if (n < 1) {
        throw DomainError("harmonic index must be >= 1");
    }
    const double fast = 2.0 * n - 1.0;
    const double slow = 2.0 * n + 1.0;
    return 2.0 * std::sqrt(2.0) * amplitude / ((duty * fast + (1.0 - duty) * slow) * kPi);
}

std::vector<SpectralLine> spectrum(const SquareWaveSegmentTrain& train, std::span<const double> frequencies) {
    if (train.segments.empty()) {
        throw DomainError("spectrum of an empty segment train");
    }
    const double period = train.period();
    const auto starts = train.start_times();
    std::vector<SpectralLine> lines;
    lines.reserve(frequencies.size());
    for (const double nu : frequencies) {
        SpectralLine line;
        line.frequency = nu;
        const double cycles = nu * period;
        line.periodic = std::abs(cycles - std::round(cycles)) <= 1e-9 * std::max(1.0, std::abs(cycles));
        if (nu == 0.0) {
            line.coefficient = train.mean();
            line.rms = std::abs(line.coefficient);
        } else {
            const double w = 2.0 * kPi * nu;
            std::complex<double> acc{};
            for (std::size_t k = 0; k < train.segments.size(); ++k) {
                const double t0 = starts[k];
                const double t1 = t0 + train.segments[k].duration;
                // integral of level * exp(-j w t) over [t0, t1]
                acc += train.segments[k].level * (std::polar(1.0, -w * t0) - std::polar(1.0, -w * t1));
            }
            line.coefficient = acc / (std::complex<double>{0.0, w} * period);
            line.rms = std::sqrt(2.0) * std::abs(line.coefficient);
        }
        lines.push_back(line);
    }
    return lines;
}

std::vector<SpectralLine> pattern_harmonics(const SquareWaveSegmentTrain& train, std::size_t count) {
    const double period = train.period();
    std::vector<double> freqs(count);
    for (std::size_t k = 0; k < count; ++k) {
        freqs[k] = static_cast<double>(k + 1) / period;
    }
    return spectrum(train, freqs);
}

double band_rms(const SquareWaveSegmentTrain& train, double f_lo, double f_hi) {
    const double period = train.period();
    std::vector<double> freqs;
    for (auto k = static_cast<std::size_t>(std::floor(f_lo * period)) + 1;
         static_cast<double>(k) / period < f_hi; ++k) {
        if (static_cast<double>(k) / period > f_lo) {
            freqs.push_back(static_cast<double>(k) / period);
        }
    }
    double sum = 0.0;
    for (const auto& line : spectrum(train, freqs)) {
        sum += line.rms * line.rms;
    }
    return std::sqrt(sum);
}

EstimateCheck check_estimate(const PfmPattern& pattern, double amplitude) {
    EstimateCheck check;
    check.analytic = harmonic_rms(amplitude, pattern.duty(), pattern.order);
    const double f = pattern.base_frequency;
    check.exact = spectrum(synthesize(pattern, amplitude), std::span<const double>(&f, 1)).front().rms;
    check.relative_gap = std::abs(check.analytic - check.exact) / std::max(check.exact, 1e-300);
    check.demoted = check.relative_gap > kEstimateDemotionGap;
    return check;
}

}  // namespace wmd
