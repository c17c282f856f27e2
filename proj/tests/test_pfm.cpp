#include "wmd/error.hpp"
#include "wmd/pfm.hpp"

#include <catch_amalgamated.hpp>

#include <cmath>
#include <complex>
#include <numbers>

using namespace wmd;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

// Brute-force Fourier projection of the segment train by midpoint sampling.
double sampled_rms_at(const SquareWaveSegmentTrain& train, double f, int samples) {
    const double period = train.period();
    const double dt = period / samples;
    std::complex<double> acc;
    std::size_t seg = 0;
    double seg_end = train.segments[0].duration;
    for (int k = 0; k < samples; ++k) {
        const double t = (k + 0.5) * dt;
        while (t > seg_end && seg + 1 < train.segments.size()) {
            ++seg;
            seg_end += train.segments[seg].duration;
        }
        acc += train.segments[seg].level * std::polar(1.0, -2.0 * std::numbers::pi * f * t) * dt;
    }
    return std::abs(acc) * 2.0 / period / std::sqrt(2.0);
}

}  // namespace

TEST_CASE("closed-form harmonic content", "[pfm]") {
    const double oracle = 2.0 * std::sqrt(2.0) * 110.0 / std::numbers::pi;
    CHECK_THAT(harmonic_rms(110.0, 1.0, 1), WithinAbs(oracle, 1e-12));
    CHECK_THAT(harmonic_rms(110.0, 1.0, 1), WithinAbs(99.03, 5e-3));
    CHECK_THAT(harmonic_rms(110.0, 0.0, 1), WithinRel(oracle / 3.0, 1e-12));
    CHECK_THAT(square_wave_fundamental_rms(110.0), WithinRel(oracle, 1e-15));
    CHECK_THROWS_AS(harmonic_rms(110.0, 1.5, 1), DomainError);
    CHECK_THROWS_AS(harmonic_rms(110.0, 0.5, 0), DomainError);
}

TEST_CASE("duty to pattern", "[pfm]") {
    const PfmPattern p = pattern_from_duty(0.8, 16);
    CHECK(p.n1 == 4);
    CHECK(p.n2 == 1);
    CHECK(pattern_from_duty(1.0, 16).n2 == 0);
    CHECK(pattern_from_duty(0.0, 16).n1 == 0);
    const PfmPattern third = pattern_from_duty(1.0 / 3.0, 16);
    CHECK(third.n1 == 1);
    CHECK(third.n2 == 2);
    CHECK_THROWS_AS(make_pattern(0, 0, 85e3), DomainError);
    CHECK_THROWS_AS(make_pattern(1, 0, -1.0), DomainError);
}

TEST_CASE("best rational approximation property", "[pfm][property]") {
    for (double duty = 0.0; duty <= 1.0; duty += 0.013) {
        const PfmPattern p = pattern_from_duty(duty, 12);
        const double err = std::abs(p.duty() - duty);
        for (std::size_t den = 1; den <= 12; ++den) {
            for (std::size_t num = 0; num <= den; ++num) {
                CHECK(err <= std::abs(static_cast<double>(num) / den - duty) + 1e-15);
            }
        }
    }
}

TEST_CASE("segment train structure", "[pfm][property]") {
    for (std::size_t n1 = 0; n1 <= 4; ++n1) {
        for (std::size_t n2 = 0; n2 <= 3; ++n2) {
            if (n1 + n2 == 0) {
                continue;
            }
            const PfmPattern p = make_pattern(n1, n2, 85e3);
            const SquareWaveSegmentTrain t = synthesize(p, 110.0);
            CHECK(t.segments.size() == 2 * (n1 + n2));
            CHECK_THAT(t.period(), WithinRel(p.period(), 1e-12));
            CHECK_THAT(t.mean(), WithinAbs(0.0, 1e-9));
            const auto starts = t.start_times();
            CHECK(starts.front() == 0.0);
        }
    }
}

TEST_CASE("exact spectrum agrees with brute-force sampling", "[pfm]") {
    const PfmPattern p = make_pattern(4, 1, 85e3);
    const SquareWaveSegmentTrain t = synthesize(p, 110.0);
    const std::vector<double> freqs{85e3, 3.0 / p.period(), 2.0 * 85e3, 1.0 / p.period()};
    const auto lines = spectrum(t, freqs);
    for (std::size_t k = 0; k < freqs.size(); ++k) {
        CHECK(lines[k].periodic);
        CHECK_THAT(lines[k].rms, WithinAbs(sampled_rms_at(t, freqs[k], 2'000'000), 1e-4));
    }
}

TEST_CASE("analytic estimate equals the exact line at f", "[pfm][property]") {
    for (std::size_t n1 = 0; n1 <= 6; ++n1) {
        for (std::size_t n2 = 0; n2 <= 6; ++n2) {
            if (n1 + n2 == 0) {
                continue;
            }
            const EstimateCheck c = check_estimate(make_pattern(n1, n2, 85e3), 110.0);
            CHECK(c.relative_gap < 1e-9);
            CHECK_FALSE(c.demoted);
        }
    }
}

TEST_CASE("slow square wave content at f/3 and at f", "[pfm]") {
    const SquareWaveSegmentTrain slow = synthesize(make_pattern(0, 1, 85e3), 110.0);
    const std::vector<double> freqs{85e3 / 3.0, 85e3};
    const auto lines = spectrum(slow, freqs);
    CHECK_THAT(lines[0].rms, WithinAbs(99.03, 5e-3));
    CHECK_THAT(lines[1].rms, WithinAbs(33.01, 5e-3));
}

TEST_CASE("Parseval", "[pfm][property]") {
    const SquareWaveSegmentTrain square = synthesize(make_pattern(1, 0, 85e3), 110.0);
    double power = 0.0;
    for (const auto& l : pattern_harmonics(square, 200)) {
        power += l.rms * l.rms;
    }
    CHECK(power >= 0.99 * 110.0 * 110.0);
    CHECK(power <= 110.0 * 110.0);

    for (std::size_t n1 : {1u, 2u, 4u}) {
        for (std::size_t n2 : {1u, 3u}) {
            const PfmPattern p = make_pattern(n1, n2, 85e3);
            const SquareWaveSegmentTrain t = synthesize(p, 110.0);
            double sum = 0.0;
            for (const auto& l : pattern_harmonics(t, 200 * (n1 + 3 * n2))) {
                sum += l.rms * l.rms;
            }
            CHECK(sum >= 0.99 * 110.0 * 110.0);
            CHECK(sum <= 110.0 * 110.0 * (1.0 + 1e-12));
        }
    }
}

TEST_CASE("more fast pulses move content from f/3 to f", "[pfm][property]") {
    double prev_f = 0.0;
    double prev_third = 1e9;
    for (std::size_t n1 = 0; n1 <= 8; ++n1) {
        const SquareWaveSegmentTrain t = synthesize(make_pattern(n1, 8 - n1, 85e3), 110.0);
        const std::vector<double> f{85e3};
        const double at_f = spectrum(t, f)[0].rms;
        const double near_third = band_rms(t, 85e3 / 6.0, 85e3 / 2.0);
        CHECK(at_f > prev_f);
        CHECK(near_third < prev_third + 1e-12);
        prev_f = at_f;
        prev_third = near_third;
    }
}

TEST_CASE("non-harmonic frequencies are flagged", "[pfm]") {
    const SquareWaveSegmentTrain t = synthesize(make_pattern(4, 1, 85e3), 110.0);
    const std::vector<double> f{1.2345e3};
    CHECK_FALSE(spectrum(t, f)[0].periodic);
}
