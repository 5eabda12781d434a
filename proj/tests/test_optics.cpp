#include <doctest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "hom/optics.hpp"

#include "support.hpp"

using namespace hom;
using namespace hom::testing;
using std::numbers::pi;

namespace {

// Independent reference for the triangular-gate kernel: plain midpoint rule
// on a fine grid, no breakpoints.
double gate_overlap_midpoint(double w, double linewidth, double tau, int n = 200000) {
    double sum = 0.0;
    const double h = 2.0 * w / n;
    for (int i = 0; i < n; ++i) {
        const double s = -w + (i + 0.5) * h;
        sum += (w - std::abs(s)) * std::exp(-pi * linewidth * std::abs(s - tau));
    }
    return sum * h / (w * w);
}

}  // namespace

TEST_CASE("visibility_from_ratio") {
    CHECK(visibility_from_ratio(1.0) == 0.5);
    CHECK(visibility_from_ratio(0.0) == 0.0);
    CHECK(visibility_from_ratio(0.5) == doctest::Approx(4.0 / 9.0).epsilon(1e-14));
    CHECK(visibility_from_ratio(0.1) == doctest::Approx(0.2 / 1.21).epsilon(1e-14));
    CHECK_THROWS_AS(visibility_from_ratio(-0.1), DomainError);
    for (double r = 0.01; r < 100.0; r *= 1.37) {
        CHECK(std::abs(visibility_from_ratio(r) - visibility_from_ratio(1.0 / r)) < 1e-12);
        CHECK(visibility_from_ratio(r) <= 0.5);
    }
}

TEST_CASE("visibility_from_counts") {
    CHECK(visibility_from_counts(1000, 1000) == 0.0);
    CHECK(visibility_from_counts(1000, 500) == 0.5);
    CHECK(visibility_from_counts(1000, 522) == doctest::Approx(0.478));
    CHECK_THROWS_AS(visibility_from_counts(0, 1), DomainError);
    CHECK_THROWS_AS(visibility_from_counts(10, -1), DomainError);
}

TEST_CASE("mutual coherence") {
    CHECK(mutual_coherence_sq(6.8e6, 0.0) == 1.0);
    CHECK(mutual_coherence_sq(1e8, 0.0) == 1.0);
    const double tau = 1.0 / (2 * pi * 6.8e6);
    CHECK(mutual_coherence_sq(6.8e6, tau) == doctest::Approx(std::exp(-1.0)).epsilon(1e-12));
    CHECK(mutual_coherence_sq(6.8e6, -tau) == doctest::Approx(std::exp(-1.0)).epsilon(1e-12));
    const double one = mutual_coherence_sq(3e6, 20e-9);
    CHECK(mutual_coherence_sq(6e6, 20e-9) == doctest::Approx(one * one).epsilon(1e-12));
    double prev = 1.0;
    for (double t = 1e-9; t < 1e-6; t *= 1.5) {
        CHECK(mutual_coherence_sq(6.8e6, t) < prev);
        prev = mutual_coherence_sq(6.8e6, t);
    }
    CHECK(relative_phase_coherence(6.8e6, tau) * relative_phase_coherence(6.8e6, tau) ==
          doctest::Approx(mutual_coherence_sq(6.8e6, tau)));
}

TEST_CASE("coincidence_ratio_analytic") {
    CHECK(coincidence_ratio_analytic(0.3, 0.3, 1.0) == 0.5);
    CHECK(coincidence_ratio_analytic(1.0, 1.0, 1.0) == 0.5);
    CHECK(coincidence_ratio_analytic(0.2, 0.7, 0.0) == 1.0);
    CHECK_THROWS_AS(coincidence_ratio_analytic(1, 1, 1.1), DomainError);
    CHECK_THROWS_AS(coincidence_ratio_analytic(1, 1, -0.1), DomainError);
    CHECK_THROWS_AS(coincidence_ratio_analytic(0, 0, 0.5), DomainError);
    for (double r : {0.1, 0.5, 2.0, 7.0})
        CHECK(coincidence_ratio_analytic(1.0, r, 1.0) == doctest::Approx(1.0 - visibility_from_ratio(r)));
    double prev = 1.0;
    for (double eta = 0.1; eta <= 1.0; eta += 0.1) {
        const double c = coincidence_ratio_analytic(0.4, 0.9, eta);
        CHECK(c < prev);
        prev = c;
    }
}

TEST_CASE("gate overlap factor against midpoint quadrature") {
    const double w = 15e-9;
    for (double lw : {0.0, 6.8e6, 20e6, 100e6}) {
        for (double tau : {0.0, 3e-9, -7.5e-9, 14e-9, 22e-9, 40e-9}) {
            CHECK(gate_overlap_factor(w, lw, tau) == doctest::Approx(gate_overlap_midpoint(w, lw, tau)).epsilon(1e-6));
        }
    }
    CHECK(gate_overlap_factor(w, 6.8e6, 0.0) <= 1.0);
    CHECK(gate_overlap_factor(1e-9, 0.0, 0.0) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("gate overlap factor closed form at tau = 0") {
    // (1/W^2) * 2 int_0^W (W - s) e^{-k s} ds = 2 (kW - 1 + e^{-kW}) / (kW)^2.
    for (double lw : {1e6, 6.8e6, 50e6, 300e6}) {
        const double w = 5e-9;
        const double x = pi * lw * w;
        CHECK(gate_overlap_factor(w, lw, 0.0) == doctest::Approx(2.0 * (x - 1.0 + std::exp(-x)) / (x * x)).epsilon(1e-9));
    }
}

TEST_CASE("dip_profile") {
    const double w = 1e-9;
    const std::vector<double> far{1e-6};
    CHECK(std::abs(dip_profile(w, 6.8e6, far, 1.0, 1.0)[0].ratio - 1.0) < 1e-6);
    CHECK_THROWS_AS(dip_profile(w, 6.8e6, std::vector<double>{}, 1.0, 1.0), DomainError);

    const std::vector<double> zero{0.0};
    CHECK(dip_profile(w, 0.0, zero, 1.0, 1.0)[0].ratio == doctest::Approx(0.5));

    std::vector<double> grid;
    for (int i = -40; i <= 40; ++i) grid.push_back(i * 1.3e-9);
    const auto prof = dip_profile(15e-9, 20e6, grid, 0.8, 0.6);
    for (std::size_t i = 0; i < grid.size(); ++i) {
        CHECK(prof[i].ratio == doctest::Approx(prof[grid.size() - 1 - i].ratio).epsilon(1e-10));
        CHECK(prof[i].ratio <= 1.0);
    }
    const auto min = std::min_element(prof.begin(), prof.end(), [](auto a, auto b) { return a.ratio < b.ratio; });
    CHECK(min->tau_s == 0.0);
    CHECK(1.0 - min->ratio <= 0.8 * visibility_from_ratio(0.6) + 1e-12);
}

TEST_CASE("dip width limits") {
    // Narrow-linewidth limit on gates of width W: the relative phase is frozen,
    // both gates see the same phase and the dip is flat inside the coherence time.
    const double w = 1e-9;
    const std::vector<double> taus{-3e-9, 0.0, 3e-9};
    for (const auto& p : dip_profile(w, 1.0, taus, 1.0, 1.0)) CHECK(p.ratio == doctest::Approx(0.5).epsilon(1e-6));

    // Broad-linewidth limit: the kernel is narrow against the gates and G takes
    // the triangular gate cross-correlation shape scaled by the kernel area.
    const double lw = 5e10;
    const double area = 2.0 / (pi * lw);
    for (double tau : {0.0, 0.25e-9, 0.5e-9, 0.75e-9})
        CHECK(gate_overlap_factor(w, lw, tau) == doctest::Approx(area * (w - tau) / (w * w)).epsilon(0.01));
}

TEST_CASE("dip FWHM scales with linewidth") {
    const double w = 15e-9;
    std::vector<double> fw;
    for (double lw : {6.8e6, 20e6, 50e6, 100e6}) {
        std::vector<double> tau;
        for (int i = -1000; i <= 1000; ++i) tau.push_back(i * 0.25e-9);
        const auto prof = dip_profile(w, lw, tau, 1.0, 1.0);
        std::vector<double> y;
        for (const auto& p : prof) y.push_back(p.ratio);
        const auto width = half_depth_width(tau, y);
        REQUIRE(width);
        fw.push_back(*width);
    }
    for (std::size_t i = 1; i < fw.size(); ++i) CHECK(fw[i] < fw[i - 1]);
    CHECK(fw.front() / fw.back() >= 2.5);
    CHECK(fw.front() / fw.back() <= 6.0);
}

TEST_CASE("half_depth_width") {
    const std::vector<double> t{-2, -1, 0, 1, 2};
    CHECK(*half_depth_width(t, std::vector<double>{1, 1, 0.5, 1, 1}) == doctest::Approx(1.0));
    CHECK(*half_depth_width(t, std::vector<double>{1, 0.8, 0.6, 0.8, 1}) == doctest::Approx(2.0));
    CHECK_FALSE(half_depth_width(t, std::vector<double>{1, 1, 1, 1, 1}));
    CHECK_FALSE(half_depth_width(t, std::vector<double>{0.5, 0.6, 0.7, 0.8, 1}));
    CHECK_FALSE(half_depth_width(t, std::vector<double>{1, 1, 0.95, 1, 1}, 0.1));
}

TEST_CASE("beamsplitter") {
    FieldSample a;
    a.amplitude = 1.0;
    FieldSample b;
    b.amplitude = 0.0;
    auto [c, d] = beamsplitter_outputs(a, b);
    CHECK(c.intensity() == doctest::Approx(0.5));
    CHECK(d.intensity() == doctest::Approx(0.5));

    b.amplitude = 1.0;
    std::tie(c, d) = beamsplitter_outputs(a, b);
    CHECK(c.intensity() == doctest::Approx(2.0));
    CHECK(d.intensity() == doctest::Approx(0.0).epsilon(1e-15));

    b.sop = sop::vertical();
    for (double ph : {0.0, 0.7, 2.0, pi}) {
        b.phase = ph;
        std::tie(c, d) = beamsplitter_outputs(a, b);
        CHECK(c.intensity() == doctest::Approx(1.0));
        CHECK(d.intensity() == doctest::Approx(1.0));
        CHECK(overlap_probability(c.sop, sop::diagonal()) > 0.0);
    }
}

TEST_CASE("beamsplitter conserves energy") {
    Rng rng(101);
    std::normal_distribution<double> n;
    for (int k = 0; k < 100000; ++k) {
        FieldSample a = FieldSample::from_field(random_field(rng, n));
        FieldSample b = FieldSample::from_field(random_field(rng, n));
        a.phase = n(rng);
        b.phase = n(rng);
        const auto [c, d] = beamsplitter_outputs(a, b);
        REQUIRE(std::abs(a.intensity() + b.intensity() - c.intensity() - d.intensity()) < 1e-10);
    }
}

TEST_CASE("phase diffusion") {
    Rng rng(103);
    FieldSample s;
    s.phase = 0.3;
    CHECK(phase_diffusion_step(s, 1e-9, 0.0, rng).phase == 0.3);
    CHECK_THROWS_AS(phase_diffusion_step(s, 0.0, 1e6, rng), DomainError);

    // Ensemble coherence at lag 1/(pi linewidth), built from 10 substeps.
    const double lw = 6.8e6;
    const double lag = 1.0 / (pi * lw);
    const int n = 100000;
    std::complex<double> acc = 0.0;
    double var1 = 0.0, var2 = 0.0;
    for (int k = 0; k < n; ++k) {
        FieldSample f;
        for (int j = 0; j < 10; ++j) f = phase_diffusion_step(f, lag / 10, lw, rng);
        acc += std::polar(1.0, f.phase);
        const double d1 = phase_diffusion_step(FieldSample{}, 1e-9, lw, rng).phase;
        const double d2 = phase_diffusion_step(FieldSample{}, 2e-9, lw, rng).phase;
        var1 += d1 * d1;
        var2 += d2 * d2;
    }
    CHECK(std::abs(acc) / n == doctest::Approx(std::exp(-1.0)).epsilon(0.01 / std::exp(-1.0)));
    CHECK(var2 / var1 == doctest::Approx(2.0).epsilon(0.03));
    CHECK(var1 / n == doctest::Approx(2 * pi * lw * 1e-9).epsilon(0.03));
}

TEST_CASE("laser spec validation") {
    LaserSpec l;
    CHECK_NOTHROW(l.validate());
    CHECK(l.effective_linewidth_hz() == 1e6);
    l.fm_broadening_hz = 99e6;
    CHECK(l.effective_linewidth_hz() == 100e6);
    l.linewidth_hz = 0.0;
    CHECK_THROWS_AS(l.validate(), ConfigError);
    l = LaserSpec{};
    l.mean_photons_per_gate = -1;
    CHECK_THROWS_AS(l.validate(), ConfigError);
    l = LaserSpec{};
    l.sop = JonesVectord(1.0, 1.0);
    CHECK_THROWS_AS(l.validate(), ConfigError);
}

TEST_CASE("overlap factors") {
    OverlapFactors f{0.5, 0.8};
    CHECK(f.eta() == doctest::Approx(0.4));
}
