#include <doctest.h>

#include <cmath>
#include <numbers>

#include "hom/polarization.hpp"
#include "hom/random.hpp"

#include "support.hpp"

using namespace hom;
using namespace hom::testing;

namespace {

// Up-to-global-phase equality.
bool same_ray(const JonesVectord& a, const JonesVectord& b, double tol = 1e-10) {
    return std::abs(overlap_probability(a, b) - 1.0) < tol;
}

}  // namespace

TEST_CASE("overlap of basis states") {
    CHECK(overlap_probability(sop::horizontal(), sop::horizontal()) == doctest::Approx(1.0));
    CHECK(overlap_probability(sop::horizontal(), sop::vertical()) == doctest::Approx(0.0));
    CHECK(overlap_probability(sop::horizontal(), sop::diagonal()) == doctest::Approx(0.5));
    CHECK(overlap_probability(sop::diagonal(), sop::right_circular()) == doctest::Approx(0.5));
    CHECK(overlap_probability(sop::right_circular(), sop::left_circular()) == doctest::Approx(0.0).epsilon(1e-15));
}

TEST_CASE("overlap is symmetric and blind to global phase") {
    Rng rng(11);
    for (int k = 0; k < 200; ++k) {
        const auto a = random_sop(rng);
        const auto b = random_sop(rng);
        const std::complex<double> ph = std::polar(1.0, 0.37 * k);
        CHECK(overlap_probability(a, b) == doctest::Approx(overlap_probability(b, a)).epsilon(1e-12));
        CHECK(overlap_probability(JonesVectord(ph * a), b) == doctest::Approx(overlap_probability(a, b)).epsilon(1e-12));
    }
}

TEST_CASE("overlap rejects unnormalized input") {
    const JonesVectord big(1.0, 1.0);
    CHECK_THROWS_AS(overlap_probability(big, sop::horizontal()), DomainError);
    CHECK_THROWS_AS(overlap_probability(sop::horizontal(), JonesVectord(0.999, 0.0)), DomainError);
    CHECK_NOTHROW(overlap_probability(sop::horizontal(), JonesVectord(1.0 + 4e-7, 0.0)));
    CHECK_THROWS_AS(normalized(JonesVectord::Zero().eval()), DomainError);
}

TEST_CASE("rotate") {
    Rng rng(3);
    const auto s = random_sop(rng);
    CHECK((rotate(JonesMatrixd::Identity().eval(), s) - s).norm() < 1e-15);

    // Two quarter turns about s3 carry H through D to V.
    const StokesVectord s3(0, 0, 1);
    const JonesMatrixd q = poincare_rotation<double>(s3, std::numbers::pi / 2);
    CHECK(same_ray(rotate(q, sop::horizontal()), sop::diagonal()));
    CHECK(same_ray(rotate(q, rotate(q, sop::horizontal())), sop::vertical()));

    const JonesMatrixd u = haar_unitary<double>(rng);
    CHECK(std::abs(rotate(u, s).norm() - 1.0) < 1e-10);
}

TEST_CASE("common unitary preserves overlap") {
    Rng rng(5);
    for (int k = 0; k < 500; ++k) {
        const auto a = random_sop(rng);
        const auto b = random_sop(rng);
        const auto u = k % 2 ? haar_unitary<double>(rng) : random_unitary<double>(rng, 1.3);
        CHECK(std::abs(overlap_probability(rotate(u, a), rotate(u, b)) - overlap_probability(a, b)) < 1e-10);
    }
}

TEST_CASE("stokes convention") {
    auto close = [](const StokesVectord& a, const StokesVectord& b) { return (a - b).norm() < 1e-12; };
    CHECK(close(to_stokes(sop::horizontal()), {1, 0, 0}));
    CHECK(close(to_stokes(sop::vertical()), {-1, 0, 0}));
    CHECK(close(to_stokes(sop::diagonal()), {0, 1, 0}));
    CHECK(close(to_stokes(sop::antidiagonal()), {0, -1, 0}));
    CHECK(close(to_stokes(sop::right_circular()), {0, 0, 1}));
    CHECK(close(to_stokes(sop::left_circular()), {0, 0, -1}));
}

TEST_CASE("stokes round trip and overlap relation") {
    Rng rng(7);
    for (int k = 0; k < 500; ++k) {
        const auto a = random_sop(rng);
        const auto b = random_sop(rng);
        const auto sa = to_stokes(a);
        CHECK(std::abs(sa.norm() - 1.0) < 1e-10);
        CHECK(same_ray(from_stokes(sa), a));
        CHECK(std::abs(overlap_probability(a, b) - 0.5 * (1.0 + sa.dot(to_stokes(b)))) < 1e-10);
    }
}

TEST_CASE("poincare rotation acts as a rotation of the stokes vector") {
    Rng rng(9);
    std::normal_distribution<double> n;
    for (int k = 0; k < 100; ++k) {
        const StokesVectord axis = StokesVectord(n(rng), n(rng), n(rng)).normalized();
        const double angle = 3.0 * n(rng);
        const auto s = random_sop(rng);
        const StokesVectord expect = Eigen::AngleAxisd(angle, axis) * to_stokes(s);
        const auto u = poincare_rotation<double>(axis, angle);
        CHECK(is_unitary(u));
        CHECK((to_stokes(rotate(u, s)) - expect).norm() < 1e-10);
        CHECK(rotation_angle(u) == doctest::Approx(std::abs(std::remainder(angle, 2 * std::numbers::pi))).epsilon(1e-9));
    }
}

TEST_CASE("compose and inverse") {
    Rng rng(13);
    const auto a = haar_unitary<double>(rng);
    const auto b = haar_unitary<double>(rng);
    const auto c = haar_unitary<double>(rng);
    CHECK((compose(a, inverse(a)) - JonesMatrixd::Identity()).norm() < 1e-10);
    CHECK((compose(compose(a, b), c) - compose(a, compose(b, c))).norm() < 1e-12);
    CHECK(is_unitary(compose(a, b)));
    const auto s = random_sop(rng);
    CHECK(same_ray(rotate(compose(a, b), s), rotate(a, rotate(b, s))));
}

TEST_CASE("reunitarize restores unitarity") {
    Rng rng(17);
    const auto u = haar_unitary<double>(rng);
    JonesMatrixd noisy = u;
    noisy(0, 1) += std::complex<double>(1e-6, -2e-6);
    CHECK_FALSE(is_unitary(noisy));
    const auto r = reunitarize(noisy);
    CHECK(is_unitary(r));
    CHECK((r - u).norm() < 1e-5);
}

TEST_CASE("random_unitary basics") {
    Rng rng(19);
    CHECK(random_unitary<double>(rng, 0.0) == JonesMatrixd::Identity());
    CHECK_THROWS_AS(random_unitary<double>(rng, -0.1), DomainError);

    double prev = 1e9;
    for (double eps : {1e-1, 1e-2, 1e-3, 1e-4}) {
        double worst = 0.0;
        for (int k = 0; k < 200; ++k)
            worst = std::max(worst, (random_unitary<double>(rng, eps) - JonesMatrixd::Identity()).norm());
        CHECK(worst < prev);
        CHECK(worst < 6 * eps);
        prev = worst;
    }
}

TEST_CASE("random_unitary is unitary at every scale") {
    Rng rng(23);
    const double scales[] = {0.0, 1e-6, 0.01, 0.25, 0.7, 1.0, 3.14159, 10.0};
    for (int k = 0; k < 10000; ++k) {
        const auto u = random_unitary<double>(rng, scales[k % 8]);
        REQUIRE(is_unitary(u));
    }
}

TEST_CASE("random_unitary rms angle matches scale for small scales") {
    Rng rng(29);
    const double scale = 0.1;
    double ss = 0.0;
    const int n = 20000;
    for (int k = 0; k < n; ++k) {
        const double a = rotation_angle(random_unitary<double>(rng, scale));
        ss += a * a;
    }
    CHECK(std::sqrt(ss / n) == doctest::Approx(scale).epsilon(0.02));
}

TEST_CASE("random_unitary at scale pi spreads H over the sphere") {
    Rng rng(31);
    StokesVectord mean = StokesVectord::Zero();
    const int n = 100000;
    for (int k = 0; k < n; ++k) mean += to_stokes(rotate(random_unitary<double>(rng, std::numbers::pi), sop::horizontal()));
    mean /= n;
    CHECK(mean.norm() < 0.05);
}

TEST_CASE("random_unitary composes like a Brownian increment") {
    // Two draws of 0.3 rad compose to one of 0.3*sqrt2 in law; compare the
    // mean s1 of the image of H, which decays as exp(-scale^2 / 3) for small
    // substeps.
    Rng rng(37);
    const int n = 40000;
    double two = 0.0, one = 0.0;
    for (int k = 0; k < n; ++k) {
        two += to_stokes(rotate(JonesMatrixd(random_unitary<double>(rng, 0.3) * random_unitary<double>(rng, 0.3)), sop::horizontal()))(0);
        one += to_stokes(rotate(random_unitary<double>(rng, 0.3 * std::sqrt(2.0)), sop::horizontal()))(0);
    }
    two /= n;
    one /= n;
    const double expect = std::exp(-2 * 0.09 / 3);
    CHECK(two == doctest::Approx(expect).epsilon(0.01));
    CHECK(one == doctest::Approx(expect).epsilon(0.01));
}

TEST_CASE("haar_unitary covers the sphere") {
    Rng rng(41);
    StokesVectord mean = StokesVectord::Zero();
    double s1sq = 0.0;
    const int n = 50000;
    for (int k = 0; k < n; ++k) {
        const auto u = haar_unitary<double>(rng);
        REQUIRE(is_unitary(u));
        const auto st = to_stokes(rotate(u, sop::horizontal()));
        mean += st;
        s1sq += st(0) * st(0);
    }
    mean /= n;
    // Uniform on the sphere: each component has variance 1/3.
    const double sigma = std::sqrt(1.0 / 3.0 / n);
    CHECK(mean.cwiseAbs().maxCoeff() < 4 * sigma);
    CHECK(s1sq / n == doctest::Approx(1.0 / 3.0).epsilon(0.02));
}

TEST_CASE("linear states follow cos^2") {
    for (double th = 0.0; th <= std::numbers::pi / 2; th += 0.1)
        CHECK(overlap_probability(sop::horizontal(), sop::linear(th)) == doctest::Approx(std::cos(th) * std::cos(th)));
}

TEST_CASE("single precision instantiation") {
    const auto h = sop::horizontal<float>();
    const auto d = sop::diagonal<float>();
    CHECK(overlap_probability(h, d) == doctest::Approx(0.5f));
    CHECK(to_stokes(d)(1) == doctest::Approx(1.0f));
}
