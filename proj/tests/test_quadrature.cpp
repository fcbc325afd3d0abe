#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "berg/quadrature.hpp"

using namespace berg;

namespace {

double lfact(int n) { return std::lgamma(n + 1.0); }

// modified Bessel I_k by series, for the equispaced-rule oracle
double bessel_i(int k, double c) {
    double s = 0.0;
    for (int n = 0; n < 40; ++n)
        s += std::exp((2 * n + k) * std::log(c / 2) - lfact(n) - lfact(n + k));
    return s;
}

}  // namespace

TEST_CASE("log scalar arithmetic") {
    LogScalar a = LogScalar::from(3.0), b = LogScalar::from(-4.0);
    CHECK((a * b).real_value() == doctest::Approx(-12.0).epsilon(1e-14));
    CHECK((a + b).real_value() == doctest::Approx(-1.0).epsilon(1e-14));
    CHECK((a / b).real_value() == doctest::Approx(-0.75).epsilon(1e-14));
    CHECK(LogScalar::from(0.0).is_zero());
    CHECK((LogScalar::zero() + a).real_value() == doctest::Approx(3.0));

    // huge exponents survive: e^{-9e5} * e^{9e5} = 1
    LogScalar t1 = LogScalar::from_log(-9e5), t2 = LogScalar::from_log(9e5);
    CHECK((t1 * t2).real_value() == doctest::Approx(1.0));
    CHECK((t1 + t1).log_mag == doctest::Approx(-9e5 + std::log(2.0)));
}

TEST_CASE("compensated log_sum is permutation stable") {
    std::mt19937 rng(12345);
    std::uniform_real_distribution<double> mag(-40.0, 40.0), ph(0.0, 2 * PI);
    std::vector<LogScalar> terms;
    for (int i = 0; i < 500; ++i)
        terms.push_back(LogScalar::from_log(mag(rng), std::polar(1.0, ph(rng))));
    LogScalar ref = log_sum(terms);
    for (int trial = 0; trial < 5; ++trial) {
        std::shuffle(terms.begin(), terms.end(), rng);
        LogScalar got = log_sum(terms);
        CHECK(got.log_mag == doctest::Approx(ref.log_mag).epsilon(1e-13));
        CHECK(std::abs(got.phase - ref.phase) < 1e-13);
    }
}

TEST_CASE("radial: gaussian mass") {
    QuadSpec spec;
    const double m = 100.0;
    auto f = [&](double r) {
        return LogScalar::from_log(std::log(2 * PI * r) - PI * m * r * r);
    };
    auto res = integrate_radial(f, 3.0, spec);  // tail beyond 3 is ~e^{-2800}
    CHECK(res.value.real_value() == doctest::Approx(0.01).epsilon(1e-10));
    CHECK(res.rel_err < 1e-10);
}

TEST_CASE("radial: beta moment") {
    QuadSpec spec;
    const int m = 10, j = 3;
    auto f = [&](double r) {
        return LogScalar::from_log(std::log(2 * r) - (m + 2) * std::log1p(r * r) +
                                   2 * j * std::log(r));
    };
    auto res = integrate_radial(f, 1e4, spec);
    double exact = std::exp(lfact(j) + lfact(m - j) - lfact(m + 1));
    CHECK(res.value.real_value() == doctest::Approx(exact).epsilon(1e-10));
}

TEST_CASE("radial: zero integrand and scaling equivariance") {
    QuadSpec spec;
    auto zero = [](double) { return LogScalar::zero(); };
    CHECK(integrate_radial(zero, 1.0, spec).value.is_zero());

    auto f = [](double r) { return LogScalar::from_log(-r * r + std::log(r)); };
    const double lc = std::log(1e-120);
    auto fc = [&](double r) { return LogScalar::from_log(-r * r + std::log(r) + lc); };
    auto r1 = integrate_radial(f, 5.0, spec);
    auto r2 = integrate_radial(fc, 5.0, spec);
    CHECK(r2.value.log_mag - r1.value.log_mag == doctest::Approx(lc).epsilon(1e-13));
}

TEST_CASE("radial: gaussian moment table p<=8") {
    QuadSpec spec;
    for (double m : {1.0, 10.0, 100.0, 1000.0}) {
        for (int p = 0; p <= 8; ++p) {
            auto f = [&](double r) {
                return LogScalar::from_log((2 * p + 1) * std::log(r) - PI * m * r * r);
            };
            double R = 30.0 / std::sqrt(m);  // tail < e^{-900}
            auto res = integrate_radial(f, R, spec);
            double exact_log = lfact(p) - std::log(2.0) - (p + 1) * std::log(PI * m);
            CHECK(res.value.log_mag == doctest::Approx(exact_log).epsilon(1e-10));
        }
    }
}

TEST_CASE("radial: budget exhaustion raises with partial result") {
    QuadSpec spec;
    spec.max_subdivisions = 2;
    spec.rel_tol = 1e-14;
    auto f = [](double r) { return LogScalar::from_log(-1.0 / r); };  // hard near 0
    CHECK_THROWS_AS(integrate_radial(f, 1.0, spec), NonConvergence);
}

TEST_CASE("angular modes: constants and single harmonics") {
    QuadSpec spec;
    auto one = [](double) { return LogScalar::from(1.0); };
    auto m0 = angular_modes(one, 4, spec);
    CHECK(m0[0].real_value() == doctest::Approx(2 * PI).epsilon(1e-14));
    for (int k = 1; k <= 4; ++k) CHECK(std::exp(m0[k].log_mag) < 1e-14);

    auto cos2 = [](double t) { return LogScalar::from(std::cos(2 * t)); };
    auto m2 = angular_modes(cos2, 4, spec);
    CHECK(m2[2].real_value() == doctest::Approx(PI).epsilon(1e-13));
    CHECK(std::exp(m2[1].log_mag) < 1e-13);
}

TEST_CASE("angular modes: exponential-of-cosine vs Bessel series") {
    QuadSpec spec;
    const double c = 0.3;
    auto f = [&](double t) { return LogScalar::from(std::exp(c * std::cos(t))); };
    auto ms = angular_modes(f, 6, spec);
    for (int k = 0; k <= 6; ++k)
        CHECK(ms[k].real_value() ==
              doctest::Approx(2 * PI * bessel_i(k, c)).epsilon(1e-10));
}

TEST_CASE("disc: gaussian, odd cancellation, |z|^2") {
    QuadSpec spec;
    auto gauss = [](cplx z) { return LogScalar::from_log(-PI * std::norm(z)); };
    auto r1 = integrate_disc(gauss, 5.0, spec);
    CHECK(r1.value.real_value() == doctest::Approx(1.0).epsilon(1e-10));

    auto odd = [](cplx z) { return LogScalar::from(z); };
    auto r2 = integrate_disc(odd, 1.0, spec);
    CHECK((r2.value.is_zero() || std::exp(r2.value.log_mag) < 1e-14));

    auto sq = [](cplx z) { return LogScalar::from(std::norm(z)); };
    auto r3 = integrate_disc(sq, 1.0, spec);
    CHECK(r3.value.real_value() == doctest::Approx(PI / 2).epsilon(1e-10));
}

TEST_CASE("gauss-legendre nodes integrate polynomials exactly") {
    auto f = [](double x) { return x * x * x * x * x * x; };  // x^6
    CHECK(gl_integrate(f, -1.0, 1.0, 4) == doctest::Approx(2.0 / 7).epsilon(1e-14));
    CHECK(gl_integrate([](double x) { return std::exp(x); }, 0.0, 1.0, 24) ==
          doctest::Approx(std::exp(1.0) - 1.0).epsilon(1e-14));
}

TEST_CASE("quad spec validation") {
    QuadSpec bad;
    bad.angular_nodes = 300;  // not a power of two
    CHECK_THROWS_AS(bad.validate(), Error);
    CHECK(QuadSpec::angular_nodes_for(100) == 1024);
    CHECK(QuadSpec::angular_nodes_for(1) == 256);
}
