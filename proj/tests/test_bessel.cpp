#include <doctest.h>

#include <cmath>
#include <random>

#include "gemsim/bessel.hpp"
#include "gemsim/core.hpp"

using namespace gemsim;

namespace {

// Ascending power series in long double; accurate for moderate x.
long double series_jn(int n, long double x)
{
    long double term = 1.0L;
    for (int k = 1; k <= n; ++k) term *= x / (2.0L * k);
    long double sum = term;
    const long double q = -x * x / 4.0L;
    for (int m = 1; m < 400; ++m) {
        term *= q / (static_cast<long double>(m) * (m + n));
        sum += term;
        if (std::abs(term) < 1e-30L * std::abs(sum) && m > x) break;
    }
    return sum;
}

double series_root()
{
    long double a = 2.0L, b = 3.0L;
    for (int i = 0; i < 200; ++i) {
        const long double m = 0.5L * (a + b);
        (series_jn(0, a) * series_jn(0, m) <= 0.0L ? b : a) = m;
    }
    return static_cast<double>(0.5L * (a + b));
}

}  // namespace

TEST_CASE("values at the origin")
{
    CHECK(bessel_jn(0, 0.0) == 1.0);
    CHECK(bessel_jn(1, 0.0) == 0.0);
    CHECK(bessel_jn(-7, 0.0) == 0.0);
}

TEST_CASE("agreement with the power series")
{
    for (double x : {0.1, 0.5, 1.0, 2.0, 2.404825557695773, 5.0, 7.3, 10.0, 12.0}) {
        for (int n = 0; n <= 30; ++n) {
            CAPTURE(x);
            CAPTURE(n);
            CHECK(std::abs(bessel_jn(n, x) - static_cast<double>(series_jn(n, x))) < 1e-12);
        }
    }
}

TEST_CASE("agreement with the standard library across the envelope")
{
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> xs(0.0, 500.0);
    std::uniform_int_distribution<int> ns(0, 200);
    for (int i = 0; i < 400; ++i) {
        const int n = ns(rng);
        const double x = xs(rng);
        CAPTURE(n);
        CAPTURE(x);
        CHECK(std::abs(bessel_jn(n, x) - std::cyl_bessel_j(static_cast<double>(n), x)) < 1e-12);
    }
}

TEST_CASE("negative orders and arguments")
{
    for (double x : {0.7, 2.0, 9.5, 40.0}) {
        for (int n = 0; n <= 12; ++n) {
            const double sign = n % 2 ? -1.0 : 1.0;
            CHECK(bessel_jn(-n, x) == doctest::Approx(sign * bessel_jn(n, x)).epsilon(1e-15));
            CHECK(bessel_jn(n, -x) == doctest::Approx(sign * bessel_jn(n, x)).epsilon(1e-15));
        }
    }
}

TEST_CASE("sum of squares is one")
{
    for (double x : {0.5, 2.0, 5.0, 10.0, 100.0}) {
        double sum = 0.0;
        const int n_max = static_cast<int>(x) + 50;
        for (int n = -n_max; n <= n_max; ++n) sum += std::pow(bessel_jn(n, x), 2);
        CAPTURE(x);
        CHECK(std::abs(sum - 1.0) < 1e-12);
    }
}

TEST_CASE("Jacobi-Anger generating function")
{
    for (double theta : {0.0, 0.4, 1.9, 3.0}) {
        const double x = 2.0;
        Complex sum{0.0, 0.0};
        for (int n = -40; n <= 40; ++n)
            sum += std::pow(Complex{0.0, 1.0}, n) * bessel_jn(n, x) * std::polar(1.0, n * theta);
        const Complex exact = std::polar(1.0, x * std::cos(theta));
        CHECK(std::abs(sum - exact) < 1e-13);
    }
}

TEST_CASE("first zero of J0")
{
    const double root = bessel_j0_first_zero();
    CHECK(std::abs(root - series_root()) < 1e-10);
    CHECK(std::abs(root - 2.404826) < 1e-6);
    CHECK(std::abs(bessel_jn(0, 2.404826)) < 1e-6);
}

TEST_CASE("long double instantiation")
{
    CHECK(std::abs(bessel_jn<long double>(3, 2.5L) - series_jn(3, 2.5L)) < 1e-15L);
}

TEST_CASE("outside the supported envelope")
{
    CHECK_THROWS_AS(bessel_jn(201, 1.0), Error);
    CHECK_THROWS_AS(bessel_jn(0, 500.5), Error);
    CHECK_THROWS_AS(bessel_jn(0, std::nan("")), Error);
}
