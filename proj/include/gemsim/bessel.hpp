#pragma once

// Integer-order Bessel functions of the first kind.
//
// Miller's algorithm: recur J_{m-1} = (2m/x) J_m - J_{m+1} downward from an
// order well above max(n, |x|), then normalise with the Neumann series
// 1 = J_0(x) + 2 sum_{k>=1} J_{2k}(x).

#include <cmath>
#include <cstdlib>
#include <string>

#include "gemsim/core.hpp"

namespace gemsim {

inline constexpr int kBesselMaxOrder = 200;
inline constexpr double kBesselMaxArgument = 500.0;

template <typename Real>
Real bessel_jn(int n, Real x)
{
    using std::abs;
    using std::cbrt;
    if (std::abs(n) > kBesselMaxOrder || !(abs(x) <= Real(kBesselMaxArgument)))
        throw Error(ErrorKind::Domain, "bessel_jn: arguments outside |n| <= 200, |x| <= 500 (n = " +
                                           std::to_string(n) + ")");
    // J_{-n}(x) = (-1)^n J_n(x) and J_n(-x) = (-1)^n J_n(x).
    Real sign = 1;
    if (n < 0) {
        n = -n;
        if (n % 2) sign = -sign;
    }
    if (x < 0) {
        x = -x;
        if (n % 2) sign = -sign;
    }
    if (x == Real(0)) return n == 0 ? sign : Real(0);

    const double ax = static_cast<double>(x);
    int start = static_cast<int>(std::max<double>(n, ax) + 40.0 + 12.0 * std::cbrt(ax));
    start += start % 2;  // even, so the normalisation sum ends on J_0

    constexpr Real kHuge = Real(1e250);
    const Real two_over_x = Real(2) / x;
    Real above = 0;     // J_{m+1}
    Real current = Real(1e-300);  // J_m, arbitrary seed
    Real norm = 0;
    Real wanted = 0;
    for (int m = start; m > 0; --m) {
        const Real below = Real(m) * two_over_x * current - above;  // J_{m-1}
        above = current;
        current = below;
        if (abs(current) > kHuge) {
            current /= kHuge;
            above /= kHuge;
            norm /= kHuge;
            wanted /= kHuge;
        }
        const int order = m - 1;
        if (order > 0 && order % 2 == 0) norm += 2 * current;
        if (order == n) wanted = current;
    }
    norm += current;  // J_0
    return sign * wanted / norm;
}

/// First positive zero of J_0, by bisection on bessel_jn to 1e-12.
double bessel_j0_first_zero();

}  // namespace gemsim
