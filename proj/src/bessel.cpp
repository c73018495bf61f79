#include "gemsim/bessel.hpp"

namespace gemsim {

double bessel_j0_first_zero()
{
    double lo = 2.0, hi = 3.0;  // J_0(2) > 0 > J_0(3)
    while (hi - lo > 1e-13) {
        const double mid = 0.5 * (lo + hi);
        if (bessel_jn(0, mid) > 0.0)
            lo = mid;
        else
            hi = mid;
    }
    return 0.5 * (lo + hi);
}

}  // namespace gemsim
