#include "latebind/rng.hpp"

#include <cmath>

namespace latebind {

double Rng::next_normal() {
    const double u1 = next_unit();
    const double u2 = next_unit();
    return std::sqrt(-2.0 * std::log(u1)) *
           std::cos(2.0 * 3.14159265358979323846 * u2);
}

} // namespace latebind
