#pragma once

#include "oracles.hpp"
#include "pxcald/profiles.hpp"

namespace fixture {

inline pxcald::ExponentProfile exponent(const oracle::Raw& r) { return {r.breaks, r.values}; }
inline pxcald::ConductivityProfile conductivity(const oracle::Raw& r) { return {r.breaks, r.values}; }
inline pxcald::CommonGrid grid(const oracle::Raw& p, const oracle::Raw& gamma) {
    return pxcald::merge_grids(exponent(p), conductivity(gamma));
}
inline pxcald::CommonGrid constant(double p, double gamma, double a = 0.0, double b = 1.0) {
    return grid({{a, b}, {p}}, {{a, b}, {gamma}});
}

}  // namespace fixture
