#pragma once

/// Sphere-valued boundary data on the (-L, L)^2 window, with base point
/// p = e3 and tangent direction q = e1.
///
///   constant       f = p
///   geodesic_cap   f = exp_p(amplitude * beta(|x'| / radius) q), beta a C-inf bump with beta(0) = 1
///   step_geodesic  f = exp_p(amplitude q) on {0 <= x1 < L/2, |x2| < L/2}, p elsewhere;
///                  with full = 1, exp_p(+-amplitude/2 q) on {x1 >= 0} / {x1 < 0}
///   log_spiral     f = cos(t) p + sin(t) q, t = lambda log(|x'| / R) chi(|x'|), R = L/2,
///                  chi a smooth cutoff from 1 at R/2 to 0 at R; f(0) = p

#include <map>
#include <string>
#include <vector>

#include "wharm/halfspace.hpp"

namespace wharm {

using GeneratorParams = std::map<std::string, double>;

const std::vector<std::string>& generator_names();
// Recognised parameters with their defaults.
GeneratorParams generator_defaults(const std::string& name);

// Throws UnknownGenerator, AmplitudeOutOfRange (cap amplitude >= pi) or
// InvalidArgument for parameters the generator does not take.
BoundaryData generate_boundary_data(const std::string& name, const GeneratorParams& params, int n,
                                    double L);

// exp(1 - 1/(1 - t^2)) on |t| < 1, zero outside.
double bump(double t);

}  // namespace wharm
