#pragma once
#include <vector>

namespace ws3r {

// Real roots of c[0] + c[1] x + ... + c[n] x^n via the companion matrix of
// the deflated monic polynomial, Newton-polished.  Multiple roots appear
// once per distinct polished value; the caller clusters if needed.
std::vector<double> polynomial_real_roots(const std::vector<double>& c);

double polynomial_eval(const std::vector<double>& c, double x);

// discriminant of a quartic c0..c4 (ascending); 0 iff a repeated root exists
double quartic_discriminant(const std::vector<double>& c);

} // namespace ws3r
