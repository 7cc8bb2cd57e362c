#include "ws3r/polyroots.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <complex>

namespace ws3r {

double polynomial_eval(const std::vector<double>& c, double x) {
    double acc = 0.0;
    for (auto it = c.rbegin(); it != c.rend(); ++it) acc = acc * x + *it;
    return acc;
}

static double polynomial_deriv_eval(const std::vector<double>& c, double x) {
    double acc = 0.0;
    for (std::size_t i = c.size(); i-- > 1;) acc = acc * x + c[i] * static_cast<double>(i);
    return acc;
}

std::vector<double> polynomial_real_roots(const std::vector<double>& c) {
    // drop numerically-zero leading coefficients (relative to the largest one)
    double cmax = 0.0;
    for (double v : c) cmax = std::max(cmax, std::abs(v));
    if (cmax == 0.0) return {};  // identically zero: no isolated roots to report

    std::size_t deg = c.size() - 1;
    while (deg > 0 && std::abs(c[deg]) <= 1e-13 * cmax) --deg;
    if (deg == 0) return {};

    if (deg == 1) {
        return {-c[0] / c[1]};
    }

    Eigen::MatrixXd companion = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(deg),
                                                      static_cast<Eigen::Index>(deg));
    for (std::size_t i = 0; i < deg; ++i)
        companion(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(deg - 1)) =
            -c[i] / c[deg];
    for (std::size_t i = 1; i < deg; ++i)
        companion(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i - 1)) = 1.0;

    Eigen::EigenSolver<Eigen::MatrixXd> es(companion, /*computeEigenvectors=*/false);

    // scale for the "is this eigenvalue real" test
    double root_scale = 1.0;
    for (std::size_t i = 0; i < deg; ++i)
        root_scale = std::max(root_scale, std::abs(c[i] / c[deg]));

    std::vector<double> roots;
    for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) {
        std::complex<double> z = es.eigenvalues()(i);
        if (std::abs(z.imag()) > 1e-8 * std::max(1.0, std::abs(z.real()))) continue;
        double x = z.real();
        // Newton polish; bail out if it diverges (near-multiple roots)
        for (int it = 0; it < 8; ++it) {
            double f = polynomial_eval(c, x);
            double df = polynomial_deriv_eval(c, x);
            if (df == 0.0) break;
            double dx = f / df;
            if (!std::isfinite(dx) || std::abs(dx) > 0.5 * (1.0 + std::abs(x))) break;
            x -= dx;
            if (std::abs(dx) < 1e-15 * (1.0 + std::abs(x))) break;
        }
        (void)root_scale;
        roots.push_back(x);
    }
    std::sort(roots.begin(), roots.end());
    return roots;
}

double quartic_discriminant(const std::vector<double>& c) {
    // ascending c0..c4; standard closed form
    double e = c[0], d = c[1], cc = c[2], b = c[3], a = c[4];
    double a2 = a * a, b2 = b * b, c2 = cc * cc, d2 = d * d, e2 = e * e;
    return 256.0 * a2 * a * e2 * e - 192.0 * a2 * b * d * e2 - 128.0 * a2 * c2 * e2 +
           144.0 * a2 * cc * d2 * e - 27.0 * a2 * d2 * d2 + 144.0 * a * b2 * cc * e2 -
           6.0 * a * b2 * d2 * e - 80.0 * a * b * c2 * cc * e + 18.0 * a * b * cc * d2 * d +
           16.0 * a * c2 * c2 * e - 4.0 * a * c2 * cc * d2 - 27.0 * b2 * b2 * e2 +
           18.0 * b2 * b * cc * d * e - 4.0 * b2 * b * d2 * d - 4.0 * b2 * c2 * cc * e +
           b2 * c2 * d2;
}

} // namespace ws3r
