#ifndef NPSPECTRA_MOBIUS_HPP
#define NPSPECTRA_MOBIUS_HPP

#include "npspectra/types.hpp"

namespace npspectra {

// Fractional linear map z -> (a z + b) / (c z + d), ad - bc != 0.
struct MobiusMap {
  Complex a{1.0}, b{0.0}, c{0.0}, d{1.0};

  Complex operator()(Complex z) const { return (a * z + b) / (c * z + d); }
  Complex derivative(Complex z) const {
    const Complex den = c * z + d;
    return (a * d - b * c) / (den * den);
  }
  // L''/L' = -2c/(cz+d); enters the curvature of mapped edges.
  Complex log_deriv2(Complex z) const { return -2.0 * c / (c * z + d); }
  Complex pole() const;  // throws InputError when c == 0
  bool has_pole() const { return c != Complex(0.0); }

  MobiusMap inverse() const;
  // (f.compose(g))(z) = f(g(z))
  MobiusMap compose(const MobiusMap& g) const;

  static MobiusMap identity() { return {}; }
  static MobiusMap affine(Complex scale, Complex shift) { return {scale, shift, 0.0, 1.0}; }
  // z -> 1/(z - z0)
  static MobiusMap inversion_about(Complex z0) { return {0.0, 1.0, 1.0, -z0}; }
};

}  // namespace npspectra

#endif
