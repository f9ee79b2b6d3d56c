#ifndef NPSPECTRA_TYPES_HPP
#define NPSPECTRA_TYPES_HPP

#include <complex>
#include <stdexcept>
#include <string>
#include <vector>

namespace npspectra {

using Complex = std::complex<double>;

// cross(a,b) > 0 iff b points to the left of a.
inline double cross(Complex a, Complex b) {
  return a.real() * b.imag() - a.imag() * b.real();
}
inline double dot(Complex a, Complex b) {
  return a.real() * b.real() + a.imag() * b.imag();
}

// Error taxonomy. The CLI maps InputError/GeometryError to exit code 2 and
// NumericError/AccuracyError to exit code 3.
struct InputError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct GeometryError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct NumericError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct AccuracyError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

using Warnings = std::vector<std::string>;

}  // namespace npspectra

#endif
