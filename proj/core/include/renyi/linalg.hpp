#pragma once

#include <functional>
#include <vector>

#include "renyi/matrix.hpp"

namespace renyi {

inline constexpr double kHermitianTol = 1e-10;
// Eigenvalues above -kPsdTol are treated as numerical noise and clipped to zero.
inline constexpr double kPsdTol = 1e-8;
// Eigenvalues below kSupportCutoff * lambda_max are outside the numerical support.
inline constexpr double kSupportCutoff = 1e-12;

struct EigenDecomposition {
    std::vector<double> values;  // descending
    ComplexMatrix vectors;       // columns are eigenvectors
};

// Cyclic complex Jacobi. Throws NotHermitian if m is not Hermitian within
// kHermitianTol relative to its largest entry.
EigenDecomposition hermitian_eig(const ComplexMatrix& m);

// V f(diag) V^dagger for a Hermitian matrix.
ComplexMatrix matrix_function(const ComplexMatrix& m, const std::function<double(double)>& f);
ComplexMatrix from_spectrum(const EigenDecomposition& eig, const std::vector<double>& mapped);

// Spectral power of a PSD matrix with 0^t = 0; negative t acts on the support.
ComplexMatrix matrix_power(const ComplexMatrix& m, double t);

// Eigenvalues of a PSD matrix with noise clipped; throws NotPSD below -kPsdTol.
std::vector<double> psd_spectrum(const ComplexMatrix& m);
EigenDecomposition psd_eig(const ComplexMatrix& m);

double support_threshold(const std::vector<double>& eigenvalues);
ComplexMatrix support_projector(const ComplexMatrix& m);
// Smallest eigenvalue inside the numerical support.
double min_support_eigenvalue(const ComplexMatrix& m);

// sum |lambda_i|
double trace_norm(const ComplexMatrix& hermitian);

}  // namespace renyi
