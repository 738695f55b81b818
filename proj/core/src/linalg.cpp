#include "renyi/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "renyi/errors.hpp"

namespace renyi {

namespace {

void jacobi(std::vector<cplx>& a, std::vector<cplx>& v, std::size_t n) {
    auto at = [n](std::vector<cplx>& m, std::size_t r, std::size_t c) -> cplx& { return m[r * n + c]; };
    double total = 0.0;
    for (const auto& z : a) total += std::norm(z);
    if (total == 0.0) return;

    for (int sweep = 0; sweep < 100; ++sweep) {
        double off = 0.0;
        for (std::size_t p = 0; p < n; ++p)
            for (std::size_t q = p + 1; q < n; ++q) off += std::norm(at(a, p, q));
        if (off <= 1e-32 * total) return;

        for (std::size_t p = 0; p < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                const cplx apq = at(a, p, q);
                const double r = std::abs(apq);
                if (r == 0.0) continue;
                const double app = at(a, p, p).real();
                const double aqq = at(a, q, q).real();
                const cplx phase = apq / r;  // e^{i phi}
                const double zeta = (aqq - app) / (2.0 * r);
                const double t = (zeta >= 0 ? 1.0 : -1.0) / (std::abs(zeta) + std::sqrt(1.0 + zeta * zeta));
                const double c = 1.0 / std::sqrt(1.0 + t * t);
                const double s = t * c;
                // U restricted to (p,q): [[c, s], [-s e^{-i phi}, c e^{-i phi}]]
                const cplx upp = c, upq = s;
                const cplx uqp = -s * std::conj(phase), uqq = c * std::conj(phase);
                for (std::size_t k = 0; k < n; ++k) {
                    const cplx akp = at(a, k, p), akq = at(a, k, q);
                    at(a, k, p) = akp * upp + akq * uqp;
                    at(a, k, q) = akp * upq + akq * uqq;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    const cplx apk = at(a, p, k), aqk = at(a, q, k);
                    at(a, p, k) = std::conj(upp) * apk + std::conj(uqp) * aqk;
                    at(a, q, k) = std::conj(upq) * apk + std::conj(uqq) * aqk;
                }
                at(a, p, q) = at(a, q, p) = 0.0;
                at(a, p, p) = at(a, p, p).real();
                at(a, q, q) = at(a, q, q).real();
                for (std::size_t k = 0; k < n; ++k) {
                    const cplx vkp = at(v, k, p), vkq = at(v, k, q);
                    at(v, k, p) = vkp * upp + vkq * uqp;
                    at(v, k, q) = vkp * upq + vkq * uqq;
                }
            }
        }
    }
    fail(ErrorCode::NoConvergence, "Jacobi eigensolver did not converge in 100 sweeps");
}

EigenDecomposition eig_unchecked(const ComplexMatrix& m) {
    const std::size_t n = m.rows();
    std::vector<cplx> a = m.hermitian_part().data();
    std::vector<cplx> v = ComplexMatrix::identity(n).data();
    jacobi(a, v, n);

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t i, std::size_t j) { return a[i * n + i].real() > a[j * n + j].real(); });
    EigenDecomposition out{std::vector<double>(n), ComplexMatrix(n, n)};
    for (std::size_t k = 0; k < n; ++k) {
        const std::size_t src = order[k];
        out.values[k] = a[src * n + src].real();
        for (std::size_t r = 0; r < n; ++r) out.vectors(r, k) = v[r * n + src];
    }
    return out;
}

void check_hermitian(const ComplexMatrix& m) {
    require(m.square(), ErrorCode::BadShape, "operator must be square");
    for (const auto& z : m.data())
        require(std::isfinite(z.real()) && std::isfinite(z.imag()), ErrorCode::BadInput, "non-finite matrix entry");
    const double scale = std::max(1.0, m.max_abs());
    require(m.is_hermitian(kHermitianTol * scale), ErrorCode::NotHermitian, "matrix is not Hermitian");
}

}  // namespace

EigenDecomposition hermitian_eig(const ComplexMatrix& m) {
    check_hermitian(m);
    return eig_unchecked(m);
}

ComplexMatrix from_spectrum(const EigenDecomposition& eig, const std::vector<double>& mapped) {
    const std::size_t n = eig.values.size();
    ComplexMatrix out(n, n);
    for (std::size_t k = 0; k < n; ++k) {
        const double w = mapped[k];
        if (w == 0.0) continue;
        for (std::size_t i = 0; i < n; ++i) {
            const cplx vik = eig.vectors(i, k) * w;
            for (std::size_t j = 0; j < n; ++j) out(i, j) += vik * std::conj(eig.vectors(j, k));
        }
    }
    return out;
}

ComplexMatrix matrix_function(const ComplexMatrix& m, const std::function<double(double)>& f) {
    const auto eig = hermitian_eig(m);
    std::vector<double> mapped(eig.values.size());
    std::transform(eig.values.begin(), eig.values.end(), mapped.begin(), f);
    return from_spectrum(eig, mapped);
}

double support_threshold(const std::vector<double>& eigenvalues) {
    double top = 0.0;
    for (double x : eigenvalues) top = std::max(top, x);
    return kSupportCutoff * top;
}

EigenDecomposition psd_eig(const ComplexMatrix& m) {
    auto eig = hermitian_eig(m);
    const double scale = std::max(1.0, eig.values.empty() ? 0.0 : std::abs(eig.values.front()));
    for (double& x : eig.values) {
        require(x >= -kPsdTol * scale, ErrorCode::NotPSD, "matrix has a significantly negative eigenvalue");
        if (x < 0.0) x = 0.0;
    }
    return eig;
}

std::vector<double> psd_spectrum(const ComplexMatrix& m) { return psd_eig(m).values; }

ComplexMatrix matrix_power(const ComplexMatrix& m, double t) {
    const auto eig = psd_eig(m);
    const double cut = support_threshold(eig.values);
    std::vector<double> mapped(eig.values.size(), 0.0);
    for (std::size_t k = 0; k < mapped.size(); ++k) {
        const double x = eig.values[k];
        if (x > cut && x > 0.0) mapped[k] = (t == 0.0) ? 1.0 : std::pow(x, t);
    }
    return from_spectrum(eig, mapped);
}

ComplexMatrix support_projector(const ComplexMatrix& m) { return matrix_power(m, 0.0); }

double min_support_eigenvalue(const ComplexMatrix& m) {
    const auto vals = psd_spectrum(m);
    const double cut = support_threshold(vals);
    double best = 0.0;
    for (double x : vals)
        if (x > cut && x > 0.0) best = (best == 0.0) ? x : std::min(best, x);
    return best;
}

double trace_norm(const ComplexMatrix& hermitian) {
    const auto eig = hermitian_eig(hermitian);
    double s = 0.0;
    for (double x : eig.values) s += std::abs(x);
    return s;
}

}  // namespace renyi
