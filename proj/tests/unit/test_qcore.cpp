#include <Eigen/Dense>
#include <cmath>

#include "doctest.h"
#include "renyi/errors.hpp"
#include "renyi/linalg.hpp"
#include "renyi/random.hpp"
#include "renyi/state.hpp"

using namespace renyi;

namespace {

Eigen::MatrixXcd to_eigen(const ComplexMatrix& m) {
    Eigen::MatrixXcd e(m.rows(), m.cols());
    for (std::size_t i = 0; i < m.rows(); ++i)
        for (std::size_t j = 0; j < m.cols(); ++j) e(i, j) = m(i, j);
    return e;
}

double diff(const ComplexMatrix& a, const ComplexMatrix& b) { return (a - b).max_abs(); }

ComplexMatrix random_psd(std::size_t d, Rng& rng) {
    auto r = random_density({d}, 0, rng);
    return r.matrix;
}

const std::vector<cplx> kBell = {M_SQRT1_2, 0.0, 0.0, M_SQRT1_2};

}  // namespace

TEST_CASE("eigendecomposition of trivial matrices") {
    auto id = hermitian_eig(ComplexMatrix::identity(2));
    CHECK(id.values[0] == doctest::Approx(1.0));
    CHECK(id.values[1] == doctest::Approx(1.0));
    CHECK(diff(id.vectors, ComplexMatrix::identity(2)) < 1e-15);

    auto d = hermitian_eig(ComplexMatrix::diagonal({1.0, 3.0}));
    CHECK(d.values[0] == doctest::Approx(3.0));
    CHECK(d.values[1] == doctest::Approx(1.0));
}

TEST_CASE("eigendecomposition reconstructs and matches an independent solver") {
    Rng rng(11);
    for (std::size_t d : {2u, 3u, 4u, 7u, 16u}) {
        auto m = random_hermitian(d, rng);
        auto eig = hermitian_eig(m);
        auto rec = from_spectrum(eig, eig.values);
        CHECK(diff(rec, m) < 1e-9);
        auto vtv = eig.vectors.adjoint() * eig.vectors;
        CHECK(diff(vtv, ComplexMatrix::identity(d)) < 1e-9);

        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> oracle(to_eigen(m));
        auto ev = oracle.eigenvalues();
        for (std::size_t k = 0; k < d; ++k) CHECK(eig.values[k] == doctest::Approx(ev(d - 1 - k)).epsilon(1e-10));
    }
}

TEST_CASE("degenerate spectra keep an orthonormal basis") {
    Rng rng(5);
    auto u = random_unitary(6, rng);
    auto m = sandwich(u, ComplexMatrix::diagonal({2, 2, 2, 0.5, 0.5, 0}));
    auto eig = hermitian_eig(m);
    CHECK(diff(eig.vectors.adjoint() * eig.vectors, ComplexMatrix::identity(6)) < 1e-10);
    CHECK(diff(from_spectrum(eig, eig.values), m) < 1e-10);
}

TEST_CASE("non-Hermitian input is rejected") {
    ComplexMatrix m{{1.0, 2.0}, {0.0, 1.0}};
    CHECK_THROWS_AS(hermitian_eig(m), Error);
    try {
        hermitian_eig(m);
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::NotHermitian);
    }
}

TEST_CASE("matrix powers") {
    CHECK(diff(matrix_power(ComplexMatrix::identity(3), 0.5), ComplexMatrix::identity(3)) < 1e-14);
    auto inv = matrix_power(ComplexMatrix::diagonal({4.0, 0.0}), -0.5);
    CHECK(diff(inv, ComplexMatrix::diagonal({0.5, 0.0})) < 1e-14);

    Rng rng(3);
    for (std::size_t d = 1; d <= 16; d += 3) {
        auto m = random_psd(d, rng);
        auto r = matrix_power(m, 1.0 / 3.0);
        CHECK(diff(r * r * r, m) < 1e-9);
    }
    CHECK_THROWS_AS(matrix_power(ComplexMatrix::diagonal({1.0, -0.1}), 0.5), Error);
    // noise-level negative eigenvalues are clipped
    CHECK(diff(matrix_power(ComplexMatrix::diagonal({1.0, -1e-12}), 0.5), ComplexMatrix::diagonal({1.0, 0.0})) < 1e-14);
}

TEST_CASE("tensor products and partial traces") {
    auto half = maximally_mixed({2});
    auto t = tensor(half, half);
    CHECK(t.dims == Dims{2, 2});
    CHECK(diff(t.matrix, ComplexMatrix::identity(4) * cplx(0.25)) < 1e-15);

    DensityOperator zero(ComplexMatrix::basis_projector(2, 0), {2});
    DensityOperator one(ComplexMatrix::basis_projector(2, 1), {2});
    CHECK(diff(tensor(zero, one).matrix, ComplexMatrix::basis_projector(4, 1)) < 1e-15);

    Rng rng(8);
    auto rho = random_density({3}, 0, rng);
    auto sigma = random_density({2, 2}, 2, rng);
    auto joint = tensor(rho, sigma);
    CHECK(diff(partial_trace(joint, {0}).matrix, rho.matrix) < 1e-12);
    CHECK(diff(partial_trace(joint, {1, 2}).matrix, sigma.matrix) < 1e-12);
    CHECK(diff(partial_trace(joint, {2, 1}).matrix, permute(sigma, {1, 0}).matrix) < 1e-12);
    CHECK(partial_trace(joint, {}).matrix(0, 0).real() == doctest::Approx(1.0));
    CHECK_THROWS_AS(partial_trace(joint, {3}), Error);

    auto bell = pure_state(kBell, {2, 2});
    CHECK(diff(partial_trace(bell, {0}).matrix, half.matrix) < 1e-15);
}

TEST_CASE("partial trace is linear and trace preserving") {
    Rng rng(21);
    for (int i = 0; i < 20; ++i) {
        auto a = random_density({2, 3, 2}, 0, rng);
        auto b = random_density({2, 3, 2}, 2, rng);
        const double w = rng.uniform();
        DensityOperator mix(a.matrix * cplx(w) + b.matrix * cplx(1 - w), a.dims);
        auto lhs = partial_trace(mix, {2, 0}).matrix;
        auto rhs = partial_trace(a, {2, 0}).matrix * cplx(w) + partial_trace(b, {2, 0}).matrix * cplx(1 - w);
        CHECK(diff(lhs, rhs) < 1e-11);
        CHECK(partial_trace(mix, {1}).trace() == doctest::Approx(1.0).epsilon(1e-11));
    }
}

TEST_CASE("embedding matches kron with identities") {
    Rng rng(4);
    auto op = random_hermitian(3, rng);
    auto a = embed(op, {1}, {2, 3, 2});
    auto b = kron(kron(ComplexMatrix::identity(2), op), ComplexMatrix::identity(2));
    CHECK(diff(a, b) < 1e-15);
}

TEST_CASE("conditional operator") {
    Rng rng(9);
    auto ra = random_density({2}, 0, rng);
    auto rb = random_density({3}, 2, rng);
    auto prod = tensor(ra, rb);
    auto c = conditional_operator(prod, {1});
    CHECK(diff(c, kron(ra.matrix, support_projector(rb.matrix))) < 1e-9);

    auto bell = pure_state(kBell, {2, 2});
    CHECK(diff(conditional_operator(bell, {1}), bell.matrix * cplx(2.0)) < 1e-12);

    for (int i = 0; i < 10; ++i) {
        auto rho = random_density({2, 3}, 0, rng);
        auto cond = conditional_operator(rho, {1});
        auto half = embed(matrix_power(partial_trace(rho, {1}).matrix, 0.5), {1}, rho.dims);
        CHECK(diff(half * cond * half, rho.matrix) < 1e-10);
    }
}

TEST_CASE("purification") {
    DensityOperator zero(ComplexMatrix::basis_projector(2, 0), {2}, {"A"});
    auto p = purify(zero);
    CHECK(diff(p.matrix, ComplexMatrix::basis_projector(4, 0)) < 1e-14);

    auto half = maximally_mixed({2}, {"A"});
    auto bell = purify(half);
    CHECK(diff(partial_trace(bell, {0}).matrix, half.matrix) < 1e-12);
    CHECK(diff(partial_trace(bell, {1}).matrix, half.matrix) < 1e-12);

    Rng rng(12);
    for (int i = 0; i < 10; ++i) {
        auto rho = random_density({2, 2}, 3, rng);
        auto psi = purify(rho);
        auto spec = psd_spectrum(psi.matrix);
        CHECK(spec[0] == doctest::Approx(1.0).epsilon(1e-10));
        CHECK(std::abs(spec[1]) < 1e-10);
        CHECK(diff(partial_trace(psi, {0, 1}).matrix, rho.matrix) < 1e-10);
    }
}

TEST_CASE("trace distance") {
    Rng rng(13);
    auto rho = random_density({3}, 0, rng);
    CHECK(trace_distance(rho, rho) < 1e-14);
    DensityOperator zero(ComplexMatrix::basis_projector(2, 0), {2});
    DensityOperator one(ComplexMatrix::basis_projector(2, 1), {2});
    CHECK(trace_distance(zero, one) == doctest::Approx(1.0));
    CHECK_THROWS_AS(trace_distance(zero, rho), Error);
    for (int i = 0; i < 50; ++i) {
        auto a = random_density({3}, 0, rng), b = random_density({3}, 1, rng), c = random_density({3}, 2, rng);
        CHECK(trace_distance(a, c) <= trace_distance(a, b) + trace_distance(b, c) + 1e-12);
        CHECK(trace_distance(a, b) == doctest::Approx(trace_distance(b, a)).epsilon(1e-12));
    }
}

TEST_CASE("random instances are valid and deterministic") {
    InstanceShape shape{{2, 2}, 2, {}};
    auto a = std::get<DensityOperator>(random_instances(InstanceKind::Density, shape, 77));
    auto b = std::get<DensityOperator>(random_instances(InstanceKind::Density, shape, 77));
    CHECK(diff(a.matrix, b.matrix) == 0.0);
    auto spec = psd_spectrum(a.matrix);
    CHECK(spec[2] < 1e-12);

    Rng rng(1);
    for (int i = 0; i < 1000; ++i) {
        const std::size_t d = 1 + rng.index(4);
        random_density({d, 2}, rng.index(3), rng).validate();
    }
    auto cq = std::get<CqState>(random_instances(InstanceKind::Cq, {{2}, 0, {{"X", 3}}}, 5));
    cq.validate();
    auto v = std::get<ComplexMatrix>(random_instances(InstanceKind::Isometry, {{2, 5}, 0, {}}, 5));
    CHECK(diff(v.adjoint() * v, ComplexMatrix::identity(2)) < 1e-12);
    CHECK_THROWS_AS(random_instances(InstanceKind::Isometry, {{5, 2}, 0, {}}, 5), Error);
    CHECK_THROWS_AS(random_instances(InstanceKind::Distribution, {{0}, 0, {}}, 5), Error);
}

TEST_CASE("cq marginals, splits and dense embedding") {
    Rng rng(14);
    auto rho = random_cq({{"X", 2}, {"Y", 3}}, {2}, {"Q"}, rng);
    auto dense = to_dense(rho);
    dense.validate();
    auto mx = marginal(rho, {"X", "Q"});
    auto dense_mx = partial_trace(dense, {0, 2});
    CHECK(diff(to_dense(mx).matrix, dense_mx.matrix) < 1e-12);

    auto branches = split(rho, {"Y"});
    ComplexMatrix acc(4, 4);
    for (const auto& br : branches) acc += to_dense(br.state).matrix * cplx(br.probability);
    CHECK(diff(acc, partial_trace(dense, {0, 2}).matrix) < 1e-12);
    CHECK_THROWS_AS(split(rho, {"Q"}), Error);
    CHECK_THROWS_AS(marginal(rho, {"Z"}), Error);
}
