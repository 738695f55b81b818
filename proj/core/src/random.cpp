#include "renyi/random.hpp"

#include <cmath>

#include "renyi/errors.hpp"

namespace renyi {

namespace {

std::uint64_t splitmix(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

std::vector<std::string> default_labels(const Dims& dims) {
    std::vector<std::string> l;
    for (std::size_t k = 0; k < dims.size(); ++k) l.push_back("Q" + std::to_string(k));
    return l;
}

}  // namespace

Rng Rng::derive(std::uint64_t seed, std::uint64_t index) { return Rng(splitmix(splitmix(seed) ^ splitmix(index + 1))); }

std::vector<cplx> random_vector(std::size_t n, Rng& rng) {
    std::vector<cplx> v(n);
    for (auto& z : v) z = cplx(rng.normal(), rng.normal());
    return v;
}

DensityOperator random_density(const Dims& dims, std::size_t rank, Rng& rng, std::vector<std::string> labels) {
    const std::size_t n = product(dims);
    require(n > 0, ErrorCode::BadShape, "empty dims");
    if (rank == 0 || rank > n) rank = n;
    ComplexMatrix g(n, rank);
    for (auto& z : g.data()) z = cplx(rng.normal(), rng.normal());
    auto m = (g * g.adjoint()).hermitian_part();
    m *= 1.0 / m.real_trace();
    if (labels.empty()) labels = default_labels(dims);
    return {std::move(m), dims, std::move(labels)};
}

DensityOperator random_pure(const Dims& dims, Rng& rng, std::vector<std::string> labels) {
    return random_density(dims, 1, rng, std::move(labels));
}

std::vector<double> random_distribution(std::size_t n, Rng& rng) {
    require(n > 0, ErrorCode::BadShape, "empty alphabet");
    std::vector<double> p(n);
    double s = 0.0;
    for (auto& x : p) {
        x = -std::log(1.0 - rng.uniform());
        s += x;
    }
    for (auto& x : p) x /= s;
    return p;
}

ComplexMatrix random_isometry(std::size_t din, std::size_t dout, Rng& rng) {
    require(din >= 1 && dout >= din, ErrorCode::BadShape, "isometry needs dout >= din >= 1");
    ComplexMatrix v(dout, din);
    for (std::size_t c = 0; c < din; ++c) {
        std::vector<cplx> col = random_vector(dout, rng);
        for (int pass = 0; pass < 2; ++pass)
            for (std::size_t k = 0; k < c; ++k) {
                cplx ip = 0.0;
                for (std::size_t r = 0; r < dout; ++r) ip += std::conj(v(r, k)) * col[r];
                for (std::size_t r = 0; r < dout; ++r) col[r] -= ip * v(r, k);
            }
        double nrm = 0.0;
        for (auto& z : col) nrm += std::norm(z);
        nrm = std::sqrt(nrm);
        for (std::size_t r = 0; r < dout; ++r) v(r, c) = col[r] / nrm;
    }
    return v;
}

ComplexMatrix random_unitary(std::size_t d, Rng& rng) { return random_isometry(d, d, rng); }

ComplexMatrix random_hermitian(std::size_t d, Rng& rng) {
    ComplexMatrix g(d, d);
    for (auto& z : g.data()) z = cplx(rng.normal(), rng.normal());
    return g.hermitian_part();
}

CqState random_cq(const std::vector<ClassicalRegister>& regs, const Dims& qdims, const std::vector<std::string>& qlabels,
                  Rng& rng, std::size_t rank) {
    const std::size_t n = outcome_count(regs);
    auto w = random_distribution(n, rng);
    std::vector<DensityOperator> conds;
    for (std::size_t x = 0; x < n; ++x) conds.push_back(random_density(qdims, rank, rng, qlabels));
    return {regs, w, conds};
}

Instance random_instances(InstanceKind kind, const InstanceShape& shape, std::uint64_t seed) {
    Rng rng(seed);
    for (auto d : shape.dims) require(d >= 1, ErrorCode::BadShape, "dimensions must be positive");
    switch (kind) {
        case InstanceKind::Density:
            require(!shape.dims.empty(), ErrorCode::BadShape, "density needs dims");
            return random_density(shape.dims, shape.rank, rng);
        case InstanceKind::Cq:
            require(!shape.registers.empty(), ErrorCode::BadShape, "cq instance needs classical registers");
            return random_cq(shape.registers, shape.dims, default_labels(shape.dims), rng, shape.rank);
        case InstanceKind::Isometry:
            require(shape.dims.size() == 2, ErrorCode::BadShape, "isometry shape is {din, dout}");
            return random_isometry(shape.dims[0], shape.dims[1], rng);
        case InstanceKind::Distribution:
            require(shape.dims.size() == 1, ErrorCode::BadShape, "distribution shape is {n}");
            return random_distribution(shape.dims[0], rng);
    }
    fail(ErrorCode::BadShape, "unknown instance kind");
}

}  // namespace renyi
