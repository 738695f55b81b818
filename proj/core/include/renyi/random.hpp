#pragma once

#include <cstdint>
#include <random>
#include <variant>
#include <vector>

#include "renyi/state.hpp"

namespace renyi {

class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}
    // Independent stream for instance `index` of a run seeded with `seed`.
    static Rng derive(std::uint64_t seed, std::uint64_t index);

    double uniform() { return std::uniform_real_distribution<double>(0.0, 1.0)(engine_); }
    double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(engine_); }
    double normal() { return std::normal_distribution<double>(0.0, 1.0)(engine_); }
    std::size_t index(std::size_t n) { return std::uniform_int_distribution<std::size_t>(0, n - 1)(engine_); }
    std::uint64_t next() { return engine_(); }

private:
    std::mt19937_64 engine_;
};

std::vector<cplx> random_vector(std::size_t n, Rng& rng);
// Ginibre construction: G G^dagger / tr with G of size dim x rank.
DensityOperator random_density(const Dims& dims, std::size_t rank, Rng& rng, std::vector<std::string> labels = {});
DensityOperator random_pure(const Dims& dims, Rng& rng, std::vector<std::string> labels = {});
// Dirichlet(1) sample.
std::vector<double> random_distribution(std::size_t n, Rng& rng);
// Columns orthonormal, shape dout x din.
ComplexMatrix random_isometry(std::size_t din, std::size_t dout, Rng& rng);
ComplexMatrix random_unitary(std::size_t d, Rng& rng);
ComplexMatrix random_hermitian(std::size_t d, Rng& rng);
// Conditionals of the given rank (0 = full).
CqState random_cq(const std::vector<ClassicalRegister>& regs, const Dims& qdims, const std::vector<std::string>& qlabels,
                  Rng& rng, std::size_t rank = 0);

enum class InstanceKind { Density, Cq, Isometry, Distribution };

struct InstanceShape {
    Dims dims;                                // quantum dims (density, cq) or {din, dout} (isometry) or {n}
    std::size_t rank = 0;                     // 0 = full rank
    std::vector<ClassicalRegister> registers;  // cq only
};

using Instance = std::variant<DensityOperator, CqState, ComplexMatrix, std::vector<double>>;

Instance random_instances(InstanceKind kind, const InstanceShape& shape, std::uint64_t seed);

}  // namespace renyi
