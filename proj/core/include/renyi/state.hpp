#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "renyi/matrix.hpp"

namespace renyi {

// Subsystem layout: for dims {d0, d1, ..., dk} the basis index is
// i0*(d1*...*dk) + i1*(d2*...*dk) + ... + ik, i.e. the matrix of a product
// state is kron(rho0, kron(rho1, ...)). Subsystem 0 is the most significant digit.
using Dims = std::vector<std::size_t>;

std::size_t product(const Dims& dims);
std::vector<std::size_t> digits_of(std::size_t index, const Dims& dims);
std::size_t index_of(const std::vector<std::size_t>& digits, const Dims& dims);

struct DensityOperator {
    ComplexMatrix matrix;
    Dims dims;
    std::vector<std::string> labels;
    bool subnormalized = false;

    DensityOperator() = default;
    DensityOperator(ComplexMatrix m, Dims d, std::vector<std::string> l = {}, bool sub = false);

    std::size_t dim() const { return matrix.rows(); }
    std::size_t subsystem(const std::string& label) const;
    double trace() const { return matrix.real_trace(); }
    // Throws NotHermitian / NotPSD / BadShape when invariants fail.
    void validate() const;
};

DensityOperator maximally_mixed(const Dims& dims, std::vector<std::string> labels = {});
DensityOperator pure_state(const std::vector<cplx>& psi, Dims dims, std::vector<std::string> labels = {});

DensityOperator tensor(const DensityOperator& a, const DensityOperator& b);
// Keeps the listed subsystems, in the listed order.
DensityOperator partial_trace(const DensityOperator& rho, const std::vector<std::size_t>& keep);
DensityOperator permute(const DensityOperator& rho, const std::vector<std::size_t>& order);
// Operator acting as `op` on `subsystems` (in that order) and as identity elsewhere.
ComplexMatrix embed(const ComplexMatrix& op, const std::vector<std::size_t>& subsystems, const Dims& dims);
// rho_B^{-1/2} rho rho_B^{-1/2} where B is the listed subsystems.
ComplexMatrix conditional_operator(const DensityOperator& rho, const std::vector<std::size_t>& conditioning);
// Pure state on (system, copy) with the copy appended as one extra subsystem.
// sum_k sqrt(l_k) |v_k>|k>, dropping eigenvalues below the support cutoff.
std::vector<cplx> purification_vector(const ComplexMatrix& rho);
DensityOperator purify(const DensityOperator& rho, const std::string& copy_label = "E");
double trace_distance(const DensityOperator& rho, const DensityOperator& tau);
double trace_distance(const ComplexMatrix& rho, const ComplexMatrix& tau);

struct ClassicalRegister {
    std::string label;
    std::size_t size = 1;
    bool operator==(const ClassicalRegister&) const = default;
};

std::size_t outcome_count(const std::vector<ClassicalRegister>& registers);

// sum_x p(x) |x><x| (x) rho^{|x}, x ranging over tuples of the classical
// registers flattened with the same digit order as quantum subsystems.
struct CqState {
    std::vector<ClassicalRegister> registers;
    std::vector<double> weights;
    std::vector<DensityOperator> conditionals;

    CqState() = default;
    CqState(std::vector<ClassicalRegister> regs, std::vector<double> w, std::vector<DensityOperator> conds);
    static CqState classical(std::vector<ClassicalRegister> regs, std::vector<double> w);

    std::size_t outcomes() const { return weights.size(); }
    const Dims& quantum_dims() const { return conditionals.front().dims; }
    const std::vector<std::string>& quantum_labels() const { return conditionals.front().labels; }
    std::size_t quantum_dim() const { return conditionals.front().dim(); }
    Dims classical_dims() const;
    bool has_classical(const std::string& label) const;
    bool has_quantum(const std::string& label) const;
    std::size_t classical_index(const std::string& label) const;
    std::size_t quantum_index(const std::string& label) const;
    std::vector<std::string> all_labels() const;
    void validate() const;
};

// Marginal on the listed registers; unknown labels throw BadPartition.
CqState marginal(const CqState& rho, const std::vector<std::string>& keep);

struct Branch {
    double probability;
    std::vector<std::size_t> outcome;  // digits of the conditioned registers
    CqState state;                    // normalized, conditioned registers removed
};
// Conditions on the listed classical registers. Branches with zero weight are dropped.
std::vector<Branch> split(const CqState& rho, const std::vector<std::string>& on);

// Dense embedding; classical registers come first as diagonal subsystems.
DensityOperator to_dense(const CqState& rho);
// sum_x p(x) rho^{|x}
DensityOperator quantum_marginal(const CqState& rho);
std::vector<double> classical_marginal(const CqState& rho);
// Appends a classical register whose distribution depends on the existing outcome.
CqState append_classical(const CqState& rho, const ClassicalRegister& reg,
                         const std::vector<std::vector<double>>& given_outcome);
// Applies f to every conditional (same output dims required).
CqState map_conditionals(const CqState& rho, const std::vector<DensityOperator>& replaced);
double trace_distance(const CqState& rho, const CqState& tau);

// sum_x q(x) |x><x| (x) sigma^{|x} with arbitrary nonnegative weights.
struct BlockOperator {
    std::vector<ClassicalRegister> registers;
    std::vector<double> weights;
    std::vector<ComplexMatrix> blocks;
    Dims dims;

    static BlockOperator single(const ComplexMatrix& sigma, Dims dims);
    static BlockOperator identity(const std::vector<ClassicalRegister>& regs, Dims dims);
    std::size_t quantum_dim() const { return product(dims); }
    ComplexMatrix dense() const;
};

}  // namespace renyi
