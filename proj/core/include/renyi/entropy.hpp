#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "renyi/extended_real.hpp"
#include "renyi/state.hpp"

namespace renyi {

using Labels = std::vector<std::string>;
using Distribution = std::vector<double>;

// Throws BadAlpha unless alpha is finite and > 1.
void check_alpha(double alpha);

// Sandwiched divergence, log base 2. +inf when supp(rho) is not inside supp(sigma).
ExtendedReal renyi_divergence(const ComplexMatrix& rho, const ComplexMatrix& sigma, double alpha);
ExtendedReal renyi_divergence(const DensityOperator& rho, const ComplexMatrix& sigma, double alpha);
// Block-diagonal route: sigma must carry the same classical registers as rho.
ExtendedReal renyi_divergence(const CqState& rho, const BlockOperator& sigma, double alpha);
// D(rho_{AB} || I_A (x) sigma_B) for a cq state whose registers are exactly A and B.
// sigma carries B's classical registers (in state order) and acts on B's quantum part.
ExtendedReal divergence_to_identity(const CqState& rho, const Labels& a, const BlockOperator& sigma_b, double alpha);

ExtendedReal max_divergence(const ComplexMatrix& rho, const ComplexMatrix& sigma);
ExtendedReal kl_divergence(const Distribution& v, const Distribution& p);

struct SolverConfig {
    int max_iterations = 10000;
    double tolerance = 1e-10;
};

struct OptimizedEntropy {
    double value = 0.0;
    bool converged = true;
    int iterations = 0;
    double residual = 0.0;  // trace-norm change of the last fixed-point step
};

// Registers not listed in a or b are traced out first.
double h_down(const CqState& rho, const Labels& a, const Labels& b, double alpha);
double h_down(const DensityOperator& rho, const std::vector<std::size_t>& a, const std::vector<std::size_t>& b,
              double alpha);

// Throws NoConvergence (message carries the best value) when the solver fails.
double h_up(const CqState& rho, const Labels& a, const Labels& b, double alpha, const SolverConfig& cfg = {});
double h_up(const DensityOperator& rho, const std::vector<std::size_t>& a, const std::vector<std::size_t>& b,
            double alpha, const SolverConfig& cfg = {});
OptimizedEntropy solve_h_up(const CqState& rho, const Labels& a, const Labels& b, double alpha,
                            const SolverConfig& cfg = {});
// sup_sigma -D(rho || I (x) sigma) over quantum subsystems `b` of a block-diagonal operator
// sum_k blocks[k]; used for classical registers on the A side.
OptimizedEntropy solve_h_up_blocks(const std::vector<ComplexMatrix>& blocks, const Dims& dims,
                                   const std::vector<std::size_t>& b, double alpha, const SolverConfig& cfg = {});

// p[a * nb + b]
struct JointDistribution {
    std::size_t na = 0;
    std::size_t nb = 0;
    std::vector<double> p;
    double operator()(std::size_t a, std::size_t b) const { return p[a * nb + b]; }
};

enum class Variant { Up, Down };

double h_classical(const JointDistribution& p, double alpha, Variant variant);

// H(A | B^up C^down): B classical, C anything. Registers outside a, b, c are traced out.
double h_partial(const CqState& rho, const Labels& a, const Labels& b, const Labels& c, double alpha);

struct VariationalOptions {
    int grid_resolution = 200;
    bool refine = true;
    bool include_analytic_point = false;
};
// Supremum over q_B of -D(rho_ABC || I_A (x) sum_b q(b)|b><b| (x) rho_C^{|b}), computed with
// dense per-outcome divergences and a direct search over the simplex.
double h_partial_variational(const CqState& rho, const Labels& a, const Labels& b, const Labels& c, double alpha,
                             const VariationalOptions& opts = {});
// Value of the variational objective at a given q (in bits).
double h_partial_objective(const std::vector<double>& p, const std::vector<double>& divergence_terms,
                           const std::vector<double>& q, double alpha);

// q*(b) = r_b^{1/alpha} / sum r^{1/alpha}
Distribution optimal_q(const std::vector<double>& r, double alpha);

double von_neumann(const DensityOperator& rho);
double von_neumann(const Distribution& p);
double cond_mutual_info(const DensityOperator& rho, const std::vector<std::size_t>& a,
                        const std::vector<std::size_t>& b, const std::vector<std::size_t>& c);
double renyi_entropy(const DensityOperator& rho, double alpha);
double renyi_entropy(const Distribution& p, double alpha);

// H^f(AC|B) of rho classical on c_label, relative to sigma on B.
ExtendedReal f_weighted(const CqState& rho, const std::string& c_label, const Labels& a, const Labels& b,
                        const BlockOperator& sigma_b, const std::vector<double>& f, double alpha);
// sup over q_B of H^f(AC | BE) with sigma_BE = sum_b q(b)|b><b| (x) rho_E^{|b}; B and C classical.
double f_weighted_sup_qb(const CqState& rho, const Labels& a, const std::string& b_label, const std::string& c_label,
                         const Labels& e, const std::vector<double>& f, double alpha);

// Largest l with 2^{2/alpha - 1} 2^{((alpha-1)/alpha)(l - hUp)} <= epsilon, clamped at 0.
std::int64_t key_length(double h_up_bits, double epsilon, double alpha);

}  // namespace renyi
