#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "renyi/channel.hpp"
#include "renyi/entropy.hpp"

namespace renyi {

// Frequency constraints sum_c g_k(c) v(c) >= t_k over the score alphabet.
struct ConstraintSet {
    std::size_t alphabet = 0;
    std::vector<std::vector<double>> g;
    std::vector<double> t;

    static ConstraintSet full(std::size_t n);
    ConstraintSet& add(std::vector<double> row, double bound);
    ConstraintSet& at_least(std::size_t c, double bound);
    ConstraintSet& at_most(std::size_t c, double bound);

    std::size_t size() const { return t.size(); }
    // Largest amount by which v misses a constraint (0 when feasible).
    double violation(const Distribution& v) const;
    void validate() const;
};

// Throws Infeasible when no distribution on the simplex satisfies the constraints.
void check_nonempty(const ConstraintSet& cs);

struct InnerSolution {
    double value = 0.0;
    Distribution v_star;
    std::vector<double> lambda;
    double dual_value = 0.0;
    // max of primal violation and |lambda_k (g_k . v - t_k)|; stationarity holds by construction
    double kkt_residual = 0.0;
    int iterations = 0;
};

// min over v in the constraint set of D(v || p) / (alpha - 1) + v(bottom) h_gen.
InnerSolution inner_inf_v(const Distribution& p_c, double h_gen, const ConstraintSet& cs, double alpha,
                          std::size_t bottom);
double inner_objective(const Distribution& v, const Distribution& p_c, double h_gen, double alpha, std::size_t bottom);

enum class GenEntropy { Partial, Down };

struct RoundOptions {
    OutputSelection outputs = OutputSelection::Alice;
    GenEntropy gen = GenEntropy::Partial;
};

double gen_round_entropy(const TwoQubitStrategy& s, const Distribution& p_gen, double alpha,
                         const RoundOptions& opts = {});

struct RoundEvaluation {
    double value = 0.0;
    double h_gen = 0.0;
    Distribution p_c;
    InnerSolution inner;
};

// Value for one fixed strategy, an upper bound on the infimum over strategies.
RoundEvaluation single_round_h(const TwoQubitStrategy& s, const SamplingProtocol& proto, const ConstraintSet& cs,
                               double alpha, const RoundOptions& opts = {});

// Mixed-model parameters reproducing s (G = sqrt(rho)).
std::vector<double> mixed_parameters(const TwoQubitStrategy& s);

struct SearchOptions {
    int restarts = 64;
    std::uint64_t seed = 7;
    StateModel model = StateModel::Mixed;
    int max_evaluations = 3000;
    double simplex_tolerance = 1e-7;
    double initial_step = 0.5;
    RoundOptions round;
    // Extra starting points tried before the random restarts.
    std::vector<TwoQubitStrategy> seeds;
    int threads = 0;  // 0 = hardware concurrency
};

struct FiniteSize {
    double n = 0;
    double p_omega = 1.0;
    double epsilon = 1e-10;
    double total_bits = 0.0;
    std::int64_t key_length = 0;
};

struct RateReport {
    double alpha = 0;
    double h_alpha = 0;  // upper bound on the infimum via the best attack found
    double h_gen = 0;
    Distribution v_star;
    Distribution p_c;
    double kkt_residual = 0;
    TwoQubitStrategy strategy;
    double chsh_value = 0;
    int evaluations = 0;
    int restarts = 0;
    std::optional<FiniteSize> finite_size;
};

RateReport optimize_strategy(const SamplingProtocol& proto, const ConstraintSet& cs, double alpha,
                             const SearchOptions& opts = {});

// Derivative-free minimisation of `objective` from `start`; returns best point and value.
struct LocalMinimum {
    std::vector<double> x;
    double value = 0;
    int evaluations = 0;
};
LocalMinimum nelder_mead(const std::function<double(const std::vector<double>&)>& objective,
                         const std::vector<double>& start, double step, int max_evaluations, double tolerance);

// n h - (alpha / (alpha - 1)) log(1 / p_omega)
double finite_size_bound(double n, double h_alpha, double p_omega, double alpha);
FiniteSize finite_size(double n, double h_alpha, double p_omega, double alpha, double epsilon);

struct ComparisonRow {
    double alpha = 0;
    double h_down = 0;
    double h_partial = 0;
    double gap = 0;
    std::vector<double> per_setting;  // H(A|E) given each setting
    double asymmetry = 0;             // max - min of per_setting
};

std::vector<ComparisonRow> compare_entropies(const TwoQubitStrategy& s, const Distribution& p_b,
                                             const std::vector<double>& alphas,
                                             OutputSelection outputs = OutputSelection::Alice);

// Maximises the Bell value over strategies (heuristic).
TwoQubitStrategy best_bell_strategy(const BellFunctional& f, int restarts, std::uint64_t seed,
                                    StateModel model = StateModel::Pure);

// 2 f(1 + h) - f(1 + 2h)
double richardson_alpha_limit(const std::function<double(double)>& f, double h = 1e-6);

struct AsymptoticRow {
    double alpha = 0;
    double gamma = 0;
    double value = 0;
    double kl_term = 0;
    double h_gen = 0;
};

struct AsymptoticTable {
    std::vector<AsymptoticRow> rows;
    double von_neumann_target = 0;   // H(A|BE) of the generation round
    double h_partial_limit = 0;      // Richardson limit of the generation entropy
    bool monotone = true;            // values approach the target along the schedule
};

// Constraint: the test-round win frequency is at least that of s itself.
AsymptoticTable asymptotic_check(const TwoQubitStrategy& s, const std::vector<std::pair<double, double>>& schedule);

}  // namespace renyi
