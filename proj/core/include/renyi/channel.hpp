#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "renyi/entropy.hpp"
#include "renyi/random.hpp"
#include "renyi/state.hpp"

namespace renyi {

constexpr double kChannelTol = 1e-9;

struct KrausChannel {
    std::vector<ComplexMatrix> kraus;
    Dims input_dims;
    Dims output_dims;
    bool cp_only = false;

    KrausChannel() = default;
    // Checks shapes and sum K^dag K = I (or <= I when cp_only).
    KrausChannel(std::vector<ComplexMatrix> ops, Dims in, Dims out, bool cp_only = false);

    static KrausChannel identity(const Dims& dims);
    static KrausChannel dephasing(std::size_t d);
    static KrausChannel isometry(const ComplexMatrix& v, Dims in, Dims out);
    // rho -> tr(rho) tau
    static KrausChannel replacement(const DensityOperator& tau, Dims in);

    std::size_t din() const { return product(input_dims); }
    std::size_t dout() const { return product(output_dims); }
    ComplexMatrix kraus_sum() const;
};

ComplexMatrix apply(const KrausChannel& ch, const ComplexMatrix& rho);
DensityOperator apply(const KrausChannel& ch, const DensityOperator& rho, std::vector<std::string> out_labels = {});
// Acts on the listed subsystems. The result keeps the untouched subsystems in order and
// appends the channel output (labels default to the input labels when dims agree).
DensityOperator apply_on(const KrausChannel& ch, const DensityOperator& rho, const std::vector<std::size_t>& subsystems,
                         std::vector<std::string> out_labels = {});
// Applies the channel to the listed quantum subsystems of every conditional.
CqState apply_on(const KrausChannel& ch, const CqState& rho, const Labels& subsystems,
                 std::vector<std::string> out_labels = {});
// second o first
KrausChannel compose(const KrausChannel& second, const KrausChannel& first);
KrausChannel tensor(const KrausChannel& a, const KrausChannel& b);
KrausChannel random_channel(std::size_t din, std::size_t dout, std::size_t kraus_count, Rng& rng);

// Channel with classical outputs: each joint outcome of `outputs` owns a Kraus list.
struct Instrument {
    std::vector<ClassicalRegister> outputs;
    std::vector<std::vector<ComplexMatrix>> kraus;
    Dims input_dims;
    Dims output_dims;
    std::vector<std::string> output_labels;

    std::size_t din() const { return product(input_dims); }
    std::size_t dout() const { return product(output_dims); }
    void validate() const;
};

// Applies the instrument to the listed subsystems of rho. Classical outputs become registers,
// untouched subsystems stay quantum followed by the instrument output.
CqState apply(const Instrument& ins, const DensityOperator& rho, const std::vector<std::size_t>& subsystems);

// Measures R in the computational basis and writes the result into B.
Instrument copy_instrument(std::size_t d, const std::string& b_label = "B");
// Draws B from p independently and leaves R alone.
Instrument product_instrument(std::size_t d, const Distribution& p, const std::string& b_label = "B");

struct IndependenceCheck {
    bool passed = true;
    double max_deviation = 0.0;
};

// Feeds random pure states on R (x) R' and compares rho_{B R'} with rho_B (x) omega_{R'}.
IndependenceCheck check_b_independence(const Instrument& ins, const std::string& b_label, int trials,
                                       std::uint64_t seed, double tolerance = 1e-8);

// M^{a|b}: maps[a * settings + b].
struct CPMapFamily {
    std::size_t outcomes = 0;
    std::size_t settings = 0;
    std::vector<KrausChannel> maps;

    const KrausChannel& map(std::size_t a, std::size_t b) const { return maps[a * settings + b]; }
    const Dims& input_dims() const { return maps.front().input_dims; }
    const Dims& output_dims() const { return maps.front().output_dims; }
    // Each setting must sum to a trace-preserving map.
    void validate() const;
};

// Each setting is a random instrument: one Stinespring isometry split over outcomes.
CPMapFamily random_family(std::size_t outcomes, std::size_t settings, std::size_t din, std::size_t dout, Rng& rng,
                          std::size_t kraus_per_outcome = 1);

struct SamplingProtocol {
    double gamma = 0.0;
    Distribution p_gen;
    Distribution p_test;
    std::size_t outcomes = 0;
    std::size_t settings = 0;
    std::size_t score_bits = 1;
    // score[a * settings + b] in [0, 2^score_bits)
    std::vector<std::uint32_t> score;

    std::size_t score_alphabet() const { return (std::size_t{1} << score_bits) + 1; }
    std::size_t bottom() const { return std::size_t{1} << score_bits; }
    std::uint32_t score_of(std::size_t a, std::size_t b) const { return score[a * settings + b]; }
    void validate() const;
};

// Registers A (outcome), C (score, bottom = last letter), T (test flag), B (setting); quantum output of the family.
Instrument build_sampling_channel(const CPMapFamily& family, const SamplingProtocol& proto);

struct BlochAngles {
    double theta = 0.0;
    double phi = 0.0;
};

// Two qubits, binary projective measurements P_a = (I + (-1)^a n.sigma) / 2.
struct TwoQubitStrategy {
    DensityOperator state;
    std::vector<BlochAngles> alice;
    std::vector<BlochAngles> bob;

    std::size_t nx() const { return alice.size(); }
    std::size_t ny() const { return bob.size(); }
    void validate() const;
};

enum class StateModel { Pure, Mixed };

std::size_t strategy_parameter_count(StateModel model, std::size_t nx, std::size_t ny);
// Pure: [schmidt angle, phase, alice axis (2), bob axis (2)]; mixed: 32 entries of a 4x4 complex factor G,
// rho = G G^dag / tr. Then two angles per measurement, Alice first.
TwoQubitStrategy strategy_from_parameters(const std::vector<double>& params, StateModel model, std::size_t nx,
                                          std::size_t ny);
TwoQubitStrategy random_strategy(StateModel model, std::size_t nx, std::size_t ny, Rng& rng);
TwoQubitStrategy tsirelson_strategy();

ComplexMatrix qubit_projector(const BlochAngles& n, std::size_t outcome);
// p(a, b | x, y) at index ((a * 2 + b) * nx + x) * ny + y
std::vector<double> behaviour(const TwoQubitStrategy& s);
double correlator(const TwoQubitStrategy& s, std::size_t x, std::size_t y);

// Joint outcome a = aA * 2 + aB, setting b = x * ny + y; maps the trivial input to Eve's purifying register.
CPMapFamily strategy_family(const TwoQubitStrategy& s);
// Sampling channel applied to the strategy: registers A, C, T, B and quantum E.
CqState build_sampling_channel(const TwoQubitStrategy& s, const SamplingProtocol& proto);
// Distribution of the score register C.
Distribution score_distribution(const CqState& sampled);

enum class OutputSelection { Alice, Both };

// Registers A (Alice's outcome, or the pair), B (joint setting x * ny + y) and quantum E purifying the state.
CqState strategy_to_cq(const TwoQubitStrategy& s, const Distribution& p_b,
                       OutputSelection outputs = OutputSelection::Alice);

struct BellFunctional {
    std::string name;
    std::size_t nx = 0;
    std::size_t ny = 0;
    // coefficient of <A_x B_y> at x * ny + y
    std::vector<double> correlators;
    // optional coefficient of p(a, b | x, y), same indexing as behaviour()
    std::vector<double> probabilities;
    double local_bound = 0.0;
    double quantum_bound = 0.0;
};

BellFunctional chsh_functional();
double bell_value(const TwoQubitStrategy& s, const BellFunctional& f);
// Sampling protocol scoring a CHSH win (aA xor aB = x y) with uniform settings.
SamplingProtocol chsh_protocol(double gamma);

// (x, (1-x)/(d-1), ...) with Renyi entropy h, x found by bisection.
Distribution flat_spike_distribution(double h, double alpha, std::size_t d);

struct ReadAndPrepare {
    KrausChannel channel;  // C -> C (x) D
    std::size_t d_dim = 1;
    std::vector<Distribution> tau;  // per letter of C
    double cap = 0.0;
};

ReadAndPrepare build_read_and_prepare(const std::vector<double>& f, double cap, double alpha);
// Appends D ~ tau(c) as a classical register next to classical C.
CqState apply_read_and_prepare(const ReadAndPrepare& rp, const CqState& rho, const std::string& c_label,
                               const std::string& d_label = "D");

// nu = X rho X^dag with X = nu_first^{1/2} rho_first^{-1/2} on the first-round subsystems,
// nu_first proportional to (rho_first^{1/2} sigma^{-alpha'} rho_first^{1/2})^alpha and sigma acting on b1.
DensityOperator nu_state(const DensityOperator& rho, const Labels& first, const Labels& b1, const ComplexMatrix& sigma_b1,
                         double alpha);
// |-D(rho_{A1A2B} || I (x) sigma_B) - (-D(rho_{A1B} || I (x) sigma_B) + H_down(A2 | A1 B)_nu)|
double two_term_decomposition_gap(const DensityOperator& rho, const Labels& a1, const Labels& a2, const Labels& b,
                             const ComplexMatrix& sigma_b, double alpha);

}  // namespace renyi
