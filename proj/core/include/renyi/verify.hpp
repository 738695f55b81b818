#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "renyi/channel.hpp"
#include "renyi/eatrate.hpp"
#include "renyi/io.hpp"

namespace renyi {

// Deliberate bugs used to check that the suite notices them.
enum class Fault {
    None,
    OffByBase,  // partially optimised entropy reported in nats
};

struct SuiteConfig {
    std::uint64_t seed = 1;
    int count = 100;                      // instances per property unless overridden
    std::map<std::string, int> counts;    // per-property overrides, keyed by property name
    std::vector<double> alphas{1.1, 1.5, 2.0, 3.0};
    std::size_t max_quantum_dim = 4;      // quantum conditioning register
    std::size_t max_letters = 4;          // classical registers
    std::map<std::string, double> tolerances;  // per-property overrides
    std::vector<std::string> only;        // run only properties whose name starts with one of these
    Fault fault = Fault::None;
    int threads = 0;                      // 0 = hardware concurrency
    std::size_t max_reported_failures = 3;

    int count_for(const std::string& property) const;
    double tolerance_for(const std::string& property, double fallback) const;
    bool selected(const std::string& property) const;
    void validate() const;
};

struct PropertyFailure {
    std::uint64_t index = 0;  // instance index; the instance is Rng::derive(seed, index)
    double margin = 0.0;
    Json instance;
};

// One property checked on `instances` seeded instances. Every instance yields a margin that
// must be >= -tolerance; for equalities the margin is -|difference|.
struct PropertyResult {
    std::string name;
    std::uint64_t seed = 0;
    int instances = 0;
    double tolerance = 0.0;
    double worst_margin = 0.0;
    std::uint64_t worst_index = 0;
    int failed = 0;
    std::vector<PropertyFailure> failures;
    double seconds = 0.0;
    std::string note;

    bool passed() const { return failed == 0 && instances > 0; }
};

struct SuiteReport {
    std::uint64_t seed = 0;
    std::vector<double> alphas;
    std::vector<PropertyResult> properties;

    bool passed() const;
    void merge(const SuiteReport& other);
    const PropertyResult* find(const std::string& name) const;
};

Json to_json(const SuiteReport& r);

// h_down <= h_partial <= h_up on random cq states classical on B, plus the classical closed forms.
SuiteReport check_ordering(const SuiteConfig& cfg);
// Product consistency, data processing and isometric invariance on C, classical registers and subadditivity.
SuiteReport check_partial_entropy_properties(const SuiteConfig& cfg);
// Closed form of the partially optimised entropy against a direct search over q_B.
SuiteReport check_variational(const SuiteConfig& cfg);
// Two-term divergence decomposition and the conditional-operator identity of the nu state.
SuiteReport check_decomposition(const SuiteConfig& cfg);
// Chain rule with a partially optimised second term, on classical channels with memory.
SuiteReport check_partial_chain_rule(const SuiteConfig& cfg);
// Classical chain rule for H-down with a minimum over the first-round values.
SuiteReport check_classical_chain_rule(const SuiteConfig& cfg);
// Read-and-prepare identity, concavity in f, continuity, mixing bound, max-divergence bound,
// data processing on E (the entropy does not decrease).
SuiteReport check_fweighted_props(const SuiteConfig& cfg);

// Classical two-round attack on an infrequent sampling protocol. The device answers setting b with
// outcome a ~ response[(r * settings + b) * outcomes + a] given memory r, then moves to memory
// update[(r * outcomes + a) * settings + b]. Eve holds a copy of the initial memory.
struct ClassicalAttack {
    std::size_t memory = 1;
    Distribution initial;
    std::vector<double> response;
    std::vector<std::size_t> update;

    double p(std::size_t r, std::size_t b, std::size_t a, std::size_t settings, std::size_t outcomes) const {
        return response[(r * settings + b) * outcomes + a];
    }
    void validate(const SamplingProtocol& proto) const;
};

// {"memory", "initial", "response", "update"} with the flat layouts above.
Json to_json(const ClassicalAttack& at);
ClassicalAttack attack_from_json(const Json& j);

struct MemoryInfimum {
    double value = 0.0;     // inf over memory distributions of the single-round objective
    Distribution q;         // minimising memory distribution
    double h_gen = 0.0;
    Distribution p_c;
};

// inf over q in Delta(R) of inner_inf_v(p_C(q), H(A|B^up E^down), cs, alpha) for the attack's round
// channel, with E an orthogonal copy of the memory. Vertices, a simplex grid and zoom refinement.
MemoryInfimum memory_infimum(const SamplingProtocol& proto, const ClassicalAttack& attack, const ConstraintSet& cs,
                             double alpha);

struct TwoRoundResult {
    double lhs_exact = 0.0;  // H-up(A^2 C^2 | B^2 E) of the state conditioned on the event
    double bound = 0.0;      // 2 h - alpha/(alpha-1) log(1/p_event)
    double h_round = 0.0;
    double p_event = 0.0;
    bool holds = true;
};

Json to_json(const TwoRoundResult& r);

// Enumerates both rounds exactly; the event keeps score pairs whose frequency lies in cs.
// Throws EmptyEvent when the event has probability zero.
TwoRoundResult simulate_two_rounds(const SamplingProtocol& proto, const ClassicalAttack& attack, const ConstraintSet& cs,
                                   double alpha);
SuiteReport check_two_rounds(const SuiteConfig& cfg);

// Runs every selected check. Deterministic for a fixed seed regardless of the thread count.
SuiteReport run_property_suite(const SuiteConfig& cfg);

std::vector<std::string> property_names();

}  // namespace renyi
