#include "renyi/channel.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "renyi/errors.hpp"
#include "renyi/linalg.hpp"

namespace renyi {

namespace {

std::vector<std::string> default_labels(std::size_t n, const std::string& prefix) {
    std::vector<std::string> l;
    for (std::size_t i = 0; i < n; ++i) l.push_back(prefix + std::to_string(i));
    return l;
}

// Linear map rho -> sum_k K_k rho K_k^dag for a raw Kraus list.
ComplexMatrix apply_kraus(const std::vector<ComplexMatrix>& kraus, const ComplexMatrix& rho, std::size_t dout) {
    ComplexMatrix out(dout, dout);
    for (const auto& k : kraus) out += sandwich(k, rho);
    return out;
}

// Identity on the leading `keep` dimension tensored with each Kraus operator.
std::vector<ComplexMatrix> lift(const std::vector<ComplexMatrix>& kraus, std::size_t keep) {
    std::vector<ComplexMatrix> out;
    const auto id = ComplexMatrix::identity(keep);
    for (const auto& k : kraus) out.push_back(kron(id, k));
    return out;
}

// Moves `subsystems` to the end (in the given order) and returns the permuted state.
DensityOperator move_to_end(const DensityOperator& rho, const std::vector<std::size_t>& subsystems,
                            std::vector<std::size_t>& rest) {
    rest.clear();
    for (std::size_t i = 0; i < rho.dims.size(); ++i)
        if (std::find(subsystems.begin(), subsystems.end(), i) == subsystems.end()) rest.push_back(i);
    auto order = rest;
    order.insert(order.end(), subsystems.begin(), subsystems.end());
    return permute(rho, order);
}

std::vector<cplx> qubit_vector(const BlochAngles& n, std::size_t outcome) {
    const double c = std::cos(n.theta / 2.0), s = std::sin(n.theta / 2.0);
    const cplx ph = std::polar(1.0, n.phi);
    if (outcome == 0) return {c, ph * s};
    return {-std::conj(ph) * s, c};
}

std::vector<std::size_t> indices_of(const DensityOperator& rho, const Labels& labels) {
    std::vector<std::size_t> idx;
    for (const auto& l : labels) idx.push_back(rho.subsystem(l));
    return idx;
}

}  // namespace

KrausChannel::KrausChannel(std::vector<ComplexMatrix> ops, Dims in, Dims out, bool cp)
    : kraus(std::move(ops)), input_dims(std::move(in)), output_dims(std::move(out)), cp_only(cp) {
    require(!kraus.empty(), ErrorCode::BadShape, "channel needs at least one Kraus operator");
    for (const auto& k : kraus)
        require(k.rows() == dout() && k.cols() == din(), ErrorCode::DimMismatch, "Kraus operator has wrong shape");
    const auto s = kraus_sum();
    const auto gap = ComplexMatrix::identity(din()) - s;
    if (cp_only) {
        for (double x : hermitian_eig(gap.hermitian_part()).values)
            require(x >= -kChannelTol, ErrorCode::BadInput, "CP map increases trace");
    } else {
        require(gap.max_abs() <= kChannelTol, ErrorCode::BadInput, "Kraus operators do not sum to the identity");
    }
}

ComplexMatrix KrausChannel::kraus_sum() const {
    ComplexMatrix s(din(), din());
    for (const auto& k : kraus) s += k.adjoint() * k;
    return s;
}

KrausChannel KrausChannel::identity(const Dims& dims) {
    return {{ComplexMatrix::identity(product(dims))}, dims, dims};
}

KrausChannel KrausChannel::dephasing(std::size_t d) {
    std::vector<ComplexMatrix> ops;
    for (std::size_t k = 0; k < d; ++k) ops.push_back(ComplexMatrix::basis_projector(d, k));
    return {ops, {d}, {d}};
}

KrausChannel KrausChannel::isometry(const ComplexMatrix& v, Dims in, Dims out) {
    return {{v}, std::move(in), std::move(out)};
}

KrausChannel KrausChannel::replacement(const DensityOperator& tau, Dims in) {
    const auto eig = psd_eig(tau.matrix);
    const std::size_t din = product(in), dout = tau.dim();
    std::vector<ComplexMatrix> ops;
    for (std::size_t j = 0; j < dout; ++j) {
        if (eig.values[j] <= 0.0) continue;
        const double s = std::sqrt(eig.values[j]);
        for (std::size_t i = 0; i < din; ++i) {
            ComplexMatrix k(dout, din);
            for (std::size_t r = 0; r < dout; ++r) k(r, i) = s * eig.vectors(r, j);
            ops.push_back(std::move(k));
        }
    }
    return {ops, std::move(in), tau.dims};
}

ComplexMatrix apply(const KrausChannel& ch, const ComplexMatrix& rho) {
    require(rho.rows() == ch.din() && rho.cols() == ch.din(), ErrorCode::DimMismatch, "input dimension mismatch");
    return apply_kraus(ch.kraus, rho, ch.dout()).hermitian_part();
}

DensityOperator apply(const KrausChannel& ch, const DensityOperator& rho, std::vector<std::string> out_labels) {
    require(rho.dim() == ch.din(), ErrorCode::DimMismatch, "input dimension mismatch");
    if (out_labels.empty()) out_labels = rho.dims == ch.output_dims ? rho.labels : std::vector<std::string>{};
    return {apply(ch, rho.matrix), ch.output_dims, std::move(out_labels), rho.subnormalized || ch.cp_only};
}

DensityOperator apply_on(const KrausChannel& ch, const DensityOperator& rho, const std::vector<std::size_t>& subsystems,
                         std::vector<std::string> out_labels) {
    for (auto s : subsystems) require(s < rho.dims.size(), ErrorCode::BadIndex, "subsystem index out of range");
    Dims target;
    std::vector<std::string> target_labels;
    for (auto s : subsystems) {
        target.push_back(rho.dims[s]);
        if (!rho.labels.empty()) target_labels.push_back(rho.labels[s]);
    }
    require(product(target) == ch.din(), ErrorCode::DimMismatch, "channel input does not match subsystems");
    std::vector<std::size_t> rest;
    const auto moved = move_to_end(rho, subsystems, rest);
    Dims rest_dims;
    std::vector<std::string> labels;
    for (auto r : rest) {
        rest_dims.push_back(rho.dims[r]);
        if (!rho.labels.empty()) labels.push_back(rho.labels[r]);
    }
    const std::size_t keep = product(rest_dims);
    auto out = apply_kraus(lift(ch.kraus, keep), moved.matrix, keep * ch.dout()).hermitian_part();
    Dims dims = rest_dims;
    dims.insert(dims.end(), ch.output_dims.begin(), ch.output_dims.end());
    if (!rho.labels.empty()) {
        if (out_labels.empty())
            out_labels = target == ch.output_dims ? target_labels : default_labels(ch.output_dims.size(), "out");
        labels.insert(labels.end(), out_labels.begin(), out_labels.end());
    }
    return {std::move(out), std::move(dims), std::move(labels), rho.subnormalized || ch.cp_only};
}

CqState apply_on(const KrausChannel& ch, const CqState& rho, const Labels& subsystems,
                 std::vector<std::string> out_labels) {
    std::vector<std::size_t> idx;
    for (const auto& l : subsystems) idx.push_back(rho.quantum_index(l));
    std::vector<double> w = rho.weights;
    std::vector<DensityOperator> conds;
    for (std::size_t x = 0; x < rho.outcomes(); ++x) {
        auto c = apply_on(ch, rho.conditionals[x], idx, out_labels);
        if (ch.cp_only) {
            const double t = c.trace();
            w[x] *= t;
            if (t > 0.0) c.matrix *= 1.0 / t;
        }
        c.subnormalized = false;
        conds.push_back(std::move(c));
    }
    return {rho.registers, std::move(w), std::move(conds)};
}

KrausChannel compose(const KrausChannel& second, const KrausChannel& first) {
    require(first.dout() == second.din(), ErrorCode::DimMismatch, "cannot compose: dimension mismatch");
    std::vector<ComplexMatrix> ops;
    for (const auto& b : second.kraus)
        for (const auto& a : first.kraus) ops.push_back(b * a);
    return {ops, first.input_dims, second.output_dims, first.cp_only || second.cp_only};
}

KrausChannel tensor(const KrausChannel& a, const KrausChannel& b) {
    std::vector<ComplexMatrix> ops;
    for (const auto& x : a.kraus)
        for (const auto& y : b.kraus) ops.push_back(kron(x, y));
    Dims in = a.input_dims, out = a.output_dims;
    in.insert(in.end(), b.input_dims.begin(), b.input_dims.end());
    out.insert(out.end(), b.output_dims.begin(), b.output_dims.end());
    return {ops, in, out, a.cp_only || b.cp_only};
}

KrausChannel random_channel(std::size_t din, std::size_t dout, std::size_t kraus_count, Rng& rng) {
    // Stinespring: a random isometry din -> dout * k split into blocks.
    const auto v = random_isometry(din, dout * kraus_count, rng);
    std::vector<ComplexMatrix> ops;
    for (std::size_t k = 0; k < kraus_count; ++k) {
        ComplexMatrix m(dout, din);
        for (std::size_t r = 0; r < dout; ++r)
            for (std::size_t c = 0; c < din; ++c) m(r, c) = v(r * kraus_count + k, c);
        ops.push_back(std::move(m));
    }
    return {ops, {din}, {dout}};
}

void Instrument::validate() const {
    require(kraus.size() == outcome_count(outputs), ErrorCode::BadShape, "one Kraus list per classical outcome");
    require(output_labels.size() == output_dims.size(), ErrorCode::BadShape, "one label per output subsystem");
    ComplexMatrix s(din(), din());
    for (const auto& list : kraus)
        for (const auto& k : list) {
            require(k.rows() == dout() && k.cols() == din(), ErrorCode::DimMismatch, "Kraus operator has wrong shape");
            s += k.adjoint() * k;
        }
    require((ComplexMatrix::identity(din()) - s).max_abs() <= kChannelTol, ErrorCode::BadInput,
            "instrument is not trace preserving");
}

CqState apply(const Instrument& ins, const DensityOperator& rho, const std::vector<std::size_t>& subsystems) {
    ins.validate();
    for (auto s : subsystems) require(s < rho.dims.size(), ErrorCode::BadIndex, "subsystem index out of range");
    Dims target;
    for (auto s : subsystems) target.push_back(rho.dims[s]);
    require(product(target) == ins.din(), ErrorCode::DimMismatch, "instrument input does not match subsystems");
    std::vector<std::size_t> rest;
    const auto moved = move_to_end(rho, subsystems, rest);
    Dims dims;
    std::vector<std::string> labels;
    for (auto r : rest) {
        dims.push_back(rho.dims[r]);
        labels.push_back(rho.labels.empty() ? "Q" + std::to_string(r) : rho.labels[r]);
    }
    const std::size_t keep = product(dims);
    dims.insert(dims.end(), ins.output_dims.begin(), ins.output_dims.end());
    labels.insert(labels.end(), ins.output_labels.begin(), ins.output_labels.end());

    std::vector<double> w;
    std::vector<DensityOperator> conds;
    for (const auto& list : ins.kraus) {
        auto m = apply_kraus(lift(list, keep), moved.matrix, keep * ins.dout()).hermitian_part();
        const double t = m.real_trace();
        if (t > 1e-300) {
            w.push_back(t);
            conds.emplace_back(m * cplx(1.0 / t), dims, labels);
        } else {
            w.push_back(0.0);
            conds.push_back(maximally_mixed(dims, labels));
        }
    }
    return {ins.outputs, std::move(w), std::move(conds)};
}

Instrument copy_instrument(std::size_t d, const std::string& b_label) {
    Instrument ins;
    ins.outputs = {{b_label, d}};
    for (std::size_t b = 0; b < d; ++b) ins.kraus.push_back({ComplexMatrix::basis_projector(d, b)});
    ins.input_dims = {d};
    ins.output_dims = {d};
    ins.output_labels = {"R"};
    return ins;
}

Instrument product_instrument(std::size_t d, const Distribution& p, const std::string& b_label) {
    Instrument ins;
    ins.outputs = {{b_label, p.size()}};
    for (double x : p) ins.kraus.push_back({ComplexMatrix::identity(d) * cplx(std::sqrt(x))});
    ins.input_dims = {d};
    ins.output_dims = {d};
    ins.output_labels = {"R"};
    return ins;
}

IndependenceCheck check_b_independence(const Instrument& ins, const std::string& b_label, int trials,
                                       std::uint64_t seed, double tolerance) {
    require(trials >= 1, ErrorCode::BadInput, "at least one trial");
    const std::size_t d = ins.din();
    IndependenceCheck out;
    for (int t = 0; t < trials; ++t) {
        auto rng = Rng::derive(seed, static_cast<std::uint64_t>(t));
        const auto omega = random_pure({d, d}, rng, {"Rin", "Rref"});
        const auto reference = partial_trace(omega, {1});
        const auto out_state = apply(ins, omega, {0});
        const auto joint = marginal(out_state, {b_label, "Rref"});
        double dev = 0.0;
        for (std::size_t b = 0; b < joint.outcomes(); ++b) {
            const auto diff = joint.conditionals[b].matrix * cplx(joint.weights[b]) -
                              reference.matrix * cplx(joint.weights[b]);
            dev += trace_norm(diff.hermitian_part());
        }
        out.max_deviation = std::max(out.max_deviation, dev);
    }
    out.passed = out.max_deviation < tolerance;
    return out;
}

void CPMapFamily::validate() const {
    require(outcomes >= 1 && settings >= 1, ErrorCode::BadShape, "empty family");
    require(maps.size() == outcomes * settings, ErrorCode::BadShape, "one map per (outcome, setting)");
    for (std::size_t b = 0; b < settings; ++b) {
        ComplexMatrix s(maps.front().din(), maps.front().din());
        for (std::size_t a = 0; a < outcomes; ++a) {
            const auto& m = map(a, b);
            require(m.input_dims == input_dims() && m.output_dims == output_dims(), ErrorCode::DimMismatch,
                    "maps must share input and output dims");
            s += m.kraus_sum();
        }
        require((ComplexMatrix::identity(s.rows()) - s).max_abs() <= kChannelTol, ErrorCode::BadInput,
                "outcomes of a setting must sum to a trace-preserving map");
    }
}

CPMapFamily random_family(std::size_t outcomes, std::size_t settings, std::size_t din, std::size_t dout, Rng& rng,
                          std::size_t kraus_per_outcome) {
    CPMapFamily fam;
    fam.outcomes = outcomes;
    fam.settings = settings;
    fam.maps.resize(outcomes * settings);
    const std::size_t k = outcomes * kraus_per_outcome;
    for (std::size_t b = 0; b < settings; ++b) {
        const auto v = random_isometry(din, dout * k, rng);
        for (std::size_t a = 0; a < outcomes; ++a) {
            std::vector<ComplexMatrix> ops;
            for (std::size_t j = 0; j < kraus_per_outcome; ++j) {
                ComplexMatrix m(dout, din);
                for (std::size_t r = 0; r < dout; ++r)
                    for (std::size_t c = 0; c < din; ++c) m(r, c) = v((a * kraus_per_outcome + j) * dout + r, c);
                ops.push_back(std::move(m));
            }
            fam.maps[a * settings + b] = KrausChannel(ops, {din}, {dout}, true);
        }
    }
    return fam;
}

void SamplingProtocol::validate() const {
    require(gamma >= 0.0 && gamma <= 1.0, ErrorCode::BadProbability, "gamma must lie in [0, 1]");
    require(p_gen.size() == settings && p_test.size() == settings, ErrorCode::AlphabetMismatch,
            "setting distributions must cover every setting");
    for (const auto* p : {&p_gen, &p_test}) {
        double s = 0.0;
        for (double x : *p) {
            require(x >= 0.0, ErrorCode::BadProbability, "negative probability");
            s += x;
        }
        require(std::abs(s - 1.0) <= 1e-9, ErrorCode::BadProbability, "setting distribution must sum to 1");
    }
    require(score_bits >= 1 && score_bits <= 8, ErrorCode::BadInput, "score bits must lie in [1, 8]");
    require(score.size() == outcomes * settings, ErrorCode::AlphabetMismatch, "one score per (outcome, setting)");
    for (auto s : score) require(s < bottom(), ErrorCode::BadInput, "score out of range");
}

Instrument build_sampling_channel(const CPMapFamily& family, const SamplingProtocol& proto) {
    family.validate();
    proto.validate();
    require(family.outcomes == proto.outcomes && family.settings == proto.settings, ErrorCode::AlphabetMismatch,
            "family alphabets do not match the protocol");
    Instrument ins;
    const std::size_t nc = proto.score_alphabet();
    ins.outputs = {{"A", proto.outcomes}, {"C", nc}, {"T", 2}, {"B", proto.settings}};
    ins.kraus.assign(outcome_count(ins.outputs), {});
    ins.input_dims = family.input_dims();
    ins.output_dims = family.output_dims();
    ins.output_labels = default_labels(ins.output_dims.size(), "R");
    const Dims reg_dims{proto.outcomes, nc, 2, proto.settings};
    for (std::size_t a = 0; a < proto.outcomes; ++a)
        for (std::size_t b = 0; b < proto.settings; ++b) {
            const double wg = (1.0 - proto.gamma) * proto.p_gen[b];
            const double wt = proto.gamma * proto.p_test[b];
            if (wg > 0.0) {
                auto& list = ins.kraus[index_of({a, proto.bottom(), 0, b}, reg_dims)];
                for (const auto& k : family.map(a, b).kraus) list.push_back(k * cplx(std::sqrt(wg)));
            }
            if (wt > 0.0) {
                auto& list = ins.kraus[index_of({a, proto.score_of(a, b), 1, b}, reg_dims)];
                for (const auto& k : family.map(a, b).kraus) list.push_back(k * cplx(std::sqrt(wt)));
            }
        }
    // Outcomes that never occur still need a (zero) operator so the instrument stays well formed.
    for (auto& list : ins.kraus)
        if (list.empty()) list.push_back(ComplexMatrix(ins.dout(), ins.din()));
    return ins;
}

void TwoQubitStrategy::validate() const {
    require(state.dims == Dims{2, 2}, ErrorCode::BadShape, "strategy state must be two qubits");
    state.validate();
    require(!alice.empty() && !bob.empty(), ErrorCode::BadShape, "strategy needs measurements");
    for (const auto* side : {&alice, &bob})
        for (const auto& n : *side) {
            const auto s = qubit_projector(n, 0) + qubit_projector(n, 1);
            require((s - ComplexMatrix::identity(2)).max_abs() <= 1e-10, ErrorCode::BadInput,
                    "measurement projectors must sum to the identity");
        }
}

std::size_t strategy_parameter_count(StateModel model, std::size_t nx, std::size_t ny) {
    return (model == StateModel::Pure ? 6 : 32) + 2 * (nx + ny);
}

TwoQubitStrategy strategy_from_parameters(const std::vector<double>& params, StateModel model, std::size_t nx,
                                          std::size_t ny) {
    require(params.size() == strategy_parameter_count(model, nx, ny), ErrorCode::BadShape,
            "wrong number of strategy parameters");
    TwoQubitStrategy s;
    std::size_t k = 0;
    if (model == StateModel::Pure) {
        const double t = params[0], ph = params[1];
        std::vector<cplx> psi{std::cos(t), 0.0, 0.0, std::polar(std::sin(t), ph)};
        // Local rotations taking |0> to the given Bloch directions.
        auto rot = [](double th, double phi) {
            const auto v0 = qubit_vector({th, phi}, 0), v1 = qubit_vector({th, phi}, 1);
            return ComplexMatrix{{v0[0], v1[0]}, {v0[1], v1[1]}};
        };
        const auto u = kron(rot(params[2], params[3]), rot(params[4], params[5]));
        s.state = pure_state(renyi::apply(u, psi), {2, 2}, {"QA", "QB"});
        k = 6;
    } else {
        ComplexMatrix g(4, 4);
        for (std::size_t i = 0; i < 16; ++i) g.data()[i] = cplx(params[2 * i], params[2 * i + 1]);
        auto rho = g * g.adjoint();
        const double tr = rho.real_trace();
        require(tr > 0.0, ErrorCode::BadInput, "degenerate state parameters");
        s.state = DensityOperator((rho * cplx(1.0 / tr)).hermitian_part(), {2, 2}, {"QA", "QB"});
        k = 32;
    }
    for (std::size_t x = 0; x < nx; ++x, k += 2) s.alice.push_back({params[k], params[k + 1]});
    for (std::size_t y = 0; y < ny; ++y, k += 2) s.bob.push_back({params[k], params[k + 1]});
    return s;
}

TwoQubitStrategy random_strategy(StateModel model, std::size_t nx, std::size_t ny, Rng& rng) {
    std::vector<double> p(strategy_parameter_count(model, nx, ny));
    for (auto& x : p) x = model == StateModel::Mixed ? rng.normal() : rng.uniform(0.0, 2.0 * std::numbers::pi);
    if (model == StateModel::Mixed)
        for (std::size_t i = 32; i < p.size(); ++i) p[i] = rng.uniform(0.0, 2.0 * std::numbers::pi);
    return strategy_from_parameters(p, model, nx, ny);
}

TwoQubitStrategy tsirelson_strategy() {
    const double r = 1.0 / std::sqrt(2.0);
    TwoQubitStrategy s;
    s.state = pure_state({r, 0.0, 0.0, r}, {2, 2}, {"QA", "QB"});
    const double q = std::numbers::pi / 4.0;
    s.alice = {{0.0, 0.0}, {2.0 * q, 0.0}};
    s.bob = {{q, 0.0}, {q, std::numbers::pi}};
    return s;
}

ComplexMatrix qubit_projector(const BlochAngles& n, std::size_t outcome) {
    return ComplexMatrix::outer(qubit_vector(n, outcome));
}

std::vector<double> behaviour(const TwoQubitStrategy& s) {
    const std::size_t nx = s.nx(), ny = s.ny();
    std::vector<double> p(4 * nx * ny, 0.0);
    for (std::size_t a = 0; a < 2; ++a)
        for (std::size_t b = 0; b < 2; ++b)
            for (std::size_t x = 0; x < nx; ++x)
                for (std::size_t y = 0; y < ny; ++y) {
                    const auto proj = kron(qubit_projector(s.alice[x], a), qubit_projector(s.bob[y], b));
                    p[((a * 2 + b) * nx + x) * ny + y] = std::max(0.0, trace_product(proj, s.state.matrix));
                }
    return p;
}

double correlator(const TwoQubitStrategy& s, std::size_t x, std::size_t y) {
    require(x < s.nx() && y < s.ny(), ErrorCode::BadIndex, "setting out of range");
    const auto p = behaviour(s);
    double e = 0.0;
    for (std::size_t a = 0; a < 2; ++a)
        for (std::size_t b = 0; b < 2; ++b) e += ((a ^ b) ? -1.0 : 1.0) * p[((a * 2 + b) * s.nx() + x) * s.ny() + y];
    return e;
}

CPMapFamily strategy_family(const TwoQubitStrategy& s) {
    s.validate();
    const auto psi = purification_vector(s.state.matrix);

    CPMapFamily fam;
    fam.outcomes = 4;
    fam.settings = s.nx() * s.ny();
    fam.maps.resize(fam.outcomes * fam.settings);
    for (std::size_t aa = 0; aa < 2; ++aa)
        for (std::size_t ab = 0; ab < 2; ++ab)
            for (std::size_t x = 0; x < s.nx(); ++x)
                for (std::size_t y = 0; y < s.ny(); ++y) {
                    const auto va = qubit_vector(s.alice[x], aa), vb = qubit_vector(s.bob[y], ab);
                    ComplexMatrix k(4, 1);
                    for (std::size_t e = 0; e < 4; ++e) {
                        cplx z = 0.0;
                        for (std::size_t i = 0; i < 2; ++i)
                            for (std::size_t j = 0; j < 2; ++j)
                                z += std::conj(va[i]) * std::conj(vb[j]) * psi[(i * 2 + j) * 4 + e];
                        k(e, 0) = z;
                    }
                    fam.maps[(aa * 2 + ab) * fam.settings + x * s.ny() + y] = KrausChannel({k}, {1}, {4}, true);
                }
    return fam;
}

CqState build_sampling_channel(const TwoQubitStrategy& s, const SamplingProtocol& proto) {
    auto ins = build_sampling_channel(strategy_family(s), proto);
    ins.output_labels = {"E"};
    const DensityOperator trivial(ComplexMatrix::identity(1), {1}, {"R"});
    auto out = apply(ins, trivial, {0});
    return marginal(out, {"A", "C", "T", "B", "E"});
}

Distribution score_distribution(const CqState& sampled) {
    return marginal(sampled, {"C"}).weights;
}

CqState strategy_to_cq(const TwoQubitStrategy& s, const Distribution& p_b, OutputSelection outputs) {
    const auto fam = strategy_family(s);
    require(p_b.size() == fam.settings, ErrorCode::AlphabetMismatch, "one probability per joint setting");
    const std::size_t na = outputs == OutputSelection::Alice ? 2 : 4;
    std::vector<double> w(na * fam.settings, 0.0);
    std::vector<ComplexMatrix> acc(na * fam.settings, ComplexMatrix(4, 4));
    for (std::size_t a = 0; a < 4; ++a)
        for (std::size_t b = 0; b < fam.settings; ++b) {
            const std::size_t ak = outputs == OutputSelection::Alice ? a / 2 : a;
            const auto& k = fam.map(a, b).kraus.front();
            const auto m = k * k.adjoint();
            acc[ak * fam.settings + b] += m * cplx(p_b[b]);
            w[ak * fam.settings + b] += p_b[b] * m.real_trace();
        }
    std::vector<DensityOperator> conds;
    for (std::size_t i = 0; i < w.size(); ++i) {
        if (w[i] > 1e-300)
            conds.emplace_back((acc[i] * cplx(1.0 / w[i])).hermitian_part(), Dims{4}, std::vector<std::string>{"E"});
        else
            conds.push_back(maximally_mixed({4}, {"E"}));
    }
    return {{{"A", na}, {"B", fam.settings}}, std::move(w), std::move(conds)};
}

BellFunctional chsh_functional() {
    BellFunctional f;
    f.name = "CHSH";
    f.nx = 2;
    f.ny = 2;
    f.correlators = {1.0, 1.0, 1.0, -1.0};
    f.local_bound = 2.0;
    f.quantum_bound = 2.0 * std::sqrt(2.0);
    return f;
}

double bell_value(const TwoQubitStrategy& s, const BellFunctional& f) {
    require(s.nx() == f.nx && s.ny() == f.ny, ErrorCode::AlphabetMismatch, "functional and strategy settings differ");
    require(f.correlators.empty() || f.correlators.size() == f.nx * f.ny, ErrorCode::AlphabetMismatch,
            "one correlator coefficient per setting pair");
    require(f.probabilities.empty() || f.probabilities.size() == 4 * f.nx * f.ny, ErrorCode::AlphabetMismatch,
            "one probability coefficient per (a, b, x, y)");
    const auto p = behaviour(s);
    double v = 0.0;
    for (std::size_t x = 0; x < f.nx; ++x)
        for (std::size_t y = 0; y < f.ny; ++y) {
            if (!f.correlators.empty()) {
                double e = 0.0;
                for (std::size_t a = 0; a < 2; ++a)
                    for (std::size_t b = 0; b < 2; ++b) e += ((a ^ b) ? -1.0 : 1.0) * p[((a * 2 + b) * f.nx + x) * f.ny + y];
                v += f.correlators[x * f.ny + y] * e;
            }
        }
    for (std::size_t i = 0; i < f.probabilities.size(); ++i) v += f.probabilities[i] * p[i];
    return v;
}

SamplingProtocol chsh_protocol(double gamma) {
    SamplingProtocol p;
    p.gamma = gamma;
    p.outcomes = 4;
    p.settings = 4;
    p.p_gen = {0.25, 0.25, 0.25, 0.25};
    p.p_test = p.p_gen;
    p.score_bits = 1;
    p.score.resize(16);
    for (std::size_t a = 0; a < 4; ++a)
        for (std::size_t b = 0; b < 4; ++b) {
            const std::size_t aa = a / 2, ab = a % 2, x = b / 2, y = b % 2;
            p.score[a * 4 + b] = ((aa ^ ab) == (x & y)) ? 1u : 0u;
        }
    p.validate();
    return p;
}

Distribution flat_spike_distribution(double h, double alpha, std::size_t d) {
    check_alpha(alpha);
    require(d >= 1, ErrorCode::BadShape, "dimension must be positive");
    const double hmax = std::log2(static_cast<double>(d));
    require(h >= -1e-12 && h <= hmax + 1e-12, ErrorCode::TargetOutOfRange, "target entropy outside [0, log d]");
    if (d == 1) return {1.0};
    auto make = [d](double x) {
        Distribution p(d, (1.0 - x) / static_cast<double>(d - 1));
        p[0] = x;
        return p;
    };
    if (h >= hmax) return make(1.0 / static_cast<double>(d));
    if (h <= 0.0) return make(1.0);
    // Entropy is decreasing in x on [1/d, 1].
    double lo = 1.0 / static_cast<double>(d), hi = 1.0;
    for (int i = 0; i < 200 && hi - lo > 1e-16; ++i) {
        const double mid = 0.5 * (lo + hi);
        if (renyi_entropy(make(mid), alpha) > h)
            lo = mid;
        else
            hi = mid;
    }
    return make(0.5 * (lo + hi));
}

ReadAndPrepare build_read_and_prepare(const std::vector<double>& f, double cap, double alpha) {
    check_alpha(alpha);
    require(!f.empty(), ErrorCode::BadShape, "need at least one weight");
    double top = 0.0;
    for (double fc : f) {
        require(std::isfinite(fc), ErrorCode::BadInput, "weights must be finite");
        require(cap - fc >= -1e-12, ErrorCode::TargetOutOfRange, "cap must dominate every weight");
        top = std::max(top, cap - fc);
    }
    ReadAndPrepare rp;
    rp.cap = cap;
    rp.d_dim = std::size_t{1} << static_cast<unsigned>(std::ceil(top - 1e-12));
    const std::size_t nc = f.size(), dd = rp.d_dim;
    std::vector<ComplexMatrix> ops;
    for (std::size_t c = 0; c < nc; ++c) {
        rp.tau.push_back(flat_spike_distribution(std::max(0.0, cap - f[c]), alpha, dd));
        for (std::size_t x = 0; x < dd; ++x) {
            if (rp.tau[c][x] <= 0.0) continue;
            ComplexMatrix k(nc * dd, nc);
            k(c * dd + x, c) = std::sqrt(rp.tau[c][x]);
            ops.push_back(std::move(k));
        }
    }
    rp.channel = KrausChannel(ops, {nc}, {nc, dd});
    return rp;
}

CqState apply_read_and_prepare(const ReadAndPrepare& rp, const CqState& rho, const std::string& c_label,
                               const std::string& d_label) {
    require(rho.has_classical(c_label), ErrorCode::BNotClassical, "read register must be classical: " + c_label);
    const std::size_t ci = rho.classical_index(c_label);
    require(rho.registers[ci].size == rp.tau.size(), ErrorCode::AlphabetMismatch, "one target per letter of C");
    const auto cd = rho.classical_dims();
    std::vector<std::vector<double>> given;
    for (std::size_t x = 0; x < rho.outcomes(); ++x) given.push_back(rp.tau[digits_of(x, cd)[ci]]);
    return append_classical(rho, {d_label, rp.d_dim}, given);
}

DensityOperator nu_state(const DensityOperator& rho, const Labels& first, const Labels& b1, const ComplexMatrix& sigma_b1,
                         double alpha) {
    check_alpha(alpha);
    auto fidx = indices_of(rho, first);
    std::sort(fidx.begin(), fidx.end());
    Dims fdims;
    for (auto i : fidx) fdims.push_back(rho.dims[i]);
    const auto rho_first = partial_trace(rho, fidx);
    std::vector<std::size_t> b_local;
    for (const auto& l : b1) {
        const std::size_t g = rho.subsystem(l);
        const auto it = std::find(fidx.begin(), fidx.end(), g);
        require(it != fidx.end(), ErrorCode::BadPartition, "b1 must be part of the first-round subsystems");
        b_local.push_back(static_cast<std::size_t>(it - fidx.begin()));
    }
    const auto rho_b = partial_trace(rho_first, b_local);
    require(sigma_b1.rows() == rho_b.dim(), ErrorCode::DimMismatch, "sigma does not match b1");
    const auto leak = rho_b.matrix - sandwich(support_projector(sigma_b1), rho_b.matrix);
    require(leak.real_trace() <= 1e-10 * rho_b.trace(), ErrorCode::SupportViolation,
            "support of rho_B1 is not inside support of sigma");

    const double ap = (alpha - 1.0) / alpha;
    const auto sig = embed(matrix_power(sigma_b1, -ap), b_local, fdims);
    const auto half = matrix_power(rho_first.matrix, 0.5);
    auto inner = matrix_power(sandwich(half, sig).hermitian_part(), alpha);
    inner *= 1.0 / inner.real_trace();
    const auto x = matrix_power(inner, 0.5) * matrix_power(rho_first.matrix, -0.5);
    const auto full = embed(x, fidx, rho.dims);
    return {sandwich(full, rho.matrix).hermitian_part(), rho.dims, rho.labels};
}

double two_term_decomposition_gap(const DensityOperator& rho, const Labels& a1, const Labels& a2, const Labels& b,
                             const ComplexMatrix& sigma_b, double alpha) {
    check_alpha(alpha);
    auto ia1 = indices_of(rho, a1), ia2 = indices_of(rho, a2), ib = indices_of(rho, b);
    // Bring the state to the order (A1, A2, B) so identities are embedded consistently.
    std::vector<std::size_t> order = ia1;
    order.insert(order.end(), ia2.begin(), ia2.end());
    order.insert(order.end(), ib.begin(), ib.end());
    require(order.size() == rho.dims.size(), ErrorCode::BadPartition, "A1, A2, B must partition the state");
    const auto r = permute(rho, order);
    const std::size_t n1 = ia1.size(), n2 = ia2.size(), nb = ib.size();
    std::size_t d1 = 1, d2 = 1;
    for (std::size_t i = 0; i < n1; ++i) d1 *= r.dims[i];
    for (std::size_t i = n1; i < n1 + n2; ++i) d2 *= r.dims[i];

    const auto lhs = renyi_divergence(r.matrix, kron(ComplexMatrix::identity(d1 * d2), sigma_b), alpha);
    std::vector<std::size_t> first_idx;
    for (std::size_t i = 0; i < n1; ++i) first_idx.push_back(i);
    for (std::size_t i = 0; i < nb; ++i) first_idx.push_back(n1 + n2 + i);
    const auto r1 = partial_trace(r, first_idx);
    const auto d_first = renyi_divergence(r1.matrix, kron(ComplexMatrix::identity(d1), sigma_b), alpha);
    require(lhs.is_finite() && d_first.is_finite(), ErrorCode::SupportViolation, "support condition fails");

    Labels first = a1;
    first.insert(first.end(), b.begin(), b.end());
    const auto nu = nu_state(r, first, b, sigma_b, alpha);
    std::vector<std::size_t> a2_idx, cond_idx;
    for (std::size_t i = n1; i < n1 + n2; ++i) a2_idx.push_back(i);
    for (std::size_t i = 0; i < n1; ++i) cond_idx.push_back(i);
    for (std::size_t i = 0; i < nb; ++i) cond_idx.push_back(n1 + n2 + i);
    const double h = h_down(nu, a2_idx, cond_idx, alpha);
    return std::abs(-lhs.value() - (-d_first.value() + h));
}

}  // namespace renyi
