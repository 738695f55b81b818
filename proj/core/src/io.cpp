#include "renyi/io.hpp"

#include <fstream>

#include "renyi/errors.hpp"

namespace renyi {

namespace {

template <typename F>
auto parsing(const char* what, F&& f) {
    try {
        return f();
    } catch (const nlohmann::json::exception& e) {
        fail(ErrorCode::BadInput, std::string("malformed ") + what + ": " + e.what());
    }
}

Dims dims_from(const Json& j) { return j.get<Dims>(); }

Json angles_json(const std::vector<BlochAngles>& v) {
    Json out = Json::array();
    for (const auto& a : v) out.push_back({{"theta", a.theta}, {"phi", a.phi}});
    return out;
}

std::vector<BlochAngles> angles_from(const Json& j) {
    std::vector<BlochAngles> out;
    for (const auto& a : j) out.push_back({a.at("theta").get<double>(), a.at("phi").get<double>()});
    return out;
}

}  // namespace

Json to_json(const ComplexMatrix& m) {
    Json rows = Json::array();
    for (std::size_t r = 0; r < m.rows(); ++r) {
        Json row = Json::array();
        for (std::size_t c = 0; c < m.cols(); ++c) row.push_back({m(r, c).real(), m(r, c).imag()});
        rows.push_back(std::move(row));
    }
    return rows;
}

ComplexMatrix matrix_from_json(const Json& j) {
    return parsing("matrix", [&] {
        require(j.is_array() && !j.empty(), ErrorCode::BadInput, "matrix must be a non-empty list of rows");
        const std::size_t rows = j.size();
        const std::size_t cols = j.at(0).size();
        ComplexMatrix m(rows, cols);
        for (std::size_t r = 0; r < rows; ++r) {
            require(j.at(r).size() == cols, ErrorCode::BadShape, "ragged matrix rows");
            for (std::size_t c = 0; c < cols; ++c) {
                const auto& e = j.at(r).at(c);
                if (e.is_number()) m(r, c) = e.get<double>();
                else m(r, c) = cplx(e.at(0).get<double>(), e.at(1).get<double>());
            }
        }
        return m;
    });
}

Json to_json(const DensityOperator& rho) {
    Json j{{"schema", kSchemaVersion}, {"dims", rho.dims}, {"matrix", to_json(rho.matrix)}};
    if (!rho.labels.empty()) j["labels"] = rho.labels;
    if (rho.subnormalized) j["subnormalized"] = true;
    return j;
}

DensityOperator density_from_json(const Json& j) {
    return parsing("density operator", [&] {
        auto m = matrix_from_json(j.at("matrix"));
        Dims dims = j.contains("dims") ? dims_from(j.at("dims")) : Dims{m.rows()};
        auto labels = j.value("labels", std::vector<std::string>{});
        DensityOperator rho(std::move(m), std::move(dims), std::move(labels), j.value("subnormalized", false));
        rho.validate();
        return rho;
    });
}

Json to_json(const CqState& rho) {
    Json regs = Json::array();
    for (const auto& r : rho.registers) regs.push_back({{"label", r.label}, {"size", r.size}});
    Json conds = Json::array();
    for (const auto& c : rho.conditionals) conds.push_back(to_json(c.matrix));
    return {{"schema", kSchemaVersion},
            {"registers", regs},
            {"weights", rho.weights},
            {"quantum", {{"dims", rho.quantum_dims()}, {"labels", rho.quantum_labels()}}},
            {"conditionals", conds}};
}

CqState cq_from_json(const Json& j) {
    return parsing("cq state", [&] {
        std::vector<ClassicalRegister> regs;
        for (const auto& r : j.at("registers")) regs.push_back({r.at("label").get<std::string>(), r.at("size").get<std::size_t>()});
        auto weights = j.at("weights").get<std::vector<double>>();
        Dims qdims{1};
        std::vector<std::string> qlabels;
        if (j.contains("quantum")) {
            qdims = dims_from(j.at("quantum").at("dims"));
            qlabels = j.at("quantum").value("labels", std::vector<std::string>{});
        }
        if (!j.contains("conditionals")) {
            auto rho = CqState::classical(std::move(regs), std::move(weights));
            rho.validate();
            return rho;
        }
        std::vector<DensityOperator> conds;
        for (const auto& c : j.at("conditionals")) conds.emplace_back(matrix_from_json(c), qdims, qlabels);
        CqState rho(std::move(regs), std::move(weights), std::move(conds));
        rho.validate();
        return rho;
    });
}

CqState state_from_json(const Json& j) {
    if (j.contains("registers")) return cq_from_json(j);
    const auto rho = density_from_json(j);
    return CqState({}, {1.0}, {rho});
}

Json to_json(const KrausChannel& ch) {
    Json ops = Json::array();
    for (const auto& k : ch.kraus) ops.push_back(to_json(k));
    Json j{{"schema", kSchemaVersion}, {"kraus", ops}, {"in", ch.input_dims}, {"out", ch.output_dims}};
    if (ch.cp_only) j["cpOnly"] = true;
    return j;
}

KrausChannel channel_from_json(const Json& j) {
    return parsing("channel", [&] {
        std::vector<ComplexMatrix> ops;
        for (const auto& k : j.at("kraus")) ops.push_back(matrix_from_json(k));
        return KrausChannel(std::move(ops), dims_from(j.at("in")), dims_from(j.at("out")), j.value("cpOnly", false));
    });
}

Json to_json(const SamplingProtocol& p) {
    Json table = Json::array();
    for (std::size_t a = 0; a < p.outcomes; ++a) {
        Json row = Json::array();
        for (std::size_t b = 0; b < p.settings; ++b) row.push_back(p.score_of(a, b));
        table.push_back(row);
    }
    return {{"schema", kSchemaVersion}, {"gamma", p.gamma},         {"pGen", p.p_gen},
            {"pTest", p.p_test},        {"scoreBits", p.score_bits}, {"score", table}};
}

SamplingProtocol protocol_from_json(const Json& j) {
    return parsing("protocol", [&] {
        if (!j.contains("score")) {
            // named score rules; only CHSH has one
            const auto bell = j.value("bell", std::string());
            require(bell == "CHSH" || bell == "chsh", ErrorCode::BadInput,
                    "protocol needs a score table or \"bell\": \"CHSH\"");
            auto p = chsh_protocol(j.at("gamma").get<double>());
            if (j.contains("pGen")) p.p_gen = j.at("pGen").get<Distribution>();
            if (j.contains("pTest")) p.p_test = j.at("pTest").get<Distribution>();
            p.validate();
            return p;
        }
        SamplingProtocol p;
        p.gamma = j.at("gamma").get<double>();
        p.p_gen = j.at("pGen").get<Distribution>();
        p.p_test = j.at("pTest").get<Distribution>();
        p.score_bits = j.value("scoreBits", std::size_t{1});
        const auto& table = j.at("score");
        p.outcomes = table.size();
        require(p.outcomes > 0, ErrorCode::BadInput, "score table is empty");
        p.settings = table.at(0).size();
        p.score.assign(p.outcomes * p.settings, 0);
        for (std::size_t a = 0; a < p.outcomes; ++a) {
            require(table.at(a).size() == p.settings, ErrorCode::BadShape, "ragged score table");
            for (std::size_t b = 0; b < p.settings; ++b) p.score[a * p.settings + b] = table.at(a).at(b).get<std::uint32_t>();
        }
        p.validate();
        return p;
    });
}

Json to_json(const TwoQubitStrategy& s) {
    return {{"schema", kSchemaVersion}, {"state", to_json(s.state)}, {"alice", angles_json(s.alice)}, {"bob", angles_json(s.bob)}};
}

TwoQubitStrategy strategy_from_json(const Json& j) {
    return parsing("strategy", [&] {
        TwoQubitStrategy s;
        s.state = density_from_json(j.at("state"));
        s.alice = angles_from(j.at("alice"));
        s.bob = angles_from(j.at("bob"));
        s.validate();
        return s;
    });
}

Json to_json(const BellFunctional& f) {
    Json corr = Json::array();
    for (std::size_t x = 0; x < f.nx; ++x) {
        Json row = Json::array();
        for (std::size_t y = 0; y < f.ny; ++y) row.push_back(f.correlators.empty() ? 0.0 : f.correlators[x * f.ny + y]);
        corr.push_back(row);
    }
    Json j{{"schema", kSchemaVersion},   {"name", f.name},
           {"correlators", corr},        {"localBound", f.local_bound},
           {"quantumBound", f.quantum_bound}};
    if (!f.probabilities.empty()) j["probabilities"] = f.probabilities;
    return j;
}

BellFunctional bell_from_json(const Json& j) {
    return parsing("Bell functional", [&] {
        BellFunctional f;
        f.name = j.value("name", std::string("custom"));
        const auto& corr = j.at("correlators");
        f.nx = corr.size();
        require(f.nx > 0, ErrorCode::BadInput, "correlator table is empty");
        f.ny = corr.at(0).size();
        for (const auto& row : corr) {
            require(row.size() == f.ny, ErrorCode::BadShape, "ragged correlator table");
            for (const auto& c : row) {
                const double v = c.get<double>();
                require(std::isfinite(v), ErrorCode::BadInput, "correlator coefficients must be finite");
                f.correlators.push_back(v);
            }
        }
        if (j.contains("probabilities")) f.probabilities = j.at("probabilities").get<std::vector<double>>();
        f.local_bound = j.value("localBound", 0.0);
        f.quantum_bound = j.value("quantumBound", 0.0);
        return f;
    });
}

Json to_json(const ConstraintSet& cs) {
    Json rows = Json::array();
    for (std::size_t k = 0; k < cs.size(); ++k) rows.push_back({{"g", cs.g[k]}, {"t", cs.t[k]}});
    return {{"schema", kSchemaVersion}, {"alphabet", cs.alphabet}, {"rows", rows}};
}

ConstraintSet constraints_from_json(const Json& j) {
    return parsing("constraint set", [&] {
        auto cs = ConstraintSet::full(j.at("alphabet").get<std::size_t>());
        for (const auto& r : j.value("rows", Json::array())) cs.add(r.at("g").get<std::vector<double>>(), r.at("t").get<double>());
        cs.validate();
        return cs;
    });
}

Json to_json(const CounterexampleReport& r) {
    return {{"schema", kSchemaVersion},
            {"alpha", r.alpha},
            {"lhs", r.lhs},
            {"firstTerm", r.first_term},
            {"infUp", r.inf_up},
            {"rhs", r.rhs},
            {"violated", r.violated},
            {"hDownLhs", r.h_down_lhs},
            {"hDownFirst", r.h_down_first},
            {"hDownInf", r.h_down_inf},
            {"hDownRhs", r.h_down_rhs},
            {"saturationGap", r.saturation_gap}};
}

Json to_json(const RateReport& r) {
    Json j{{"schema", kSchemaVersion},
           {"alpha", r.alpha},
           {"hAlpha", r.h_alpha},
           {"hAlphaKind", "upper bound on the infimum via best-found attack"},
           {"hGen", r.h_gen},
           {"vStar", r.v_star},
           {"pC", r.p_c},
           {"kktResidual", r.kkt_residual},
           {"strategy", to_json(r.strategy)},
           {"chshValue", r.chsh_value},
           {"evaluations", r.evaluations},
           {"restarts", r.restarts}};
    if (r.finite_size) {
        const auto& f = *r.finite_size;
        j["finiteSize"] = {{"n", f.n}, {"pOmega", f.p_omega}, {"epsilon", f.epsilon}, {"totalBits", f.total_bits}};
        j["keyLength"] = f.key_length;
    }
    return j;
}

Json to_json(const ComparisonRow& r) {
    return {{"alpha", r.alpha},   {"hDown", r.h_down},           {"hPartial", r.h_partial},
            {"gap", r.gap},       {"perSetting", r.per_setting}, {"asymmetry", r.asymmetry}};
}

Json read_json_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    require(static_cast<bool>(in), ErrorCode::BadInput, "cannot open " + path.string());
    try {
        return Json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        fail(ErrorCode::BadInput, path.string() + ": " + e.what());
    }
}

void write_json_file(const std::filesystem::path& path, const Json& j) {
    std::ofstream out(path);
    require(static_cast<bool>(out), ErrorCode::BadInput, "cannot write " + path.string());
    out << j.dump(2) << '\n';
}

}  // namespace renyi
