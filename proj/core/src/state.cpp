#include "renyi/state.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "renyi/errors.hpp"
#include "renyi/linalg.hpp"

namespace renyi {

namespace {

std::vector<std::size_t> strides_of(const Dims& dims) {
    std::vector<std::size_t> s(dims.size(), 1);
    for (std::size_t k = dims.size(); k-- > 1;) s[k - 1] = s[k] * dims[k];
    return s;
}

// Offsets contributed by the listed subsystems, enumerated in their own digit order.
std::vector<std::size_t> offsets(const std::vector<std::size_t>& subsystems, const Dims& dims) {
    const auto strides = strides_of(dims);
    Dims sub;
    for (auto k : subsystems) sub.push_back(dims[k]);
    const std::size_t n = product(sub);
    std::vector<std::size_t> out(n, 0);
    for (std::size_t i = 0; i < n; ++i) {
        const auto d = digits_of(i, sub);
        for (std::size_t k = 0; k < subsystems.size(); ++k) out[i] += d[k] * strides[subsystems[k]];
    }
    return out;
}

std::vector<std::size_t> complement(const std::vector<std::size_t>& keep, std::size_t n) {
    std::vector<std::size_t> rest;
    for (std::size_t k = 0; k < n; ++k)
        if (std::find(keep.begin(), keep.end(), k) == keep.end()) rest.push_back(k);
    return rest;
}

void check_subsystems(const std::vector<std::size_t>& subs, std::size_t n) {
    std::set<std::size_t> seen;
    for (auto k : subs) {
        require(k < n, ErrorCode::BadIndex, "subsystem index out of range");
        require(seen.insert(k).second, ErrorCode::BadIndex, "repeated subsystem index");
    }
}

std::vector<std::string> pick(const std::vector<std::string>& labels, const std::vector<std::size_t>& idx) {
    std::vector<std::string> out;
    if (labels.empty()) return out;
    for (auto k : idx) out.push_back(labels[k]);
    return out;
}

}  // namespace

std::size_t product(const Dims& dims) {
    std::size_t p = 1;
    for (auto d : dims) p *= d;
    return p;
}

std::vector<std::size_t> digits_of(std::size_t index, const Dims& dims) {
    std::vector<std::size_t> d(dims.size(), 0);
    for (std::size_t k = dims.size(); k-- > 0;) {
        d[k] = index % dims[k];
        index /= dims[k];
    }
    return d;
}

std::size_t index_of(const std::vector<std::size_t>& digits, const Dims& dims) {
    require(digits.size() == dims.size(), ErrorCode::BadIndex, "digit count does not match dims");
    std::size_t idx = 0;
    for (std::size_t k = 0; k < dims.size(); ++k) {
        require(digits[k] < dims[k], ErrorCode::BadIndex, "digit out of range");
        idx = idx * dims[k] + digits[k];
    }
    return idx;
}

DensityOperator::DensityOperator(ComplexMatrix m, Dims d, std::vector<std::string> l, bool sub)
    : matrix(std::move(m)), dims(std::move(d)), labels(std::move(l)), subnormalized(sub) {
    require(matrix.square(), ErrorCode::BadShape, "density operator must be square");
    require(product(dims) == matrix.rows(), ErrorCode::DimMismatch, "dims do not multiply to matrix size");
    require(labels.empty() || labels.size() == dims.size(), ErrorCode::BadShape, "one label per subsystem");
}

std::size_t DensityOperator::subsystem(const std::string& label) const {
    auto it = std::find(labels.begin(), labels.end(), label);
    require(it != labels.end(), ErrorCode::BadPartition, "unknown subsystem label '" + label + "'");
    return static_cast<std::size_t>(it - labels.begin());
}

void DensityOperator::validate() const {
    require(matrix.is_hermitian(kHermitianTol), ErrorCode::NotHermitian, "state is not Hermitian");
    const auto eig = hermitian_eig(matrix);
    for (double x : eig.values) require(x >= -kHermitianTol, ErrorCode::NotPSD, "state has a negative eigenvalue");
    const double t = trace();
    if (subnormalized)
        require(t <= 1.0 + kHermitianTol, ErrorCode::BadProbability, "sub-normalized state has trace > 1");
    else
        require(std::abs(t - 1.0) <= kHermitianTol, ErrorCode::BadProbability, "state is not normalized");
}

DensityOperator maximally_mixed(const Dims& dims, std::vector<std::string> labels) {
    const std::size_t n = product(dims);
    return {ComplexMatrix::identity(n) * cplx(1.0 / static_cast<double>(n)), dims, std::move(labels)};
}

DensityOperator pure_state(const std::vector<cplx>& psi, Dims dims, std::vector<std::string> labels) {
    double nrm = 0.0;
    for (const auto& z : psi) nrm += std::norm(z);
    require(nrm > 0.0, ErrorCode::BadInput, "zero vector");
    auto m = ComplexMatrix::outer(psi);
    m *= 1.0 / nrm;
    return {std::move(m), std::move(dims), std::move(labels)};
}

DensityOperator tensor(const DensityOperator& a, const DensityOperator& b) {
    Dims dims = a.dims;
    dims.insert(dims.end(), b.dims.begin(), b.dims.end());
    std::vector<std::string> labels;
    if (!a.labels.empty() && !b.labels.empty()) {
        labels = a.labels;
        labels.insert(labels.end(), b.labels.begin(), b.labels.end());
    }
    return {kron(a.matrix, b.matrix), dims, labels, a.subnormalized || b.subnormalized};
}

DensityOperator partial_trace(const DensityOperator& rho, const std::vector<std::size_t>& keep) {
    check_subsystems(keep, rho.dims.size());
    const auto traced = complement(keep, rho.dims.size());
    const auto ko = offsets(keep, rho.dims);
    const auto to = offsets(traced, rho.dims);
    ComplexMatrix out(ko.size(), ko.size());
    for (std::size_t i = 0; i < ko.size(); ++i)
        for (std::size_t j = 0; j < ko.size(); ++j) {
            cplx s = 0.0;
            for (auto t : to) s += rho.matrix(ko[i] + t, ko[j] + t);
            out(i, j) = s;
        }
    Dims dims;
    for (auto k : keep) dims.push_back(rho.dims[k]);
    return {std::move(out), dims, pick(rho.labels, keep), rho.subnormalized};
}

DensityOperator permute(const DensityOperator& rho, const std::vector<std::size_t>& order) {
    require(order.size() == rho.dims.size(), ErrorCode::BadIndex, "permutation must list every subsystem");
    check_subsystems(order, rho.dims.size());
    const auto off = offsets(order, rho.dims);
    ComplexMatrix out(off.size(), off.size());
    for (std::size_t i = 0; i < off.size(); ++i)
        for (std::size_t j = 0; j < off.size(); ++j) out(i, j) = rho.matrix(off[i], off[j]);
    Dims dims;
    for (auto k : order) dims.push_back(rho.dims[k]);
    return {std::move(out), dims, pick(rho.labels, order), rho.subnormalized};
}

ComplexMatrix embed(const ComplexMatrix& op, const std::vector<std::size_t>& subsystems, const Dims& dims) {
    check_subsystems(subsystems, dims.size());
    const auto so = offsets(subsystems, dims);
    require(op.rows() == so.size() && op.cols() == so.size(), ErrorCode::DimMismatch,
            "operator size does not match subsystems");
    const auto ro = offsets(complement(subsystems, dims.size()), dims);
    const std::size_t n = product(dims);
    ComplexMatrix out(n, n);
    for (auto r : ro)
        for (std::size_t i = 0; i < so.size(); ++i)
            for (std::size_t j = 0; j < so.size(); ++j) out(so[i] + r, so[j] + r) = op(i, j);
    return out;
}

ComplexMatrix conditional_operator(const DensityOperator& rho, const std::vector<std::size_t>& conditioning) {
    const auto rb = partial_trace(rho, conditioning);
    const auto inv_sqrt = embed(matrix_power(rb.matrix, -0.5), conditioning, rho.dims);
    return (inv_sqrt * rho.matrix * inv_sqrt).hermitian_part();
}

std::vector<cplx> purification_vector(const ComplexMatrix& rho) {
    const auto eig = psd_eig(rho);
    const double cut = support_threshold(eig.values);
    const std::size_t n = rho.rows();
    std::vector<cplx> psi(n * n, 0.0);
    for (std::size_t k = 0; k < n; ++k) {
        if (eig.values[k] <= cut) continue;
        const double w = std::sqrt(eig.values[k]);
        for (std::size_t i = 0; i < n; ++i) psi[i * n + k] = w * eig.vectors(i, k);
    }
    return psi;
}

DensityOperator purify(const DensityOperator& rho, const std::string& copy_label) {
    const auto psi = purification_vector(rho.matrix);
    const std::size_t n = rho.dim();
    Dims dims = rho.dims;
    dims.push_back(n);
    std::vector<std::string> labels = rho.labels;
    if (!labels.empty()) labels.push_back(copy_label);
    return pure_state(psi, dims, labels);
}

double trace_distance(const ComplexMatrix& rho, const ComplexMatrix& tau) {
    require(rho.rows() == tau.rows() && rho.cols() == tau.cols(), ErrorCode::DimMismatch,
            "trace distance needs equal dimensions");
    return 0.5 * trace_norm((rho - tau).hermitian_part());
}

double trace_distance(const DensityOperator& rho, const DensityOperator& tau) {
    require(rho.dims == tau.dims, ErrorCode::DimMismatch, "trace distance needs equal dims");
    return trace_distance(rho.matrix, tau.matrix);
}

std::size_t outcome_count(const std::vector<ClassicalRegister>& registers) {
    std::size_t n = 1;
    for (const auto& r : registers) n *= r.size;
    return n;
}

CqState::CqState(std::vector<ClassicalRegister> regs, std::vector<double> w, std::vector<DensityOperator> conds)
    : registers(std::move(regs)), weights(std::move(w)), conditionals(std::move(conds)) {
    require(weights.size() == outcome_count(registers), ErrorCode::BadShape, "one weight per classical outcome");
    require(conditionals.size() == weights.size(), ErrorCode::BadShape, "one conditional per classical outcome");
    for (const auto& c : conditionals)
        require(c.dims == conditionals.front().dims, ErrorCode::DimMismatch, "conditionals must share dims");
}

CqState CqState::classical(std::vector<ClassicalRegister> regs, std::vector<double> w) {
    const std::size_t n = w.size();
    std::vector<DensityOperator> conds(n, DensityOperator(ComplexMatrix::identity(1), {}, {}));
    return {std::move(regs), std::move(w), std::move(conds)};
}

Dims CqState::classical_dims() const {
    Dims d;
    for (const auto& r : registers) d.push_back(r.size);
    return d;
}

bool CqState::has_classical(const std::string& label) const {
    return std::any_of(registers.begin(), registers.end(), [&](const auto& r) { return r.label == label; });
}

bool CqState::has_quantum(const std::string& label) const {
    const auto& l = quantum_labels();
    return std::find(l.begin(), l.end(), label) != l.end();
}

std::size_t CqState::classical_index(const std::string& label) const {
    for (std::size_t k = 0; k < registers.size(); ++k)
        if (registers[k].label == label) return k;
    fail(ErrorCode::BadPartition, "unknown classical register '" + label + "'");
}

std::size_t CqState::quantum_index(const std::string& label) const { return conditionals.front().subsystem(label); }

std::vector<std::string> CqState::all_labels() const {
    std::vector<std::string> out;
    for (const auto& r : registers) out.push_back(r.label);
    for (const auto& l : quantum_labels()) out.push_back(l);
    return out;
}

void CqState::validate() const {
    double s = 0.0;
    for (double w : weights) {
        require(w >= -kHermitianTol, ErrorCode::BadProbability, "negative classical weight");
        s += w;
    }
    require(std::abs(s - 1.0) <= kHermitianTol, ErrorCode::BadProbability, "classical weights do not sum to 1");
    for (const auto& c : conditionals) c.validate();
    require(quantum_labels().size() == quantum_dims().size(), ErrorCode::BadShape, "quantum subsystems need labels");
}

CqState marginal(const CqState& rho, const std::vector<std::string>& keep) {
    std::vector<std::size_t> keep_c, keep_q;
    std::set<std::string> seen;
    for (const auto& l : keep) {
        require(seen.insert(l).second, ErrorCode::BadPartition, "register listed twice: " + l);
        if (rho.has_classical(l))
            keep_c.push_back(rho.classical_index(l));
        else if (rho.has_quantum(l))
            keep_q.push_back(rho.quantum_index(l));
        else
            fail(ErrorCode::BadPartition, "unknown register '" + l + "'");
    }
    std::sort(keep_c.begin(), keep_c.end());
    std::sort(keep_q.begin(), keep_q.end());
    std::vector<ClassicalRegister> regs;
    for (auto k : keep_c) regs.push_back(rho.registers[k]);
    const auto cd = rho.classical_dims();
    Dims nd;
    for (auto k : keep_c) nd.push_back(cd[k]);
    const std::size_t n = product(nd);

    Dims qd;
    std::vector<std::string> ql;
    for (auto k : keep_q) {
        qd.push_back(rho.quantum_dims()[k]);
        ql.push_back(rho.quantum_labels()[k]);
    }
    const std::size_t qn = product(qd);
    std::vector<double> w(n, 0.0);
    std::vector<ComplexMatrix> acc(n, ComplexMatrix(qn, qn));
    for (std::size_t x = 0; x < rho.outcomes(); ++x) {
        const auto d = digits_of(x, cd);
        std::vector<std::size_t> sub;
        for (auto k : keep_c) sub.push_back(d[k]);
        const std::size_t y = index_of(sub, nd);
        const double p = rho.weights[x];
        w[y] += p;
        if (p == 0.0) continue;
        acc[y] += partial_trace(rho.conditionals[x], keep_q).matrix * cplx(p);
    }
    std::vector<DensityOperator> conds;
    for (std::size_t y = 0; y < n; ++y) {
        if (w[y] > 0.0)
            conds.emplace_back((acc[y] * cplx(1.0 / w[y])).hermitian_part(), qd, ql);
        else
            conds.push_back(maximally_mixed(qd, ql));
    }
    return {regs, w, conds};
}

std::vector<Branch> split(const CqState& rho, const std::vector<std::string>& on) {
    std::vector<std::size_t> idx;
    for (const auto& l : on) {
        require(rho.has_classical(l), ErrorCode::BNotClassical, "cannot condition on non-classical register '" + l + "'");
        idx.push_back(rho.classical_index(l));
    }
    std::vector<std::size_t> rest;
    for (std::size_t k = 0; k < rho.registers.size(); ++k)
        if (std::find(idx.begin(), idx.end(), k) == idx.end()) rest.push_back(k);
    const auto cd = rho.classical_dims();
    Dims od, rd;
    for (auto k : idx) od.push_back(cd[k]);
    for (auto k : rest) rd.push_back(cd[k]);
    std::vector<ClassicalRegister> rregs;
    for (auto k : rest) rregs.push_back(rho.registers[k]);

    const std::size_t no = product(od), nr = product(rd);
    std::vector<std::vector<double>> w(no, std::vector<double>(nr, 0.0));
    std::vector<std::vector<std::size_t>> src(no, std::vector<std::size_t>(nr, 0));
    for (std::size_t x = 0; x < rho.outcomes(); ++x) {
        const auto d = digits_of(x, cd);
        std::vector<std::size_t> a, b;
        for (auto k : idx) a.push_back(d[k]);
        for (auto k : rest) b.push_back(d[k]);
        const auto i = index_of(a, od), j = index_of(b, rd);
        w[i][j] = rho.weights[x];
        src[i][j] = x;
    }
    std::vector<Branch> out;
    for (std::size_t i = 0; i < no; ++i) {
        const double p = std::accumulate(w[i].begin(), w[i].end(), 0.0);
        if (p <= 0.0) continue;
        std::vector<double> cw(nr);
        std::vector<DensityOperator> conds;
        for (std::size_t j = 0; j < nr; ++j) {
            cw[j] = w[i][j] / p;
            conds.push_back(rho.conditionals[src[i][j]]);
        }
        out.push_back({p, digits_of(i, od), CqState(rregs, cw, conds)});
    }
    return out;
}

DensityOperator to_dense(const CqState& rho) {
    const std::size_t nc = rho.outcomes(), nq = rho.quantum_dim();
    ComplexMatrix m(nc * nq, nc * nq);
    for (std::size_t x = 0; x < nc; ++x) {
        const double p = rho.weights[x];
        if (p == 0.0) continue;
        const auto& c = rho.conditionals[x].matrix;
        for (std::size_t i = 0; i < nq; ++i)
            for (std::size_t j = 0; j < nq; ++j) m(x * nq + i, x * nq + j) = p * c(i, j);
    }
    Dims dims = rho.classical_dims();
    std::vector<std::string> labels;
    for (const auto& r : rho.registers) labels.push_back(r.label);
    for (auto d : rho.quantum_dims()) dims.push_back(d);
    for (const auto& l : rho.quantum_labels()) labels.push_back(l);
    return {std::move(m), dims, labels};
}

DensityOperator quantum_marginal(const CqState& rho) {
    ComplexMatrix m(rho.quantum_dim(), rho.quantum_dim());
    for (std::size_t x = 0; x < rho.outcomes(); ++x)
        if (rho.weights[x] != 0.0) m += rho.conditionals[x].matrix * cplx(rho.weights[x]);
    return {m.hermitian_part(), rho.quantum_dims(), rho.quantum_labels()};
}

std::vector<double> classical_marginal(const CqState& rho) { return rho.weights; }

CqState append_classical(const CqState& rho, const ClassicalRegister& reg,
                         const std::vector<std::vector<double>>& given_outcome) {
    require(given_outcome.size() == rho.outcomes(), ErrorCode::BadShape, "one distribution per existing outcome");
    require(!rho.has_classical(reg.label) && !rho.has_quantum(reg.label), ErrorCode::BadPartition,
            "register label already used: " + reg.label);
    auto regs = rho.registers;
    regs.push_back(reg);
    std::vector<double> w;
    std::vector<DensityOperator> conds;
    for (std::size_t x = 0; x < rho.outcomes(); ++x) {
        require(given_outcome[x].size() == reg.size, ErrorCode::BadShape, "distribution size must match register");
        for (std::size_t y = 0; y < reg.size; ++y) {
            w.push_back(rho.weights[x] * given_outcome[x][y]);
            conds.push_back(rho.conditionals[x]);
        }
    }
    return {regs, w, conds};
}

CqState map_conditionals(const CqState& rho, const std::vector<DensityOperator>& replaced) {
    return {rho.registers, rho.weights, replaced};
}

double trace_distance(const CqState& rho, const CqState& tau) {
    require(rho.registers == tau.registers, ErrorCode::AlphabetMismatch, "classical registers differ");
    require(rho.quantum_dims() == tau.quantum_dims(), ErrorCode::DimMismatch, "quantum dims differ");
    double s = 0.0;
    for (std::size_t x = 0; x < rho.outcomes(); ++x) {
        const auto a = rho.conditionals[x].matrix * cplx(rho.weights[x]);
        const auto b = tau.conditionals[x].matrix * cplx(tau.weights[x]);
        s += trace_distance(a, b);
    }
    return s;
}

BlockOperator BlockOperator::single(const ComplexMatrix& sigma, Dims dims) {
    return {{}, {1.0}, {sigma}, std::move(dims)};
}

BlockOperator BlockOperator::identity(const std::vector<ClassicalRegister>& regs, Dims dims) {
    const std::size_t n = outcome_count(regs);
    return {regs, std::vector<double>(n, 1.0), std::vector<ComplexMatrix>(n, ComplexMatrix::identity(product(dims))),
            std::move(dims)};
}

ComplexMatrix BlockOperator::dense() const {
    const std::size_t nq = quantum_dim(), nc = weights.size();
    ComplexMatrix m(nc * nq, nc * nq);
    for (std::size_t x = 0; x < nc; ++x)
        for (std::size_t i = 0; i < nq; ++i)
            for (std::size_t j = 0; j < nq; ++j) m(x * nq + i, x * nq + j) = weights[x] * blocks[x](i, j);
    return m;
}

}  // namespace renyi
