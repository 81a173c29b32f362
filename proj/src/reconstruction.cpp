#include "qmt/reconstruction.hpp"

#include <cmath>
#include <stdexcept>

#include "qmt/hermitian.hpp"

namespace qmt {

namespace {

constexpr double kWeightFloor = 1e-12;

std::size_t int_pow_sz(std::size_t base, std::size_t exp) {
    std::size_t out = 1;
    for (std::size_t i = 0; i < exp; ++i) out *= base;
    return out;
}

std::vector<int> decode_tuple(std::size_t c, int q, int k) {
    std::vector<int> tuple(static_cast<std::size_t>(k), 0);
    for (int y = k; y-- > 0;) {
        tuple[static_cast<std::size_t>(y)] = static_cast<int>(c % static_cast<std::size_t>(q));
        c /= static_cast<std::size_t>(q);
    }
    return tuple;
}

void check_density(const MatrixXcd& a, Eigen::Index dim, double tol, const std::string& what) {
    if (a.rows() != dim || a.cols() != dim) {
        throw std::invalid_argument(what + " has wrong dimension");
    }
    if (max_abs(a - a.adjoint()) > tol) throw std::invalid_argument(what + " is not hermitian");
    if (std::abs(a.trace().real() - 1.0) > tol || std::abs(a.trace().imag()) > tol) {
        throw std::invalid_argument(what + " does not have unit trace");
    }
    if (min_eigenvalue(0.5 * (a + a.adjoint())) < -tol) {
        throw std::invalid_argument(what + " is not positive semidefinite");
    }
}

// Interleave [m, n_1..n_k, m_1..m_k] into [m, n_1, m_1, ..., n_k, m_k].
std::vector<int> interleave_order(int k) {
    std::vector<int> order;
    order.push_back(0);
    for (int y = 0; y < k; ++y) {
        order.push_back(1 + y);
        order.push_back(1 + k + y);
    }
    return order;
}

} // namespace

MatrixXcd BlockStructure::projection(int label) const {
    const auto& w = v[static_cast<std::size_t>(label)];
    return w * w.adjoint();
}

void BlockStructure::validate(double tol) const {
    const int nq = q();
    if (d < 1 || nq < 1) throw std::invalid_argument("block structure needs d >= 1 and q >= 1");
    if (static_cast<int>(n_dims.size()) != nq || static_cast<int>(m_dims.size()) != nq) {
        throw std::invalid_argument("block structure has mismatched split lists");
    }
    MatrixXcd sum = MatrixXcd::Zero(d, d);
    int total = 0;
    for (int w = 0; w < nq; ++w) {
        const int nm = n_dims[static_cast<std::size_t>(w)] * m_dims[static_cast<std::size_t>(w)];
        if (n_dims[static_cast<std::size_t>(w)] < 1 || m_dims[static_cast<std::size_t>(w)] < 1) {
            throw std::invalid_argument("invalid dimension split: factors must be positive");
        }
        const auto& vw = v[static_cast<std::size_t>(w)];
        if (vw.rows() != d || vw.cols() != nm) {
            throw std::invalid_argument("block isometry has wrong shape");
        }
        if (max_abs(vw.adjoint() * vw - MatrixXcd::Identity(nm, nm)) > tol) {
            throw std::invalid_argument("block map is not an isometry");
        }
        sum += vw * vw.adjoint();
        total += nm;
    }
    if (total != d || max_abs(sum - MatrixXcd::Identity(d, d)) > tol) {
        throw std::invalid_argument("invalid dimension split: blocks do not fill the site algebra");
    }
}

BlockStructure BlockStructure::standard(const std::vector<int>& n_dims,
                                        const std::vector<int>& m_dims) {
    if (n_dims.size() != m_dims.size() || n_dims.empty()) {
        throw std::invalid_argument("invalid dimension split: mismatched split lists");
    }
    BlockStructure bs;
    bs.n_dims = n_dims;
    bs.m_dims = m_dims;
    int total = 0;
    for (std::size_t w = 0; w < n_dims.size(); ++w) {
        if (n_dims[w] < 1 || m_dims[w] < 1) {
            throw std::invalid_argument("invalid dimension split: factors must be positive");
        }
        total += n_dims[w] * m_dims[w];
    }
    bs.d = total;
    int offset = 0;
    for (std::size_t w = 0; w < n_dims.size(); ++w) {
        const int nm = n_dims[w] * m_dims[w];
        MatrixXcd vw = MatrixXcd::Zero(total, nm);
        vw.block(offset, 0, nm, nm) = MatrixXcd::Identity(nm, nm);
        bs.v.push_back(std::move(vw));
        offset += nm;
    }
    return bs;
}

BlockStructure BlockStructure::rotated(const MatrixXcd& u) const {
    if (u.rows() != d || u.cols() != d) {
        throw std::invalid_argument("rotation must be a unitary on the site algebra");
    }
    if (max_abs(u.adjoint() * u - MatrixXcd::Identity(d, d)) > 1e-9) {
        throw std::invalid_argument("rotation must be a unitary on the site algebra");
    }
    BlockStructure out = *this;
    for (auto& vw : out.v) vw = u * vw;
    return out;
}

int ClassicalData::d() const {
    int total = 0;
    for (std::size_t w = 0; w < n_dims.size(); ++w) total += n_dims[w] * m_dims[w];
    return total;
}

void ClassicalData::validate(double tol) const {
    if (k < 1 || q < 1) throw std::invalid_argument("classical data needs k >= 1 and q >= 1");
    if (static_cast<int>(n_dims.size()) != q || static_cast<int>(m_dims.size()) != q) {
        throw std::invalid_argument("classical data has mismatched split lists");
    }
    for (int w = 0; w < q; ++w) {
        if (n_dims[static_cast<std::size_t>(w)] < 1 || m_dims[static_cast<std::size_t>(w)] < 1) {
            throw std::invalid_argument("invalid dimension split: factors must be positive");
        }
    }
    if (pi0.size() != q) throw std::invalid_argument("initial weights have wrong size");
    if (pi0.minCoeff() <= 0.0) throw std::invalid_argument("initial weights must be strictly positive");
    if (std::abs(pi0.sum() - 1.0) > tol) throw std::invalid_argument("initial weights do not sum to one");
    const auto cols = static_cast<Eigen::Index>(int_pow_sz(static_cast<std::size_t>(q),
                                                           static_cast<std::size_t>(k)));
    for (const auto& mat : pi) {
        if (mat.rows() != q || mat.cols() != cols) {
            throw std::invalid_argument("transition weights have wrong shape");
        }
        if (mat.minCoeff() <= 0.0) {
            throw std::invalid_argument("transition weights must be strictly positive");
        }
        for (int w = 0; w < q; ++w) {
            if (std::abs(mat.row(w).sum() - 1.0) > tol) {
                throw std::invalid_argument("transition weight row does not sum to one");
            }
        }
    }
}

void FactorStates::validate(const ClassicalData& data, double tol) const {
    if (static_cast<int>(eta0.size()) != data.q) {
        throw std::invalid_argument("root factor list has wrong size");
    }
    for (int w = 0; w < data.q; ++w) {
        check_density(eta0[static_cast<std::size_t>(w)], data.n_dims[static_cast<std::size_t>(w)],
                      tol, "root factor");
    }
    if (eta.size() != static_cast<std::size_t>(data.levels())) {
        throw std::invalid_argument("factor states do not cover the data levels");
    }
    const std::size_t big_q = int_pow_sz(static_cast<std::size_t>(data.q),
                                         static_cast<std::size_t>(data.k));
    for (std::size_t j = 0; j < eta.size(); ++j) {
        if (eta[j].size() != static_cast<std::size_t>(data.q) * big_q) {
            throw std::invalid_argument("factor state list of a level has wrong size");
        }
        for (int w = 0; w < data.q; ++w) {
            for (std::size_t c = 0; c < big_q; ++c) {
                Eigen::Index dim = data.m_dims[static_cast<std::size_t>(w)];
                for (int lbl : decode_tuple(c, data.q, data.k)) {
                    dim *= data.n_dims[static_cast<std::size_t>(lbl)];
                }
                check_density(eta[j][static_cast<std::size_t>(w) * big_q + c], dim, tol,
                              "chain factor");
            }
        }
    }
}

std::vector<double> markov_measure(const ClassicalData& data, int n) {
    data.validate();
    GibbsTable table;
    table.q = data.q;
    table.k = data.k;
    table.initial = data.pi0;
    table.weights = data.pi;
    return measure(table, n);
}

MatrixXcd eta_hat_density(const ClassicalData& data, const FactorStates& fs, int j,
                          int label) {
    if (j < 0 || j >= data.levels()) {
        throw std::invalid_argument("boundary factor level is outside the data");
    }
    const std::size_t big_q = int_pow_sz(static_cast<std::size_t>(data.q),
                                         static_cast<std::size_t>(data.k));
    const int m = data.m_dims[static_cast<std::size_t>(label)];
    MatrixXcd out = MatrixXcd::Zero(m, m);
    for (std::size_t c = 0; c < big_q; ++c) {
        std::vector<int> dims{m};
        std::vector<int> drop;
        for (int y = 0; y < data.k; ++y) drop.push_back(1 + y);
        for (int lbl : decode_tuple(c, data.q, data.k)) {
            dims.push_back(data.n_dims[static_cast<std::size_t>(lbl)]);
        }
        const auto& factor = fs.eta[static_cast<std::size_t>(j)]
                                   [static_cast<std::size_t>(label) * big_q + c];
        out += data.pi[static_cast<std::size_t>(j)](label, static_cast<Eigen::Index>(c)) *
               trace_out_legs(factor, dims, drop);
    }
    return out;
}

std::vector<MatrixXcd> derive_transition_states(const ClassicalData& data,
                                                const FactorStates& fs,
                                                const BlockStructure& bs, int j) {
    if (j < 0 || j + 1 >= data.levels()) {
        throw std::invalid_argument("block states of level " + std::to_string(j) +
                                    " need the data one level past it");
    }
    const int k = data.k;
    const int d = data.d();
    const std::size_t big_q = int_pow_sz(static_cast<std::size_t>(data.q),
                                         static_cast<std::size_t>(k));
    const auto dk = static_cast<Eigen::Index>(int_pow_sz(static_cast<std::size_t>(d),
                                                         static_cast<std::size_t>(k)));

    // Averaged boundary factors of the next level, one per label.
    std::vector<MatrixXcd> hats;
    hats.reserve(static_cast<std::size_t>(data.q));
    for (int w = 0; w < data.q; ++w) hats.push_back(eta_hat_density(data, fs, j + 1, w));

    std::vector<MatrixXcd> out;
    out.reserve(static_cast<std::size_t>(data.q));
    const std::vector<int> order = interleave_order(k);
    for (int w = 0; w < data.q; ++w) {
        const int m = data.m_dims[static_cast<std::size_t>(w)];
        MatrixXcd acc = MatrixXcd::Zero(m * dk, m * dk);
        for (std::size_t c = 0; c < big_q; ++c) {
            const std::vector<int> tuple = decode_tuple(c, data.q, k);
            std::vector<int> grouped_dims{m};
            std::vector<MatrixXcd> vs;
            std::vector<MatrixXcd> hat_factors;
            for (int lbl : tuple) {
                grouped_dims.push_back(data.n_dims[static_cast<std::size_t>(lbl)]);
                vs.push_back(bs.v[static_cast<std::size_t>(lbl)]);
                hat_factors.push_back(hats[static_cast<std::size_t>(lbl)]);
            }
            for (int lbl : tuple) grouped_dims.push_back(data.m_dims[static_cast<std::size_t>(lbl)]);

            const auto& factor = fs.eta[static_cast<std::size_t>(j)]
                                       [static_cast<std::size_t>(w) * big_q + c];
            const MatrixXcd grouped = kron(factor, kron_list(hat_factors));
            const MatrixXcd inner = permute_legs(grouped, grouped_dims, order);
            const MatrixXcd lift = kron(MatrixXcd::Identity(m, m), kron_list(vs));
            acc += data.pi[static_cast<std::size_t>(j)](w, static_cast<Eigen::Index>(c)) *
                   (lift * inner * lift.adjoint());
        }
        out.push_back(std::move(acc));
    }
    return out;
}

QmsSpec spec_from_classical(const ClassicalData& data, const FactorStates& fs,
                            const BlockStructure& bs) {
    data.validate();
    fs.validate(data);
    bs.validate();
    if (bs.n_dims != data.n_dims || bs.m_dims != data.m_dims) {
        throw std::invalid_argument("block structure splits do not match the classical data");
    }
    if (data.levels() < 2) {
        throw std::invalid_argument("building a spec needs at least two levels of data");
    }
    const int d = data.d();
    const int k = data.k;

    std::vector<LevelTransitionExpectation> levels;
    for (int j = 0; j + 1 < data.levels(); ++j) {
        const std::vector<MatrixXcd> phis = derive_transition_states(data, fs, bs, j);
        std::vector<TransitionBlock> blocks;
        for (int w = 0; w < data.q; ++w) {
            TransitionBlock blk;
            blk.label = w;
            blk.p = bs.projection(w);
            blk.n_dim = data.n_dims[static_cast<std::size_t>(w)];
            blk.m_dim = data.m_dims[static_cast<std::size_t>(w)];
            blk.v = bs.v[static_cast<std::size_t>(w)];
            blk.phi = phis[static_cast<std::size_t>(w)];
            blocks.push_back(std::move(blk));
        }
        const Superop map = pinched_superop(d, k, blocks);
        LevelTransitionExpectation lev;
        lev.level = j;
        for (const auto& site : enumerate_level(k, j).vertices) {
            SiteTransitionExpectation sx;
            sx.site = site;
            sx.level = j;
            sx.d = d;
            sx.k = k;
            sx.map = map;
            sx.blocks = blocks;
            lev.per_site.push_back(std::move(sx));
        }
        levels.push_back(std::move(lev));
    }

    MatrixXcd rho = MatrixXcd::Zero(d, d);
    for (int w = 0; w < data.q; ++w) {
        const auto& vw = bs.v[static_cast<std::size_t>(w)];
        rho += data.pi0(w) * (vw *
                              kron(fs.eta0[static_cast<std::size_t>(w)],
                                   eta_hat_density(data, fs, 0, w)) *
                              vw.adjoint());
    }
    LabeledOperator rho_op({root_site(k)}, {d}, std::move(rho));
    return QmsSpec{k, d, DensityState(std::move(rho_op)), std::move(levels)};
}

FiniteVolumeState assemble_state(const ClassicalData& data, const FactorStates& fs,
                                 const BlockStructure& bs, int n, std::size_t dim_cap) {
    if (n < 0 || n >= data.levels()) {
        throw std::invalid_argument("assembling depth " + std::to_string(n) +
                                    " needs boundary factors at that level");
    }
    if (bs.n_dims != data.n_dims || bs.m_dims != data.m_dims) {
        throw std::invalid_argument("block structure splits do not match the classical data");
    }
    const int k = data.k;
    const int d = data.d();
    const std::vector<SiteCoord> sites = lambda_sites(k, n);
    const std::size_t n_sites = sites.size();

    std::size_t full = 1;
    for (std::size_t i = 0; i < n_sites; ++i) {
        full *= static_cast<std::size_t>(d);
        check_dimension_guard(full, dim_cap);
    }

    std::vector<std::size_t> off(static_cast<std::size_t>(n) + 2, 0);
    for (int j = 0; j <= n; ++j) {
        off[static_cast<std::size_t>(j) + 1] =
            off[static_cast<std::size_t>(j)] + enumerate_level(k, j).vertices.size();
    }
    const std::size_t interior = off[static_cast<std::size_t>(n)];
    const std::size_t big_q = int_pow_sz(static_cast<std::size_t>(data.q),
                                         static_cast<std::size_t>(k));

    std::vector<MatrixXcd> hats;
    for (int w = 0; w < data.q; ++w) hats.push_back(eta_hat_density(data, fs, n, w));

    const std::vector<double> mu = markov_measure(data, n);
    MatrixXcd acc = MatrixXcd::Zero(static_cast<Eigen::Index>(full),
                                    static_cast<Eigen::Index>(full));
    for (std::size_t r = 0; r < mu.size(); ++r) {
        if (mu[r] <= kWeightFloor) continue;
        const Configuration sigma = configuration_from_rank(k, data.q, n, r);
        std::vector<int> nd(n_sites), md(n_sites);
        std::vector<MatrixXcd> vs(n_sites);
        for (std::size_t i = 0; i < n_sites; ++i) {
            const auto w = static_cast<std::size_t>(sigma.labels[i]);
            nd[i] = data.n_dims[w];
            md[i] = data.m_dims[w];
            vs[i] = bs.v[w];
        }
        std::vector<MatrixXcd> eta_sites;
        for (int j = 0; j < n; ++j) {
            for (std::size_t g = off[static_cast<std::size_t>(j)];
                 g < off[static_cast<std::size_t>(j) + 1]; ++g) {
                const std::size_t child0 =
                    off[static_cast<std::size_t>(j) + 1] +
                    (g - off[static_cast<std::size_t>(j)]) * static_cast<std::size_t>(k);
                std::size_t c = 0;
                for (int y = 0; y < k; ++y) {
                    c = c * static_cast<std::size_t>(data.q) +
                        static_cast<std::size_t>(sigma.labels[child0 + static_cast<std::size_t>(y)]);
                }
                eta_sites.push_back(
                    fs.eta[static_cast<std::size_t>(j)]
                          [static_cast<std::size_t>(sigma.labels[g]) * big_q + c]);
            }
        }
        std::vector<MatrixXcd> hat_sites;
        for (std::size_t g = interior; g < n_sites; ++g) {
            hat_sites.push_back(hats[static_cast<std::size_t>(sigma.labels[g])]);
        }
        const MatrixXcd chain = chain_product_density(
            k, n, nd, md, fs.eta0[static_cast<std::size_t>(sigma.labels[0])], eta_sites,
            hat_sites, dim_cap);
        const MatrixXcd u = kron_list(vs);
        acc += mu[r] * (u * chain * u.adjoint());
    }

    LabeledOperator op(sites, std::vector<int>(n_sites, d), std::move(acc));
    return FiniteVolumeState{n, DensityState(std::move(op))};
}

ExtractedClassical extract_classical(const QmsSpec& spec, double match_tol) {
    const BlockAlignment al = align_blocks(spec, match_tol);
    const int q = al.q;
    const int k = spec.k;

    BlockStructure bs;
    bs.d = spec.d;
    for (const auto& blk : al.reference) {
        bs.n_dims.push_back(blk.n_dim);
        bs.m_dims.push_back(blk.m_dim);
        bs.v.push_back(blk.v);
    }

    const GibbsTable table = weights_from_qms(spec);

    ClassicalData data;
    data.k = k;
    data.q = q;
    data.n_dims = bs.n_dims;
    data.m_dims = bs.m_dims;
    data.pi0 = table.initial;
    data.pi = table.weights;

    FactorStates fs;

    // Root factors from the block slices of rho0.
    for (int w = 0; w < q; ++w) {
        const auto& blk = al.reference[static_cast<std::size_t>(w)];
        const MatrixXcd r = blk.v.adjoint() * spec.rho0.matrix() * blk.v;
        const double p0 = r.trace().real();
        if (p0 < kWeightFloor) {
            throw std::runtime_error("degenerate root weight: factors are undefined");
        }
        fs.eta0.push_back(trace_out_legs(r, {blk.n_dim, blk.m_dim}, {1}) / p0);
    }

    // Chain factors from the block states, in the shared frame.
    const std::size_t big_q = int_pow_sz(static_cast<std::size_t>(q),
                                         static_cast<std::size_t>(k));
    fs.eta.resize(spec.levels.size());
    for (std::size_t j = 0; j < spec.levels.size(); ++j) {
        auto& level_eta = fs.eta[j];
        level_eta.resize(static_cast<std::size_t>(q) * big_q);
        const auto& lev = spec.levels[j];
        for (std::size_t s = 0; s < lev.per_site.size(); ++s) {
            for (int w = 0; w < q; ++w) {
                const auto& blk =
                    lev.per_site[s].blocks[static_cast<std::size_t>(
                        al.index[j][s][static_cast<std::size_t>(w)])];
                for (std::size_t c = 0; c < big_q; ++c) {
                    const std::vector<int> tuple = decode_tuple(c, q, k);
                    std::vector<MatrixXcd> vs;
                    std::vector<int> joint_dims{blk.m_dim};
                    std::vector<int> drop;
                    for (int y = 0; y < k; ++y) {
                        const auto& cref = al.reference[static_cast<std::size_t>(
                            tuple[static_cast<std::size_t>(y)])];
                        vs.push_back(cref.v);
                        joint_dims.push_back(cref.n_dim);
                        joint_dims.push_back(cref.m_dim);
                        drop.push_back(2 + 2 * y);
                    }
                    const MatrixXcd lift =
                        kron(MatrixXcd::Identity(blk.m_dim, blk.m_dim), kron_list(vs));
                    const MatrixXcd slice = lift.adjoint() * blk.phi * lift;
                    const double pw = slice.trace().real();
                    if (pw < kWeightFloor) {
                        throw std::runtime_error("degenerate transition weight: factors are undefined");
                    }
                    MatrixXcd factor = trace_out_legs(slice, joint_dims, drop) / pw;
                    auto& slot = level_eta[static_cast<std::size_t>(w) * big_q + c];
                    if (s == 0) {
                        slot = std::move(factor);
                    } else if (max_abs(factor - slot) > match_tol) {
                        throw std::runtime_error("factor states differ across the sites of level " +
                                                 std::to_string(j));
                    }
                }
            }
        }
    }

    return ExtractedClassical{std::move(data), std::move(fs), std::move(bs)};
}

ReconstructionReport verify_reconstruction(const ClassicalData& data, const FactorStates& fs,
                                           const BlockStructure& bs, int n,
                                           std::size_t dim_cap) {
    ReconstructionReport report;
    try {
        data.validate();
        fs.validate(data);
        bs.validate();
        if (bs.n_dims != data.n_dims || bs.m_dims != data.m_dims) {
            throw std::invalid_argument("block structure splits do not match the classical data");
        }
        if (n < 0 || n + 2 > data.levels()) {
            throw std::invalid_argument("verification depth needs two levels of data past it");
        }
    } catch (const std::exception& err) {
        report.precheck_ok = false;
        report.precheck_message = err.what();
        return report;
    }

    const QmsSpec spec = spec_from_classical(data, fs, bs);

    for (int j = 0; j < n; ++j) {
        report.max_markov_residual =
            std::max(report.max_markov_residual, markov_check(spec, j, dim_cap));
    }

    const FiniteVolumeState direct = assemble_state(data, fs, bs, n, dim_cap);
    const FiniteVolumeState pushed = density_matrix(spec, n, dim_cap);
    report.density_residual = max_abs(direct.rho.matrix() - pushed.rho.matrix());

    // Slice each derived block state back onto the child blocks and compare
    // with the defining product form.
    const std::size_t big_q = int_pow_sz(static_cast<std::size_t>(data.q),
                                         static_cast<std::size_t>(data.k));
    const std::vector<int> order = interleave_order(data.k);
    for (int j = 0; j + 1 < data.levels(); ++j) {
        const std::vector<MatrixXcd> phis = derive_transition_states(data, fs, bs, j);
        std::vector<MatrixXcd> hats;
        for (int w = 0; w < data.q; ++w) hats.push_back(eta_hat_density(data, fs, j + 1, w));
        for (int w = 0; w < data.q; ++w) {
            const int m = data.m_dims[static_cast<std::size_t>(w)];
            for (std::size_t c = 0; c < big_q; ++c) {
                const std::vector<int> tuple = decode_tuple(c, data.q, data.k);
                std::vector<MatrixXcd> vs;
                std::vector<MatrixXcd> hat_factors;
                std::vector<int> grouped_dims{m};
                for (int lbl : tuple) {
                    vs.push_back(bs.v[static_cast<std::size_t>(lbl)]);
                    hat_factors.push_back(hats[static_cast<std::size_t>(lbl)]);
                    grouped_dims.push_back(data.n_dims[static_cast<std::size_t>(lbl)]);
                }
                for (int lbl : tuple) {
                    grouped_dims.push_back(data.m_dims[static_cast<std::size_t>(lbl)]);
                }
                const MatrixXcd lift = kron(MatrixXcd::Identity(m, m), kron_list(vs));
                const MatrixXcd slice =
                    lift.adjoint() * phis[static_cast<std::size_t>(w)] * lift;
                const auto& factor = fs.eta[static_cast<std::size_t>(j)]
                                           [static_cast<std::size_t>(w) * big_q + c];
                const MatrixXcd expect =
                    data.pi[static_cast<std::size_t>(j)](w, static_cast<Eigen::Index>(c)) *
                    permute_legs(kron(factor, kron_list(hat_factors)), grouped_dims, order);
                report.transition_identity_residual =
                    std::max(report.transition_identity_residual, max_abs(slice - expect));
            }
        }
    }
    return report;
}

} // namespace qmt
