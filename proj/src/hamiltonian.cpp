#include "qmt/hamiltonian.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "qmt/hermitian.hpp"
#include "qmt/transition.hpp"

namespace qmt {

namespace {

// Assembled level operators are embedded only up to this total dimension;
// larger families fall back to the worst per-vertex pair.
constexpr std::size_t kAssembledNormCap = std::size_t{1} << 10;

int int_pow(int base, int exp) {
    int out = 1;
    for (int i = 0; i < exp; ++i) out *= base;
    return out;
}

MatrixXcd minus_log(const MatrixXcd& a, const std::string& what) {
    try {
        return -herm_log(a);
    } catch (const std::exception&) {
        throw std::runtime_error(what + " is not faithful: potential undefined");
    }
}

LabeledOperator root_term(const InteractionDecomposition& dec) {
    return LabeledOperator({root_site(dec.k)}, {dec.d}, dec.h_root);
}

LabeledOperator bond_term(const InteractionDecomposition& dec, int level, std::size_t t) {
    const SiteCoord x = enumerate_level(dec.k, level).vertices[t];
    std::vector<SiteCoord> sites{x};
    for (const auto& y : direct_successors(x)) sites.push_back(y);
    return LabeledOperator(sites, std::vector<int>(sites.size(), dec.d),
                           dec.h_bond[static_cast<std::size_t>(level)][t]);
}

LabeledOperator hat_term(const InteractionDecomposition& dec, int level, std::size_t t) {
    const SiteCoord x = enumerate_level(dec.k, level).vertices[t];
    return LabeledOperator({x}, {dec.d}, dec.h_hat[static_cast<std::size_t>(level)][t]);
}

// Operator norm of [a, b] after embedding both on the union support.
double commutator_norm(const LabeledOperator& a, const LabeledOperator& b,
                       std::size_t dim_cap) {
    std::vector<SiteCoord> sites = a.support;
    std::vector<int> dims = a.site_dims;
    for (std::size_t i = 0; i < b.support.size(); ++i) {
        bool found = false;
        for (std::size_t l = 0; l < sites.size(); ++l) {
            if (sites[l] == b.support[i]) {
                found = true;
                break;
            }
        }
        if (!found) {
            sites.push_back(b.support[i]);
            dims.push_back(b.site_dims[i]);
        }
    }
    // Canonical order for the union.
    std::vector<std::size_t> idx(sites.size());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    std::sort(idx.begin(), idx.end(),
              [&](std::size_t l, std::size_t r) { return sites[l] < sites[r]; });
    std::vector<SiteCoord> sorted_sites;
    std::vector<int> sorted_dims;
    for (std::size_t i : idx) {
        sorted_sites.push_back(sites[i]);
        sorted_dims.push_back(dims[i]);
    }
    const LabeledOperator ea = embed(a, sorted_sites, sorted_dims, dim_cap);
    const LabeledOperator eb = embed(b, sorted_sites, sorted_dims, dim_cap);
    return operator_norm(ea.mat * eb.mat - eb.mat * ea.mat);
}

// Union dimension of one level's assembled terms.
std::size_t level_span_dim(const InteractionDecomposition& dec, int from_level, int to_level) {
    std::size_t total = 1;
    for (int j = from_level; j <= to_level; ++j) {
        for (std::size_t i = 0; i < enumerate_level(dec.k, j).vertices.size(); ++i) {
            total *= static_cast<std::size_t>(dec.d);
            if (total > kAssembledNormCap) return total;
        }
    }
    return total;
}

LabeledOperator assembled_level(const InteractionDecomposition& dec, int from_level,
                                int to_level, bool bonds, int term_level,
                                std::size_t dim_cap) {
    std::vector<SiteCoord> sites;
    for (int j = from_level; j <= to_level; ++j) {
        const Level lv = enumerate_level(dec.k, j);
        sites.insert(sites.end(), lv.vertices.begin(), lv.vertices.end());
    }
    const std::vector<int> dims(sites.size(), dec.d);
    std::size_t total = 1;
    for (std::size_t i = 0; i < sites.size(); ++i) total *= static_cast<std::size_t>(dec.d);
    LabeledOperator out(sites, dims,
                        MatrixXcd::Zero(static_cast<Eigen::Index>(total),
                                        static_cast<Eigen::Index>(total)));
    const std::size_t count = enumerate_level(dec.k, term_level).vertices.size();
    for (std::size_t t = 0; t < count; ++t) {
        const LabeledOperator term =
            bonds ? bond_term(dec, term_level, t) : hat_term(dec, term_level, t);
        out.mat += embed(term, sites, dims, dim_cap).mat;
    }
    return out;
}

} // namespace

LabeledOperator potential_from_state(const FiniteVolumeState& state) {
    MatrixXcd h;
    try {
        h = -herm_log(state.rho.matrix());
    } catch (const std::exception&) {
        throw std::runtime_error("potential undefined: the state is not locally faithful");
    }
    return LabeledOperator(state.rho.op.support, state.rho.op.site_dims, std::move(h));
}

PotentialFamily potential_family(const QmsSpec& spec, int max_depth, std::size_t dim_cap) {
    PotentialFamily family;
    for (int n = 0; n <= max_depth; ++n) {
        family.h.push_back(potential_from_state(density_matrix(spec, n, dim_cap)));
    }
    return family;
}

void InteractionDecomposition::validate() const {
    if (k < 1 || d < 2) throw std::invalid_argument("decomposition needs k >= 1 and d >= 2");
    const double herm_tol = 1e-9;
    if (h_root.rows() != d || h_root.cols() != d || max_abs(h_root - h_root.adjoint()) > herm_tol) {
        throw std::invalid_argument("root term must be hermitian on the site algebra");
    }
    const auto bond_dim = static_cast<Eigen::Index>(int_pow(d, k + 1));
    for (std::size_t j = 0; j < h_bond.size(); ++j) {
        const std::size_t want = enumerate_level(k, static_cast<int>(j)).vertices.size();
        if (h_bond[j].size() != want) {
            throw std::invalid_argument("bond terms of level " + std::to_string(j) +
                                        " do not cover the level");
        }
        for (const auto& term : h_bond[j]) {
            if (term.rows() != bond_dim || term.cols() != bond_dim ||
                max_abs(term - term.adjoint()) > herm_tol) {
                throw std::invalid_argument("bond term must be hermitian on a site and its successors");
            }
        }
    }
    for (std::size_t j = 0; j < h_hat.size(); ++j) {
        const std::size_t want = enumerate_level(k, static_cast<int>(j)).vertices.size();
        if (h_hat[j].size() != want) {
            throw std::invalid_argument("boundary terms of level " + std::to_string(j) +
                                        " do not cover the level");
        }
        for (const auto& term : h_hat[j]) {
            if (term.rows() != d || term.cols() != d ||
                max_abs(term - term.adjoint()) > herm_tol) {
                throw std::invalid_argument("boundary term must be hermitian on one site");
            }
        }
    }
}

InteractionDecomposition decompose(const QmsSpec& spec, int n, double verify_tol,
                                   std::size_t dim_cap) {
    if (n < 0 || n > spec.n_max()) {
        throw std::invalid_argument("decomposition depth exceeds the deepest transition level");
    }
    const ExtractedClassical ex = extract_classical(spec);
    const ClassicalData& data = ex.data;
    const FactorStates& fs = ex.factors;
    const BlockStructure& bs = ex.structure;
    const int k = spec.k;
    const int d = spec.d;
    const std::size_t big_q = static_cast<std::size_t>(int_pow(data.q, k));

    InteractionDecomposition dec;
    dec.k = k;
    dec.d = d;

    // Root term: block logarithms of the weighted root factors.
    dec.h_root = MatrixXcd::Zero(d, d);
    for (int w = 0; w < data.q; ++w) {
        const auto& vw = bs.v[static_cast<std::size_t>(w)];
        const int m = data.m_dims[static_cast<std::size_t>(w)];
        const MatrixXcd hw = minus_log(data.pi0(w) * fs.eta0[static_cast<std::size_t>(w)],
                                       "a root factor");
        dec.h_root += vw * kron(hw, MatrixXcd::Identity(m, m)) * vw.adjoint();
    }

    // Bond terms for levels below n.
    const auto bond_dim = static_cast<Eigen::Index>(int_pow(d, k + 1));
    for (int j = 0; j < n; ++j) {
        MatrixXcd term = MatrixXcd::Zero(bond_dim, bond_dim);
        for (int w = 0; w < data.q; ++w) {
            const int nw = data.n_dims[static_cast<std::size_t>(w)];
            const int mw = data.m_dims[static_cast<std::size_t>(w)];
            for (std::size_t c = 0; c < big_q; ++c) {
                std::vector<int> tuple(static_cast<std::size_t>(k), 0);
                {
                    std::size_t rest = c;
                    for (int y = k; y-- > 0;) {
                        tuple[static_cast<std::size_t>(y)] =
                            static_cast<int>(rest % static_cast<std::size_t>(data.q));
                        rest /= static_cast<std::size_t>(data.q);
                    }
                }
                const MatrixXcd h = minus_log(
                    data.pi[static_cast<std::size_t>(j)](w, static_cast<Eigen::Index>(c)) *
                        fs.eta[static_cast<std::size_t>(j)][static_cast<std::size_t>(w) * big_q + c],
                    "a chain factor");

                std::vector<MatrixXcd> vs{bs.v[static_cast<std::size_t>(w)]};
                std::vector<int> grouped{nw, mw};
                int m_rest = 1;
                for (int lbl : tuple) {
                    vs.push_back(bs.v[static_cast<std::size_t>(lbl)]);
                    grouped.push_back(data.n_dims[static_cast<std::size_t>(lbl)]);
                }
                for (int lbl : tuple) {
                    grouped.push_back(data.m_dims[static_cast<std::size_t>(lbl)]);
                    m_rest *= data.m_dims[static_cast<std::size_t>(lbl)];
                }
                std::vector<int> order{0, 1};
                for (int y = 0; y < k; ++y) {
                    order.push_back(2 + y);
                    order.push_back(2 + k + y);
                }
                const MatrixXcd inner = permute_legs(
                    kron(MatrixXcd::Identity(nw, nw), kron(h, MatrixXcd::Identity(m_rest, m_rest))),
                    grouped, order);
                const MatrixXcd wmat = kron_list(vs);
                term += wmat * inner * wmat.adjoint();
            }
        }
        dec.h_bond.emplace_back(enumerate_level(k, j).vertices.size(), term);
    }

    // Boundary fields for levels up to n.
    for (int j = 0; j <= n; ++j) {
        MatrixXcd term = MatrixXcd::Zero(d, d);
        for (int w = 0; w < data.q; ++w) {
            const auto& vw = bs.v[static_cast<std::size_t>(w)];
            const int nw = data.n_dims[static_cast<std::size_t>(w)];
            const MatrixXcd hw =
                minus_log(eta_hat_density(data, fs, j, w), "a boundary factor");
            term += vw * kron(MatrixXcd::Identity(nw, nw), hw) * vw.adjoint();
        }
        dec.h_hat.emplace_back(enumerate_level(k, j).vertices.size(), term);
    }

    dec.validate();

    const LabeledOperator assembled = assemble_potential(dec, n, dim_cap);
    const LabeledOperator direct = potential_from_state(density_matrix(spec, n, dim_cap));
    const double residual = max_abs(assembled.mat - direct.mat);
    if (residual > verify_tol) {
        throw std::runtime_error("interaction terms do not reassemble the potential: residual " +
                                 std::to_string(residual));
    }
    return dec;
}

LabeledOperator assemble_potential(const InteractionDecomposition& dec, int n,
                                   std::size_t dim_cap) {
    if (n < 0 || n >= dec.bond_levels() + 1 || n >= dec.hat_levels()) {
        throw std::invalid_argument("decomposition does not cover depth " + std::to_string(n));
    }
    const std::vector<SiteCoord> sites = lambda_sites(dec.k, n);
    const std::vector<int> dims(sites.size(), dec.d);
    std::size_t total = 1;
    for (std::size_t i = 0; i < sites.size(); ++i) {
        total *= static_cast<std::size_t>(dec.d);
        check_dimension_guard(total, dim_cap);
    }
    LabeledOperator out(sites, dims,
                        MatrixXcd::Zero(static_cast<Eigen::Index>(total),
                                        static_cast<Eigen::Index>(total)));
    out.mat += embed(root_term(dec), sites, dims, dim_cap).mat;
    for (int j = 0; j < n; ++j) {
        const std::size_t count = enumerate_level(dec.k, j).vertices.size();
        for (std::size_t t = 0; t < count; ++t) {
            out.mat += embed(bond_term(dec, j, t), sites, dims, dim_cap).mat;
        }
    }
    const std::size_t count = enumerate_level(dec.k, n).vertices.size();
    for (std::size_t t = 0; t < count; ++t) {
        out.mat += embed(hat_term(dec, n, t), sites, dims, dim_cap).mat;
    }
    return out;
}

double CommutatorResiduals::max() const {
    return std::max(std::max(root_bond, bond_boundary), std::max(root_boundary, bond_bond));
}

CommutatorResiduals commutation_residuals(const InteractionDecomposition& dec,
                                          std::size_t dim_cap) {
    dec.validate();
    CommutatorResiduals res;

    if (dec.bond_levels() >= 1 && dec.hat_levels() >= 1) {
        res.root_bond = commutator_norm(root_term(dec), bond_term(dec, 0, 0), dim_cap);
        res.root_boundary = commutator_norm(root_term(dec), hat_term(dec, 0, 0), dim_cap);
    }

    for (int j = 0; j < dec.bond_levels(); ++j) {
        if (j + 1 < dec.hat_levels()) {
            double fam = 0.0;
            if (level_span_dim(dec, j, j + 1) <= kAssembledNormCap) {
                const LabeledOperator a = assembled_level(dec, j, j + 1, true, j, dim_cap);
                const LabeledOperator b = assembled_level(dec, j, j + 1, false, j + 1, dim_cap);
                fam = operator_norm(a.mat * b.mat - b.mat * a.mat);
            } else {
                const std::size_t count = enumerate_level(dec.k, j).vertices.size();
                for (std::size_t t = 0; t < count; ++t) {
                    const LabeledOperator a = bond_term(dec, j, t);
                    for (int y = 0; y < dec.k; ++y) {
                        const std::size_t cy = t * static_cast<std::size_t>(dec.k) +
                                               static_cast<std::size_t>(y);
                        fam = std::max(fam,
                                       commutator_norm(a, hat_term(dec, j + 1, cy), dim_cap));
                    }
                }
            }
            res.bond_boundary = std::max(res.bond_boundary, fam);
        }
        if (j + 1 < dec.bond_levels()) {
            double fam = 0.0;
            if (level_span_dim(dec, j, j + 2) <= kAssembledNormCap) {
                const LabeledOperator a = assembled_level(dec, j, j + 2, true, j, dim_cap);
                const LabeledOperator b = assembled_level(dec, j, j + 2, true, j + 1, dim_cap);
                fam = operator_norm(a.mat * b.mat - b.mat * a.mat);
            } else {
                const std::size_t count = enumerate_level(dec.k, j).vertices.size();
                for (std::size_t t = 0; t < count; ++t) {
                    const LabeledOperator a = bond_term(dec, j, t);
                    for (int y = 0; y < dec.k; ++y) {
                        const std::size_t cy = t * static_cast<std::size_t>(dec.k) +
                                               static_cast<std::size_t>(y);
                        fam = std::max(fam,
                                       commutator_norm(a, bond_term(dec, j + 1, cy), dim_cap));
                    }
                }
            }
            res.bond_bond = std::max(res.bond_bond, fam);
        }
    }
    return res;
}

LevelTransitionExpectation transition_from_hamiltonian(const InteractionDecomposition& dec,
                                                       int level, double commute_tol) {
    dec.validate();
    if (level < 0 || level >= dec.bond_levels() || level + 1 >= dec.hat_levels()) {
        throw std::invalid_argument("decomposition does not cover level " + std::to_string(level));
    }
    const int k = dec.k;
    const int d = dec.d;
    const int dk = int_pow(d, k);
    const int dkk = d * dk;
    const Level lv = enumerate_level(k, level);

    std::vector<int> legs(static_cast<std::size_t>(k) + 1, d);
    std::vector<int> succ_legs;
    for (int y = 0; y < k; ++y) succ_legs.push_back(1 + y);

    LevelTransitionExpectation out;
    out.level = level;
    for (std::size_t t = 0; t < lv.vertices.size(); ++t) {
        const MatrixXcd& bond = dec.h_bond[static_cast<std::size_t>(level)][t];
        const MatrixXcd& hat_x = dec.h_hat[static_cast<std::size_t>(level)][t];
        MatrixXcd hat_below = MatrixXcd::Zero(dkk, dkk);
        for (int y = 0; y < k; ++y) {
            const std::size_t cy = t * static_cast<std::size_t>(k) + static_cast<std::size_t>(y);
            const MatrixXcd& hy = dec.h_hat[static_cast<std::size_t>(level) + 1][cy];
            hat_below += kron(MatrixXcd::Identity(d * int_pow(d, y), d * int_pow(d, y)),
                              kron(hy, MatrixXcd::Identity(int_pow(d, k - 1 - y),
                                                           int_pow(d, k - 1 - y))));
        }
        const double defect = operator_norm(bond * hat_below - hat_below * bond);
        if (defect > commute_tol) {
            throw std::runtime_error(
                "interaction terms do not commute: the induced map is not a transition "
                "expectation (defect " +
                std::to_string(defect) + ")");
        }

        const MatrixXcd a = herm_exp(-0.5 * bond) * herm_exp(-0.5 * hat_below) *
                            herm_exp(0.5 * kron(hat_x, MatrixXcd::Identity(dk, dk)));
        const Superop sand = Superop::sandwich(a.adjoint(), a);
        const Superop slice = Superop::from_action(dkk, d, [&](const MatrixXcd& e) {
            return trace_out_legs(e, legs, succ_legs);
        });
        const Superop raw = slice.after(sand);

        // The induced map is in general only a quasi-expectation; composing
        // with the limit projection of its own compression yields the
        // expectation of the same state (the averaging leaves every pushed
        // density fixed).
        const Superop widen = Superop::from_action(d, dkk, [&](const MatrixXcd& c) {
            return kron(c, MatrixXcd::Identity(dk, dk));
        });
        const Superop projector = cesaro_limit(raw.after(widen));
        const Superop canonical = projector.after(raw);

        const CpReport cp = positivity_report(canonical);
        if (!cp.completely_positive) {
            throw std::runtime_error("induced transition map is not completely positive");
        }
        if (cp.unital_residual > 1e-9) {
            throw std::runtime_error("induced transition map is not unital");
        }

        std::mt19937_64 rng(0x51a3c9b7u + 977u * static_cast<unsigned>(level));
        out.per_site.push_back(canonical_form(canonical, lv.vertices[t], level, d, k, rng));
    }
    return out;
}

QmsSpec qms_from_hamiltonian(const InteractionDecomposition& dec, double commute_tol) {
    dec.validate();
    const int usable = std::min(dec.bond_levels(), dec.hat_levels() - 1);
    if (usable < 1) {
        throw std::invalid_argument("decomposition carries no usable transition level");
    }
    std::vector<LevelTransitionExpectation> levels;
    for (int j = 0; j < usable; ++j) {
        levels.push_back(transition_from_hamiltonian(dec, j, commute_tol));
    }
    const MatrixXcd rho = herm_exp(-(dec.h_root + dec.h_hat[0][0]));
    LabeledOperator op({root_site(dec.k)}, {dec.d}, rho);
    return QmsSpec{dec.k, dec.d, DensityState(std::move(op)), std::move(levels)};
}

} // namespace qmt
