#include "qmt/transition.hpp"

#include <Eigen/LU>
#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <numeric>

#include "qmt/hermitian.hpp"

namespace qmt {

namespace {

int int_pow(int base, int exp) {
    int out = 1;
    for (int i = 0; i < exp; ++i) out *= base;
    return out;
}

void sort_sites_with_dims(std::vector<SiteCoord>& sites, std::vector<int>& dims) {
    std::vector<std::size_t> idx(sites.size());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::sort(idx.begin(), idx.end(), [&](std::size_t l, std::size_t r) { return sites[l] < sites[r]; });
    std::vector<SiteCoord> s2;
    std::vector<int> d2;
    for (std::size_t i : idx) {
        s2.push_back(sites[i]);
        d2.push_back(dims[i]);
    }
    sites = std::move(s2);
    dims = std::move(d2);
}

// c -> c (x) 1 on the successor space
Superop widen_by_identity(int d, int ext) {
    MatrixXcd ide = MatrixXcd::Identity(ext, ext);
    return Superop::from_action(d, d * ext, [&](const MatrixXcd& c) { return kron(c, ide); });
}

} // namespace

int SiteTransitionExpectation::successor_dim() const { return int_pow(d, k); }

CentralDecomposition SiteTransitionExpectation::block_structure() const {
    CentralDecomposition cd;
    cd.ambient_dim = d;
    for (const auto& b : blocks) {
        FactorBlock fb;
        fb.p = b.p;
        fb.n_dim = b.n_dim;
        fb.m_dim = b.m_dim;
        fb.v = b.v;
        cd.blocks.push_back(std::move(fb));
    }
    return cd;
}

Superop SiteTransitionExpectation::boundary_map() const {
    return map.after(widen_by_identity(d, successor_dim()));
}

LabeledOperator SiteTransitionExpectation::apply(const LabeledOperator& a,
                                                 std::size_t dim_cap) const {
    std::vector<SiteCoord> sel{site};
    for (const auto& y : direct_successors(site)) sel.push_back(y);

    std::vector<SiteCoord> target = a.support;
    std::vector<int> tdims = a.site_dims;
    for (const auto& x : sel) {
        int idx = a.site_index(x);
        if (idx < 0) {
            target.push_back(x);
            tdims.push_back(d);
        } else if (a.site_dims[static_cast<std::size_t>(idx)] != d) {
            throw std::invalid_argument("operator leg does not match the site dimension");
        }
    }
    sort_sites_with_dims(target, tdims);
    LabeledOperator emb = embed(a, target, tdims, dim_cap);
    return apply_map_to_sites(emb, sel, map, site, d, dim_cap);
}

Superop pinched_superop(int d, int k, const std::vector<TransitionBlock>& blocks) {
    if (blocks.empty()) throw std::invalid_argument("pinched form needs at least one block");
    MatrixXcd psum = MatrixXcd::Zero(d, d);
    for (const auto& b : blocks) {
        const int nm = b.n_dim * b.m_dim;
        if (b.v.rows() != d || b.v.cols() != nm)
            throw std::invalid_argument("block isometry has wrong shape");
        if (max_abs(b.v.adjoint() * b.v - MatrixXcd::Identity(nm, nm)) > 1e-9)
            throw std::invalid_argument("block map is not an isometry");
        if (max_abs(b.v * b.v.adjoint() - b.p) > 1e-9)
            throw std::invalid_argument("block projection does not match its isometry");
        psum += b.p;
    }
    if (max_abs(psum - MatrixXcd::Identity(d, d)) > 1e-9)
        throw std::invalid_argument("block projections do not resolve the identity");

    CentralDecomposition cd;
    cd.ambient_dim = d;
    std::vector<MatrixXcd> phis;
    for (const auto& b : blocks) {
        FactorBlock fb;
        fb.p = b.p;
        fb.n_dim = b.n_dim;
        fb.m_dim = b.m_dim;
        fb.v = b.v;
        cd.blocks.push_back(std::move(fb));
        phis.push_back(b.phi);
    }
    return umegaki_from_block_states(cd, phis, int_pow(d, k));
}

SiteTransitionExpectation canonical_form(const Superop& e, const SiteCoord& site, int level,
                                         int d, int k, std::mt19937_64& rng, double fit_tol) {
    const int dk = int_pow(d, k);
    const int din = d * dk;
    if (e.dim_in != din || e.dim_out != d)
        throw std::invalid_argument("superoperator dimensions do not match the site");

    if (max_abs(e.apply(MatrixXcd::Identity(din, din)) - MatrixXcd::Identity(d, d)) > 1e-9)
        throw std::invalid_argument("map is not unital");
    CpReport rep = positivity_report(e);
    if (!rep.completely_positive)
        throw std::invalid_argument("map is not completely positive");
    Superop widen = widen_by_identity(d, dk);
    if (max_abs(e.m * (widen.m * e.m) - e.m) > 1e-9)
        throw std::invalid_argument("map is not idempotent over its range");

    std::vector<MatrixXcd> gens;
    for (Eigen::Index c = 0; c < e.m.cols(); ++c) gens.push_back(unvec_col(e.m.col(c), d));
    SubalgebraBasis range = SubalgebraBasis::from_generators(d, gens);
    CentralDecomposition cd = central_decompose(range, rng);

    SiteTransitionExpectation out;
    out.site = site;
    out.level = level;
    out.d = d;
    out.k = k;
    out.map = e;
    Superop dual = e.hs_adjoint();
    for (std::size_t w = 0; w < cd.blocks.size(); ++w) {
        const auto& blk = cd.blocks[w];
        const int n = blk.n_dim, m = blk.m_dim;
        const int mdk = m * dk;
        MatrixXcd wmat = kron(blk.v, MatrixXcd::Identity(dk, dk));
        // phi_w(y) = Tr[E((V (x) 1)(1_n (x) y)(V (x) 1)^*) P] / (n m)
        //          = Tr[y . Tr_1(W^* E^*(P) W)] / (n m)
        MatrixXcd g = dual.apply(blk.p);
        MatrixXcd h = wmat.adjoint() * g * wmat;
        MatrixXcd dphi = trace_out_legs(h, {n, mdk}, {0}) / static_cast<double>(n * m);
        if (max_abs(dphi - dphi.adjoint()) > 1e-9)
            throw std::runtime_error("extracted block state is not hermitian");
        dphi = 0.5 * (dphi + dphi.adjoint()).eval();
        if (std::abs(dphi.trace() - complexd(1.0)) > 1e-9)
            throw std::runtime_error("extracted block state is not normalized");
        if (min_eigenvalue(dphi) < -1e-9)
            throw std::runtime_error("extracted block state is not positive");

        TransitionBlock tb;
        tb.label = static_cast<int>(w);
        tb.p = blk.p;
        tb.n_dim = n;
        tb.m_dim = m;
        tb.v = blk.v;
        tb.phi = dphi;
        out.blocks.push_back(std::move(tb));
    }

    Superop rebuilt = pinched_superop(d, k, out.blocks);
    double residual = max_abs(rebuilt.m - e.m);
    if (residual > fit_tol)
        throw std::runtime_error("pinched form does not reproduce the map (residual " +
                                 std::to_string(residual) + ")");
    return out;
}

int LevelTransitionExpectation::site_dim() const {
    if (per_site.empty()) throw std::logic_error("level map has no sites");
    return per_site.front().d;
}

int LevelTransitionExpectation::branching() const {
    if (per_site.empty()) throw std::logic_error("level map has no sites");
    return per_site.front().k;
}

namespace {

LabeledOperator apply_level_core(const LevelTransitionExpectation& lev, LabeledOperator a,
                                 std::size_t dim_cap) {
    for (const auto& sx : lev.per_site) {
        bool touched = a.site_index(sx.site) >= 0;
        if (!touched)
            for (const auto& y : direct_successors(sx.site))
                if (a.site_index(y) >= 0) {
                    touched = true;
                    break;
                }
        if (touched) a = sx.apply(a, dim_cap);
    }
    for (const auto& x : a.support)
        if (x.level() == lev.level + 1)
            throw std::invalid_argument("no site map covers a successor-generation leg");
    return a;
}

} // namespace

LabeledOperator LevelTransitionExpectation::apply(const LabeledOperator& a,
                                                  std::size_t dim_cap) const {
    for (const auto& x : a.support)
        if (x.level() != level && x.level() != level + 1)
            throw std::invalid_argument("support extends outside the two generations");
    return apply_level_core(*this, a, dim_cap);
}

LabeledOperator LevelTransitionExpectation::apply_dual(const LabeledOperator& rho,
                                                       std::size_t dim_cap) const {
    LabeledOperator out = rho;
    for (const auto& sx : per_site) {
        int idx = out.site_index(sx.site);
        if (idx < 0)
            throw std::invalid_argument("dual application needs every generation site present");
        if (out.site_dims[static_cast<std::size_t>(idx)] != sx.d)
            throw std::invalid_argument("operator leg does not match the site dimension");
        std::vector<SiteCoord> outs{sx.site};
        for (const auto& y : direct_successors(sx.site)) outs.push_back(y);
        std::vector<int> odims(outs.size(), sx.d);
        out = apply_map_to_sites(out, {sx.site}, sx.map.hs_adjoint(), outs, odims, dim_cap);
    }
    return out;
}

LabeledOperator LevelTransitionExpectation::apply_boundary_dual(const LabeledOperator& rho,
                                                                std::size_t dim_cap) const {
    LabeledOperator out = rho;
    for (const auto& sx : per_site) {
        int idx = out.site_index(sx.site);
        if (idx < 0)
            throw std::invalid_argument("dual application needs every generation site present");
        out = apply_map_to_sites(out, {sx.site}, sx.boundary_map().hs_adjoint(), sx.site, sx.d,
                                 dim_cap);
    }
    return out;
}

LabeledOperator QuasiConditionalExpectation::operator()(const LabeledOperator& a) const {
    return qce_apply(level_map, a, dim_cap);
}

LabeledOperator qce_apply(const LevelTransitionExpectation& e, const LabeledOperator& a,
                          std::size_t dim_cap) {
    for (const auto& x : a.support)
        if (x.level() > e.level + 1)
            throw std::invalid_argument("support extends above the successor generation");
    return apply_level_core(e, a, dim_cap);
}

QuasiConditionalExpectation quasi_conditional_expectation(LevelTransitionExpectation e,
                                                          std::size_t dim_cap) {
    return QuasiConditionalExpectation{std::move(e), dim_cap};
}

Superop qce_square_superop(const LevelTransitionExpectation& e, std::size_t dim_cap) {
    const int d = e.site_dim();
    const int k = e.branching();
    std::vector<SiteCoord> sites = lambda_sites(k, e.level + 1);
    std::size_t total = 1;
    for (std::size_t i = 0; i < sites.size(); ++i) {
        total *= static_cast<std::size_t>(d);
        check_dimension_guard(total, dim_cap);
    }
    check_dimension_guard(total * total, dim_cap);
    std::vector<int> dims(sites.size(), d);
    QuasiConditionalExpectation qce{e, dim_cap};
    auto action = [&](const MatrixXcd& a) {
        LabeledOperator op(sites, dims, a);
        LabeledOperator mapped = qce(op);
        return embed(mapped, sites, d, dim_cap).mat;
    };
    const int dim = static_cast<int>(total);
    return Superop::from_action(dim, dim, action);
}

CentralDecomposition range_decomposition(const LevelTransitionExpectation& e,
                                         std::size_t dim_cap) {
    const std::size_t s = e.per_site.size();
    if (s == 0) throw std::logic_error("level map has no sites");
    const int d = e.site_dim();
    std::size_t amb = 1;
    for (std::size_t i = 0; i < s; ++i) {
        amb *= static_cast<std::size_t>(d);
        check_dimension_guard(amb, dim_cap);
    }

    std::vector<std::size_t> counts(s);
    std::size_t n_tuples = 1;
    for (std::size_t i = 0; i < s; ++i) {
        counts[i] = e.per_site[i].blocks.size();
        n_tuples *= counts[i];
    }

    CentralDecomposition out;
    out.ambient_dim = static_cast<int>(amb);
    for (std::size_t t = 0; t < n_tuples; ++t) {
        // decode the label tuple (first site slowest)
        std::vector<std::size_t> w(s);
        std::size_t rest = t;
        for (std::size_t i = s; i-- > 0;) {
            w[i] = rest % counts[i];
            rest /= counts[i];
        }
        std::vector<MatrixXcd> ps, vs;
        std::vector<int> n_dims, m_dims;
        int n = 1, m = 1;
        for (std::size_t i = 0; i < s; ++i) {
            const auto& b = e.per_site[i].blocks[w[i]];
            ps.push_back(b.p);
            vs.push_back(b.v);
            n_dims.push_back(b.n_dim);
            m_dims.push_back(b.m_dim);
            n *= b.n_dim;
            m *= b.m_dim;
        }
        std::vector<int> grouped = n_dims;
        grouped.insert(grouped.end(), m_dims.begin(), m_dims.end());
        std::vector<int> order;
        for (std::size_t i = 0; i < s; ++i) {
            order.push_back(static_cast<int>(i));
            order.push_back(static_cast<int>(s + i));
        }
        FactorBlock fb;
        fb.p = kron_list(ps);
        fb.n_dim = n;
        fb.m_dim = m;
        fb.v = kron_list(vs) * leg_permutation_matrix(grouped, order);
        out.blocks.push_back(std::move(fb));
    }
    return out;
}

MatrixXcd level_block_state_density(const LevelTransitionExpectation& e,
                                    const std::vector<int>& labels, std::size_t dim_cap) {
    const std::size_t s = e.per_site.size();
    if (labels.size() != s) throw std::invalid_argument("one label per site required");
    std::vector<MatrixXcd> factors;
    std::vector<int> dims_in;
    std::size_t total = 1;
    for (std::size_t i = 0; i < s; ++i) {
        const auto& sx = e.per_site[i];
        if (labels[i] < 0 || static_cast<std::size_t>(labels[i]) >= sx.blocks.size())
            throw std::invalid_argument("invalid block label");
        const auto& b = sx.blocks[static_cast<std::size_t>(labels[i])];
        factors.push_back(b.phi);
        dims_in.push_back(b.m_dim);
        dims_in.push_back(sx.successor_dim());
        total *= static_cast<std::size_t>(b.m_dim) * static_cast<std::size_t>(sx.successor_dim());
        check_dimension_guard(total, dim_cap);
    }
    MatrixXcd interleaved = kron_list(factors);
    std::vector<int> order;
    for (std::size_t i = 0; i < s; ++i) order.push_back(static_cast<int>(2 * i));
    for (std::size_t i = 0; i < s; ++i) order.push_back(static_cast<int>(2 * i + 1));
    return permute_legs(interleaved, dims_in, order);
}

Superop cesaro_limit(const Superop& t, double rank_tol) {
    if (t.dim_in != t.dim_out)
        throw std::invalid_argument("averaging needs a square superoperator");
    const Eigen::Index n = t.m.rows();
    MatrixXcd a = t.m - MatrixXcd::Identity(n, n);
    Eigen::BDCSVD<MatrixXcd> svd(a, Eigen::ComputeFullU | Eigen::ComputeFullV);
    const auto& sv = svd.singularValues();
    const double smax = sv.size() > 0 ? sv[0] : 0.0;
    const double thresh = rank_tol * std::max(1.0, smax);
    Eigen::Index r = 0;
    for (Eigen::Index i = 0; i < sv.size(); ++i)
        if (sv[i] <= thresh) ++r;
    if (r == 0) return Superop(t.dim_in, t.dim_out, MatrixXcd::Zero(n, n));

    MatrixXcd right = svd.matrixV().rightCols(r);
    MatrixXcd left = svd.matrixU().rightCols(r);
    Eigen::FullPivLU<MatrixXcd> lu(left.adjoint() * right);
    if (!lu.isInvertible())
        throw std::runtime_error("fixed space is defective: the averages do not converge");
    MatrixXcd p = right * lu.solve(left.adjoint());
    if (max_abs(p * p - p) > 1e-8)
        throw std::runtime_error("fixed space is defective: the averages do not converge");
    return Superop(t.dim_in, t.dim_out, std::move(p));
}

} // namespace qmt
