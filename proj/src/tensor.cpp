#include "qmt/tensor.hpp"

#include <algorithm>
#include <unordered_map>

#include "qmt/superop.hpp"

namespace qmt {

void check_dimension_guard(std::size_t dim, std::size_t cap) {
    if (dim > cap)
        throw dimension_guard_error("total dimension " + std::to_string(dim) +
                                    " exceeds the guard " + std::to_string(cap));
}

MatrixXcd kron(const MatrixXcd& a, const MatrixXcd& b) {
    MatrixXcd out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i)
        for (Eigen::Index j = 0; j < a.cols(); ++j)
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    return out;
}

MatrixXcd kron_list(const std::vector<MatrixXcd>& factors) {
    if (factors.empty()) return MatrixXcd::Identity(1, 1);
    MatrixXcd out = factors.front();
    for (std::size_t i = 1; i < factors.size(); ++i) out = kron(out, factors[i]);
    return out;
}

namespace {

std::vector<std::size_t> leg_strides(const std::vector<int>& dims) {
    std::vector<std::size_t> s(dims.size(), 1);
    for (std::size_t t = dims.size(); t-- > 1;)
        s[t - 1] = s[t] * static_cast<std::size_t>(dims[t]);
    return s;
}

std::size_t total_of(const std::vector<int>& dims) {
    std::size_t d = 1;
    for (int v : dims) d *= static_cast<std::size_t>(v);
    return d;
}

} // namespace

MatrixXcd permute_legs(const MatrixXcd& a, const std::vector<int>& dims,
                       const std::vector<int>& order) {
    const std::size_t nlegs = dims.size();
    if (order.size() != nlegs) throw std::invalid_argument("leg order has wrong length");
    std::vector<char> seen(nlegs, 0);
    for (int t : order) {
        if (t < 0 || static_cast<std::size_t>(t) >= nlegs || seen[t])
            throw std::invalid_argument("leg order is not a permutation");
        seen[t] = 1;
    }
    const std::size_t dim = total_of(dims);
    if (a.rows() != static_cast<Eigen::Index>(dim) || a.cols() != a.rows())
        throw std::invalid_argument("matrix does not match the leg dimensions");

    std::vector<int> out_dims(nlegs);
    for (std::size_t i = 0; i < nlegs; ++i) out_dims[i] = dims[static_cast<std::size_t>(order[i])];
    const auto in_strides = leg_strides(dims);
    const auto out_strides = leg_strides(out_dims);

    std::vector<std::size_t> map(dim);
    std::vector<int> digits(nlegs);
    for (std::size_t r = 0; r < dim; ++r) {
        std::size_t rest = r;
        for (std::size_t t = 0; t < nlegs; ++t) {
            digits[t] = static_cast<int>(rest / in_strides[t]);
            rest %= in_strides[t];
        }
        std::size_t ro = 0;
        for (std::size_t i = 0; i < nlegs; ++i)
            ro += static_cast<std::size_t>(digits[static_cast<std::size_t>(order[i])]) * out_strides[i];
        map[r] = ro;
    }

    MatrixXcd out(dim, dim);
    for (std::size_t r = 0; r < dim; ++r)
        for (std::size_t c = 0; c < dim; ++c)
            out(static_cast<Eigen::Index>(map[r]), static_cast<Eigen::Index>(map[c])) =
                a(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c));
    return out;
}

MatrixXcd leg_permutation_matrix(const std::vector<int>& in_dims,
                                 const std::vector<int>& order) {
    const std::size_t nlegs = in_dims.size();
    if (order.size() != nlegs) throw std::invalid_argument("leg order has wrong length");
    std::vector<char> seen(nlegs, 0);
    for (int t : order) {
        if (t < 0 || static_cast<std::size_t>(t) >= nlegs || seen[t])
            throw std::invalid_argument("leg order is not a permutation");
        seen[t] = 1;
    }
    std::vector<int> out_dims(nlegs);
    for (std::size_t i = 0; i < nlegs; ++i) out_dims[i] = in_dims[static_cast<std::size_t>(order[i])];
    const auto in_strides = leg_strides(in_dims);
    const auto out_strides = leg_strides(out_dims);
    const std::size_t dim = total_of(in_dims);

    MatrixXcd q = MatrixXcd::Zero(dim, dim);
    std::vector<int> digits(nlegs);
    for (std::size_t r = 0; r < dim; ++r) {
        std::size_t rest = r;
        for (std::size_t t = 0; t < nlegs; ++t) {
            digits[t] = static_cast<int>(rest / in_strides[t]);
            rest %= in_strides[t];
        }
        std::size_t ro = 0;
        for (std::size_t i = 0; i < nlegs; ++i)
            ro += static_cast<std::size_t>(digits[static_cast<std::size_t>(order[i])]) *
                  out_strides[i];
        q(static_cast<Eigen::Index>(ro), static_cast<Eigen::Index>(r)) = 1.0;
    }
    return q;
}

MatrixXcd trace_out_legs(const MatrixXcd& a, const std::vector<int>& dims,
                         const std::vector<int>& traced) {
    const std::size_t nlegs = dims.size();
    std::vector<char> is_traced(nlegs, 0);
    for (int t : traced) {
        if (t < 0 || static_cast<std::size_t>(t) >= nlegs || is_traced[t])
            throw std::invalid_argument("invalid traced leg list");
        is_traced[t] = 1;
    }
    const auto strides = leg_strides(dims);

    std::vector<int> keep, tr;
    for (std::size_t t = 0; t < nlegs; ++t) (is_traced[t] ? tr : keep).push_back(static_cast<int>(t));

    std::vector<int> keep_dims, tr_dims;
    for (int t : keep) keep_dims.push_back(dims[static_cast<std::size_t>(t)]);
    for (int t : tr) tr_dims.push_back(dims[static_cast<std::size_t>(t)]);
    const std::size_t dk = total_of(keep_dims), dt = total_of(tr_dims);

    // offsets of each partial index into the full flat index
    auto offsets = [&](const std::vector<int>& legs, const std::vector<int>& ldims,
                       std::size_t count) {
        std::vector<std::size_t> off(count, 0);
        const auto ls = leg_strides(ldims);
        std::size_t n = legs.size();
        for (std::size_t v = 0; v < count; ++v) {
            std::size_t rest = v, o = 0;
            for (std::size_t i = 0; i < n; ++i) {
                std::size_t digit = rest / ls[i];
                rest %= ls[i];
                o += digit * strides[static_cast<std::size_t>(legs[i])];
            }
            off[v] = o;
        }
        return off;
    };
    const auto keep_off = offsets(keep, keep_dims, dk);
    const auto tr_off = offsets(tr, tr_dims, dt);

    MatrixXcd out = MatrixXcd::Zero(static_cast<Eigen::Index>(dk), static_cast<Eigen::Index>(dk));
    for (std::size_t r = 0; r < dk; ++r)
        for (std::size_t c = 0; c < dk; ++c) {
            complexd acc = 0.0;
            for (std::size_t t = 0; t < dt; ++t)
                acc += a(static_cast<Eigen::Index>(keep_off[r] + tr_off[t]),
                         static_cast<Eigen::Index>(keep_off[c] + tr_off[t]));
            out(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = acc;
        }
    return out;
}

MatrixXcd fold_leading_block(const MatrixXcd& a, int dlead, int drest) {
    if (a.rows() != Eigen::Index(dlead) * drest || a.cols() != a.rows())
        throw std::invalid_argument("fold: matrix does not match the split");
    MatrixXcd m(Eigen::Index(dlead) * dlead, Eigen::Index(drest) * drest);
    for (int i = 0; i < dlead; ++i)
        for (int ip = 0; ip < dlead; ++ip)
            for (int r = 0; r < drest; ++r)
                for (int rp = 0; rp < drest; ++rp)
                    m(i + Eigen::Index(dlead) * ip, r + Eigen::Index(drest) * rp) =
                        a(Eigen::Index(i) * drest + r, Eigen::Index(ip) * drest + rp);
    return m;
}

MatrixXcd unfold_leading_block(const MatrixXcd& m, int dlead, int drest) {
    if (m.rows() != Eigen::Index(dlead) * dlead || m.cols() != Eigen::Index(drest) * drest)
        throw std::invalid_argument("unfold: matrix does not match the split");
    MatrixXcd a(Eigen::Index(dlead) * drest, Eigen::Index(dlead) * drest);
    for (int i = 0; i < dlead; ++i)
        for (int ip = 0; ip < dlead; ++ip)
            for (int r = 0; r < drest; ++r)
                for (int rp = 0; rp < drest; ++rp)
                    a(Eigen::Index(i) * drest + r, Eigen::Index(ip) * drest + rp) =
                        m(i + Eigen::Index(dlead) * ip, r + Eigen::Index(drest) * rp);
    return a;
}

// ---------------------------------------------------------------------------

LabeledOperator::LabeledOperator(std::vector<SiteCoord> sites, std::vector<int> dims, MatrixXcd m)
    : support(std::move(sites)), site_dims(std::move(dims)), mat(std::move(m)) {
    if (support.size() != site_dims.size())
        throw std::invalid_argument("support and dimension lists differ in length");
    for (std::size_t i = 0; i + 1 < support.size(); ++i)
        if (!(support[i] < support[i + 1]))
            throw std::invalid_argument("support must be sorted level-ascending, lexicographic");
    for (int d : site_dims)
        if (d < 1) throw std::invalid_argument("site dimension must be >= 1");
    const std::size_t dim = total_of(site_dims);
    if (mat.rows() != static_cast<Eigen::Index>(dim) || mat.cols() != mat.rows())
        throw std::invalid_argument("matrix does not match the support dimensions");
}

int LabeledOperator::site_index(const SiteCoord& x) const {
    for (std::size_t i = 0; i < support.size(); ++i)
        if (support[i] == x) return static_cast<int>(i);
    return -1;
}

LabeledOperator product_operator(const std::vector<SiteCoord>& sites,
                                 const std::vector<int>& dims,
                                 const std::vector<MatrixXcd>& factors) {
    if (factors.size() != sites.size())
        throw std::invalid_argument("one factor per site required");
    for (std::size_t i = 0; i < factors.size(); ++i)
        if (factors[i].rows() != dims[i] || factors[i].cols() != dims[i])
            throw std::invalid_argument("factor does not match its site dimension");
    return LabeledOperator(sites, dims, kron_list(factors));
}

LabeledOperator embed(const LabeledOperator& a, const std::vector<SiteCoord>& target,
                      const std::vector<int>& target_dims, std::size_t dim_cap) {
    if (target.size() != target_dims.size())
        throw std::invalid_argument("target support and dimensions differ in length");
    for (std::size_t i = 0; i + 1 < target.size(); ++i)
        if (!(target[i] < target[i + 1]))
            throw std::invalid_argument("target support must be sorted");
    check_dimension_guard(total_of(target_dims), dim_cap);

    // position of each target site in [a's legs..., missing legs...]
    std::vector<int> source_leg(target.size(), -1);
    std::vector<int> missing_dims;
    int next_missing = static_cast<int>(a.support.size());
    for (std::size_t i = 0; i < target.size(); ++i) {
        int idx = a.site_index(target[i]);
        if (idx >= 0) {
            if (a.site_dims[static_cast<std::size_t>(idx)] != target_dims[i])
                throw std::invalid_argument("site dimension mismatch in embedding");
            source_leg[i] = idx;
        } else {
            source_leg[i] = next_missing++;
            missing_dims.push_back(target_dims[i]);
        }
    }
    for (const auto& x : a.support)
        if (std::find(target.begin(), target.end(), x) == target.end())
            throw std::invalid_argument("embedding target must contain the support");

    MatrixXcd big = kron(a.mat, MatrixXcd::Identity(static_cast<Eigen::Index>(total_of(missing_dims)),
                                                    static_cast<Eigen::Index>(total_of(missing_dims))));
    std::vector<int> big_dims = a.site_dims;
    big_dims.insert(big_dims.end(), missing_dims.begin(), missing_dims.end());
    return LabeledOperator(target, target_dims, permute_legs(big, big_dims, source_leg));
}

LabeledOperator embed(const LabeledOperator& a, const std::vector<SiteCoord>& target,
                      int uniform_dim, std::size_t dim_cap) {
    return embed(a, target, std::vector<int>(target.size(), uniform_dim), dim_cap);
}

LabeledOperator partial_trace(const LabeledOperator& a, const std::vector<SiteCoord>& keep) {
    std::vector<int> traced;
    std::vector<SiteCoord> keep_sites;
    std::vector<int> keep_dims;
    for (std::size_t i = 0; i < a.support.size(); ++i) {
        bool kept = std::find(keep.begin(), keep.end(), a.support[i]) != keep.end();
        if (kept) {
            keep_sites.push_back(a.support[i]);
            keep_dims.push_back(a.site_dims[i]);
        } else {
            traced.push_back(static_cast<int>(i));
        }
    }
    if (keep_sites.size() != keep.size())
        throw std::invalid_argument("partial trace target must be a subset of the support");
    return LabeledOperator(keep_sites, keep_dims, trace_out_legs(a.mat, a.site_dims, traced));
}

LabeledOperator apply_map_to_sites(const LabeledOperator& a,
                                   const std::vector<SiteCoord>& site_sel,
                                   const Superop& t, const std::vector<SiteCoord>& out_sites,
                                   const std::vector<int>& out_site_dims,
                                   std::size_t dim_cap) {
    if (out_sites.size() != out_site_dims.size())
        throw std::invalid_argument("output sites and dimensions differ in length");
    std::vector<int> sel_legs;
    int dlead = 1;
    for (const auto& x : site_sel) {
        int idx = a.site_index(x);
        if (idx < 0) throw std::invalid_argument("selected site not in the support");
        sel_legs.push_back(idx);
        dlead *= a.site_dims[static_cast<std::size_t>(idx)];
    }
    std::vector<int> rest_legs;
    std::vector<SiteCoord> rest_sites;
    std::vector<int> rest_dims;
    for (std::size_t i = 0; i < a.support.size(); ++i) {
        if (std::find(sel_legs.begin(), sel_legs.end(), static_cast<int>(i)) != sel_legs.end())
            continue;
        rest_legs.push_back(static_cast<int>(i));
        rest_sites.push_back(a.support[i]);
        rest_dims.push_back(a.site_dims[i]);
    }
    int dout = 1;
    for (int v : out_site_dims) dout *= v;
    if (t.dim_in != dlead || t.dim_out != dout)
        throw std::invalid_argument("map dimensions do not match the selected legs");
    for (const auto& x : out_sites)
        for (const auto& y : rest_sites)
            if (x == y) throw std::invalid_argument("output site collides with the support");
    const std::size_t drest = total_of(rest_dims);
    check_dimension_guard(static_cast<std::size_t>(dout) * drest, dim_cap);

    std::vector<int> order = sel_legs;
    order.insert(order.end(), rest_legs.begin(), rest_legs.end());
    MatrixXcd front = permute_legs(a.mat, a.site_dims, order);
    MatrixXcd folded = fold_leading_block(front, dlead, static_cast<int>(drest));
    MatrixXcd mapped = t.m * folded;
    MatrixXcd raw = unfold_leading_block(mapped, dout, static_cast<int>(drest));

    // legs are now [out_sites..., rest...]; bring them to canonical order
    std::vector<SiteCoord> all_sites = out_sites;
    all_sites.insert(all_sites.end(), rest_sites.begin(), rest_sites.end());
    std::vector<int> cur_dims = out_site_dims;
    cur_dims.insert(cur_dims.end(), rest_dims.begin(), rest_dims.end());

    std::vector<int> perm(all_sites.size());
    for (std::size_t i = 0; i < perm.size(); ++i) perm[i] = static_cast<int>(i);
    std::sort(perm.begin(), perm.end(),
              [&](int l, int r) { return all_sites[static_cast<std::size_t>(l)] <
                                         all_sites[static_cast<std::size_t>(r)]; });
    std::vector<SiteCoord> sorted_sites;
    std::vector<int> sorted_dims;
    for (int i : perm) {
        sorted_sites.push_back(all_sites[static_cast<std::size_t>(i)]);
        sorted_dims.push_back(cur_dims[static_cast<std::size_t>(i)]);
    }
    return LabeledOperator(sorted_sites, sorted_dims, permute_legs(raw, cur_dims, perm));
}

LabeledOperator apply_map_to_sites(const LabeledOperator& a,
                                   const std::vector<SiteCoord>& site_sel,
                                   const Superop& t, const SiteCoord& out_site, int out_dim,
                                   std::size_t dim_cap) {
    return apply_map_to_sites(a, site_sel, t, std::vector<SiteCoord>{out_site},
                              std::vector<int>{out_dim}, dim_cap);
}

DensityState::DensityState(LabeledOperator o) : op(std::move(o)) {
    const MatrixXcd& m = op.mat;
    if (max_abs(m - m.adjoint()) > tol::hermitian)
        throw std::invalid_argument("density matrix is not hermitian");
    if (std::abs(m.trace() - complexd(1.0, 0.0)) > tol::trace_norm)
        throw std::invalid_argument("density matrix is not normalized");
    Eigen::SelfAdjointEigenSolver<MatrixXcd> es(m, Eigen::EigenvaluesOnly);
    if (es.eigenvalues().minCoeff() < -tol::positive)
        throw std::invalid_argument("density matrix has a negative eigenvalue");
}

// ---------------------------------------------------------------------------

MatrixXcd matrix_unit(int dim, int row, int col) {
    MatrixXcd e = MatrixXcd::Zero(dim, dim);
    e(row, col) = 1.0;
    return e;
}

std::vector<MatrixXcd> hermitian_basis(int dim) {
    std::vector<MatrixXcd> out;
    for (int i = 0; i < dim; ++i) out.push_back(matrix_unit(dim, i, i));
    for (int i = 0; i < dim; ++i)
        for (int j = i + 1; j < dim; ++j) {
            out.push_back(matrix_unit(dim, i, j) + matrix_unit(dim, j, i));
            out.push_back(complexd(0, 1) * (matrix_unit(dim, i, j) - matrix_unit(dim, j, i)));
        }
    return out;
}

MatrixXcd random_matrix(std::mt19937_64& rng, int rows, int cols) {
    std::normal_distribution<double> n(0.0, 1.0);
    MatrixXcd g(rows, cols);
    for (int i = 0; i < rows; ++i)
        for (int j = 0; j < cols; ++j) g(i, j) = complexd(n(rng), n(rng));
    return g;
}

MatrixXcd random_hermitian(std::mt19937_64& rng, int dim) {
    MatrixXcd g = random_matrix(rng, dim, dim);
    return 0.5 * (g + g.adjoint());
}

MatrixXcd random_density(std::mt19937_64& rng, int dim) {
    MatrixXcd g = random_matrix(rng, dim, dim);
    MatrixXcd w = g * g.adjoint();
    // a mild ridge keeps the spectrum comfortably away from zero
    w += (0.1 * w.trace().real() / dim) * MatrixXcd::Identity(dim, dim);
    return w / w.trace();
}

MatrixXcd random_unitary(std::mt19937_64& rng, int dim) {
    MatrixXcd g = random_matrix(rng, dim, dim);
    Eigen::HouseholderQR<MatrixXcd> qr(g);
    MatrixXcd q = qr.householderQ();
    MatrixXcd r = qr.matrixQR().triangularView<Eigen::Upper>();
    for (int i = 0; i < dim; ++i) {
        complexd d = r(i, i);
        q.col(i) *= (std::abs(d) > 0 ? d / std::abs(d) : complexd(1.0));
    }
    return q;
}

double max_abs(const MatrixXcd& a) {
    double m = 0.0;
    for (Eigen::Index i = 0; i < a.rows(); ++i)
        for (Eigen::Index j = 0; j < a.cols(); ++j) m = std::max(m, std::abs(a(i, j)));
    return m;
}

} // namespace qmt
