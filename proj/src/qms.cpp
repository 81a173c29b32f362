#include "qmt/qms.hpp"

#include <algorithm>

#include "qmt/hermitian.hpp"

namespace qmt {

void QmsSpec::validate(std::size_t dim_cap) const {
    if (k < 1 || d < 2) throw std::invalid_argument("invalid tree or site dimension");
    const SiteCoord root = root_site(k);
    if (rho0.op.support.size() != 1 || !(rho0.op.support.front() == root) ||
        rho0.op.site_dims.front() != d)
        throw std::invalid_argument("root state does not live on the root site");
    for (std::size_t j = 0; j < levels.size(); ++j) {
        const auto& lev = levels[j];
        if (lev.level != static_cast<int>(j))
            throw std::invalid_argument("level maps are not consecutively indexed");
        Level gen = enumerate_level(k, static_cast<int>(j));
        if (lev.per_site.size() != gen.vertices.size())
            throw std::invalid_argument("level map does not cover its generation");
        for (std::size_t i = 0; i < lev.per_site.size(); ++i) {
            const auto& sx = lev.per_site[i];
            if (!(sx.site == gen.vertices[i]))
                throw std::invalid_argument("site maps are not in generation order");
            if (sx.d != d || sx.k != k || sx.level != static_cast<int>(j))
                throw std::invalid_argument("site map dimensions are inconsistent");
            if (max_abs(sx.map.apply(MatrixXcd::Identity(sx.map.dim_in, sx.map.dim_in)) -
                        MatrixXcd::Identity(d, d)) > 1e-9)
                throw std::invalid_argument("site map is not unital");
            CpReport rep = positivity_report(sx.map);
            if (!rep.completely_positive)
                throw std::invalid_argument("site map is not completely positive");
        }
    }
    (void)dim_cap;
}

complexd evaluate_nested(const QmsSpec& spec, const LabeledOperator& a, std::size_t dim_cap) {
    int depth = 0;
    for (std::size_t i = 0; i < a.support.size(); ++i) {
        depth = std::max(depth, a.support[i].level());
        if (a.site_dims[i] != spec.d)
            throw std::invalid_argument("operator leg does not match the site dimension");
    }
    if (depth > spec.n_max())
        throw std::invalid_argument("support depth exceeds the available level maps");

    LabeledOperator cur = a;
    for (int j = depth - 1; j >= 0; --j) cur = qce_apply(spec.levels[static_cast<std::size_t>(j)], cur, dim_cap);
    LabeledOperator at_root = embed(cur, {root_site(spec.k)}, spec.d, dim_cap);
    return (spec.rho0.matrix() * at_root.mat).trace();
}

namespace {

LabeledOperator pushed_density(const QmsSpec& spec, int n, std::size_t dim_cap) {
    if (n < 0 || n > static_cast<int>(spec.levels.size()))
        throw std::invalid_argument("depth exceeds the available level maps");
    LabeledOperator push = spec.rho0.op;
    for (int m = 0; m < n; ++m)
        push = spec.levels[static_cast<std::size_t>(m)].apply_dual(push, dim_cap);
    return push;
}

} // namespace

FiniteVolumeState density_matrix(const QmsSpec& spec, int n, std::size_t dim_cap) {
    LabeledOperator push = pushed_density(spec, n, dim_cap);
    return FiniteVolumeState{n, DensityState(std::move(push))};
}

LabeledOperator boundary_marginal(const QmsSpec& spec, int m, std::size_t dim_cap) {
    if (m < 0 || m > spec.n_max())
        throw std::invalid_argument("no level map available at the requested depth");
    LabeledOperator push = pushed_density(spec, m, dim_cap);
    return spec.levels[static_cast<std::size_t>(m)].apply_boundary_dual(push, dim_cap);
}

double markov_check(const QmsSpec& spec, int j, std::size_t dim_cap) {
    if (j < 0 || j + 1 > spec.n_max())
        throw std::invalid_argument("the check needs level maps at j and j+1");
    LabeledOperator push = pushed_density(spec, j, dim_cap);
    const auto& lev = spec.levels[static_cast<std::size_t>(j)];
    LabeledOperator mj = lev.apply_boundary_dual(push, dim_cap);
    LabeledOperator lhs = lev.apply_dual(mj, dim_cap);
    LabeledOperator push1 = lev.apply_dual(push, dim_cap);
    LabeledOperator mj1 =
        spec.levels[static_cast<std::size_t>(j) + 1].apply_boundary_dual(push1, dim_cap);
    return max_abs(lhs.mat - mj1.mat);
}

FaithfulnessReport local_faithfulness(const FiniteVolumeState& state) {
    FaithfulnessReport rep;
    rep.min_eigenvalue = min_eigenvalue(state.rho.matrix());
    rep.faithful = rep.min_eigenvalue > tol::definite;
    return rep;
}

} // namespace qmt
