#include "qmt/disintegration.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace qmt {

namespace {

constexpr double kWeightFloor = 1e-14;

std::vector<std::size_t> level_offsets(int k, int n) {
    std::vector<std::size_t> off(static_cast<std::size_t>(n) + 2, 0);
    for (int j = 0; j <= n; ++j) {
        off[static_cast<std::size_t>(j) + 1] =
            off[static_cast<std::size_t>(j)] + enumerate_level(k, j).vertices.size();
    }
    return off;
}

// Depth of the configuration domain; throws unless the domain is exactly the
// canonical site list of some Lambda_n.
int domain_depth(const QmsSpec& spec, const Configuration& sigma) {
    if (sigma.domain.empty()) throw std::invalid_argument("configuration domain is empty");
    const int n = sigma.domain.back().level();
    const auto expect = lambda_sites(spec.k, n);
    if (sigma.domain != expect) {
        throw std::invalid_argument("configuration domain is not a full volume Lambda_n");
    }
    if (sigma.labels.size() != sigma.domain.size()) {
        throw std::invalid_argument("configuration has mismatched domain and labels");
    }
    return n;
}

const TransitionBlock& block_at(const QmsSpec& spec, const BlockAlignment& al,
                                int level, std::size_t t, int label) {
    if (label < 0 || label >= al.q) throw std::invalid_argument("label out of range");
    const auto& sx = spec.levels[static_cast<std::size_t>(level)].per_site[t];
    const int b = al.index[static_cast<std::size_t>(level)][t][static_cast<std::size_t>(label)];
    return sx.blocks[static_cast<std::size_t>(b)];
}

// Integrate a compressed observable against the chain product of a component.
complexd chain_value(const ComponentState& cs, const LabeledOperator& compressed,
                     std::size_t dim_cap) {
    std::vector<int> fused(cs.n_dims.size());
    for (std::size_t i = 0; i < fused.size(); ++i) fused[i] = cs.n_dims[i] * cs.m_dims[i];
    const LabeledOperator full = embed(compressed, cs.sigma.domain, fused, dim_cap);
    return (cs.block * full.mat).trace();
}

// Normalized chain factor of a non-boundary site: the block state compressed
// onto the children's blocks, with the children's H_1 legs traced out.
struct SiteFactor {
    MatrixXcd eta;          // density on (H_1 at x) tensor (H_0 legs of S(x))
    std::vector<int> dims;  // leg dimensions of eta: m at x, then n per child
    double weight;          // mass of the children's block pattern in the block state
};

SiteFactor site_chain_factor(const QmsSpec& spec, const BlockAlignment& al,
                             const Configuration& sigma,
                             const std::vector<std::size_t>& off, int j, std::size_t g) {
    const int k = spec.k;
    const std::size_t begin = off[static_cast<std::size_t>(j)];
    const auto& blk = block_at(spec, al, j, g - begin, sigma.labels[g]);
    const std::size_t child0 = off[static_cast<std::size_t>(j) + 1] +
                               (g - begin) * static_cast<std::size_t>(k);
    std::vector<MatrixXcd> vs;
    std::vector<int> joint_dims{blk.m_dim};
    vs.reserve(static_cast<std::size_t>(k));
    for (int y = 0; y < k; ++y) {
        const std::size_t cg = child0 + static_cast<std::size_t>(y);
        const auto& cblk = block_at(spec, al, j + 1, cg - off[static_cast<std::size_t>(j) + 1],
                                    sigma.labels[cg]);
        vs.push_back(cblk.v);
        joint_dims.push_back(cblk.n_dim);
        joint_dims.push_back(cblk.m_dim);
    }
    const MatrixXcd w = kron(MatrixXcd::Identity(blk.m_dim, blk.m_dim), kron_list(vs));
    MatrixXcd joint = w.adjoint() * blk.phi * w;
    const double pw = joint.trace().real();
    if (pw < kWeightFloor) {
        throw std::runtime_error("configuration has vanishing weight at level " +
                                 std::to_string(j));
    }
    joint /= pw;
    std::vector<int> drop;
    for (int y = 0; y < k; ++y) drop.push_back(2 + 2 * y);
    SiteFactor f;
    f.eta = trace_out_legs(joint, joint_dims, drop);
    f.dims = {blk.m_dim};
    for (int y = 0; y < k; ++y) f.dims.push_back(joint_dims[1 + 2 * static_cast<std::size_t>(y)]);
    f.weight = pw;
    return f;
}

// Marginal state on the H_1 leg of a site: at the deepest level of the volume
// the successor marginal of its block state, otherwise the H_1 marginal of
// its chain factor at the labels the configuration selects below it.
MatrixXcd successor_marginal(const QmsSpec& spec, const BlockAlignment& al,
                             const Configuration& sigma,
                             const std::vector<std::size_t>& off, int n, int level,
                             std::size_t g) {
    if (level == n) {
        const std::size_t begin = off[static_cast<std::size_t>(level)];
        const auto& blk = block_at(spec, al, level, g - begin, sigma.labels[g]);
        const int dk = static_cast<int>(std::llround(std::pow(double(spec.d), spec.k)));
        return trace_out_legs(blk.phi, {blk.m_dim, dk}, {1});
    }
    const SiteFactor f = site_chain_factor(spec, al, sigma, off, level, g);
    std::vector<int> drop;
    for (int y = 0; y < spec.k; ++y) drop.push_back(1 + y);
    return trace_out_legs(f.eta, f.dims, drop);
}

} // namespace

LabeledOperator compression(const QmsSpec& spec, const BlockAlignment& al,
                            const Configuration& sigma, const LabeledOperator& a,
                            std::size_t dim_cap) {
    LabeledOperator out = a;
    const std::vector<SiteCoord> support = a.support;
    for (const auto& x : support) {
        const int lvl = x.level();
        if (lvl > spec.n_max()) {
            throw std::invalid_argument("support site " + x.to_string() +
                                        " lies below the deepest transition level");
        }
        const int at = out.site_index(x);
        if (out.site_dims[static_cast<std::size_t>(at)] != spec.d) {
            throw std::invalid_argument("support leg of " + x.to_string() +
                                        " does not carry the ambient site dimension");
        }
        const std::size_t t = static_cast<std::size_t>(site_index_in_level(x));
        const auto& blk = block_at(spec, al, lvl, t, sigma.label_at(x));
        out = apply_map_to_sites(out, {x}, Superop::compress(blk.v), x,
                                 blk.n_dim * blk.m_dim, dim_cap);
    }
    return out;
}

MatrixXcd chain_product_density(int k, int n, const std::vector<int>& n_dims,
                                const std::vector<int>& m_dims, const MatrixXcd& eta0,
                                const std::vector<MatrixXcd>& eta,
                                const std::vector<MatrixXcd>& eta_hat,
                                std::size_t dim_cap) {
    const auto off = level_offsets(k, n);
    const std::size_t n_sites = off[static_cast<std::size_t>(n) + 1];
    const std::size_t interior = off[static_cast<std::size_t>(n)];
    if (n_dims.size() != n_sites || m_dims.size() != n_sites) {
        throw std::invalid_argument("per-site dimension lists do not match the volume");
    }
    if (eta.size() != interior || eta_hat.size() != n_sites - interior) {
        throw std::invalid_argument("chain factor lists do not match the volume");
    }

    std::size_t total = 1;
    for (std::size_t i = 0; i < n_sites; ++i) {
        total *= static_cast<std::size_t>(n_dims[i]) * static_cast<std::size_t>(m_dims[i]);
        check_dimension_guard(total, dim_cap);
    }

    // Chain order: root H_0 factor, then per interior site its H_1 leg
    // followed by the children's H_0 legs, then the boundary H_1 legs.
    // chain_pos[2*i] is the position of (site i, H_0), chain_pos[2*i+1] of
    // (site i, H_1).
    std::vector<int> chain_dims;
    std::vector<int> chain_pos(2 * n_sites, -1);
    auto push_leg = [&](std::size_t site, int part, int dim) {
        chain_pos[2 * site + static_cast<std::size_t>(part)] =
            static_cast<int>(chain_dims.size());
        chain_dims.push_back(dim);
    };

    std::vector<MatrixXcd> factors;
    factors.reserve(1 + eta.size() + eta_hat.size());

    if (eta0.rows() != n_dims[0] || eta0.cols() != n_dims[0]) {
        throw std::invalid_argument("root factor has wrong dimension");
    }
    factors.push_back(eta0);
    push_leg(0, 0, n_dims[0]);

    for (int j = 0; j < n; ++j) {
        const std::size_t begin = off[static_cast<std::size_t>(j)];
        const std::size_t end = off[static_cast<std::size_t>(j) + 1];
        for (std::size_t g = begin; g < end; ++g) {
            Eigen::Index want = m_dims[g];
            push_leg(g, 1, m_dims[g]);
            const std::size_t child0 = off[static_cast<std::size_t>(j) + 1] +
                                       (g - begin) * static_cast<std::size_t>(k);
            for (int y = 0; y < k; ++y) {
                want *= n_dims[child0 + static_cast<std::size_t>(y)];
                push_leg(child0 + static_cast<std::size_t>(y), 0,
                         n_dims[child0 + static_cast<std::size_t>(y)]);
            }
            if (eta[g].rows() != want || eta[g].cols() != want) {
                throw std::invalid_argument("interior chain factor has wrong dimension");
            }
            factors.push_back(eta[g]);
        }
    }
    for (std::size_t g = interior; g < n_sites; ++g) {
        if (eta_hat[g - interior].rows() != m_dims[g] || eta_hat[g - interior].cols() != m_dims[g]) {
            throw std::invalid_argument("boundary chain factor has wrong dimension");
        }
        factors.push_back(eta_hat[g - interior]);
        push_leg(g, 1, m_dims[g]);
    }

    const MatrixXcd chained = kron_list(factors);
    return permute_legs(chained, chain_dims, chain_pos);
}

ComponentState component_state(const QmsSpec& spec, const Configuration& sigma,
                               std::size_t dim_cap) {
    return component_state(spec, align_blocks(spec), sigma, dim_cap);
}

ComponentState component_state(const QmsSpec& spec, const BlockAlignment& al,
                               const Configuration& sigma, std::size_t dim_cap) {
    const int n = domain_depth(spec, sigma);
    if (n > spec.n_max()) {
        throw std::invalid_argument("component volume exceeds the deepest transition level");
    }
    const int k = spec.k;
    const auto off = level_offsets(k, n);
    const std::size_t n_sites = off[static_cast<std::size_t>(n) + 1];

    ComponentState cs;
    cs.sigma = sigma;
    cs.n = n;
    cs.n_dims.resize(n_sites);
    cs.m_dims.resize(n_sites);
    cs.isometries.resize(n_sites);
    for (int j = 0; j <= n; ++j) {
        const std::size_t begin = off[static_cast<std::size_t>(j)];
        for (std::size_t g = begin; g < off[static_cast<std::size_t>(j) + 1]; ++g) {
            const auto& blk = block_at(spec, al, j, g - begin, sigma.labels[g]);
            cs.n_dims[g] = blk.n_dim;
            cs.m_dims[g] = blk.m_dim;
            cs.isometries[g] = blk.v;
        }
    }

    // Root factor and weight.
    {
        const auto& blk = block_at(spec, al, 0, 0, sigma.labels[0]);
        const MatrixXcd r = blk.v.adjoint() * spec.rho0.matrix() * blk.v;
        const double p0 = r.trace().real();
        if (p0 < kWeightFloor) {
            throw std::runtime_error("configuration has vanishing weight at the root");
        }
        cs.weight = p0;
        cs.eta0 = trace_out_legs(r, {blk.n_dim, blk.m_dim}, {1}) / p0;
    }

    // Interior factors: compress each block state onto the children's blocks
    // and trace out the children's H_1 legs.
    cs.eta.reserve(off[static_cast<std::size_t>(n)]);
    for (int j = 0; j < n; ++j) {
        const std::size_t begin = off[static_cast<std::size_t>(j)];
        for (std::size_t g = begin; g < off[static_cast<std::size_t>(j) + 1]; ++g) {
            SiteFactor f = site_chain_factor(spec, al, sigma, off, j, g);
            cs.weight *= f.weight;
            cs.eta.push_back(std::move(f.eta));
        }
    }

    // Boundary factors: successor marginals of the deepest block states.
    const std::size_t interior = off[static_cast<std::size_t>(n)];
    cs.eta_hat.reserve(n_sites - interior);
    const int dk = static_cast<int>(std::llround(std::pow(double(spec.d), spec.k)));
    for (std::size_t g = interior; g < n_sites; ++g) {
        const auto& blk = block_at(spec, al, n, g - interior, sigma.labels[g]);
        cs.eta_hat.push_back(trace_out_legs(blk.phi, {blk.m_dim, dk}, {1}));
    }

    cs.block = chain_product_density(k, n, cs.n_dims, cs.m_dims, cs.eta0, cs.eta,
                                     cs.eta_hat, dim_cap);
    return cs;
}

complexd component_value(const ComponentState& cs, const LabeledOperator& a,
                         std::size_t dim_cap) {
    LabeledOperator compressed = a;
    for (const auto& x : a.support) {
        int g = -1;
        for (std::size_t i = 0; i < cs.sigma.domain.size(); ++i) {
            if (cs.sigma.domain[i] == x) {
                g = static_cast<int>(i);
                break;
            }
        }
        if (g < 0) {
            throw std::invalid_argument("observable leg " + x.to_string() +
                                        " lies outside the component volume");
        }
        compressed = apply_map_to_sites(
            compressed, {x}, Superop::compress(cs.isometries[static_cast<std::size_t>(g)]), x,
            cs.n_dims[static_cast<std::size_t>(g)] * cs.m_dims[static_cast<std::size_t>(g)],
            dim_cap);
    }
    return chain_value(cs, compressed, dim_cap);
}

ComponentTransition component_transition(const QmsSpec& spec, const BlockAlignment& al,
                                         const Configuration& sigma, int level) {
    const int n = domain_depth(spec, sigma);
    if (level < 0 || level >= n) {
        throw std::invalid_argument("component transition level must precede the volume depth");
    }
    const int k = spec.k;
    const auto off = level_offsets(k, n);

    ComponentTransition ct;
    ct.level = level;
    const std::size_t begin = off[static_cast<std::size_t>(level)];
    const std::size_t end = off[static_cast<std::size_t>(level) + 1];
    for (std::size_t g = begin; g < end; ++g) {
        const auto& blk = block_at(spec, al, level, g - begin, sigma.labels[g]);
        const SiteFactor f = site_chain_factor(spec, al, sigma, off, level, g);
        const std::size_t child0 = off[static_cast<std::size_t>(level) + 1] +
                                   (g - begin) * static_cast<std::size_t>(k);

        // Pairing state on the input legs past the leading H_0 leg: the chain
        // factor on (H_1 at x, H_0 legs of S(x)) completed by the successor
        // marginals on the children's H_1 legs, interleaved into per-site order.
        std::vector<MatrixXcd> facs{f.eta};
        std::vector<int> leg_dims = f.dims;
        std::vector<int> order(1 + 2 * static_cast<std::size_t>(k));
        order[0] = 0;
        int rest = blk.m_dim;
        for (int y = 0; y < k; ++y) {
            const std::size_t cg = child0 + static_cast<std::size_t>(y);
            facs.push_back(successor_marginal(spec, al, sigma, off, n, level + 1, cg));
            leg_dims.push_back(static_cast<int>(facs.back().rows()));
            order[static_cast<std::size_t>(1 + 2 * y)] = 1 + y;
            order[static_cast<std::size_t>(2 + 2 * y)] = 1 + k + y;
            rest *= f.dims[static_cast<std::size_t>(1 + y)] * leg_dims.back();
        }
        const MatrixXcd theta = permute_legs(kron_list(facs), leg_dims, order);

        const int nx = blk.n_dim;
        const int mx = blk.m_dim;
        const MatrixXcd pairing = kron(MatrixXcd::Identity(nx, nx), theta);
        ct.maps.push_back(Superop::from_action(
            nx * rest, nx * mx, [nx, mx, rest, pairing](const MatrixXcd& c) {
                const MatrixXcd head = trace_out_legs(pairing * c, {nx, rest}, {1});
                return kron(head, MatrixXcd::Identity(mx, mx));
            }));
        ct.out_dims.push_back(nx * mx);
    }
    return ct;
}

double component_markov_residual(const QmsSpec& spec, const Configuration& sigma, int j,
                                 std::size_t dim_cap) {
    const BlockAlignment al = align_blocks(spec);
    const ComponentState cs = component_state(spec, al, sigma, dim_cap);
    const ComponentTransition ct = component_transition(spec, al, sigma, j);
    const auto off = level_offsets(spec.k, cs.n);

    double residual = 0.0;
    const std::size_t begin = off[static_cast<std::size_t>(j)];
    const std::size_t end = off[static_cast<std::size_t>(j) + 1];
    for (std::size_t g = begin; g < end; ++g) {
        const std::size_t child0 = off[static_cast<std::size_t>(j) + 1] +
                                   (g - begin) * static_cast<std::size_t>(spec.k);
        std::vector<SiteCoord> sites{cs.sigma.domain[g]};
        std::vector<int> dims{cs.n_dims[g] * cs.m_dims[g]};
        std::size_t joint = static_cast<std::size_t>(dims[0]);
        for (int y = 0; y < spec.k; ++y) {
            const std::size_t cg = child0 + static_cast<std::size_t>(y);
            sites.push_back(cs.sigma.domain[cg]);
            dims.push_back(cs.n_dims[cg] * cs.m_dims[cg]);
            joint *= static_cast<std::size_t>(dims.back());
        }
        check_dimension_guard(joint, dim_cap);
        for (std::size_t u = 0; u < joint; ++u) {
            for (std::size_t v = 0; v < joint; ++v) {
                LabeledOperator c(sites, dims,
                                  matrix_unit(static_cast<int>(joint), static_cast<int>(u),
                                              static_cast<int>(v)));
                const LabeledOperator mapped =
                    apply_map_to_sites(c, sites, ct.maps[g - begin], sites[0],
                                       ct.out_dims[g - begin], dim_cap);
                const complexd lhs = chain_value(cs, mapped, dim_cap);
                const complexd rhs = chain_value(cs, c, dim_cap);
                residual = std::max(residual, std::abs(lhs - rhs));
            }
        }
    }
    return residual;
}

DisintegrationReport disintegration_check(const QmsSpec& spec, int n, std::size_t dim_cap) {
    const BlockAlignment al = align_blocks(spec);
    const GibbsTable table = weights_from_qms(spec);
    const std::vector<double> mu = measure(table, n);
    const FiniteVolumeState target = density_matrix(spec, n, dim_cap);

    const std::size_t full = target.rho.matrix().rows();
    MatrixXcd acc = MatrixXcd::Zero(static_cast<Eigen::Index>(full),
                                    static_cast<Eigen::Index>(full));
    double mass = 0.0;
    for (std::size_t r = 0; r < mu.size(); ++r) {
        mass += mu[r];
        if (mu[r] <= kWeightFloor) continue;
        const Configuration sigma = configuration_from_rank(spec.k, table.q, n, r);
        const ComponentState cs = component_state(spec, al, sigma, dim_cap);
        const MatrixXcd u = kron_list(cs.isometries);
        acc += mu[r] * (u * cs.block * u.adjoint());
    }

    DisintegrationReport report;
    report.density_residual = max_abs(acc - target.rho.matrix());
    report.weight_mass_defect = std::abs(mass - 1.0);
    return report;
}

} // namespace qmt
