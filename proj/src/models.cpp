#include "qmt/models.hpp"

#include <cmath>
#include <random>
#include <stdexcept>
#include <string>

namespace qmt {

namespace {

int int_pow(int base, int exp) {
    int out = 1;
    for (int i = 0; i < exp; ++i) out *= base;
    return out;
}

std::vector<LabelSplit> resolve_splits(int d, int q, std::vector<LabelSplit> splits) {
    if (splits.empty()) splits = default_splits(d, q);
    if (static_cast<int>(splits.size()) != q) {
        throw std::invalid_argument("invalid dimension split: " + std::to_string(splits.size()) +
                                    " blocks for " + std::to_string(q) + " labels");
    }
    int total = 0;
    for (const auto& s : splits) {
        if (s.n_dim < 1 || s.m_dim < 1) {
            throw std::invalid_argument("invalid dimension split: factors must be positive");
        }
        total += s.n_dim * s.m_dim;
    }
    if (total != d) {
        throw std::invalid_argument("invalid dimension split: blocks fill " +
                                    std::to_string(total) + " of " + std::to_string(d) +
                                    " dimensions");
    }
    return splits;
}

// Strictly positive row, normalized to sum 1, bounded away from zero.
Eigen::VectorXd random_weights(std::mt19937_64& rng, int count) {
    std::uniform_real_distribution<double> unit(0.5, 1.5);
    Eigen::VectorXd row(count);
    for (int i = 0; i < count; ++i) row(i) = unit(rng);
    row /= row.sum();
    return row;
}

std::vector<int> decode_tuple(std::size_t c, int q, int k) {
    std::vector<int> tuple(static_cast<std::size_t>(k), 0);
    for (int y = k; y-- > 0;) {
        tuple[static_cast<std::size_t>(y)] = static_cast<int>(c % static_cast<std::size_t>(q));
        c /= static_cast<std::size_t>(q);
    }
    return tuple;
}

} // namespace

std::vector<LabelSplit> default_splits(int d, int q) {
    if (d < 1 || q < 1 || q > d) {
        throw std::invalid_argument("invalid dimension split: need 1 <= labels <= dimension");
    }
    if (d == 2 && q == 1) return {{2, 1}};
    if (d == 2 && q == 2) return {{1, 1}, {1, 1}};
    if (d == 4 && q == 1) return {{2, 2}};
    if (d == 4 && q == 2) return {{2, 1}, {1, 2}};
    // One large block, the rest scalar lines.
    std::vector<LabelSplit> out(static_cast<std::size_t>(q), LabelSplit{1, 1});
    out[0] = LabelSplit{1, d - q + 1};
    return out;
}

void IsingParams::validate() const {
    if (!(beta > 0.0) || !std::isfinite(beta) || !std::isfinite(j) || !std::isfinite(jp)) {
        throw std::invalid_argument("ising parameters must be finite with beta > 0");
    }
    if (k < 1) throw std::invalid_argument("ising model needs branching >= 1");
}

IsingModel ising_competing_model(const IsingParams& params, int n) {
    params.validate();
    if (n < 0) throw std::invalid_argument("ising model needs a nonnegative depth");
    const int k = params.k;
    const int d = 2;
    const int dk = int_pow(d, k);

    // Classical bond energies over (spin at x, spins of S(x)).
    Eigen::MatrixXd energy(d, dk);
    for (int a = 0; a < d; ++a) {
        const double zx = 1.0 - 2.0 * a;
        for (int c = 0; c < dk; ++c) {
            double pair = 0.0;
            double triple = 0.0;
            for (int y = 0; y < k; ++y) {
                const double zy = 1.0 - 2.0 * ((c >> (k - 1 - y)) & 1);
                pair += zx * zy;
                for (int y2 = y + 1; y2 < k; ++y2) {
                    const double zy2 = 1.0 - 2.0 * ((c >> (k - 1 - y2)) & 1);
                    triple += zy * zy2;
                }
            }
            energy(a, c) = -params.beta * (params.j * pair + params.jp * triple);
        }
    }

    // Downward normalization recursion with zero terminal field.
    std::vector<Eigen::VectorXd> hat(static_cast<std::size_t>(n) + 2,
                                     Eigen::VectorXd::Zero(d));
    for (int lvl = n; lvl >= 0; --lvl) {
        Eigen::VectorXd field(d);
        for (int a = 0; a < d; ++a) {
            double mass = 0.0;
            for (int c = 0; c < dk; ++c) {
                double below = 0.0;
                for (int y = 0; y < k; ++y) {
                    below += hat[static_cast<std::size_t>(lvl) + 1]((c >> (k - 1 - y)) & 1);
                }
                mass += std::exp(-energy(a, c) - below);
            }
            field(a) = -std::log(mass);
        }
        hat[static_cast<std::size_t>(lvl)] = field;
    }
    double z0 = 0.0;
    for (int a = 0; a < d; ++a) z0 += std::exp(-hat[0](a));

    InteractionDecomposition dec;
    dec.k = k;
    dec.d = d;
    dec.h_root = std::log(z0) * MatrixXcd::Identity(d, d);
    MatrixXcd bond = MatrixXcd::Zero(d * dk, d * dk);
    for (int a = 0; a < d; ++a) {
        for (int c = 0; c < dk; ++c) {
            bond(a * dk + c, a * dk + c) = energy(a, c);
        }
    }
    for (int lvl = 0; lvl <= n; ++lvl) {
        dec.h_bond.emplace_back(enumerate_level(k, lvl).vertices.size(), bond);
    }
    for (int lvl = 0; lvl <= n + 1; ++lvl) {
        MatrixXcd field = MatrixXcd::Zero(d, d);
        for (int a = 0; a < d; ++a) field(a, a) = hat[static_cast<std::size_t>(lvl)](a);
        dec.h_hat.emplace_back(enumerate_level(k, lvl).vertices.size(), field);
    }

    IsingModel model{qms_from_hamiltonian(dec), std::move(dec)};
    return model;
}

QmsSpec random_localized_qms(std::uint64_t seed, int k, int d, int q, int n,
                             std::vector<LabelSplit> splits) {
    if (k < 1 || n < 0) {
        throw std::invalid_argument("random spec needs branching >= 1 and depth >= 0");
    }
    splits = resolve_splits(d, q, std::move(splits));
    std::vector<int> n_dims, m_dims;
    for (const auto& s : splits) {
        n_dims.push_back(s.n_dim);
        m_dims.push_back(s.m_dim);
    }

    std::mt19937_64 rng(seed);
    const BlockStructure bs =
        BlockStructure::standard(n_dims, m_dims).rotated(random_unitary(rng, d));

    const int levels = n + 2;
    const std::size_t big_q = static_cast<std::size_t>(int_pow(q, k));

    ClassicalData data;
    data.k = k;
    data.q = q;
    data.n_dims = n_dims;
    data.m_dims = m_dims;
    data.pi0 = random_weights(rng, q);
    FactorStates fs;
    for (int w = 0; w < q; ++w) {
        fs.eta0.push_back(random_density(rng, n_dims[static_cast<std::size_t>(w)]));
    }
    for (int j = 0; j < levels; ++j) {
        Eigen::MatrixXd pi(q, static_cast<Eigen::Index>(big_q));
        for (int w = 0; w < q; ++w) {
            pi.row(w) = random_weights(rng, static_cast<int>(big_q)).transpose();
        }
        data.pi.push_back(std::move(pi));
        std::vector<MatrixXcd> etas;
        for (int w = 0; w < q; ++w) {
            for (std::size_t c = 0; c < big_q; ++c) {
                int dim = m_dims[static_cast<std::size_t>(w)];
                for (int lbl : decode_tuple(c, q, k)) dim *= n_dims[static_cast<std::size_t>(lbl)];
                etas.push_back(random_density(rng, dim));
            }
        }
        fs.eta.push_back(std::move(etas));
    }
    return spec_from_classical(data, fs, bs);
}

SiteTransitionExpectation random_transition_expectation(std::uint64_t seed, int k, int d,
                                                        int q, std::vector<LabelSplit> splits) {
    if (k < 1) throw std::invalid_argument("transition expectation needs branching >= 1");
    splits = resolve_splits(d, q, std::move(splits));
    std::vector<int> n_dims, m_dims;
    for (const auto& s : splits) {
        n_dims.push_back(s.n_dim);
        m_dims.push_back(s.m_dim);
    }

    std::mt19937_64 rng(seed);
    const BlockStructure bs =
        BlockStructure::standard(n_dims, m_dims).rotated(random_unitary(rng, d));
    const int dk = int_pow(d, k);

    std::vector<TransitionBlock> blocks;
    for (int w = 0; w < q; ++w) {
        TransitionBlock blk;
        blk.label = w;
        blk.p = bs.projection(w);
        blk.n_dim = n_dims[static_cast<std::size_t>(w)];
        blk.m_dim = m_dims[static_cast<std::size_t>(w)];
        blk.v = bs.v[static_cast<std::size_t>(w)];
        blk.phi = random_density(rng, blk.m_dim * dk);
        blocks.push_back(std::move(blk));
    }

    SiteTransitionExpectation sx;
    sx.site = root_site(k);
    sx.level = 0;
    sx.d = d;
    sx.k = k;
    sx.map = pinched_superop(d, k, blocks);
    sx.blocks = std::move(blocks);
    return sx;
}

} // namespace qmt
