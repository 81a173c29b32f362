#include "qmt/gibbs.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>
#include <stdexcept>

#include "qmt/tensor.hpp"

namespace qmt {

namespace {

constexpr std::size_t kExhaustiveCap = std::size_t{1} << 20;

std::size_t int_pow_sz(std::size_t base, std::size_t exp) {
    std::size_t out = 1;
    for (std::size_t i = 0; i < exp; ++i) {
        if (base != 0 && out > (std::size_t{1} << 62) / base) {
            throw dimension_guard_error("configuration count overflows the rank type");
        }
        out *= base;
    }
    return out;
}

// Digits of a configuration rank, first site slowest.
std::vector<int> decode_rank(std::size_t rank, int q, std::size_t n_sites) {
    std::vector<int> labels(n_sites, 0);
    for (std::size_t i = n_sites; i-- > 0;) {
        labels[i] = static_cast<int>(rank % static_cast<std::size_t>(q));
        rank /= static_cast<std::size_t>(q);
    }
    return labels;
}

// Offsets of each level inside the canonical site order of Lambda_n.
std::vector<std::size_t> level_offsets(int k, int n) {
    std::vector<std::size_t> off(static_cast<std::size_t>(n) + 2, 0);
    for (int j = 0; j <= n; ++j) {
        off[static_cast<std::size_t>(j) + 1] =
            off[static_cast<std::size_t>(j)] + enumerate_level(k, j).vertices.size();
    }
    return off;
}

// Child-tuple rank of site s at level j under the canonical order: the
// children of the t-th vertex of W_j occupy positions t*k .. t*k+k-1 of
// W_{j+1}, first child slowest in the rank.
std::size_t child_tuple_rank(const std::vector<int>& labels,
                             const std::vector<std::size_t>& off, int j,
                             std::size_t t, int k, int q) {
    std::size_t c = 0;
    for (int y = 0; y < k; ++y) {
        c = c * static_cast<std::size_t>(q) +
            static_cast<std::size_t>(
                labels[off[static_cast<std::size_t>(j) + 1] + t * static_cast<std::size_t>(k) +
                       static_cast<std::size_t>(y)]);
    }
    return c;
}

double weight_product(const GibbsTable& table, const std::vector<int>& labels,
                      const std::vector<std::size_t>& off, int n) {
    double p = table.initial(labels[0]);
    for (int j = 0; j < n; ++j) {
        const std::size_t sites = off[static_cast<std::size_t>(j) + 1] - off[static_cast<std::size_t>(j)];
        for (std::size_t t = 0; t < sites; ++t) {
            const int w = labels[off[static_cast<std::size_t>(j)] + t];
            const std::size_t c = child_tuple_rank(labels, off, j, t, table.k, table.q);
            p *= table.weights[static_cast<std::size_t>(j)](w, static_cast<Eigen::Index>(c));
        }
    }
    return p;
}

// Sum of the measure over all boundary labels, by backward recursion over
// label values instead of configuration enumeration.
double total_mass(const GibbsTable& table, int n) {
    // b[w] = total forward mass hanging below a vertex of the current level
    // whose label is w.
    Eigen::VectorXd b = Eigen::VectorXd::Ones(table.q);
    for (int j = n - 1; j >= 0; --j) {
        Eigen::VectorXd next(table.q);
        const auto& wmat = table.weights[static_cast<std::size_t>(j)];
        for (int w = 0; w < table.q; ++w) {
            double acc = 0.0;
            for (Eigen::Index c = 0; c < wmat.cols(); ++c) {
                std::size_t rest = static_cast<std::size_t>(c);
                double sub = 1.0;
                for (int y = table.k; y-- > 0;) {
                    sub *= b(static_cast<Eigen::Index>(rest % static_cast<std::size_t>(table.q)));
                    rest /= static_cast<std::size_t>(table.q);
                }
                acc += wmat(w, c) * sub;
            }
            next(w) = acc;
        }
        b = next;
    }
    return table.initial.dot(b);
}

} // namespace

int Configuration::label_at(const SiteCoord& site) const {
    for (std::size_t i = 0; i < domain.size(); ++i) {
        if (domain[i] == site) return labels[i];
    }
    throw std::invalid_argument("site " + site.to_string() + " is not in the configuration domain");
}

void GibbsTable::validate() const {
    if (q < 1 || k < 1) throw std::invalid_argument("label chain needs q >= 1 and k >= 1");
    if (initial.size() != q) throw std::invalid_argument("initial weight vector has wrong size");
    const double tol_sum = 1e-10;
    if (std::abs(initial.sum() - 1.0) > tol_sum) {
        throw std::invalid_argument("initial weights do not sum to one");
    }
    if (initial.minCoeff() < -1e-12) throw std::invalid_argument("negative initial weight");
    const auto cols = static_cast<Eigen::Index>(int_pow_sz(static_cast<std::size_t>(q),
                                                           static_cast<std::size_t>(k)));
    for (const auto& wmat : weights) {
        if (wmat.rows() != q || wmat.cols() != cols) {
            throw std::invalid_argument("weight matrix has wrong shape");
        }
        if (wmat.minCoeff() < -1e-12) throw std::invalid_argument("negative transition weight");
        for (int w = 0; w < q; ++w) {
            if (std::abs(wmat.row(w).sum() - 1.0) > tol_sum) {
                throw std::invalid_argument("transition weight row does not sum to one");
            }
        }
    }
}

std::size_t rank_of(const Configuration& c, int q) {
    if (c.labels.size() != c.domain.size()) {
        throw std::invalid_argument("configuration has mismatched domain and labels");
    }
    std::size_t r = 0;
    for (std::size_t i = 0; i < c.labels.size(); ++i) {
        if (c.labels[i] < 0 || c.labels[i] >= q) throw std::invalid_argument("label out of range");
        if (r > ((std::size_t{1} << 62) / static_cast<std::size_t>(q))) {
            throw dimension_guard_error("configuration rank overflows the rank type");
        }
        r = r * static_cast<std::size_t>(q) + static_cast<std::size_t>(c.labels[i]);
    }
    return r;
}

Configuration configuration_from_rank(int k, int q, int n, std::size_t rank) {
    Configuration c;
    c.domain = lambda_sites(k, n);
    c.labels = decode_rank(rank, q, c.domain.size());
    return c;
}

std::size_t configuration_count(int k, int q, int n) {
    return int_pow_sz(static_cast<std::size_t>(q), lambda_size(k, n));
}

BlockAlignment align_blocks(const QmsSpec& spec, double match_tol) {
    if (spec.levels.empty() || spec.levels[0].per_site.empty()) {
        throw std::invalid_argument("spec has no transition maps to align");
    }
    BlockAlignment out;
    out.reference = spec.levels[0].per_site[0].blocks;
    out.q = static_cast<int>(out.reference.size());
    if (out.q == 0) throw std::invalid_argument("root site map carries no block data");
    out.index.resize(spec.levels.size());
    for (std::size_t j = 0; j < spec.levels.size(); ++j) {
        const auto& lev = spec.levels[j];
        out.index[j].resize(lev.per_site.size());
        for (std::size_t s = 0; s < lev.per_site.size(); ++s) {
            const auto& blocks = lev.per_site[s].blocks;
            if (static_cast<int>(blocks.size()) != out.q) {
                throw std::runtime_error("transition maps do not share one block family: "
                                         "block counts differ across sites");
            }
            std::vector<int> perm(static_cast<std::size_t>(out.q), -1);
            std::vector<bool> used(blocks.size(), false);
            for (int w = 0; w < out.q; ++w) {
                const auto& ref = out.reference[static_cast<std::size_t>(w)];
                for (std::size_t b = 0; b < blocks.size(); ++b) {
                    if (used[b]) continue;
                    if (blocks[b].n_dim != ref.n_dim || blocks[b].m_dim != ref.m_dim) continue;
                    if (max_abs(blocks[b].p - ref.p) <= match_tol) {
                        perm[static_cast<std::size_t>(w)] = static_cast<int>(b);
                        used[b] = true;
                        break;
                    }
                }
                if (perm[static_cast<std::size_t>(w)] < 0) {
                    throw std::runtime_error("transition maps do not share one block family: "
                                             "no match for a central projection");
                }
            }
            out.index[j][s] = std::move(perm);
        }
    }
    return out;
}

GibbsTable weights_from_qms(const QmsSpec& spec) {
    const BlockAlignment al = align_blocks(spec);
    const int q = al.q;
    const int k = spec.k;
    const double hom_tol = 1e-9;

    GibbsTable table;
    table.q = q;
    table.k = k;
    table.initial = Eigen::VectorXd::Zero(q);
    for (int w = 0; w < q; ++w) {
        table.initial(w) =
            (spec.rho0.matrix() * al.reference[static_cast<std::size_t>(w)].p).trace().real();
    }

    const auto cols = static_cast<Eigen::Index>(int_pow_sz(static_cast<std::size_t>(q),
                                                           static_cast<std::size_t>(k)));
    table.weights.reserve(spec.levels.size());
    for (std::size_t j = 0; j < spec.levels.size(); ++j) {
        const auto& lev = spec.levels[j];
        Eigen::MatrixXd wmat;
        for (std::size_t s = 0; s < lev.per_site.size(); ++s) {
            const auto& sx = lev.per_site[s];
            Eigen::MatrixXd cand(q, cols);
            for (int w = 0; w < q; ++w) {
                const auto& blk = sx.blocks[static_cast<std::size_t>(al.index[j][s][static_cast<std::size_t>(w)])];
                const auto m = static_cast<Eigen::Index>(blk.m_dim);
                for (Eigen::Index c = 0; c < cols; ++c) {
                    std::vector<MatrixXcd> projs;
                    projs.reserve(static_cast<std::size_t>(k));
                    std::size_t rest = static_cast<std::size_t>(c);
                    std::vector<int> tuple(static_cast<std::size_t>(k), 0);
                    for (int y = k; y-- > 0;) {
                        tuple[static_cast<std::size_t>(y)] =
                            static_cast<int>(rest % static_cast<std::size_t>(q));
                        rest /= static_cast<std::size_t>(q);
                    }
                    for (int y = 0; y < k; ++y) {
                        projs.push_back(al.reference[static_cast<std::size_t>(tuple[static_cast<std::size_t>(y)])].p);
                    }
                    const MatrixXcd pk = kron_list(projs);
                    const MatrixXcd lift = kron(MatrixXcd::Identity(m, m), pk);
                    cand(w, c) = (blk.phi * lift).trace().real();
                }
            }
            if (s == 0) {
                wmat = cand;
            } else if ((cand - wmat).cwiseAbs().maxCoeff() > hom_tol) {
                throw std::runtime_error("label weights differ across the sites of level " +
                                         std::to_string(j));
            }
        }
        table.weights.push_back(std::move(wmat));
    }
    return table;
}

std::vector<double> measure(const GibbsTable& table, int n) {
    if (n < 0) throw std::invalid_argument("volume depth must be nonnegative");
    if (static_cast<std::size_t>(n) > table.weights.size()) {
        throw std::invalid_argument("label chain has too few levels for the requested volume");
    }
    const std::size_t count = configuration_count(table.k, table.q, n);
    if (count > kExhaustiveCap) {
        throw dimension_guard_error("configuration space exceeds the exhaustive cap");
    }
    const auto off = level_offsets(table.k, n);
    std::vector<double> p(count, 0.0);
    for (std::size_t r = 0; r < count; ++r) {
        const auto labels = decode_rank(r, table.q, off[static_cast<std::size_t>(n) + 1]);
        p[r] = weight_product(table, labels, off, n);
    }
    return p;
}

std::vector<double> classical_hamiltonian(const GibbsTable& table, int n) {
    if (n < 0) throw std::invalid_argument("volume depth must be nonnegative");
    if (static_cast<std::size_t>(n) > table.weights.size()) {
        throw std::invalid_argument("label chain has too few levels for the requested volume");
    }
    const std::size_t count = configuration_count(table.k, table.q, n);
    if (count > kExhaustiveCap) {
        throw dimension_guard_error("configuration space exceeds the exhaustive cap");
    }
    const auto off = level_offsets(table.k, n);
    std::vector<double> h(count, 0.0);
    for (std::size_t r = 0; r < count; ++r) {
        const auto labels = decode_rank(r, table.q, off[static_cast<std::size_t>(n) + 1]);
        double acc = 0.0;
        const double p0 = table.initial(labels[0]);
        if (p0 <= 0.0) throw std::domain_error("energy undefined: zero initial weight");
        acc += std::log(p0);
        for (int j = 0; j < n; ++j) {
            const std::size_t sites =
                off[static_cast<std::size_t>(j) + 1] - off[static_cast<std::size_t>(j)];
            for (std::size_t t = 0; t < sites; ++t) {
                const int w = labels[off[static_cast<std::size_t>(j)] + t];
                const std::size_t c = child_tuple_rank(labels, off, j, t, table.k, table.q);
                const double wv =
                    table.weights[static_cast<std::size_t>(j)](w, static_cast<Eigen::Index>(c));
                if (wv <= 0.0) throw std::domain_error("energy undefined: zero transition weight");
                acc += std::log(wv);
            }
        }
        h[r] = acc;
    }
    return h;
}

CompatibilityReport compatibility_check(const GibbsTable& table, int n,
                                        std::uint64_t sample_seed, int sample_count) {
    if (n < 0) throw std::invalid_argument("volume depth must be nonnegative");
    if (static_cast<std::size_t>(n) + 1 > table.weights.size()) {
        throw std::invalid_argument("compatibility needs the label chain one level past the volume");
    }
    CompatibilityReport report;

    bool exhaustive = true;
    std::size_t big = 0;
    try {
        big = configuration_count(table.k, table.q, n + 1);
    } catch (const dimension_guard_error&) {
        exhaustive = false;
    }
    if (exhaustive && big > kExhaustiveCap) exhaustive = false;
    report.exhaustive = exhaustive;

    if (exhaustive) {
        const std::vector<double> small = measure(table, n);
        const std::vector<double> large = measure(table, n + 1);
        const std::size_t boundary = big / small.size();
        double defect = 0.0;
        double sum = 0.0;
        for (std::size_t r = 0; r < small.size(); ++r) {
            double marg = 0.0;
            for (std::size_t s = 0; s < boundary; ++s) {
                marg += large[r * boundary + s];
            }
            sum += marg;
            defect = std::max(defect, std::abs(marg - small[r]));
        }
        report.marginal_defect = defect;
        report.normalization_defect = std::abs(sum - 1.0);
        return report;
    }

    // Sampled mode: each sampled configuration is checked exactly; the
    // boundary sum factorizes over the sites of W_{n+1} because their labels
    // range independently.
    const auto off = level_offsets(table.k, n);
    const std::size_t n_sites = off[static_cast<std::size_t>(n) + 1];
    const auto& bd = table.weights[static_cast<std::size_t>(n)];
    Eigen::VectorXd row_sum(table.q);
    for (int w = 0; w < table.q; ++w) row_sum(w) = bd.row(w).sum();

    std::mt19937_64 rng(sample_seed);
    std::uniform_int_distribution<int> pick(0, table.q - 1);
    double defect = 0.0;
    for (int it = 0; it < sample_count; ++it) {
        std::vector<int> labels(n_sites);
        for (auto& l : labels) l = pick(rng);
        const double p = weight_product(table, labels, off, n);
        double boundary_mass = 1.0;
        const std::size_t w_n = off[static_cast<std::size_t>(n) + 1] - off[static_cast<std::size_t>(n)];
        for (std::size_t t = 0; t < w_n; ++t) {
            boundary_mass *= row_sum(labels[off[static_cast<std::size_t>(n)] + t]);
        }
        defect = std::max(defect, std::abs(p * boundary_mass - p));
    }
    report.marginal_defect = defect;
    report.normalization_defect = std::abs(total_mass(table, n + 1) - 1.0);
    return report;
}

void write_measure_csv(const GibbsTable& table, int n, const std::string& path) {
    const std::vector<double> p = measure(table, n);
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open " + path + " for writing");
    out << "configuration,probability,energy\n";
    const std::size_t n_sites = lambda_size(table.k, n);
    char buf[64];
    for (std::size_t r = 0; r < p.size(); ++r) {
        const auto labels = decode_rank(r, table.q, n_sites);
        std::string digits;
        digits.reserve(labels.size());
        for (int l : labels) digits += static_cast<char>('0' + l);
        std::snprintf(buf, sizeof(buf), "%.17g", p[r]);
        out << digits << ',' << buf;
        out << ',';
        if (p[r] > 0.0) {
            std::snprintf(buf, sizeof(buf), "%.17g", std::log(p[r]));
            out << buf;
        }
        out << '\n';
    }
    if (!out) throw std::runtime_error("failed while writing " + path);
}

} // namespace qmt
