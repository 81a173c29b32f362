#include "qmt/star_algebra.hpp"

#include <Eigen/Eigenvalues>

#include "qmt/hermitian.hpp"
#include <cmath>

namespace qmt {

namespace {

double hs_norm(const MatrixXcd& a) { return std::sqrt(std::abs((a.adjoint() * a).trace().real())); }

complexd hs_inner(const MatrixXcd& a, const MatrixXcd& b) { return (a.adjoint() * b).trace(); }

// Modified Gram-Schmidt append; returns false when x lies in the span.
bool append_orthonormal(std::vector<MatrixXcd>& onb, MatrixXcd x, double tol) {
    for (int pass = 0; pass < 2; ++pass)
        for (const auto& b : onb) x -= hs_inner(b, x) * b;
    double nrm = hs_norm(x);
    if (nrm <= tol) return false;
    onb.push_back(x / nrm);
    return true;
}

} // namespace

SubalgebraBasis SubalgebraBasis::from_generators(int ambient_dim,
                                                 const std::vector<MatrixXcd>& gens,
                                                 double tol) {
    SubalgebraBasis s;
    s.ambient_dim = ambient_dim;
    auto& onb = s.onb;
    append_orthonormal(onb, MatrixXcd::Identity(ambient_dim, ambient_dim), tol);
    for (const auto& g : gens) {
        if (g.rows() != ambient_dim || g.cols() != ambient_dim)
            throw std::invalid_argument("generator does not match the ambient dimension");
        append_orthonormal(onb, g, tol);
        append_orthonormal(onb, g.adjoint(), tol);
    }
    // close under products until the span stops growing
    std::size_t frontier_begin = 0;
    while (true) {
        std::size_t old_size = onb.size();
        for (std::size_t i = 0; i < old_size; ++i)
            for (std::size_t j = (i >= frontier_begin ? 0 : frontier_begin); j < old_size; ++j) {
                append_orthonormal(onb, onb[i] * onb[j], tol);
                if (onb.size() > static_cast<std::size_t>(ambient_dim) * ambient_dim)
                    throw std::runtime_error("subalgebra closure exceeded the ambient dimension");
            }
        if (onb.size() == old_size) break;
        frontier_begin = old_size;
    }
    return s;
}

double SubalgebraBasis::span_residual(const MatrixXcd& x) const {
    MatrixXcd r = x;
    for (const auto& b : onb) r -= hs_inner(b, x) * b;
    return hs_norm(r);
}

std::vector<MatrixXcd> center_basis(const SubalgebraBasis& s, double tol) {
    const std::size_t m = s.dim();
    const int d2 = s.ambient_dim * s.ambient_dim;
    // X = sum_a c_a B_a with [X, B_j] = 0 for all j; normal matrix of the
    // stacked constraints, nullspace = center coefficients
    MatrixXcd normal = MatrixXcd::Zero(m, m);
    for (std::size_t j = 0; j < m; ++j) {
        MatrixXcd cj(d2, m);
        for (std::size_t a = 0; a < m; ++a)
            cj.col(a) = vec_col(s.onb[a] * s.onb[j] - s.onb[j] * s.onb[a]);
        normal += cj.adjoint() * cj;
    }
    Eigen::SelfAdjointEigenSolver<MatrixXcd> es(normal);
    // exact zeros of the constraint matrix are computed only up to machine
    // noise at the matrix scale, so the cut must not sit below that floor
    const double scale = es.eigenvalues().size() > 0
                             ? std::max(1.0, es.eigenvalues().cwiseAbs().maxCoeff())
                             : 1.0;
    const double cut = std::max(tol * tol, 1e-13 * scale);
    std::vector<MatrixXcd> out;
    for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) {
        if (es.eigenvalues()[i] > cut) continue;
        MatrixXcd z = MatrixXcd::Zero(s.ambient_dim, s.ambient_dim);
        for (std::size_t a = 0; a < m; ++a) z += es.eigenvectors()(a, i) * s.onb[a];
        out.push_back(z);
    }
    if (out.empty()) throw std::runtime_error("center computation returned an empty space");
    return out;
}

namespace {

struct EigenGroups {
    std::vector<std::vector<int>> groups;  // indices into the eigenvalue list
};

EigenGroups group_by_gap(const VectorXd& lam, double gap) {
    EigenGroups g;
    std::vector<int> cur{0};
    for (Eigen::Index i = 1; i < lam.size(); ++i) {
        if (lam[i] - lam[i - 1] > gap) {
            g.groups.push_back(cur);
            cur.clear();
        }
        cur.push_back(static_cast<int>(i));
    }
    g.groups.push_back(cur);
    return g;
}

// Split one central block: U spans range(P); returns (n, m, V) with
// V^* (U^* S U) V = M_n (x) 1_m.
FactorBlock split_block(const SubalgebraBasis& s, const MatrixXcd& u, std::mt19937_64& rng) {
    const int r = static_cast<int>(u.cols());
    // compressed algebra basis
    std::vector<MatrixXcd> comp;
    for (const auto& b : s.onb) append_orthonormal(comp, u.adjoint() * b * u, 1e-9);
    const int n = static_cast<int>(std::llround(std::sqrt(static_cast<double>(comp.size()))));
    if (static_cast<std::size_t>(n) * n != comp.size())
        throw std::runtime_error("compressed block is not a full matrix algebra");
    if (r % n != 0) throw std::runtime_error("block rank is not divisible by the factor dimension");
    const int m = r / n;

    std::normal_distribution<double> nd(0.0, 1.0);
    for (int attempt = 0; attempt < 5; ++attempt) {
        MatrixXcd g = MatrixXcd::Zero(r, r);
        for (const auto& f : comp) g += complexd(nd(rng), nd(rng)) * f;
        g = 0.5 * (g + g.adjoint()).eval();
        Eigen::SelfAdjointEigenSolver<MatrixXcd> es(g);
        EigenGroups eg = group_by_gap(es.eigenvalues(), tol::spectral_gap);
        if (static_cast<int>(eg.groups.size()) != n) continue;
        bool sizes_ok = true;
        for (const auto& grp : eg.groups) sizes_ok &= static_cast<int>(grp.size()) == m;
        if (!sizes_ok) continue;

        std::vector<MatrixXcd> q(n);  // spectral projections, each of rank m
        for (int j = 0; j < n; ++j) {
            MatrixXcd cols(r, m);
            for (int t = 0; t < m; ++t) cols.col(t) = es.eigenvectors().col(eg.groups[j][t]);
            q[j] = cols * cols.adjoint();
        }
        MatrixXcd w1(r, m);  // orthonormal basis of range(q_0)
        for (int t = 0; t < m; ++t) w1.col(t) = es.eigenvectors().col(eg.groups[0][t]);

        // partial isometries u_j with u_j^* u_j = q_0, u_j u_j^* = q_j
        MatrixXcd g2 = MatrixXcd::Zero(r, r);
        for (const auto& f : comp) g2 += complexd(nd(rng), nd(rng)) * f;
        std::vector<MatrixXcd> uj(n);
        uj[0] = q[0];
        bool ok = true;
        for (int j = 1; j < n && ok; ++j) {
            MatrixXcd y = q[j] * g2 * q[0];
            double sc = std::sqrt(std::abs((y.adjoint() * y).trace().real()) / m);
            if (sc < 1e-8) { ok = false; break; }
            uj[j] = y / sc;
            if (max_abs(uj[j].adjoint() * uj[j] - q[0]) > 1e-8) ok = false;
        }
        if (!ok) continue;

        MatrixXcd v(r, n * m);
        for (int j = 0; j < n; ++j)
            for (int b = 0; b < m; ++b) v.col(Eigen::Index(j) * m + b) = uj[j] * w1.col(b);
        if (max_abs(v.adjoint() * v - MatrixXcd::Identity(n * m, n * m)) > 1e-8) continue;

        // the conjugated algebra must be M_n (x) 1_m
        bool factor_ok = true;
        for (const auto& f : comp) {
            MatrixXcd x = v.adjoint() * f * v;
            MatrixXcd xn = trace_out_legs(x, {n, m}, {1}) / m;
            if (max_abs(x - kron(xn, MatrixXcd::Identity(m, m))) > 1e-9) { factor_ok = false; break; }
        }
        if (!factor_ok) continue;

        FactorBlock blk;
        blk.n_dim = n;
        blk.m_dim = m;
        blk.v = u * v;
        blk.p = u * u.adjoint();
        return blk;
    }
    throw std::runtime_error("failed to split a central block after several generic attempts");
}

} // namespace

CentralDecomposition central_decompose(const SubalgebraBasis& s, std::mt19937_64& rng) {
    const int d = s.ambient_dim;
    std::vector<MatrixXcd> cb = center_basis(s);
    const int n_blocks = static_cast<int>(cb.size());

    std::normal_distribution<double> nd(0.0, 1.0);
    for (int attempt = 0; attempt < 5; ++attempt) {
        MatrixXcd z = MatrixXcd::Zero(d, d);
        for (const auto& c : cb) z += complexd(nd(rng), nd(rng)) * c;
        z = 0.5 * (z + z.adjoint()).eval();
        Eigen::SelfAdjointEigenSolver<MatrixXcd> es(z);
        EigenGroups eg = group_by_gap(es.eigenvalues(), tol::spectral_gap);
        if (static_cast<int>(eg.groups.size()) != n_blocks) continue;

        CentralDecomposition out;
        out.ambient_dim = d;
        bool ok = true;
        for (const auto& grp : eg.groups) {
            MatrixXcd u(d, grp.size());
            for (std::size_t t = 0; t < grp.size(); ++t) u.col(t) = es.eigenvectors().col(grp[t]);
            MatrixXcd p = u * u.adjoint();
            // the spectral projection must itself be central
            SubalgebraBasis center_span;
            center_span.ambient_dim = d;
            center_span.onb = cb;
            if (center_span.span_residual(p) > 1e-7) { ok = false; break; }
            out.blocks.push_back(split_block(s, u, rng));
        }
        if (!ok) continue;
        return out;
    }
    throw std::runtime_error("central decomposition failed to separate the blocks");
}

Superop umegaki_from_block_states(const CentralDecomposition& d,
                                  const std::vector<MatrixXcd>& block_state_densities,
                                  int ext_dim) {
    if (block_state_densities.size() != d.blocks.size())
        throw std::invalid_argument("one block state per central block required");
    const int dd = d.ambient_dim;
    for (std::size_t i = 0; i < d.blocks.size(); ++i) {
        const auto& blk = d.blocks[i];
        const auto& rho = block_state_densities[i];
        const int want = blk.m_dim * ext_dim;
        if (rho.rows() != want || rho.cols() != want)
            throw std::invalid_argument("block state density has wrong dimension");
        if (max_abs(rho - rho.adjoint()) > tol::hermitian ||
            std::abs(rho.trace() - complexd(1.0)) > tol::trace_norm)
            throw std::invalid_argument("block state density is not a state");
        if (min_eigenvalue(rho) < -tol::positive)
            throw std::invalid_argument("block state density is not positive");
    }

    const int din = dd * ext_dim;
    Superop out(din, dd, MatrixXcd::Zero(static_cast<Eigen::Index>(dd) * dd,
                                         static_cast<Eigen::Index>(din) * din));

    // On the matrix unit A = e_u e_v^*, the compression W^* A W is the outer
    // product (W^* e_u)(W^* e_v)^*, so each block contributes through two
    // vectors only; the block output V (an (x) 1_m) V^* is linear in the
    // n x n core an, precomputed as a matrix on vectorizations.
    for (std::size_t i = 0; i < d.blocks.size(); ++i) {
        const auto& blk = d.blocks[i];
        const int n = blk.n_dim, m = blk.m_dim;
        const int me = m * ext_dim;
        MatrixXcd w = kron(blk.v, MatrixXcd::Identity(ext_dim, ext_dim));
        MatrixXcd wh = w.adjoint();
        MatrixXcd bd = kron(MatrixXcd::Identity(n, n), block_state_densities[i]);

        MatrixXcd assembler(static_cast<Eigen::Index>(dd) * dd,
                            static_cast<Eigen::Index>(n) * n);
        for (int b = 0; b < n; ++b)
            for (int a = 0; a < n; ++a)
                assembler.col(static_cast<Eigen::Index>(b) * n + a) = vec_col(
                    blk.v * kron(matrix_unit(n, a, b), MatrixXcd::Identity(m, m)) *
                    blk.v.adjoint());

        using RowMajorMap = Eigen::Map<const Eigen::Matrix<complexd, Eigen::Dynamic,
                                                           Eigen::Dynamic, Eigen::RowMajor>>;
        for (int v = 0; v < din; ++v) {
            VectorXcd rv = w.row(v).transpose();
            RowMajorMap rvm(rv.data(), n, me);
            for (int u = 0; u < din; ++u) {
                VectorXcd weighted = bd * wh.col(u);
                RowMajorMap rum(weighted.data(), n, me);
                MatrixXcd an = rum * rvm.transpose();
                out.m.col(static_cast<Eigen::Index>(v) * din + u) +=
                    assembler * Eigen::Map<const VectorXcd>(an.data(), an.size());
            }
        }
    }
    return out;
}

} // namespace qmt
