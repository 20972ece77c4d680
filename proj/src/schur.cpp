#include "lqmfg/schur.hpp"

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include <utility>
#include <vector>

namespace lqmfg {

namespace {

using Eigen::MatrixXd;

// Eigenvalue (re, im) of a 1x1 or 2x2 quasi-triangular diagonal block.
// 2x2 blocks produced by RealSchur carry complex-conjugate pairs; swapping
// preserves block spectra, so the pair structure survives reordering.
std::pair<double, double> block_eig(const Eigen::Ref<const MatrixXd>& B)
{
    if (B.rows() == 1) return {B(0, 0), 0.0};
    const double tr = 0.5 * (B(0, 0) + B(1, 1));
    const double det = B(0, 0) * B(1, 1) - B(0, 1) * B(1, 0);
    const double disc = tr * tr - det;
    if (disc >= 0) return {tr + std::sqrt(disc), 0.0};  // real spectrum: larger root
    return {tr, std::sqrt(-disc)};
}

// Direct swap of two adjacent diagonal blocks of sizes p and q at row r:
// solve the small Sylvester system A11 X - X A22 = A12, orthogonalize
// [-X; I], and apply the similarity to T and U.
bool swap_adjacent(MatrixXd& T, MatrixXd& U, int r, int p, int q)
{
    const int m = p + q;
    const MatrixXd A11 = T.block(r, r, p, p);
    const MatrixXd A12 = T.block(r, r + p, p, q);
    const MatrixXd A22 = T.block(r + p, r + p, q, q);

    // Kronecker form of A11 X - X A22 = A12 (pq unknowns, column-major vec)
    MatrixXd K = MatrixXd::Zero(p * q, p * q);
    Eigen::VectorXd rhs(p * q);
    for (int j = 0; j < q; ++j)
        for (int i = 0; i < p; ++i) {
            const int row = j * p + i;
            for (int k = 0; k < p; ++k) K(row, j * p + k) += A11(i, k);
            for (int k = 0; k < q; ++k) K(row, k * p + i) -= A22(k, j);
            rhs(row) = A12(i, j);
        }
    Eigen::FullPivLU<MatrixXd> lu(K);
    if (lu.rank() < p * q) return false;  // coincident block spectra
    Eigen::VectorXd xv = lu.solve(rhs);
    MatrixXd X = Eigen::Map<MatrixXd>(xv.data(), p, q);

    MatrixXd W(m, q);
    W.topRows(p) = -X;
    W.bottomRows(q) = MatrixXd::Identity(q, q);
    Eigen::HouseholderQR<MatrixXd> qr(W);
    MatrixXd Qm = qr.householderQ();

    const int nfull = (int)T.rows();
    T.block(r, r, m, nfull - r) = Qm.transpose() * T.block(r, r, m, nfull - r);
    T.block(0, r, r + m, m) = T.block(0, r, r + m, m) * Qm;
    U.middleCols(r, m) = U.middleCols(r, m) * Qm;

    const double scale = T.norm();
    if (T.block(r + q, r, p, q).norm() > 1e-8 * scale) return false;
    T.block(r + q, r, p, q).setZero();
    // spurious sub-diagonal fill inside the swapped pair
    if (q == 2 && std::abs(T(r + 1, r)) < 1e-12 * scale) T(r + 1, r) = 0.0;
    if (p == 2 && std::abs(T(r + q + 1, r + q)) < 1e-12 * scale) T(r + q + 1, r + q) = 0.0;
    return true;
}

}  // namespace

OrderedSchur ordered_real_schur(const Eigen::MatrixXd& A,
                                const std::function<bool(double re, double im)>& select)
{
    OrderedSchur out;
    Eigen::RealSchur<MatrixXd> schur(A);
    if (schur.info() != Eigen::Success) {
        out.error = "real Schur decomposition failed";
        return out;
    }
    MatrixXd T = schur.matrixT();
    MatrixXd U = schur.matrixU();
    const int n = (int)A.rows();
    const double sub_tol = 1e-12 * std::max(1.0, T.norm());

    // (row, size) of each diagonal block
    std::vector<std::pair<int, int>> blocks;
    std::vector<int> selected;
    for (int row = 0; row < n;) {
        const int p = (row + 1 < n && std::abs(T(row + 1, row)) > sub_tol) ? 2 : 1;
        auto [re, im] = block_eig(T.block(row, row, p, p));
        if (select(re, im)) selected.push_back((int)blocks.size());
        blocks.emplace_back(row, p);
        row += p;
    }

    int cluster = 0;
    for (int idx : selected) blocks[idx].second = -blocks[idx].second;  // mark selected
    // bubble each selected block to the top, preserving relative order
    int top = 0;
    for (int l = 0; l < (int)blocks.size(); ++l) {
        if (blocks[l].second > 0) continue;
        for (int i = l; i > top; --i) {
            const int p = std::abs(blocks[i - 1].second);
            const int q = std::abs(blocks[i].second);
            if (!swap_adjacent(T, U, blocks[i - 1].first, p, q)) {
                out.error = "block swap failed (ill-separated spectra)";
                return out;
            }
            std::swap(blocks[i - 1].second, blocks[i].second);
            blocks[i].first = blocks[i - 1].first + std::abs(blocks[i - 1].second);
        }
        cluster += std::abs(blocks[top].second);
        ++top;
    }

    out.T = std::move(T);
    out.U = std::move(U);
    out.cluster_dim = cluster;
    out.ok = true;
    return out;
}

double spectral_abscissa(const Eigen::MatrixXd& A)
{
    Eigen::EigenSolver<MatrixXd> es(A, false);
    return es.eigenvalues().real().maxCoeff();
}

}  // namespace lqmfg
