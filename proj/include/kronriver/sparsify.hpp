#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <set>
#include <vector>

#include "kronriver/errors.hpp"
#include "kronriver/kron.hpp"
#include "kronriver/linalg.hpp"

namespace kronriver {

/// Exact factorization W = What + U * V^T where U and V hold 0/+-1
/// indicator columns of peeled constant rectangles.
struct WFactorization {
    SpMatR What;
    SpMatR U;  ///< |H1| x r
    SpMatR V;  ///< |H2| x r
    int rank() const { return static_cast<int>(U.cols()); }
};

namespace detail {

struct Rect {
    int gain = 0;  // nnz removed minus nnz added
    int value = 0;
    int r0 = 0, r1 = 0, c0 = 0, c1 = 0;
};

/// Largest-area rectangle of cells equal to `v` ending scan: standard
/// histogram sweep, maximizing area - (height + width).
inline Rect bestRect(const Eigen::Matrix<int8_t, Eigen::Dynamic, Eigen::Dynamic>& R, int v) {
    int rows = static_cast<int>(R.rows()), cols = static_cast<int>(R.cols());
    Rect best;
    std::vector<int> height(static_cast<size_t>(cols), 0);
    std::vector<int> stack;
    for (int i = 0; i < rows; ++i) {
        for (int j = 0; j < cols; ++j)
            height[static_cast<size_t>(j)] = R(i, j) == v ? height[static_cast<size_t>(j)] + 1 : 0;
        stack.clear();
        for (int j = 0; j <= cols; ++j) {
            int h = j < cols ? height[static_cast<size_t>(j)] : 0;
            while (!stack.empty() && height[static_cast<size_t>(stack.back())] >= h) {
                int top = stack.back();
                stack.pop_back();
                int hh = height[static_cast<size_t>(top)];
                int left = stack.empty() ? 0 : stack.back() + 1;
                int width = j - left;
                int gain = hh * width - (hh + width);
                if (gain > best.gain) {
                    best = {gain, v, i - hh + 1, i, left, j - 1};
                }
            }
            if (j < cols) stack.push_back(j);
        }
    }
    return best;
}

} // namespace detail

/// Greedy rectangle peeling of a showdown-sign matrix: repeatedly
/// remove the contiguous constant-value rectangle with the best
/// nonzero saving, emitting one indicator outer product per rectangle.
/// Entries of W must be exactly -1, 0 or +1.
inline WFactorization sparsifyW(const DenseMat& W, int maxIters = 1000) {
    Eigen::Matrix<int8_t, Eigen::Dynamic, Eigen::Dynamic> R(W.rows(), W.cols());
    for (Eigen::Index i = 0; i < W.rows(); ++i)
        for (Eigen::Index j = 0; j < W.cols(); ++j) {
            double w = W(i, j);
            if (w != -1.0 && w != 0.0 && w != 1.0)
                throw InvalidInputError("showdown matrix entries must be -1, 0 or +1");
            R(i, j) = static_cast<int8_t>(w);
        }

    std::vector<Triplet> ut, vt;
    int rank = 0;
    for (int iter = 0; iter < maxIters; ++iter) {
        detail::Rect plus = detail::bestRect(R, 1);
        detail::Rect minus = detail::bestRect(R, -1);
        detail::Rect best = plus.gain >= minus.gain ? plus : minus;
        if (best.gain <= 0) break;
        for (int i = best.r0; i <= best.r1; ++i) {
            R(i, Eigen::seq(best.c0, best.c1)).setZero();
            ut.emplace_back(i, rank, static_cast<double>(best.value));
        }
        for (int j = best.c0; j <= best.c1; ++j) vt.emplace_back(j, rank, 1.0);
        ++rank;
    }

    std::vector<Triplet> wt;
    for (Eigen::Index i = 0; i < R.rows(); ++i)
        for (Eigen::Index j = 0; j < R.cols(); ++j)
            if (R(i, j) != 0) wt.emplace_back(i, j, static_cast<double>(R(i, j)));

    WFactorization out;
    out.What = makeSparse<SpMatR>(W.rows(), W.cols(), wt);
    out.U = makeSparse<SpMatR>(W.rows(), rank, ut);
    out.V = makeSparse<SpMatR>(W.cols(), rank, vt);
    return out;
}

enum class Technique { A, B };

/// Low-rank-plus-sparse decomposition of the payoff matrix:
/// A = Ahat + U * M^{-1} * V^T with M unit lower triangular. The
/// stored size is nnz(Ahat) + nnz(U) + nnz(M) + nnz(V).
struct Sparsification {
    SpMatR Ahat;
    SpMatR U;
    SpMatC M;
    SpMatC V;
    Technique technique = Technique::A;
    bool postprocessed = false;

    Eigen::Index rows() const { return Ahat.rows(); }
    Eigen::Index cols() const { return Ahat.cols(); }
    Eigen::Index k() const { return M.rows(); }
};

struct SizeReport {
    std::int64_t ahat = 0, u = 0, m = 0, v = 0;
    std::int64_t total() const { return ahat + u + m + v; }
};

inline SizeReport size(const Sparsification& s) {
    return {s.Ahat.nonZeros(), s.U.nonZeros(), s.M.nonZeros(), s.V.nonZeros()};
}

/// Structural checks shared by the constructors and bundle loading.
inline void validateSparsification(const Sparsification& s) {
    Eigen::Index k = s.M.rows();
    if (s.M.cols() != k) throw ContractError("M is not square");
    if (s.U.rows() != s.Ahat.rows() || s.U.cols() != k)
        throw ContractError("U dimensions do not match Ahat/M");
    if (s.V.rows() != s.Ahat.cols() || s.V.cols() != k)
        throw ContractError("V dimensions do not match Ahat/M");
    for (Eigen::Index j = 0; j < k; ++j) {
        SpMatC::InnerIterator it(s.M, j);
        if (!it || it.row() != j || it.value() != 1.0)
            throw ContractError("M is not unit lower triangular at column " + std::to_string(j));
    }
}

namespace detail {

inline void appendScaledKron(std::vector<Triplet>& out, Eigen::Index i, Eigen::Index j,
                             double scale, const SpMatR& Q, Eigen::Index qRows,
                             Eigen::Index qCols) {
    Eigen::Index r0 = i * qRows, c0 = j * qCols;
    for (int k = 0; k < Q.outerSize(); ++k)
        for (SpMatR::InnerIterator it(Q, k); it; ++it) {
            double v = scale * it.value();
            if (v != 0.0) out.emplace_back(r0 + it.row(), c0 + it.col(), v);
        }
}

} // namespace detail

/// Build the decomposition from a rectangle factorization of W: the
/// residual and incompatibility mass stay in Ahat, each rectangle
/// contributes a band of k-columns, and M is the identity.
inline Sparsification techniqueA(const KronPayoff& kp, const WFactorization& wf) {
    int m1 = kp.handCount(0), m2 = kp.handCount(1);
    if (wf.What.rows() != m1 || wf.What.cols() != m2 || wf.U.rows() != m1 ||
        wf.V.rows() != m2 || wf.U.cols() != wf.V.cols())
        throw ContractError("W factorization dimensions do not match the payoff");
    {
        DenseMat rebuilt = DenseMat(wf.What) + DenseMat(wf.U) * DenseMat(wf.V).transpose();
        if ((rebuilt - kp.W).cwiseAbs().maxCoeff() > 1e-12)
            throw ContractError("W factorization does not reconstruct W");
    }
    int r = wf.rank();
    Eigen::Index n1 = kp.n1, n2 = kp.n2;
    Eigen::Index k = static_cast<Eigen::Index>(r) * n1 + n1;

    Sparsification s;
    s.technique = Technique::A;

    std::vector<Triplet> at;
    for (int b = 0; b < wf.What.outerSize(); ++b)
        for (SpMatR::InnerIterator it(wf.What, b); it; ++it)
            detail::appendScaledKron(at, it.row(), it.col(),
                                     kp.lambda1(it.row()) * kp.lambda2(it.col()) * it.value(),
                                     kp.S, n1, n2);
    for (int i = 0; i < m1; ++i)
        for (int j = 0; j < m2; ++j)
            if (kp.Hcross(i, j) != 0.0)
                detail::appendScaledKron(at, i, j, -kp.lambda1(i) * kp.lambda2(j), kp.F, n1, n2);
    s.Ahat = makeSparse<SpMatR>(static_cast<Eigen::Index>(m1) * n1,
                                static_cast<Eigen::Index>(m2) * n2, at);

    std::vector<Triplet> ut;
    for (int b = 0; b < wf.U.outerSize(); ++b)
        for (SpMatR::InnerIterator it(wf.U, b); it; ++it) {
            double v = kp.lambda1(it.row()) * it.value();
            if (v == 0.0) continue;
            for (Eigen::Index d = 0; d < n1; ++d)
                ut.emplace_back(it.row() * n1 + d, it.col() * n1 + d, v);
        }
    for (int i = 0; i < m1; ++i) {
        double v = kp.lambda1(i);
        if (v == 0.0) continue;
        for (Eigen::Index d = 0; d < n1; ++d)
            ut.emplace_back(i * n1 + d, static_cast<Eigen::Index>(r) * n1 + d, v);
    }
    s.U = makeSparse<SpMatR>(s.Ahat.rows(), k, ut);

    std::vector<Triplet> mt;
    for (Eigen::Index d = 0; d < k; ++d) mt.emplace_back(d, d, 1.0);
    s.M = makeSparse<SpMatC>(k, k, mt);

    SpMatR St = SpMatR(kp.S.transpose());
    SpMatR Ft = SpMatR(kp.F.transpose());
    std::vector<Triplet> vt;
    for (int b = 0; b < wf.V.outerSize(); ++b)
        for (SpMatR::InnerIterator it(wf.V, b); it; ++it) {
            double scale = kp.lambda2(it.row()) * it.value();
            if (scale == 0.0) continue;
            for (int c = 0; c < St.outerSize(); ++c)
                for (SpMatR::InnerIterator is(St, c); is; ++is)
                    vt.emplace_back(it.row() * n2 + is.row(), it.col() * n1 + is.col(),
                                    scale * is.value());
        }
    for (int j = 0; j < m2; ++j) {
        double scale = kp.lambda2(j);
        if (scale == 0.0) continue;
        for (int c = 0; c < Ft.outerSize(); ++c)
            for (SpMatR::InnerIterator is(Ft, c); is; ++is)
                vt.emplace_back(static_cast<Eigen::Index>(j) * n2 + is.row(),
                                static_cast<Eigen::Index>(r) * n1 + is.col(),
                                scale * is.value());
    }
    s.V = makeSparse<SpMatC>(s.Ahat.cols(), k, vt);

    validateSparsification(s);
    return s;
}

/// Build the decomposition through first-order differencing of W along
/// the strength-sorted hands: M carries the bidiagonal coupling, so no
/// rectangle search is needed and runs of similar hands collapse after
/// postprocessing.
inline Sparsification techniqueB(const KronPayoff& kp) {
    int m1 = kp.handCount(0), m2 = kp.handCount(1);
    Eigen::Index n1 = kp.n1, n2 = kp.n2;
    Eigen::Index k = static_cast<Eigen::Index>(m1) * n1 + n1;

    DenseMat Y(m1, m2);
    for (int i = 0; i < m1; ++i)
        for (int j = 0; j < m2; ++j)
            Y(i, j) = i == 0 ? kp.W(i, j) : kp.W(i, j) - kp.W(i - 1, j);

    Sparsification s;
    s.technique = Technique::B;

    std::vector<Triplet> at;
    for (int i = 0; i < m1; ++i)
        for (int j = 0; j < m2; ++j)
            if (kp.Hcross(i, j) != 0.0)
                detail::appendScaledKron(at, i, j, -kp.lambda1(i) * kp.lambda2(j), kp.F, n1, n2);
    s.Ahat = makeSparse<SpMatR>(static_cast<Eigen::Index>(m1) * n1,
                                static_cast<Eigen::Index>(m2) * n2, at);

    std::vector<Triplet> ut;
    for (int i = 0; i < m1; ++i) {
        double v = kp.lambda1(i);
        if (v == 0.0) continue;
        for (Eigen::Index d = 0; d < n1; ++d) {
            ut.emplace_back(i * n1 + d, i * n1 + d, v);
            ut.emplace_back(i * n1 + d, static_cast<Eigen::Index>(m1) * n1 + d, v);
        }
    }
    s.U = makeSparse<SpMatR>(s.Ahat.rows(), k, ut);

    std::vector<Triplet> mt;
    for (Eigen::Index d = 0; d < k; ++d) mt.emplace_back(d, d, 1.0);
    for (int i = 1; i < m1; ++i)
        for (Eigen::Index d = 0; d < n1; ++d)
            mt.emplace_back(static_cast<Eigen::Index>(i) * n1 + d,
                            static_cast<Eigen::Index>(i - 1) * n1 + d, -1.0);
    s.M = makeSparse<SpMatC>(k, k, mt);

    SpMatR St = SpMatR(kp.S.transpose());
    SpMatR Ft = SpMatR(kp.F.transpose());
    std::vector<Triplet> vt;
    for (int i = 0; i < m1; ++i)
        for (int j = 0; j < m2; ++j) {
            double scale = kp.lambda2(j) * Y(i, j);
            if (scale == 0.0) continue;
            for (int c = 0; c < St.outerSize(); ++c)
                for (SpMatR::InnerIterator is(St, c); is; ++is)
                    vt.emplace_back(static_cast<Eigen::Index>(j) * n2 + is.row(),
                                    static_cast<Eigen::Index>(i) * n1 + is.col(),
                                    scale * is.value());
        }
    for (int j = 0; j < m2; ++j) {
        double scale = kp.lambda2(j);
        if (scale == 0.0) continue;
        for (int c = 0; c < Ft.outerSize(); ++c)
            for (SpMatR::InnerIterator is(Ft, c); is; ++is)
                vt.emplace_back(static_cast<Eigen::Index>(j) * n2 + is.row(),
                                static_cast<Eigen::Index>(m1) * n1 + is.col(),
                                scale * is.value());
    }
    s.V = makeSparse<SpMatC>(s.Ahat.cols(), k, vt);

    validateSparsification(s);
    return s;
}

/// Eliminate every auxiliary coordinate whose V column is identically
/// zero: its solve value is a combination of earlier coordinates, so
/// its U column folds into theirs and later M rows are rewritten. The
/// result is a strictly smaller equivalent decomposition.
inline Sparsification postprocess(const Sparsification& s) {
    validateSparsification(s);
    Eigen::Index k = s.k();

    std::vector<std::map<Eigen::Index, double>> ucol(static_cast<size_t>(k));
    for (int b = 0; b < s.U.outerSize(); ++b)
        for (SpMatR::InnerIterator it(s.U, b); it; ++it)
            ucol[static_cast<size_t>(it.col())][it.row()] = it.value();

    std::vector<std::map<Eigen::Index, double>> mrow(static_cast<size_t>(k));
    std::vector<std::set<Eigen::Index>> colRows(static_cast<size_t>(k));
    for (Eigen::Index j = 0; j < k; ++j)
        for (SpMatC::InnerIterator it(s.M, j); it; ++it)
            if (it.row() != j) {
                mrow[static_cast<size_t>(it.row())][j] = it.value();
                colRows[static_cast<size_t>(j)].insert(it.row());
            }

    std::vector<bool> alive(static_cast<size_t>(k), true);
    for (Eigen::Index j = 0; j < k; ++j) {
        if (SpMatC::InnerIterator(s.V, j)) continue;  // V column j carries data

        auto subs = mrow[static_cast<size_t>(j)];  // copy: alive i < j with weight a_i
        const auto uj = std::move(ucol[static_cast<size_t>(j)]);
        for (const auto& [i, a] : subs) {
            auto& ui = ucol[static_cast<size_t>(i)];
            for (const auto& [row, val] : uj) {
                double& slot = ui[row];
                slot += -a * val;
                if (slot == 0.0) ui.erase(row);
            }
        }
        auto refs = colRows[static_cast<size_t>(j)];  // rows r > j using coordinate j
        for (Eigen::Index r : refs) {
            auto& row = mrow[static_cast<size_t>(r)];
            auto itb = row.find(j);
            double b = itb->second;
            row.erase(itb);
            for (const auto& [i, a] : subs) {
                double& slot = row[i];
                bool fresh = slot == 0.0;
                slot -= b * a;
                if (slot == 0.0)
                    row.erase(i);
                else if (fresh)
                    colRows[static_cast<size_t>(i)].insert(r);
            }
        }
        for (const auto& [i, a] : subs) {
            (void)a;
            colRows[static_cast<size_t>(i)].erase(j);
        }
        ucol[static_cast<size_t>(j)].clear();
        mrow[static_cast<size_t>(j)].clear();
        colRows[static_cast<size_t>(j)].clear();
        alive[static_cast<size_t>(j)] = false;
    }

    std::vector<Eigen::Index> remap(static_cast<size_t>(k), -1);
    Eigen::Index kept = 0;
    for (Eigen::Index j = 0; j < k; ++j)
        if (alive[static_cast<size_t>(j)]) remap[static_cast<size_t>(j)] = kept++;

    Sparsification out;
    out.Ahat = s.Ahat;
    out.technique = s.technique;
    out.postprocessed = true;

    std::vector<Triplet> ut, mt, vt;
    for (Eigen::Index j = 0; j < k; ++j) {
        if (!alive[static_cast<size_t>(j)]) continue;
        Eigen::Index nj = remap[static_cast<size_t>(j)];
        for (const auto& [row, val] : ucol[static_cast<size_t>(j)])
            if (val != 0.0) ut.emplace_back(row, nj, val);
        mt.emplace_back(nj, nj, 1.0);
        for (const auto& [i, a] : mrow[static_cast<size_t>(j)])
            mt.emplace_back(nj, remap[static_cast<size_t>(i)], a);
        for (SpMatC::InnerIterator it(s.V, j); it; ++it)
            vt.emplace_back(it.row(), nj, it.value());
    }
    out.U = makeSparse<SpMatR>(s.U.rows(), kept, ut);
    out.M = makeSparse<SpMatC>(kept, kept, mt);
    out.V = makeSparse<SpMatC>(s.V.rows(), kept, vt);

    validateSparsification(out);
    if (size(out).total() > size(s).total())
        throw ContractError("postprocessing increased the stored size");
    return out;
}

} // namespace kronriver
