#pragma once

#include <cstdint>

#include "kronriver/errors.hpp"
#include "kronriver/linalg.hpp"
#include "kronriver/sparsify.hpp"

namespace kronriver {

/// Scratch vectors and multiply-add counters reused across products.
/// All kernels are sequential with a fixed accumulation order, so
/// repeated calls with the same operands give bitwise-equal results.
struct GradientWorkspace {
    Vec y, z, w;
    std::int64_t flops = 0;       ///< multiply-adds of the last product
    std::int64_t totalFlops = 0;  ///< accumulated over the workspace lifetime
};

/// True when M is exactly the identity; the solve stage is skipped then.
inline bool isIdentity(const SpMatC& M) {
    if (M.nonZeros() != M.rows()) return false;
    for (Eigen::Index j = 0; j < M.cols(); ++j) {
        SpMatC::InnerIterator it(M, j);
        if (!it || it.row() != j || it.value() != 1.0) return false;
    }
    return true;
}

/// Solve M z = y in place for unit lower triangular M (forward order).
inline void solveUnitLower(const SpMatC& M, Vec& z) {
    if (z.size() != M.rows()) throw InvalidInputError("solve rhs has the wrong size");
    for (Eigen::Index j = 0; j < M.cols(); ++j) {
        SpMatC::InnerIterator it(M, j);
        if (!it || it.row() != j || it.value() != 1.0)
            throw ContractError("M is not unit lower triangular at column " + std::to_string(j));
        double zj = z(j);
        if (zj == 0.0) continue;
        for (++it; it; ++it) z(it.row()) -= it.value() * zj;
    }
}

/// Solve M^T z = y in place (backward order over the columns of M).
inline void solveUnitLowerT(const SpMatC& M, Vec& z) {
    if (z.size() != M.rows()) throw InvalidInputError("solve rhs has the wrong size");
    for (Eigen::Index j = M.cols() - 1; j >= 0; --j) {
        SpMatC::InnerIterator it(M, j);
        if (!it || it.row() != j || it.value() != 1.0)
            throw ContractError("M is not unit lower triangular at column " + std::to_string(j));
        double acc = 0;
        for (++it; it; ++it) acc += it.value() * z(it.row());
        z(j) -= acc;
    }
}

/// y = A x through the decomposition: stage V^T x, solve through M,
/// expand with U and add the sparse remainder.
inline Vec matvec(const Sparsification& s, const Vec& x, GradientWorkspace& ws) {
    if (x.size() != s.cols())
        throw InvalidInputError("matvec input has size " + std::to_string(x.size()) +
                                ", expected " + std::to_string(s.cols()));
    Eigen::Index k = s.k();
    ws.flops = 0;

    ws.y.resize(k);
    const double* xp = x.data();
    for (Eigen::Index t = 0; t < k; ++t) {
        double acc = 0;
        for (SpMatC::InnerIterator it(s.V, t); it; ++it) acc += it.value() * xp[it.row()];
        ws.y(t) = acc;
    }
    ws.flops += s.V.nonZeros();

    bool identity = isIdentity(s.M);
    if (!identity) {
        solveUnitLower(s.M, ws.y);
        ws.flops += s.M.nonZeros() - k;
    }
    Vec& z = ws.y;

    Vec out(s.rows());
    for (Eigen::Index i = 0; i < s.rows(); ++i) {
        double acc = 0;
        for (SpMatR::InnerIterator it(s.U, static_cast<int>(i)); it; ++it)
            acc += it.value() * z(it.col());
        for (SpMatR::InnerIterator it(s.Ahat, static_cast<int>(i)); it; ++it)
            acc += it.value() * xp[it.col()];
        out(i) = acc;
    }
    ws.flops += s.U.nonZeros() + s.Ahat.nonZeros();
    ws.totalFlops += ws.flops;
    return out;
}

/// x = A^T y through the decomposition (transposed four-step order).
inline Vec matvecTranspose(const Sparsification& s, const Vec& y, GradientWorkspace& ws) {
    if (y.size() != s.rows())
        throw InvalidInputError("matvec input has size " + std::to_string(y.size()) +
                                ", expected " + std::to_string(s.rows()));
    Eigen::Index k = s.k();
    ws.flops = 0;

    ws.z.setZero(k);
    for (Eigen::Index i = 0; i < s.rows(); ++i) {
        double yi = y(i);
        if (yi == 0.0) continue;
        for (SpMatR::InnerIterator it(s.U, static_cast<int>(i)); it; ++it)
            ws.z(it.col()) += it.value() * yi;
    }
    ws.flops += s.U.nonZeros();

    if (!isIdentity(s.M)) {
        solveUnitLowerT(s.M, ws.z);
        ws.flops += s.M.nonZeros() - k;
    }

    Vec out = Vec::Zero(s.cols());
    for (Eigen::Index i = 0; i < s.rows(); ++i) {
        double yi = y(i);
        if (yi == 0.0) continue;
        for (SpMatR::InnerIterator it(s.Ahat, static_cast<int>(i)); it; ++it)
            out(it.col()) += it.value() * yi;
    }
    ws.flops += s.Ahat.nonZeros();
    for (Eigen::Index t = 0; t < k; ++t) {
        double zt = ws.z(t);
        if (zt == 0.0) continue;
        for (SpMatC::InnerIterator it(s.V, t); it; ++it) out(it.row()) += it.value() * zt;
    }
    ws.flops += s.V.nonZeros();
    ws.totalFlops += ws.flops;
    return out;
}

inline Vec matvec(const Sparsification& s, const Vec& x) {
    GradientWorkspace ws;
    return matvec(s, x, ws);
}

inline Vec matvecTranspose(const Sparsification& s, const Vec& y) {
    GradientWorkspace ws;
    return matvecTranspose(s, y, ws);
}

} // namespace kronriver
