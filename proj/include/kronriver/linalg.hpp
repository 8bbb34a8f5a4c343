#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <cstdint>
#include <vector>

#include "kronriver/errors.hpp"

namespace kronriver {

using Vec = Eigen::VectorXd;
using DenseMat = Eigen::MatrixXd;
using SpMatR = Eigen::SparseMatrix<double, Eigen::RowMajor>;
using SpMatC = Eigen::SparseMatrix<double, Eigen::ColMajor>;
using Triplet = Eigen::Triplet<double>;

template <typename Mat>
Mat makeSparse(Eigen::Index rows, Eigen::Index cols, std::vector<Triplet>& trips) {
    Mat m(rows, cols);
    m.setFromTriplets(trips.begin(), trips.end());
    m.prune(0.0, 0.0);
    m.makeCompressed();
    return m;
}

/// Dense Kronecker product: out is (rows(A)*rows(B)) x (cols(A)*cols(B)),
/// block (i,j) equal to A(i,j)*B.
inline DenseMat kroneckerProduct(const DenseMat& A, const DenseMat& B) {
    DenseMat out(A.rows() * B.rows(), A.cols() * B.cols());
    for (Eigen::Index i = 0; i < A.rows(); ++i)
        for (Eigen::Index j = 0; j < A.cols(); ++j)
            out.block(i * B.rows(), j * B.cols(), B.rows(), B.cols()) = A(i, j) * B;
    return out;
}

/// Sparse Kronecker product via triplet expansion.
inline SpMatR kroneckerSparse(const SpMatR& A, const SpMatR& B) {
    std::vector<Triplet> trips;
    trips.reserve(static_cast<size_t>(A.nonZeros()) * static_cast<size_t>(B.nonZeros()));
    for (int ka = 0; ka < A.outerSize(); ++ka)
        for (SpMatR::InnerIterator ia(A, ka); ia; ++ia)
            for (int kb = 0; kb < B.outerSize(); ++kb)
                for (SpMatR::InnerIterator ib(B, kb); ib; ++ib) {
                    double v = ia.value() * ib.value();
                    if (v != 0.0)
                        trips.emplace_back(ia.row() * B.rows() + ib.row(),
                                           ia.col() * B.cols() + ib.col(), v);
                }
    return makeSparse<SpMatR>(A.rows() * B.rows(), A.cols() * B.cols(), trips);
}

inline std::int64_t nonzeros(const SpMatR& m) { return m.nonZeros(); }
inline std::int64_t nonzeros(const SpMatC& m) { return m.nonZeros(); }

} // namespace kronriver
