#pragma once

#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>

#include "kronriver/errors.hpp"
#include "kronriver/linalg.hpp"

namespace kronriver {

/// Write a sparse matrix as Matrix Market "coordinate real general",
/// one-based indices, full double precision.
template <typename Mat>
void writeMatrixMarket(const std::string& path, const Mat& m) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open '" + path + "' for writing");
    out << "%%MatrixMarket matrix coordinate real general\n";
    out << m.rows() << " " << m.cols() << " " << m.nonZeros() << "\n";
    char buf[64];
    for (int k = 0; k < m.outerSize(); ++k)
        for (typename Mat::InnerIterator it(m, k); it; ++it) {
            std::snprintf(buf, sizeof(buf), "%ld %ld %.17g\n",
                          static_cast<long>(it.row() + 1), static_cast<long>(it.col() + 1),
                          it.value());
            out << buf;
        }
    if (!out) throw IoError("write failed for '" + path + "'");
}

/// Read a Matrix Market coordinate file written by writeMatrixMarket.
template <typename Mat = SpMatC>
Mat readMatrixMarket(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open '" + path + "'");
    std::string line;
    if (!std::getline(in, line)) throw ParseError(path + ": empty file");
    if (line.rfind("%%MatrixMarket", 0) != 0)
        throw ParseError(path + ": missing MatrixMarket banner");
    {
        std::istringstream hs(line);
        std::string tag, object, format, field, symmetry;
        hs >> tag >> object >> format >> field >> symmetry;
        if (object != "matrix" || format != "coordinate" || field != "real" ||
            symmetry != "general")
            throw ParseError(path + ": unsupported MatrixMarket flavor '" + line + "'");
    }
    while (std::getline(in, line)) {
        if (!line.empty() && line[0] != '%') break;
    }
    long rows = 0, cols = 0, nnz = 0;
    {
        std::istringstream hs(line);
        if (!(hs >> rows >> cols >> nnz) || rows < 0 || cols < 0 || nnz < 0)
            throw ParseError(path + ": bad size line '" + line + "'");
    }
    std::vector<Triplet> trips;
    trips.reserve(static_cast<size_t>(nnz));
    for (long k = 0; k < nnz; ++k) {
        long i = 0, j = 0;
        double v = 0;
        if (!(in >> i >> j >> v))
            throw ParseError(path + ": truncated after " + std::to_string(k) + " entries");
        if (i < 1 || i > rows || j < 1 || j > cols)
            throw ParseError(path + ": entry (" + std::to_string(i) + "," + std::to_string(j) +
                             ") outside " + std::to_string(rows) + "x" + std::to_string(cols));
        trips.emplace_back(i - 1, j - 1, v);
    }
    return makeSparse<Mat>(rows, cols, trips);
}

} // namespace kronriver
