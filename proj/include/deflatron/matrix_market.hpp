#pragma once

#include <fstream>
#include <sstream>
#include <string>

#include "deflatron/sparse.hpp"

namespace deflatron {

/// Matrix Market readers/writers. Coordinate files use 1-based indices and
/// the `symmetric` qualifier stores the lower triangle only; in memory both
/// triangles are always present. Array files are column-major dense.
namespace mm {

namespace detail {

inline std::string next_data_line(std::istream& in) {
    std::string line;
    while (std::getline(in, line)) {
        const auto pos = line.find_first_not_of(" \t\r");
        if (pos == std::string::npos) continue;
        if (line[pos] == '%') continue;
        return line;
    }
    return {};
}

struct Header {
    std::string object, format, field, symmetry;
};

inline Header read_header(std::istream& in, const std::string& path) {
    std::string line;
    if (!std::getline(in, line)) numerical_error("matrix market: empty file " + path);
    std::istringstream hs(line);
    std::string banner;
    Header h;
    hs >> banner >> h.object >> h.format >> h.field >> h.symmetry;
    if (banner != "%%MatrixMarket" || h.object != "matrix")
        numerical_error("matrix market: bad banner in " + path);
    if (h.field != "real")
        numerical_error("matrix market: only real matrices are supported (" + path + ")");
    return h;
}

} // namespace detail

inline SparseMatrix read_sparse(const std::string& path) {
    std::ifstream in(path);
    if (!in) numerical_error("matrix market: cannot open " + path);
    const auto h = detail::read_header(in, path);
    if (h.format != "coordinate")
        numerical_error("matrix market: expected coordinate format in " + path);
    const bool symmetric = (h.symmetry == "symmetric");
    if (!symmetric && h.symmetry != "general")
        numerical_error("matrix market: unsupported symmetry '" + h.symmetry + "' in " + path);

    std::istringstream sz(detail::next_data_line(in));
    long rows = 0, cols = 0, nnz = 0;
    if (!(sz >> rows >> cols >> nnz) || rows <= 0 || cols <= 0 || nnz < 0)
        numerical_error("matrix market: bad size line in " + path);

    std::vector<Triplet> t;
    t.reserve(static_cast<std::size_t>(symmetric ? 2 * nnz : nnz));
    for (long e = 0; e < nnz; ++e) {
        std::istringstream ls(detail::next_data_line(in));
        long i = 0, j = 0;
        double v = 0.0;
        if (!(ls >> i >> j >> v) || i < 1 || j < 1 || i > rows || j > cols)
            numerical_error("matrix market: bad entry in " + path);
        const auto ui = static_cast<std::size_t>(i - 1);
        const auto uj = static_cast<std::size_t>(j - 1);
        t.push_back({ui, uj, v});
        if (symmetric && ui != uj) t.push_back({uj, ui, v});
    }
    return SparseMatrix::from_triplets(static_cast<std::size_t>(rows),
                                       static_cast<std::size_t>(cols), std::move(t), symmetric);
}

inline void write_sparse(const SparseMatrix& m, const std::string& path) {
    std::ofstream out(path);
    if (!out) numerical_error("matrix market: cannot write " + path);
    out.precision(17);
    const bool symmetric = m.symmetric();
    out << "%%MatrixMarket matrix coordinate real " << (symmetric ? "symmetric" : "general")
        << "\n";
    std::size_t count = 0;
    for (std::size_t i = 0; i < m.rows(); ++i)
        for (std::size_t p = m.row_ptr()[i]; p < m.row_ptr()[i + 1]; ++p)
            if (!symmetric || m.col_idx()[p] <= i) ++count;
    out << m.rows() << " " << m.cols() << " " << count << "\n";
    for (std::size_t i = 0; i < m.rows(); ++i)
        for (std::size_t p = m.row_ptr()[i]; p < m.row_ptr()[i + 1]; ++p) {
            const std::size_t j = m.col_idx()[p];
            if (symmetric && j > i) continue;
            out << (i + 1) << " " << (j + 1) << " " << m.values()[p] << "\n";
        }
    if (!out) numerical_error("matrix market: write failed for " + path);
}

inline DenseMatrix read_dense(const std::string& path) {
    std::ifstream in(path);
    if (!in) numerical_error("matrix market: cannot open " + path);
    const auto h = detail::read_header(in, path);
    if (h.format != "array")
        numerical_error("matrix market: expected array format in " + path);
    if (h.symmetry != "general")
        numerical_error("matrix market: only general array files are supported (" + path + ")");
    std::istringstream sz(detail::next_data_line(in));
    long rows = 0, cols = 0;
    if (!(sz >> rows >> cols) || rows <= 0 || cols <= 0)
        numerical_error("matrix market: bad size line in " + path);
    DenseMatrix m(static_cast<std::size_t>(rows), static_cast<std::size_t>(cols));
    for (std::size_t j = 0; j < m.cols(); ++j)
        for (std::size_t i = 0; i < m.rows(); ++i) {
            std::istringstream ls(detail::next_data_line(in));
            double v = 0.0;
            if (!(ls >> v) || !std::isfinite(v))
                numerical_error("matrix market: bad array data in " + path);
            m(i, j) = v;
        }
    return m;
}

inline void write_dense(const DenseMatrix& m, const std::string& path) {
    std::ofstream out(path);
    if (!out) numerical_error("matrix market: cannot write " + path);
    out.precision(17);
    out << "%%MatrixMarket matrix array real general\n";
    out << m.rows() << " " << m.cols() << "\n";
    for (std::size_t j = 0; j < m.cols(); ++j)
        for (std::size_t i = 0; i < m.rows(); ++i) out << m(i, j) << "\n";
    if (!out) numerical_error("matrix market: write failed for " + path);
}

inline Vector read_vector(const std::string& path) {
    const DenseMatrix m = read_dense(path);
    require(m.cols() == 1, "matrix market: expected a single-column vector file");
    return m.col_vector(0);
}

inline void write_vector(const Vector& v, const std::string& path) {
    DenseMatrix m(v.size(), 1);
    std::copy(v.begin(), v.end(), m.col(0).begin());
    write_dense(m, path);
}

} // namespace mm
} // namespace deflatron
