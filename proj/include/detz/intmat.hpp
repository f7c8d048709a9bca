#pragma once

#include <cstddef>
#include <initializer_list>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <gmpxx.h>

namespace detz {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ParseError : public Error {
public:
    using Error::Error;
};

/// Number of bits needed to write |x|; zero has bit length 0.
inline std::size_t bitlen(const mpz_class& x)
{
    return mpz_sgn(x.get_mpz_t()) == 0 ? 0 : mpz_sizeinbase(x.get_mpz_t(), 2);
}

/// Dense row-major matrix of arbitrary-precision integers.
class IntMat {
public:
    IntMat() = default;
    IntMat(std::size_t rows, std::size_t cols)
        : rows_(rows), cols_(cols), data_(rows * cols) {}
    IntMat(std::initializer_list<std::initializer_list<long>> rows);

    static IntMat identity(std::size_t n);
    static IntMat diagonal(const std::vector<mpz_class>& diag);

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    bool square() const { return rows_ == cols_; }
    bool empty() const { return data_.empty(); }

    mpz_class& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
    const mpz_class& operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

    mpz_class* row(std::size_t i) { return data_.data() + i * cols_; }
    const mpz_class* row(std::size_t i) const { return data_.data() + i * cols_; }

    std::vector<mpz_class>& entries() { return data_; }
    const std::vector<mpz_class>& entries() const { return data_; }

    friend bool operator==(const IntMat& a, const IntMat& b)
    {
        return a.rows_ == b.rows_ && a.cols_ == b.cols_ && a.data_ == b.data_;
    }

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<mpz_class> data_;
};

using IntVec = std::vector<mpz_class>;

/// Largest absolute value among the entries.
mpz_class maxentry(const IntMat& a);

/// ceil(log2(maxentry(a))), with 0 for a 0/±1 matrix.
std::size_t maxentry_log2_ceil(const IntMat& a);

/// Bit-domain Hadamard bound h with 2^h > 2|det(a)|: 1 + ceil(sum bitlen(q_i) / 2),
/// q_i the squared Euclidean length of line i, minimised over rows and columns.
std::size_t hadamard_bits(const IntMat& a);

/// Same bound restricted to one orientation.
std::size_t hadamard_row_bits(const IntMat& a);
std::size_t hadamard_col_bits(const IntMat& a);

/// Bit bound for every entry of adj(a): 2^result >= |(n-1)-minor| for all minors.
std::size_t adjugate_entry_bits(const IntMat& a);

IntMat multiply(const IntMat& a, const IntMat& b);
IntVec multiply(const IntMat& a, const IntVec& x);
IntMat transpose(const IntMat& a);

/// Text format: "R C" header line, then R lines of C decimal integers.
IntMat parse_matrix(std::string_view text);
std::string format_matrix(const IntMat& a);

IntMat read_matrix_file(const std::string& path);
void write_matrix_file(const std::string& path, const IntMat& a);

}  // namespace detz
