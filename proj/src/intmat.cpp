#include "detz/intmat.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

namespace detz {

IntMat::IntMat(std::initializer_list<std::initializer_list<long>> rows)
    : rows_(rows.size()), cols_(rows.size() ? rows.begin()->size() : 0)
{
    data_.reserve(rows_ * cols_);
    for (const auto& r : rows) {
        if (r.size() != cols_)
            throw std::invalid_argument("IntMat: ragged initializer");
        for (long v : r)
            data_.emplace_back(v);
    }
}

IntMat IntMat::identity(std::size_t n)
{
    IntMat m(n, n);
    for (std::size_t i = 0; i < n; ++i)
        m(i, i) = 1;
    return m;
}

IntMat IntMat::diagonal(const std::vector<mpz_class>& diag)
{
    IntMat m(diag.size(), diag.size());
    for (std::size_t i = 0; i < diag.size(); ++i)
        m(i, i) = diag[i];
    return m;
}

mpz_class maxentry(const IntMat& a)
{
    if (a.empty())
        throw std::invalid_argument("maxentry: empty matrix");
    const mpz_class* best = &a.entries().front();
    for (const auto& x : a.entries())
        if (mpz_cmpabs(x.get_mpz_t(), best->get_mpz_t()) > 0)
            best = &x;
    return abs(*best);
}

std::size_t maxentry_log2_ceil(const IntMat& a)
{
    mpz_class m = maxentry(a);
    if (m <= 1)
        return 0;
    m -= 1;
    return bitlen(m);
}

namespace {

// Bit lengths of the squared Euclidean lengths of every row (by_rows) or column.
std::vector<std::size_t> line_norm_bits(const IntMat& a, bool by_rows)
{
    const std::size_t lines = by_rows ? a.rows() : a.cols();
    const std::size_t len = by_rows ? a.cols() : a.rows();
    std::vector<std::size_t> out(lines);
    mpz_class q;
    for (std::size_t i = 0; i < lines; ++i) {
        q = 0;
        for (std::size_t j = 0; j < len; ++j) {
            const mpz_class& x = by_rows ? a(i, j) : a(j, i);
            mpz_addmul(q.get_mpz_t(), x.get_mpz_t(), x.get_mpz_t());
        }
        out[i] = bitlen(q);
    }
    return out;
}

std::size_t half_up(std::size_t s) { return (s + 1) / 2; }

std::size_t sum(const std::vector<std::size_t>& v)
{
    std::size_t s = 0;
    for (auto x : v)
        s += x;
    return s;
}

}  // namespace

std::size_t hadamard_row_bits(const IntMat& a)
{
    return 1 + half_up(sum(line_norm_bits(a, true)));
}

std::size_t hadamard_col_bits(const IntMat& a)
{
    return 1 + half_up(sum(line_norm_bits(a, false)));
}

std::size_t hadamard_bits(const IntMat& a)
{
    if (!a.square())
        throw std::invalid_argument("hadamard_bits: matrix not square");
    return std::min(hadamard_row_bits(a), hadamard_col_bits(a));
}

std::size_t adjugate_entry_bits(const IntMat& a)
{
    if (!a.square() || a.empty())
        throw std::invalid_argument("adjugate_entry_bits: need a non-empty square matrix");
    auto bound = [](const std::vector<std::size_t>& bits) {
        std::size_t s = sum(bits) - *std::min_element(bits.begin(), bits.end());
        return half_up(s);
    };
    return std::min(bound(line_norm_bits(a, true)), bound(line_norm_bits(a, false)));
}

IntMat multiply(const IntMat& a, const IntMat& b)
{
    if (a.cols() != b.rows())
        throw std::invalid_argument("multiply: dimension mismatch");
    IntMat c(a.rows(), b.cols());
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t k = 0; k < a.cols(); ++k) {
            const mpz_class& x = a(i, k);
            if (x == 0)
                continue;
            for (std::size_t j = 0; j < b.cols(); ++j)
                mpz_addmul(c(i, j).get_mpz_t(), x.get_mpz_t(), b(k, j).get_mpz_t());
        }
    return c;
}

IntVec multiply(const IntMat& a, const IntVec& x)
{
    if (a.cols() != x.size())
        throw std::invalid_argument("multiply: dimension mismatch");
    IntVec y(a.rows());
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j)
            mpz_addmul(y[i].get_mpz_t(), a(i, j).get_mpz_t(), x[j].get_mpz_t());
    return y;
}

IntMat transpose(const IntMat& a)
{
    IntMat t(a.cols(), a.rows());
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j)
            t(j, i) = a(i, j);
    return t;
}

namespace {

class Tokenizer {
public:
    explicit Tokenizer(std::string_view text) : text_(text) {}

    // Next whitespace-separated token; empty when exhausted. Sets line_end if a
    // newline was crossed before the token.
    std::string_view next(bool* crossed_newline = nullptr)
    {
        bool nl = false;
        while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) {
            if (text_[pos_] == '\n')
                nl = true;
            ++pos_;
        }
        if (crossed_newline)
            *crossed_newline = nl;
        std::size_t start = pos_;
        while (pos_ < text_.size() && !std::isspace(static_cast<unsigned char>(text_[pos_])))
            ++pos_;
        return text_.substr(start, pos_ - start);
    }

private:
    std::string_view text_;
    std::size_t pos_ = 0;
};

bool is_integer_token(std::string_view tok)
{
    std::size_t i = 0;
    if (!tok.empty() && (tok[0] == '-' || tok[0] == '+'))
        i = 1;
    if (i == tok.size())
        return false;
    for (; i < tok.size(); ++i)
        if (!std::isdigit(static_cast<unsigned char>(tok[i])))
            return false;
    return true;
}

std::size_t parse_dim(std::string_view tok, const char* what)
{
    if (tok.empty())
        throw ParseError(std::string("malformed header: missing ") + what);
    std::size_t v = 0;
    for (char c : tok) {
        if (!std::isdigit(static_cast<unsigned char>(c)))
            throw ParseError(std::string("malformed header: bad ") + what + " '" + std::string(tok) + "'");
        v = v * 10 + static_cast<std::size_t>(c - '0');
        if (v > (1u << 24))
            throw ParseError(std::string("malformed header: ") + what + " too large");
    }
    return v;
}

}  // namespace

IntMat parse_matrix(std::string_view text)
{
    Tokenizer tok(text);
    std::size_t rows = parse_dim(tok.next(), "row count");
    bool nl = false;
    std::string_view c = tok.next(&nl);
    if (nl)
        throw ParseError("malformed header: expected \"R C\" on the first line");
    std::size_t cols = parse_dim(c, "column count");

    IntMat m(rows, cols);
    std::string buf;
    std::size_t count = 0;
    for (std::string_view t = tok.next(&nl); !t.empty(); t = tok.next(&nl)) {
        if (count == 0 && !nl)
            throw ParseError("malformed header: trailing tokens after \"R C\"");
        if (!is_integer_token(t))
            throw ParseError("non-integer token '" + std::string(t) + "'");
        if (count == rows * cols)
            throw ParseError("wrong entry count: more than " + std::to_string(rows * cols) + " entries");
        buf.assign(t[0] == '+' ? t.substr(1) : t);
        m.entries()[count].set_str(buf, 10);
        ++count;
    }
    if (count != rows * cols)
        throw ParseError("wrong entry count: expected " + std::to_string(rows * cols) + ", got " +
                         std::to_string(count));
    return m;
}

std::string format_matrix(const IntMat& a)
{
    std::string out = std::to_string(a.rows()) + " " + std::to_string(a.cols()) + "\n";
    for (std::size_t i = 0; i < a.rows(); ++i) {
        for (std::size_t j = 0; j < a.cols(); ++j) {
            if (j)
                out += ' ';
            out += a(i, j).get_str(10);
        }
        out += '\n';
    }
    return out;
}

IntMat read_matrix_file(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw ParseError("cannot open '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_matrix(ss.str());
}

void write_matrix_file(const std::string& path, const IntMat& a)
{
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw Error("cannot write '" + path + "'");
    out << format_matrix(a);
    if (!out)
        throw Error("write failed for '" + path + "'");
}

}  // namespace detz
