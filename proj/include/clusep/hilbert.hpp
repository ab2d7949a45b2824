#pragma once

// Finite-dimensional complex linear algebra: state vectors, operators and
// density operators on explicit tensor-product spaces.

#include <algorithm>
#include <complex>
#include <cstddef>
#include <functional>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <unsupported/Eigen/KroneckerProduct>

namespace clusep {

using Complex = std::complex<double>;
using Vector = Eigen::VectorXcd;
using Matrix = Eigen::MatrixXcd;
using Dims = std::vector<std::size_t>;

namespace tol {
inline constexpr double kOperator = 1e-10;
inline constexpr double kNorm = 1e-12;
inline constexpr double kDegenerate = 1e-12;
inline constexpr double kGramSchmidtSkip = 1e-8;
}  // namespace tol

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Bad input: shapes, preconditions, malformed configuration.
class ValidationError : public Error {
public:
    using Error::Error;
};

/// A projection annihilated the state (e.g. Pauli exclusion).
class DegenerateError : public Error {
public:
    using Error::Error;
};

inline std::size_t product(const Dims& dims) {
    return std::accumulate(dims.begin(), dims.end(), std::size_t{1}, std::multiplies<>{});
}

inline Dims concat(const Dims& a, const Dims& b) {
    Dims out = a;
    out.insert(out.end(), b.begin(), b.end());
    return out;
}

inline std::string format_dims(const Dims& dims) {
    std::ostringstream os;
    os << '[';
    for (std::size_t i = 0; i < dims.size(); ++i) os << (i ? "," : "") << dims[i];
    os << ']';
    return os.str();
}

inline std::string format_complex(Complex z) {
    std::ostringstream os;
    os.precision(6);
    os << '(' << z.real() << (z.imag() < 0 ? "-" : "+") << std::abs(z.imag()) << "i)";
    return os.str();
}

/// Largest entry modulus. This is the norm used by every tolerance check in
/// the library.
template <typename Derived>
double max_abs(const Eigen::MatrixBase<Derived>& m) {
    return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff();
}

class StateVector {
public:
    StateVector(Dims dims, Vector amplitudes) : dims_(std::move(dims)), amplitudes_(std::move(amplitudes)) {
        if (dims_.empty() || std::find(dims_.begin(), dims_.end(), 0u) != dims_.end())
            throw ValidationError("state vector dims must be nonempty and positive, got " + format_dims(dims_));
        if (static_cast<std::size_t>(amplitudes_.size()) != product(dims_))
            throw ValidationError("state vector length " + std::to_string(amplitudes_.size()) +
                                  " does not match dims " + format_dims(dims_));
    }

    static StateVector zero(Dims dims) {
        const auto n = static_cast<Eigen::Index>(product(dims));
        return {std::move(dims), Vector::Zero(n)};
    }

    static StateVector basis(Dims dims, std::size_t index) {
        auto v = zero(std::move(dims));
        if (index >= v.dim()) throw ValidationError("basis index " + std::to_string(index) + " out of range");
        v.amplitudes_(static_cast<Eigen::Index>(index)) = 1.0;
        return v;
    }

    const Dims& dims() const { return dims_; }
    const Vector& amplitudes() const { return amplitudes_; }
    std::size_t dim() const { return static_cast<std::size_t>(amplitudes_.size()); }
    Complex operator[](std::size_t i) const { return amplitudes_(static_cast<Eigen::Index>(i)); }

    double norm() const { return amplitudes_.norm(); }
    bool is_normalized(double tolerance = tol::kNorm) const { return std::abs(norm() - 1.0) <= tolerance; }

    /// <this|other>
    Complex inner(const StateVector& other) const {
        if (other.dim() != dim()) throw ValidationError("inner product of vectors with different dimension");
        return amplitudes_.dot(other.amplitudes_);
    }

    StateVector scaled(Complex factor) const { return {dims_, amplitudes_ * factor}; }

    friend StateVector operator+(const StateVector& a, const StateVector& b) {
        if (a.dims_ != b.dims_) throw ValidationError("cannot add vectors with dims " + format_dims(a.dims_) +
                                                      " and " + format_dims(b.dims_));
        return {a.dims_, a.amplitudes_ + b.amplitudes_};
    }
    friend StateVector operator-(const StateVector& a, const StateVector& b) { return a + b.scaled(-1.0); }
    friend StateVector operator*(Complex c, const StateVector& v) { return v.scaled(c); }

private:
    Dims dims_;
    Vector amplitudes_;
};

class Operator {
public:
    Operator(Dims dims_out, Dims dims_in, Matrix entries)
        : dims_out_(std::move(dims_out)), dims_in_(std::move(dims_in)), entries_(std::move(entries)) {
        if (static_cast<std::size_t>(entries_.rows()) != product(dims_out_) ||
            static_cast<std::size_t>(entries_.cols()) != product(dims_in_))
            throw ValidationError("operator shape " + std::to_string(entries_.rows()) + "x" +
                                  std::to_string(entries_.cols()) + " does not match dims " +
                                  format_dims(dims_out_) + " <- " + format_dims(dims_in_));
    }

    Operator(Dims dims, Matrix entries) : Operator(dims, dims, std::move(entries)) {}

    static Operator identity(Dims dims) {
        const auto n = static_cast<Eigen::Index>(product(dims));
        return {std::move(dims), Matrix::Identity(n, n)};
    }

    /// |v><v|
    static Operator projector(const StateVector& v) {
        return {v.dims(), v.amplitudes() * v.amplitudes().adjoint()};
    }

    const Dims& dims_out() const { return dims_out_; }
    const Dims& dims_in() const { return dims_in_; }
    const Matrix& matrix() const { return entries_; }
    bool is_square() const { return entries_.rows() == entries_.cols(); }

    bool is_hermitian(double tolerance = tol::kOperator) const {
        return is_square() && max_abs(entries_ - entries_.adjoint()) <= tolerance;
    }

    bool is_unitary(double tolerance = tol::kOperator) const {
        if (!is_square()) return false;
        const auto n = entries_.rows();
        return max_abs(entries_.adjoint() * entries_ - Matrix::Identity(n, n)) <= tolerance;
    }

    Operator adjoint() const { return {dims_in_, dims_out_, entries_.adjoint()}; }

    StateVector apply(const StateVector& v) const {
        if (v.dim() != static_cast<std::size_t>(entries_.cols()))
            throw ValidationError("operator with input dims " + format_dims(dims_in_) +
                                  " applied to vector with dims " + format_dims(v.dims()));
        return {dims_out_, entries_ * v.amplitudes()};
    }

    friend StateVector operator*(const Operator& op, const StateVector& v) { return op.apply(v); }

    friend Operator operator*(const Operator& a, const Operator& b) {
        if (a.entries_.cols() != b.entries_.rows())
            throw ValidationError("operator product with mismatched dims " + format_dims(a.dims_in_) + " and " +
                                  format_dims(b.dims_out_));
        return {a.dims_out_, b.dims_in_, a.entries_ * b.entries_};
    }

private:
    Dims dims_out_;
    Dims dims_in_;
    Matrix entries_;
};

/// Trace-one positive Hermitian operator. Validated on construction.
class DensityOperator {
public:
    DensityOperator(Dims dims, Matrix entries) : dims_(std::move(dims)), entries_(std::move(entries)) {
        const auto n = static_cast<Eigen::Index>(product(dims_));
        if (dims_.empty() || entries_.rows() != n || entries_.cols() != n)
            throw ValidationError("density operator shape does not match dims " + format_dims(dims_));
        if (max_abs(entries_ - entries_.adjoint()) > tol::kOperator)
            throw ValidationError("density operator is not Hermitian");
        const Complex tr = entries_.trace();
        if (std::abs(tr - Complex{1.0}) > tol::kOperator)
            throw ValidationError("density operator trace is " + format_complex(tr) + ", expected 1");
        // Cholesky of rho + tol*I succeeds iff every eigenvalue exceeds -tol.
        Matrix shifted = entries_;
        shifted.diagonal().array() += tol::kOperator;
        if (Eigen::LLT<Matrix>(shifted).info() != Eigen::Success)
            throw ValidationError("density operator has an eigenvalue below -" + std::to_string(tol::kOperator));
    }

    static DensityOperator pure(const StateVector& v) {
        if (!v.is_normalized()) throw ValidationError("pure state requires a normalized vector");
        return {v.dims(), v.amplitudes() * v.amplitudes().adjoint()};
    }

    const Dims& dims() const { return dims_; }
    const Matrix& matrix() const { return entries_; }
    std::size_t dim() const { return static_cast<std::size_t>(entries_.rows()); }
    double trace() const { return entries_.trace().real(); }
    Operator as_operator() const { return {dims_, entries_}; }

private:
    Dims dims_;
    Matrix entries_;
};

inline StateVector tensor(const StateVector& a, const StateVector& b) {
    return {concat(a.dims(), b.dims()), Eigen::kroneckerProduct(a.amplitudes(), b.amplitudes()).eval()};
}

inline Operator tensor(const Operator& a, const Operator& b) {
    return {concat(a.dims_out(), b.dims_out()), concat(a.dims_in(), b.dims_in()),
            Eigen::kroneckerProduct(a.matrix(), b.matrix()).eval()};
}

inline DensityOperator tensor(const DensityOperator& a, const DensityOperator& b) {
    return {concat(a.dims(), b.dims()), Eigen::kroneckerProduct(a.matrix(), b.matrix()).eval()};
}

template <typename T, typename... Rest>
T tensor(const T& first, const T& second, const Rest&... rest) {
    return tensor(tensor(first, second), rest...);
}

inline StateVector normalize(const StateVector& v) {
    const double n = v.norm();
    if (!(n > tol::kDegenerate)) throw DegenerateError("degenerate vector");
    return v.scaled(1.0 / n);
}

namespace detail {

// Flat offset contributed by each multi-index over `factors`, in row-major
// order of those factors, inside the full space described by `dims`.
inline std::vector<std::size_t> factor_offsets(const Dims& dims, const std::vector<std::size_t>& factors) {
    Dims strides(dims.size(), 1);
    for (std::size_t i = dims.size(); i-- > 1;) strides[i - 1] = strides[i] * dims[i];

    std::vector<std::size_t> offsets{0};
    for (std::size_t f : factors) {
        std::vector<std::size_t> next;
        next.reserve(offsets.size() * dims[f]);
        for (std::size_t base : offsets)
            for (std::size_t digit = 0; digit < dims[f]; ++digit) next.push_back(base + digit * strides[f]);
        offsets = std::move(next);
    }
    return offsets;
}

inline std::vector<std::size_t> checked_keep(const Dims& dims, std::vector<std::size_t> keep) {
    if (keep.empty()) throw ValidationError("nothing retained");
    std::sort(keep.begin(), keep.end());
    if (std::adjacent_find(keep.begin(), keep.end()) != keep.end())
        throw ValidationError("partial trace keep set has duplicate factors");
    if (keep.back() >= dims.size())
        throw ValidationError("partial trace factor " + std::to_string(keep.back()) + " out of range for dims " +
                              format_dims(dims));
    return keep;
}

inline Matrix partial_trace_matrix(const Matrix& m, const Dims& dims, const std::vector<std::size_t>& keep) {
    std::vector<std::size_t> traced;
    for (std::size_t f = 0; f < dims.size(); ++f)
        if (!std::binary_search(keep.begin(), keep.end(), f)) traced.push_back(f);

    const auto kept_offsets = factor_offsets(dims, keep);
    const auto traced_offsets = factor_offsets(dims, traced);
    const auto k = static_cast<Eigen::Index>(kept_offsets.size());

    Matrix out = Matrix::Zero(k, k);
    for (Eigen::Index a = 0; a < k; ++a)
        for (Eigen::Index b = 0; b < k; ++b) {
            Complex sum = 0.0;
            for (std::size_t t : traced_offsets)
                sum += m(static_cast<Eigen::Index>(kept_offsets[a] + t), static_cast<Eigen::Index>(kept_offsets[b] + t));
            out(a, b) = sum;
        }
    return out;
}

}  // namespace detail

/// Traces out every factor not listed in `keep`. Retained factors keep their
/// original relative order.
inline DensityOperator partial_trace(const DensityOperator& rho, std::vector<std::size_t> keep) {
    keep = detail::checked_keep(rho.dims(), std::move(keep));
    Dims kept_dims;
    for (std::size_t f : keep) kept_dims.push_back(rho.dims()[f]);
    return {kept_dims, detail::partial_trace_matrix(rho.matrix(), rho.dims(), keep)};
}

struct VectorPair {
    StateVector input;
    StateVector image;
};

namespace detail {

inline void check_orthonormal(const std::vector<const StateVector*>& vs, const char* role) {
    for (std::size_t i = 0; i < vs.size(); ++i)
        for (std::size_t j = i; j < vs.size(); ++j) {
            const Complex ip = vs[i]->inner(*vs[j]);
            const Complex expected = i == j ? 1.0 : 0.0;
            if (std::abs(ip - expected) > tol::kOperator)
                throw ValidationError(std::string(role) + " vectors of pairs " + std::to_string(i) + " and " +
                                      std::to_string(j) + " are not orthonormal: inner product " +
                                      format_complex(ip));
        }
}

// Extends an orthonormal set to a basis with canonical vectors e_0, e_1, ...
// in index order; residuals below kGramSchmidtSkip are skipped.
inline Matrix complete_basis(const std::vector<Vector>& seed, Eigen::Index d) {
    Matrix basis(d, d);
    Eigen::Index filled = 0;
    for (const auto& v : seed) basis.col(filled++) = v;
    for (Eigen::Index j = 0; j < d && filled < d; ++j) {
        Vector r = Vector::Unit(d, j);
        for (int pass = 0; pass < 2; ++pass)
            for (Eigen::Index c = 0; c < filled; ++c) r -= basis.col(c) * basis.col(c).dot(r);
        const double n = r.norm();
        if (n < tol::kGramSchmidtSkip) continue;
        basis.col(filled++) = r / n;
    }
    if (filled != d) throw Error("Gram-Schmidt completion produced an incomplete basis");
    return basis;
}

}  // namespace detail

/// Unitary U on a space with the given dims such that U * input_i = image_i.
/// The orthocomplement of the inputs is mapped onto the orthocomplement of the
/// images by completing both sets deterministically over the canonical basis.
inline Operator complete_to_unitary(const std::vector<VectorPair>& pairs, const Dims& dims) {
    const auto d = static_cast<Eigen::Index>(product(dims));
    std::vector<const StateVector*> inputs, images;
    for (const auto& p : pairs) {
        if (p.input.dim() != static_cast<std::size_t>(d) || p.image.dim() != static_cast<std::size_t>(d))
            throw ValidationError("unitary completion pair has dimension different from " + std::to_string(d));
        inputs.push_back(&p.input);
        images.push_back(&p.image);
    }
    if (pairs.size() > static_cast<std::size_t>(d))
        throw ValidationError("more constraint pairs than the space dimension");
    detail::check_orthonormal(inputs, "input");
    detail::check_orthonormal(images, "image");

    std::vector<Vector> in_seed, out_seed;
    for (const auto& p : pairs) {
        in_seed.push_back(p.input.amplitudes());
        out_seed.push_back(p.image.amplitudes());
    }
    const Matrix in_basis = detail::complete_basis(in_seed, d);
    const Matrix out_basis = detail::complete_basis(out_seed, d);
    return {dims, out_basis * in_basis.adjoint()};
}

}  // namespace clusep
