#pragma once

#include <cstddef>
#include <initializer_list>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

namespace enrichfp {

/// Default upper bound on the ambient dimension d. Dense storage only.
inline constexpr std::size_t kDefaultMaxDimension = 64;

/// A point of R^d.
class Vector {
public:
    Vector() = default;
    explicit Vector(std::size_t dim, double fill = 0.0) : values_(dim, fill) {}
    Vector(std::initializer_list<double> values) : values_(values) {}
    explicit Vector(std::vector<double> values) : values_(std::move(values)) {}

    std::size_t size() const noexcept { return values_.size(); }
    bool empty() const noexcept { return values_.empty(); }

    double& operator[](std::size_t i) { return values_[i]; }
    double operator[](std::size_t i) const { return values_[i]; }

    std::span<double> data() noexcept { return values_; }
    std::span<const double> data() const noexcept { return values_; }
    const std::vector<double>& values() const noexcept { return values_; }

    auto begin() noexcept { return values_.begin(); }
    auto end() noexcept { return values_.end(); }
    auto begin() const noexcept { return values_.begin(); }
    auto end() const noexcept { return values_.end(); }

    bool all_finite() const noexcept;

    Vector& operator+=(const Vector& other);
    Vector& operator-=(const Vector& other);
    Vector& operator*=(double scale) noexcept;

    friend Vector operator+(Vector lhs, const Vector& rhs) { return lhs += rhs; }
    friend Vector operator-(Vector lhs, const Vector& rhs) { return lhs -= rhs; }
    friend Vector operator*(double scale, Vector v) { return v *= scale; }
    friend Vector operator*(Vector v, double scale) { return v *= scale; }

    bool operator==(const Vector&) const = default;

private:
    std::vector<double> values_;
};

/// Returns alpha * x + beta * y, componentwise.
Vector linear_combination(double alpha, const Vector& x, double beta, const Vector& y);

/// Square d x d matrix, row-major.
class Matrix {
public:
    Matrix() = default;
    explicit Matrix(std::size_t dim, double fill = 0.0) : dim_(dim), entries_(dim * dim, fill) {}

    static Matrix identity(std::size_t dim);
    static Matrix diagonal(std::span<const double> diag);
    /// Throws `InvariantViolation` when the rows do not form a square matrix.
    static Matrix from_rows(const std::vector<std::vector<double>>& rows);

    std::size_t dim() const noexcept { return dim_; }

    double& operator()(std::size_t row, std::size_t col) { return entries_[row * dim_ + col]; }
    double operator()(std::size_t row, std::size_t col) const { return entries_[row * dim_ + col]; }

    std::span<const double> row(std::size_t r) const noexcept
    {
        return std::span<const double>(entries_).subspan(r * dim_, dim_);
    }
    std::vector<std::vector<double>> rows() const;

    bool all_finite() const noexcept;
    bool is_zero() const noexcept;

    Vector apply(const Vector& x) const;
    Vector apply_transposed(const Vector& x) const;
    Matrix transposed() const;

    Matrix& operator+=(const Matrix& other);
    Matrix& operator*=(double scale) noexcept;

    friend Matrix operator+(Matrix lhs, const Matrix& rhs) { return lhs += rhs; }
    friend Matrix operator*(double scale, Matrix m) { return m *= scale; }
    friend Matrix operator*(const Matrix& lhs, const Matrix& rhs);

    bool operator==(const Matrix&) const = default;

private:
    std::size_t dim_ = 0;
    std::vector<double> entries_;
};

/// Returns shift * I + m.
Matrix shifted(const Matrix& m, double shift);

enum class NormKind { l1, l2, linf };

std::string_view to_string(NormKind kind) noexcept;
std::optional<NormKind> parse_norm_kind(std::string_view text) noexcept;

double norm(std::span<const double> v, NormKind kind) noexcept;
inline double norm(const Vector& v, NormKind kind) noexcept { return norm(v.data(), kind); }

/// ||x - y|| without materialising the difference.
double distance(const Vector& x, const Vector& y, NormKind kind);

/// Settings for the l2 operator norm estimator (power iteration on M^T M).
struct PowerIterationOptions {
    double tolerance = 1e-12;  ///< relative change between successive Rayleigh quotients
    std::size_t max_iterations = 10'000;
};

/// Induced operator norm: max column sum (l1), largest singular value (l2),
/// max row sum (linf).
///
/// The l2 value comes from power iteration on M^T M started at
/// (1,...,1)/sqrt(d). A second deterministic start is run as well and the
/// larger estimate is returned, so a start vector orthogonal to the dominant
/// singular direction cannot hide it. Throws `NoConvergence` when the
/// Rayleigh quotient does not settle within the iteration budget.
double operator_norm(const Matrix& m, NormKind kind, const PowerIterationOptions& options = {});

}  // namespace enrichfp
