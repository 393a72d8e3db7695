#include "enrichfp/spaces.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "enrichfp/error.hpp"

namespace enrichfp {

namespace {

void require_same_size(std::size_t a, std::size_t b)
{
    if (a != b) {
        throw Error(ErrorCode::DimensionMismatch,
                    "dimension " + std::to_string(a) + " does not match " + std::to_string(b));
    }
}

double dot(std::span<const double> a, std::span<const double> b) noexcept
{
    double sum = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        sum += a[i] * b[i];
    }
    return sum;
}

double max_abs_entry(const Matrix& m) noexcept
{
    double out = 0.0;
    for (std::size_t r = 0; r < m.dim(); ++r) {
        for (double value : m.row(r)) {
            out = std::max(out, std::abs(value));
        }
    }
    return out;
}

// Largest eigenvalue of m^T m reached from `start`; m is assumed pre-scaled.
double dominant_gram_eigenvalue(const Matrix& m, Vector v, const PowerIterationOptions& options)
{
    double len = norm(v, NormKind::l2);
    v *= 1.0 / len;

    double previous = -1.0;
    for (std::size_t k = 0; k < options.max_iterations; ++k) {
        Vector w = m.apply_transposed(m.apply(v));
        const double rayleigh = dot(v.data(), w.data());
        const double w_len = norm(w, NormKind::l2);
        if (w_len == 0.0) {
            return 0.0;
        }
        if (previous >= 0.0 &&
            std::abs(rayleigh - previous) <= options.tolerance * std::max(rayleigh, 0.0)) {
            return std::max(rayleigh, 0.0);
        }
        previous = rayleigh;
        w *= 1.0 / w_len;
        v = std::move(w);
    }
    throw Error(ErrorCode::NoConvergence,
                "l2 operator norm: power iteration did not settle within " +
                    std::to_string(options.max_iterations) + " iterations");
}

double spectral_norm(const Matrix& m, const PowerIterationOptions& options)
{
    const double scale = max_abs_entry(m);
    if (scale == 0.0) {
        return 0.0;
    }
    const Matrix scaled = (1.0 / scale) * m;
    const std::size_t d = m.dim();

    Vector uniform(d, 1.0);
    double best = dominant_gram_eigenvalue(scaled, uniform, options);

    if (d > 1) {
        // Irregular second start; (1,...,1) is orthogonal to e.g. the top
        // singular direction of [[1,-1],[1,-1]].
        Vector irregular(d);
        for (std::size_t i = 0; i < d; ++i) {
            irregular[i] = 1.0 + std::fmod(std::numbers::phi * static_cast<double>(i + 1), 1.0) *
                                     (i % 2 == 0 ? 1.0 : -2.0);
        }
        best = std::max(best, dominant_gram_eigenvalue(scaled, irregular, options));
    }
    return scale * std::sqrt(best);
}

}  // namespace

bool Vector::all_finite() const noexcept
{
    return std::all_of(values_.begin(), values_.end(), [](double x) { return std::isfinite(x); });
}

Vector& Vector::operator+=(const Vector& other)
{
    require_same_size(size(), other.size());
    for (std::size_t i = 0; i < values_.size(); ++i) {
        values_[i] += other.values_[i];
    }
    return *this;
}

Vector& Vector::operator-=(const Vector& other)
{
    require_same_size(size(), other.size());
    for (std::size_t i = 0; i < values_.size(); ++i) {
        values_[i] -= other.values_[i];
    }
    return *this;
}

Vector& Vector::operator*=(double scale) noexcept
{
    for (double& value : values_) {
        value *= scale;
    }
    return *this;
}

Vector linear_combination(double alpha, const Vector& x, double beta, const Vector& y)
{
    require_same_size(x.size(), y.size());
    Vector out(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        out[i] = alpha * x[i] + beta * y[i];
    }
    return out;
}

Matrix Matrix::identity(std::size_t dim)
{
    Matrix m(dim);
    for (std::size_t i = 0; i < dim; ++i) {
        m(i, i) = 1.0;
    }
    return m;
}

Matrix Matrix::diagonal(std::span<const double> diag)
{
    Matrix m(diag.size());
    for (std::size_t i = 0; i < diag.size(); ++i) {
        m(i, i) = diag[i];
    }
    return m;
}

Matrix Matrix::from_rows(const std::vector<std::vector<double>>& rows)
{
    const std::size_t d = rows.size();
    if (d == 0) {
        throw Error(ErrorCode::InvariantViolation, "matrix must have at least one row");
    }
    Matrix m(d);
    for (std::size_t r = 0; r < d; ++r) {
        if (rows[r].size() != d) {
            throw Error(ErrorCode::InvariantViolation,
                        "matrix is not square: row " + std::to_string(r) + " has " +
                            std::to_string(rows[r].size()) + " entries, expected " +
                            std::to_string(d));
        }
        std::copy(rows[r].begin(), rows[r].end(), m.entries_.begin() + static_cast<std::ptrdiff_t>(r * d));
    }
    return m;
}

std::vector<std::vector<double>> Matrix::rows() const
{
    std::vector<std::vector<double>> out;
    out.reserve(dim_);
    for (std::size_t r = 0; r < dim_; ++r) {
        auto span = row(r);
        out.emplace_back(span.begin(), span.end());
    }
    return out;
}

bool Matrix::all_finite() const noexcept
{
    return std::all_of(entries_.begin(), entries_.end(), [](double x) { return std::isfinite(x); });
}

bool Matrix::is_zero() const noexcept
{
    return std::all_of(entries_.begin(), entries_.end(), [](double x) { return x == 0.0; });
}

Vector Matrix::apply(const Vector& x) const
{
    require_same_size(dim_, x.size());
    Vector out(dim_);
    for (std::size_t r = 0; r < dim_; ++r) {
        out[r] = dot(row(r), x.data());
    }
    return out;
}

Vector Matrix::apply_transposed(const Vector& x) const
{
    require_same_size(dim_, x.size());
    Vector out(dim_);
    for (std::size_t r = 0; r < dim_; ++r) {
        const double xr = x[r];
        const auto entries = row(r);
        for (std::size_t c = 0; c < dim_; ++c) {
            out[c] += entries[c] * xr;
        }
    }
    return out;
}

Matrix Matrix::transposed() const
{
    Matrix out(dim_);
    for (std::size_t r = 0; r < dim_; ++r) {
        for (std::size_t c = 0; c < dim_; ++c) {
            out(c, r) = (*this)(r, c);
        }
    }
    return out;
}

Matrix& Matrix::operator+=(const Matrix& other)
{
    require_same_size(dim_, other.dim_);
    for (std::size_t i = 0; i < entries_.size(); ++i) {
        entries_[i] += other.entries_[i];
    }
    return *this;
}

Matrix& Matrix::operator*=(double scale) noexcept
{
    for (double& value : entries_) {
        value *= scale;
    }
    return *this;
}

Matrix operator*(const Matrix& lhs, const Matrix& rhs)
{
    require_same_size(lhs.dim(), rhs.dim());
    const std::size_t d = lhs.dim();
    Matrix out(d);
    for (std::size_t r = 0; r < d; ++r) {
        for (std::size_t k = 0; k < d; ++k) {
            const double a = lhs(r, k);
            for (std::size_t c = 0; c < d; ++c) {
                out(r, c) += a * rhs(k, c);
            }
        }
    }
    return out;
}

Matrix shifted(const Matrix& m, double shift)
{
    Matrix out = m;
    for (std::size_t i = 0; i < m.dim(); ++i) {
        out(i, i) += shift;
    }
    return out;
}

std::string_view to_string(NormKind kind) noexcept
{
    switch (kind) {
    case NormKind::l1: return "l1";
    case NormKind::l2: return "l2";
    case NormKind::linf: return "linf";
    }
    return "l2";
}

std::optional<NormKind> parse_norm_kind(std::string_view text) noexcept
{
    if (text == "l1") return NormKind::l1;
    if (text == "l2") return NormKind::l2;
    if (text == "linf") return NormKind::linf;
    return std::nullopt;
}

double norm(std::span<const double> v, NormKind kind) noexcept
{
    switch (kind) {
    case NormKind::l1: {
        double sum = 0.0;
        for (double x : v) sum += std::abs(x);
        return sum;
    }
    case NormKind::l2: {
        // Scaled accumulation keeps squares in range for large components.
        double scale = 0.0;
        for (double x : v) scale = std::max(scale, std::abs(x));
        if (scale == 0.0) return 0.0;
        double sum = 0.0;
        for (double x : v) {
            const double t = x / scale;
            sum += t * t;
        }
        return scale * std::sqrt(sum);
    }
    case NormKind::linf: {
        double out = 0.0;
        for (double x : v) out = std::max(out, std::abs(x));
        return out;
    }
    }
    return 0.0;
}

double distance(const Vector& x, const Vector& y, NormKind kind)
{
    return norm(x - y, kind);
}

double operator_norm(const Matrix& m, NormKind kind, const PowerIterationOptions& options)
{
    const std::size_t d = m.dim();
    switch (kind) {
    case NormKind::l1: {
        double best = 0.0;
        for (std::size_t c = 0; c < d; ++c) {
            double sum = 0.0;
            for (std::size_t r = 0; r < d; ++r) sum += std::abs(m(r, c));
            best = std::max(best, sum);
        }
        return best;
    }
    case NormKind::linf: {
        double best = 0.0;
        for (std::size_t r = 0; r < d; ++r) {
            double sum = 0.0;
            for (double value : m.row(r)) sum += std::abs(value);
            best = std::max(best, sum);
        }
        return best;
    }
    case NormKind::l2:
        return spectral_norm(m, options);
    }
    return 0.0;
}

}  // namespace enrichfp
