#pragma once

#include <cstddef>
#include <memory>
#include <optional>
#include <variant>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "enrichfp/spaces.hpp"

namespace enrichfp {

class Mapping;

namespace mapping {

/// x -> A x + c
struct Affine {
    Matrix matrix;
    Vector offset;
    bool operator==(const Affine&) const = default;
};

/// Planar rotation by `theta` radians, counter-clockwise.
struct Rotation {
    double theta = 0.0;
    bool operator==(const Rotation&) const = default;
};

/// Componentwise clamp onto [lo, hi].
struct BoxProjection {
    Vector lo;
    Vector hi;
    bool operator==(const BoxProjection&) const = default;
};

/// x -> alpha x + beta base(x). Carrier for the averaged and reduced maps.
struct LinearCombination {
    double alpha = 0.0;
    double beta = 0.0;
    std::shared_ptr<const Mapping> base;
    bool operator==(const LinearCombination& other) const;
};

/// Stages are applied first to last: stages = [f, g] evaluates g(f(x)).
struct Composition {
    std::vector<Mapping> stages;
    bool operator==(const Composition& other) const;
};

struct Identity {
    std::size_t dim = 0;
    bool operator==(const Identity&) const = default;
};

}  // namespace mapping

/// Immutable self-map of R^d.
///
/// Instances are only produced by the factory functions, which enforce the
/// invariants (finite parameters, lo <= hi, matching stage dimensions), so
/// `dimension()` is always well defined.
class Mapping {
public:
    using Node = std::variant<mapping::Affine, mapping::Rotation, mapping::BoxProjection,
                              mapping::LinearCombination, mapping::Composition, mapping::Identity>;

    static Mapping affine(Matrix matrix, Vector offset);
    static Mapping rotation(double theta);
    static Mapping box_projection(Vector lo, Vector hi);
    static Mapping linear_combination(double alpha, double beta, Mapping base);
    static Mapping composition(std::vector<Mapping> stages);
    static Mapping identity(std::size_t dim);

    std::size_t dimension() const noexcept { return dim_; }
    const Node& node() const noexcept { return node_; }

    template <class T>
    const T* get_if() const noexcept
    {
        return std::get_if<T>(&node_);
    }

    /// Evaluates the mapping; see `evaluate`.
    Vector operator()(const Vector& x) const;

    /// Structural equality of the expression trees.
    bool operator==(const Mapping& other) const;

private:
    Mapping(Node node, std::size_t dim) : node_(std::move(node)), dim_(dim) {}

    Node node_;
    std::size_t dim_ = 0;
};

/// Returns T(x). Throws `DimensionMismatch` when x has the wrong size and
/// `NonFiniteResult` when any output component overflows or is NaN.
Vector evaluate(const Mapping& map, const Vector& x);

struct AffineForm {
    Matrix matrix;
    Vector offset;
};

/// Exact affine normal form (A, c) with T(x) = A x + c, when one exists.
std::optional<AffineForm> as_affine(const Mapping& map);

/// JSON encoding; field names follow the mapping schema ("kind", "matrix", ...).
nlohmann::json to_json(const Mapping& map);

/// Parses the mapping schema. Throws `SchemaError` for unknown tags, missing
/// or mistyped fields, and `InvariantViolation` for ill-formed values; both
/// carry a path into the document.
Mapping parse_mapping(const nlohmann::json& doc, std::size_t max_dim = kDefaultMaxDimension);

}  // namespace enrichfp
