#include "enrichfp/mappings.hpp"

#include <cmath>
#include <initializer_list>
#include <string>

#include <nlohmann/json.hpp>

#include "enrichfp/error.hpp"

namespace enrichfp {

using nlohmann::json;

namespace mapping {

bool LinearCombination::operator==(const LinearCombination& other) const
{
    if (alpha != other.alpha || beta != other.beta) return false;
    if (!base || !other.base) return base == other.base;
    return *base == *other.base;
}

bool Composition::operator==(const Composition& other) const
{
    return stages == other.stages;
}

}  // namespace mapping

namespace {

void require_finite(double value, const char* what)
{
    if (!std::isfinite(value)) {
        throw Error(ErrorCode::InvariantViolation, std::string(what) + " must be finite");
    }
}

// Unchecked recursive evaluation; finiteness is checked once at the top.
Vector eval_node(const Mapping& map, const Vector& x)
{
    return std::visit(
        [&x](const auto& node) -> Vector {
            using T = std::decay_t<decltype(node)>;
            if constexpr (std::is_same_v<T, mapping::Affine>) {
                return node.matrix.apply(x) + node.offset;
            } else if constexpr (std::is_same_v<T, mapping::Rotation>) {
                const double c = std::cos(node.theta);
                const double s = std::sin(node.theta);
                return Vector{c * x[0] - s * x[1], s * x[0] + c * x[1]};
            } else if constexpr (std::is_same_v<T, mapping::BoxProjection>) {
                Vector out = x;
                for (std::size_t i = 0; i < out.size(); ++i) {
                    out[i] = std::min(std::max(out[i], node.lo[i]), node.hi[i]);
                }
                return out;
            } else if constexpr (std::is_same_v<T, mapping::LinearCombination>) {
                return linear_combination(node.alpha, x, node.beta, eval_node(*node.base, x));
            } else if constexpr (std::is_same_v<T, mapping::Composition>) {
                Vector current = x;
                for (const Mapping& stage : node.stages) {
                    current = eval_node(stage, current);
                }
                return current;
            } else {
                return x;
            }
        },
        map.node());
}

}  // namespace

Mapping Mapping::affine(Matrix matrix, Vector offset)
{
    if (matrix.dim() == 0) {
        throw Error(ErrorCode::InvariantViolation, "affine matrix must be non-empty");
    }
    if (matrix.dim() != offset.size()) {
        throw Error(ErrorCode::InvariantViolation,
                    "affine offset has dimension " + std::to_string(offset.size()) +
                        " but matrix is " + std::to_string(matrix.dim()) + "x" +
                        std::to_string(matrix.dim()));
    }
    if (!matrix.all_finite() || !offset.all_finite()) {
        throw Error(ErrorCode::InvariantViolation, "affine parameters must be finite");
    }
    const std::size_t d = matrix.dim();
    return Mapping(mapping::Affine{std::move(matrix), std::move(offset)}, d);
}

Mapping Mapping::rotation(double theta)
{
    require_finite(theta, "rotation angle");
    return Mapping(mapping::Rotation{theta}, 2);
}

Mapping Mapping::box_projection(Vector lo, Vector hi)
{
    if (lo.empty() || lo.size() != hi.size()) {
        throw Error(ErrorCode::InvariantViolation, "box bounds must be non-empty and of equal dimension");
    }
    if (!lo.all_finite() || !hi.all_finite()) {
        throw Error(ErrorCode::InvariantViolation, "box bounds must be finite");
    }
    for (std::size_t i = 0; i < lo.size(); ++i) {
        if (lo[i] > hi[i]) {
            throw Error(ErrorCode::InvariantViolation,
                        "box bound lo > hi in component " + std::to_string(i));
        }
    }
    const std::size_t d = lo.size();
    return Mapping(mapping::BoxProjection{std::move(lo), std::move(hi)}, d);
}

Mapping Mapping::linear_combination(double alpha, double beta, Mapping base)
{
    require_finite(alpha, "alpha");
    require_finite(beta, "beta");
    const std::size_t d = base.dimension();
    return Mapping(
        mapping::LinearCombination{alpha, beta, std::make_shared<const Mapping>(std::move(base))}, d);
}

Mapping Mapping::composition(std::vector<Mapping> stages)
{
    if (stages.empty()) {
        throw Error(ErrorCode::InvariantViolation, "composition needs at least one stage");
    }
    const std::size_t d = stages.front().dimension();
    for (std::size_t i = 1; i < stages.size(); ++i) {
        if (stages[i].dimension() != d) {
            throw Error(ErrorCode::InvariantViolation,
                        "composition stage " + std::to_string(i) + " has dimension " +
                            std::to_string(stages[i].dimension()) + ", expected " + std::to_string(d));
        }
    }
    return Mapping(mapping::Composition{std::move(stages)}, d);
}

Mapping Mapping::identity(std::size_t dim)
{
    if (dim == 0) {
        throw Error(ErrorCode::InvariantViolation, "identity dimension must be positive");
    }
    return Mapping(mapping::Identity{dim}, dim);
}

Vector Mapping::operator()(const Vector& x) const
{
    return evaluate(*this, x);
}

bool Mapping::operator==(const Mapping& other) const
{
    return dim_ == other.dim_ && node_ == other.node_;
}

Vector evaluate(const Mapping& map, const Vector& x)
{
    if (x.size() != map.dimension()) {
        throw Error(ErrorCode::DimensionMismatch,
                    "input has dimension " + std::to_string(x.size()) + ", mapping expects " +
                        std::to_string(map.dimension()));
    }
    Vector out = eval_node(map, x);
    if (!out.all_finite()) {
        throw Error(ErrorCode::NonFiniteResult, "mapping produced a non-finite component");
    }
    return out;
}

std::optional<AffineForm> as_affine(const Mapping& map)
{
    return std::visit(
        [&map](const auto& node) -> std::optional<AffineForm> {
            using T = std::decay_t<decltype(node)>;
            if constexpr (std::is_same_v<T, mapping::Affine>) {
                return AffineForm{node.matrix, node.offset};
            } else if constexpr (std::is_same_v<T, mapping::Rotation>) {
                const double c = std::cos(node.theta);
                const double s = std::sin(node.theta);
                return AffineForm{Matrix::from_rows({{c, -s}, {s, c}}), Vector(2)};
            } else if constexpr (std::is_same_v<T, mapping::BoxProjection>) {
                return std::nullopt;
            } else if constexpr (std::is_same_v<T, mapping::LinearCombination>) {
                auto base = as_affine(*node.base);
                if (!base) return std::nullopt;
                Matrix m = node.beta * base->matrix;
                return AffineForm{shifted(m, node.alpha), node.beta * base->offset};
            } else if constexpr (std::is_same_v<T, mapping::Composition>) {
                AffineForm total{Matrix::identity(map.dimension()), Vector(map.dimension())};
                for (const Mapping& stage : node.stages) {
                    auto form = as_affine(stage);
                    if (!form) return std::nullopt;
                    total.offset = form->matrix.apply(total.offset) + form->offset;
                    total.matrix = form->matrix * total.matrix;
                }
                return total;
            } else {
                return AffineForm{Matrix::identity(node.dim), Vector(node.dim)};
            }
        },
        map.node());
}

json to_json(const Mapping& map)
{
    return std::visit(
        [](const auto& node) -> json {
            using T = std::decay_t<decltype(node)>;
            if constexpr (std::is_same_v<T, mapping::Affine>) {
                return {{"kind", "affine"}, {"matrix", node.matrix.rows()}, {"offset", node.offset.values()}};
            } else if constexpr (std::is_same_v<T, mapping::Rotation>) {
                return {{"kind", "rotation"}, {"theta", node.theta}};
            } else if constexpr (std::is_same_v<T, mapping::BoxProjection>) {
                return {{"kind", "box_projection"}, {"lo", node.lo.values()}, {"hi", node.hi.values()}};
            } else if constexpr (std::is_same_v<T, mapping::LinearCombination>) {
                return {{"kind", "lincomb"},
                        {"alpha", node.alpha},
                        {"beta", node.beta},
                        {"base", to_json(*node.base)}};
            } else if constexpr (std::is_same_v<T, mapping::Composition>) {
                json stages = json::array();
                for (const Mapping& stage : node.stages) stages.push_back(to_json(stage));
                return {{"kind", "composition"}, {"stages", std::move(stages)}};
            } else {
                return {{"kind", "identity"}, {"dim", node.dim}};
            }
        },
        map.node());
}

namespace {

class MappingParser {
public:
    explicit MappingParser(std::size_t max_dim) : max_dim_(max_dim) {}

    Mapping parse(const json& doc, const std::string& path) const
    {
        if (!doc.is_object()) {
            throw Error(ErrorCode::SchemaError, "mapping must be a JSON object", path_or_root(path));
        }
        const std::string kind = string_field(doc, "kind", path);
        Mapping result = [&] {
            if (kind == "affine") {
                allow_only(doc, {"kind", "matrix", "offset"}, path);
                Matrix matrix = matrix_field(doc, "matrix", path);
                Vector offset = vector_field(doc, "offset", path);
                if (offset.size() != matrix.dim()) {
                    throw Error(ErrorCode::InvariantViolation,
                                "offset dimension " + std::to_string(offset.size()) +
                                    " does not match matrix dimension " + std::to_string(matrix.dim()),
                                path + "/offset");
                }
                return wrap(path, [&] { return Mapping::affine(std::move(matrix), std::move(offset)); });
            }
            if (kind == "rotation") {
                allow_only(doc, {"kind", "theta"}, path);
                const double theta = number_field(doc, "theta", path);
                return wrap(path + "/theta", [&] { return Mapping::rotation(theta); });
            }
            if (kind == "box_projection") {
                allow_only(doc, {"kind", "lo", "hi"}, path);
                Vector lo = vector_field(doc, "lo", path);
                Vector hi = vector_field(doc, "hi", path);
                return wrap(path, [&] { return Mapping::box_projection(std::move(lo), std::move(hi)); });
            }
            if (kind == "lincomb") {
                allow_only(doc, {"kind", "alpha", "beta", "base"}, path);
                const double alpha = number_field(doc, "alpha", path);
                const double beta = number_field(doc, "beta", path);
                Mapping base = parse(required(doc, "base", path), path + "/base");
                return wrap(path, [&] { return Mapping::linear_combination(alpha, beta, std::move(base)); });
            }
            if (kind == "composition") {
                allow_only(doc, {"kind", "stages"}, path);
                const json& stages_doc = required(doc, "stages", path);
                if (!stages_doc.is_array()) {
                    throw Error(ErrorCode::SchemaError, "\"stages\" must be an array", path + "/stages");
                }
                std::vector<Mapping> stages;
                for (std::size_t i = 0; i < stages_doc.size(); ++i) {
                    stages.push_back(parse(stages_doc[i], path + "/stages/" + std::to_string(i)));
                }
                return wrap(path + "/stages", [&] { return Mapping::composition(std::move(stages)); });
            }
            if (kind == "identity") {
                allow_only(doc, {"kind", "dim"}, path);
                const json& dim = required(doc, "dim", path);
                if (!dim.is_number_unsigned()) {
                    throw Error(ErrorCode::SchemaError, "\"dim\" must be a positive integer", path + "/dim");
                }
                return wrap(path + "/dim", [&] { return Mapping::identity(dim.get<std::size_t>()); });
            }
            throw Error(ErrorCode::SchemaError, "unknown mapping kind \"" + kind + "\"", path + "/kind");
        }();
        if (result.dimension() > max_dim_) {
            throw Error(ErrorCode::InvariantViolation,
                        "dimension " + std::to_string(result.dimension()) + " exceeds the cap of " +
                            std::to_string(max_dim_),
                        path_or_root(path));
        }
        return result;
    }

private:
    static std::string path_or_root(const std::string& path) { return path.empty() ? "/" : path; }

    template <class F>
    static Mapping wrap(const std::string& path, F&& make)
    {
        try {
            return make();
        } catch (const Error& e) {
            if (!e.path().empty()) throw;
            std::string message = e.what();
            const auto colon = message.find(": ");
            if (colon != std::string::npos) message = message.substr(colon + 2);
            throw Error(e.code(), message, path_or_root(path));
        }
    }

    static void allow_only(const json& doc, std::initializer_list<const char*> keys, const std::string& path)
    {
        for (const auto& item : doc.items()) {
            bool known = false;
            for (const char* key : keys) {
                if (item.key() == key) known = true;
            }
            if (!known) {
                throw Error(ErrorCode::SchemaError, "unexpected field \"" + item.key() + "\"",
                            path + "/" + item.key());
            }
        }
    }

    static const json& required(const json& doc, const char* key, const std::string& path)
    {
        auto it = doc.find(key);
        if (it == doc.end()) {
            throw Error(ErrorCode::SchemaError, std::string("missing field \"") + key + "\"",
                        path_or_root(path));
        }
        return *it;
    }

    static std::string string_field(const json& doc, const char* key, const std::string& path)
    {
        const json& value = required(doc, key, path);
        if (!value.is_string()) {
            throw Error(ErrorCode::SchemaError, std::string("\"") + key + "\" must be a string",
                        path + "/" + key);
        }
        return value.get<std::string>();
    }

    static double number_at(const json& value, const std::string& path)
    {
        if (!value.is_number()) {
            throw Error(ErrorCode::SchemaError, "expected a number", path);
        }
        const double out = value.get<double>();
        if (!std::isfinite(out)) {
            throw Error(ErrorCode::InvariantViolation, "number must be finite", path);
        }
        return out;
    }

    static double number_field(const json& doc, const char* key, const std::string& path)
    {
        return number_at(required(doc, key, path), path + "/" + key);
    }

    static Vector vector_at(const json& value, const std::string& path)
    {
        if (!value.is_array() || value.empty()) {
            throw Error(ErrorCode::SchemaError, "expected a non-empty array of numbers", path);
        }
        Vector out(value.size());
        for (std::size_t i = 0; i < value.size(); ++i) {
            out[i] = number_at(value[i], path + "/" + std::to_string(i));
        }
        return out;
    }

    static Vector vector_field(const json& doc, const char* key, const std::string& path)
    {
        return vector_at(required(doc, key, path), path + "/" + key);
    }

    static Matrix matrix_field(const json& doc, const char* key, const std::string& path)
    {
        const std::string here = path + "/" + key;
        const json& value = required(doc, key, path);
        if (!value.is_array() || value.empty()) {
            throw Error(ErrorCode::SchemaError, "expected a non-empty array of rows", here);
        }
        std::vector<std::vector<double>> rows;
        for (std::size_t r = 0; r < value.size(); ++r) {
            const std::string row_path = here + "/" + std::to_string(r);
            Vector row = vector_at(value[r], row_path);
            if (row.size() != value.size()) {
                throw Error(ErrorCode::InvariantViolation,
                            "matrix is not square: row has " + std::to_string(row.size()) +
                                " entries, expected " + std::to_string(value.size()),
                            row_path);
            }
            rows.push_back(row.values());
        }
        return Matrix::from_rows(rows);
    }

    std::size_t max_dim_;
};

}  // namespace

Mapping parse_mapping(const json& doc, std::size_t max_dim)
{
    return MappingParser(max_dim).parse(doc, "");
}

}  // namespace enrichfp
