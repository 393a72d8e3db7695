#include "enrichfp/serialize.hpp"

#include <array>
#include <charconv>
#include <ostream>

namespace enrichfp {

using nlohmann::json;

std::string format_double(double value)
{
    std::array<char, 32> buffer{};
    const auto [end, ec] = std::to_chars(buffer.data(), buffer.data() + buffer.size(), value);
    if (ec != std::errc{}) {
        return "nan";
    }
    return std::string(buffer.data(), end);
}

json to_json(const Vector& v)
{
    return v.values();
}

json to_json(const StopRule& stop)
{
    return {{"eps_abs", stop.eps_abs},
            {"eps_rel", stop.eps_rel},
            {"max_iter", stop.max_iter},
            {"norm_cap", stop.norm_cap}};
}

json to_json(const EnrichmentReport& report)
{
    return {{"kind", std::string(to_string(report.kind))},
            {"b", report.b},
            {"pairs_tested", report.pairs_tested},
            {"max_ratio", report.max_ratio},
            {"witness", {{"x", to_json(report.witness.x)}, {"y", to_json(report.witness.y)}}},
            {"passed", report.passed},
            {"slack", report.slack}};
}

json to_json(const SolveResult& result)
{
    json out = {{"fixed_point", to_json(result.fixed_point)},
                {"lambda", result.lambda},
                {"status", std::string(to_string(result.trace.status))},
                {"iterations", result.trace.iterations},
                {"residual_T", result.residual_T},
                {"condition", nullptr}};
    if (result.condition_verified) {
        out["condition"] = to_json(*result.condition_verified);
    }
    return out;
}

void write_trace_csv(std::ostream& out, const IterationTrace& trace)
{
    out << "iter,residual,ratio\n";
    for (std::size_t n = 0; n < trace.residuals.size(); ++n) {
        out << (n + 1) << ',' << format_double(trace.residuals[n]) << ',';
        if (n < trace.ratios.size() && trace.ratios[n]) {
            out << format_double(*trace.ratios[n]);
        }
        out << '\n';
    }
}

void write_iterates_csv(std::ostream& out, const IterationTrace& trace)
{
    const std::size_t dim = trace.final.size();
    out << "iter";
    for (std::size_t i = 0; i < dim; ++i) out << ",x" << i;
    out << '\n';
    for (std::size_t n = 0; n < trace.iterates.size(); ++n) {
        out << n;
        for (double value : trace.iterates[n]) out << ',' << format_double(value);
        out << '\n';
    }
}

}  // namespace enrichfp
