#include "concordance/json_io.hpp"

#include "concordance/error.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>

namespace concordance {

namespace {

[[noreturn]] void malformed(const std::string& message) { throw Error(ErrorCode::MalformedInput, message); }

const json& field(const json& j, const char* key) {
    if (!j.is_object()) malformed("expected a JSON object");
    const auto it = j.find(key);
    if (it == j.end()) malformed(std::string("missing field \"") + key + "\"");
    return *it;
}

int dimension_of(const json& j) {
    const auto& d = field(j, "d");
    if (!d.is_number_integer()) malformed("\"d\" must be an integer");
    const int v = d.get<int>();
    if (v < 1) throw Error(ErrorCode::OutOfRange, "dimension must be positive");
    if (v > dimension_cap()) {
        throw Error(ErrorCode::DimensionTooLarge, "dimension " + std::to_string(v) + " exceeds cap " + std::to_string(dimension_cap()));
    }
    return v;
}

std::vector<double> numbers(const json& j, const char* what) {
    if (!j.is_array()) malformed(std::string("\"") + what + "\" must be an array");
    std::vector<double> out;
    out.reserve(j.size());
    for (const auto& x : j) out.push_back(number_from_json(x));
    return out;
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
}

double parse_part(std::string_view s, bool& integral, std::int64_t& as_int) {
    s = trim(s);
    if (!s.empty() && s.front() == '+') s.remove_prefix(1);
    const char* end = s.data() + s.size();
    auto r = std::from_chars(s.data(), end, as_int);
    integral = r.ec == std::errc{} && r.ptr == end;
    if (integral) return static_cast<double>(as_int);
    double v = 0.0;
    auto rd = std::from_chars(s.data(), end, v);
    if (s.empty() || rd.ec != std::errc{} || rd.ptr != end) malformed("not a number: \"" + std::string(s) + "\"");
    return v;
}

std::string kind_of(const json& j) {
    if (!j.contains("kind")) return "kappa";
    const auto& k = j["kind"];
    if (!k.is_string() || (k != "kappa" && k != "tau")) malformed("\"kind\" must be \"kappa\" or \"tau\"");
    return k.get<std::string>();
}

double to_kappa(double value, int size, const std::string& kind) {
    if (kind == "kappa" || size == 0) return value;
    return tau_to_kappa(value, size);
}

json entries_to_json(int d, const std::vector<Mask>& labels, const std::vector<double>& values) {
    json l = json::array();
    for (Mask m : labels) l.push_back(to_json(SubsetIndex(d, m)));
    return {{"d", d}, {"labels", std::move(l)}, {"values", values}};
}

}  // namespace

double parse_number(std::string_view text) {
    text = trim(text);
    const auto slash = text.find('/');
    bool int_num = false, int_den = false;
    std::int64_t n = 0, d = 0;
    if (slash == std::string_view::npos) return parse_part(text, int_num, n);
    const double num = parse_part(text.substr(0, slash), int_num, n);
    const double den = parse_part(text.substr(slash + 1), int_den, d);
    if (den == 0.0) throw Error(ErrorCode::OutOfRange, "zero denominator in \"" + std::string(text) + "\"");
    if (int_num && int_den) {
        const Rational q(n, d);
        return q.value();
    }
    return num / den;
}

std::vector<double> parse_number_list(std::string_view text) {
    std::vector<double> out;
    if (trim(text).empty()) return out;
    std::size_t start = 0;
    while (true) {
        const auto comma = text.find(',', start);
        out.push_back(parse_number(text.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start)));
        if (comma == std::string_view::npos) break;
        start = comma + 1;
    }
    return out;
}

double number_from_json(const json& j) {
    if (j.is_number()) return j.get<double>();
    if (j.is_string()) return parse_number(j.get<std::string>());
    malformed("expected a number");
}

json to_json(const SubsetIndex& s) { return s.members(); }

SubsetIndex subset_from_json(int d, const json& j) {
    if (j.is_string()) return SubsetIndex::parse(d, j.get<std::string>());
    if (!j.is_array()) malformed("a label must be an array of members");
    std::vector<int> members;
    for (const auto& m : j) {
        if (!m.is_number_integer()) malformed("label members must be integers");
        members.push_back(m.get<int>());
    }
    return SubsetIndex::from_members(d, members);
}

json to_json(const EvenSignature& kappa) { return entries_to_json(kappa.dimension(), kappa.labels(), kappa.values()); }

json to_json(const FullSignature& kappa) { return entries_to_json(kappa.dimension(), kappa.labels(), kappa.values()); }

json to_json(const PartialSignature& partial) {
    json l = json::array();
    for (const auto& s : partial.labels()) l.push_back(to_json(s));
    return {{"d", partial.dimension()}, {"labels", std::move(l)}, {"values", partial.values()}};
}

PartialSignature partial_from_json(const json& j) {
    const int d = dimension_of(j);
    const auto kind = kind_of(j);
    std::vector<std::pair<SubsetIndex, double>> entries;
    if (j.contains("pairs")) {
        const auto v = numbers(j["pairs"], "pairs");
        if (v.size() != static_cast<std::size_t>(d * (d - 1) / 2)) malformed("\"pairs\" needs d(d-1)/2 values");
        std::size_t k = 0;
        for (int a = 1; a <= d; ++a)
            for (int b = a + 1; b <= d; ++b) entries.emplace_back(SubsetIndex::from_members(d, {a, b}), to_kappa(v[k++], 2, kind));
    } else {
        const auto& labels = field(j, "labels");
        const auto values = numbers(field(j, "values"), "values");
        if (!labels.is_array() || labels.size() != values.size()) malformed("\"labels\" and \"values\" must have equal length");
        for (std::size_t i = 0; i < values.size(); ++i) {
            const auto s = subset_from_json(d, labels[i]);
            entries.emplace_back(s, to_kappa(values[i], s.size(), kind));
        }
    }
    return PartialSignature::from_entries(d, std::move(entries));
}

EvenSignature even_signature_from_json(const json& j) {
    const int d = dimension_of(j);
    const auto kind = kind_of(j);
    const auto values = numbers(field(j, "values"), "values");
    const auto order = even_subset_masks(d);
    if (values.size() != order.size()) {
        throw Error(ErrorCode::InvalidSignature, "an even signature of dimension " + std::to_string(d) + " has " +
                                                     std::to_string(order.size()) + " entries");
    }
    std::vector<double> out(order.size(), -1.0);
    if (!j.contains("labels")) {
        for (std::size_t i = 0; i < order.size(); ++i) out[i] = to_kappa(values[i], std::popcount(order[i]), kind);
    } else {
        const auto& labels = j["labels"];
        if (!labels.is_array() || labels.size() != values.size()) malformed("\"labels\" and \"values\" must have equal length");
        for (std::size_t i = 0; i < values.size(); ++i) {
            const auto s = subset_from_json(d, labels[i]);
            const auto pos = std::find(order.begin(), order.end(), s.mask());
            if (pos == order.end()) throw Error(ErrorCode::InvalidLabel, "label " + s.to_string() + " is not of even size");
            auto& slot = out[static_cast<std::size_t>(pos - order.begin())];
            if (slot >= 0) throw Error(ErrorCode::InvalidLabel, "label " + s.to_string() + " repeated");
            slot = to_kappa(values[i], s.size(), kind);
        }
    }
    return EvenSignature(d, std::move(out));
}

json to_json(const MixtureWeights& w) { return {{"d", w.dimension()}, {"w", w.values()}}; }

MixtureWeights weights_from_json(const json& j) {
    const int d = dimension_of(j);
    return MixtureWeights(d, numbers(field(j, "w"), "w"));
}

json to_json(const FeasibilityCertificate& c) {
    json out{{"feasible", c.feasible}, {"phase_one_objective", c.phase_one_objective}};
    out["witness"] = c.witness ? to_json(*c.witness) : json(nullptr);
    out["reason"] = c.infeasibility_reason ? json(*c.infeasibility_reason) : json(nullptr);
    return out;
}

json to_json(const BoundsReport& b, const std::vector<std::vector<double>>* vertices) {
    json t = json::array();
    for (const auto& s : b.targets) t.push_back(to_json(s));
    json out{{"targets", std::move(t)}, {"lower", b.lower}, {"upper", b.upper}};
    if (vertices) out["vertices"] = *vertices;
    return out;
}

json to_json(const WeightPolytope& p) {
    json v = json::array();
    int d = 0;
    for (const auto& w : p.vertices) {
        v.push_back(w.values());
        d = w.dimension();
    }
    return {{"d", d}, {"rank", p.rank}, {"vertices", std::move(v)}};
}

json to_json(const SkeletalSignature& s) { return {{"d", s.d}, {"k", s.k}}; }

SkeletalSignature skeletal_from_json(const json& j) { return make_skeletal(dimension_of(j), numbers(field(j, "k"), "k")); }

json to_json(const SkeletalSolution& s, int d) {
    return {{"d", d}, {"v", s.v}, {"raw", s.raw}, {"attainable", s.attainable}};
}

json to_json(const EmpiricalSignature& e, int n) {
    return {{"signature", to_json(e.full.even())},
            {"full", to_json(e.full)},
            {"weights", to_json(e.weights)},
            {"n", n},
            {"n_pairs", e.n_pairs},
            {"tie_adjusted", e.tie_adjusted}};
}

Eigen::MatrixXd matrix_from_json(const json& j) {
    if (!j.is_array() || j.empty()) malformed("a matrix must be a non-empty array of rows");
    const auto rows = static_cast<Eigen::Index>(j.size());
    Eigen::MatrixXd m(rows, rows);
    for (Eigen::Index r = 0; r < rows; ++r) {
        const auto row = numbers(j[static_cast<std::size_t>(r)], "row");
        if (static_cast<Eigen::Index>(row.size()) != rows) throw Error(ErrorCode::InvalidMatrix, "matrix must be square");
        for (Eigen::Index c = 0; c < rows; ++c) m(r, c) = row[static_cast<std::size_t>(c)];
    }
    return m;
}

Eigen::MatrixXd rows_from_json(const json& j) {
    if (!j.is_array() || j.empty()) malformed("data must be a non-empty array of rows");
    const auto rows = static_cast<Eigen::Index>(j.size());
    Eigen::MatrixXd m;
    for (Eigen::Index r = 0; r < rows; ++r) {
        const auto row = numbers(j[static_cast<std::size_t>(r)], "row");
        if (r == 0) m.resize(rows, static_cast<Eigen::Index>(row.size()));
        if (static_cast<Eigen::Index>(row.size()) != m.cols()) throw Error(ErrorCode::RaggedRows, "rows have different lengths");
        for (Eigen::Index c = 0; c < m.cols(); ++c) m(r, c) = row[static_cast<std::size_t>(c)];
    }
    return m;
}

json matrix_to_json(const Eigen::MatrixXd& m) {
    json out = json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        json row = json::array();
        for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
        out.push_back(std::move(row));
    }
    return out;
}

CorrelationMatrix correlation_from_json(const json& j) {
    if (j.is_array()) {
        const auto m = matrix_from_json(j);
        if (m.rows() > dimension_cap()) throw Error(ErrorCode::DimensionTooLarge, "dimension exceeds cap " + std::to_string(dimension_cap()));
        return CorrelationMatrix(m);
    }
    if (j.is_object() && j.contains("matrix")) return correlation_from_json(j["matrix"]);
    return CorrelationMatrix::from_pairs(dimension_of(j), numbers(field(j, "rho"), "rho"));
}

json to_json(const EllipticalSignature& s) {
    json se = json::array(), method = json::array();
    for (const auto& e : s.entries) {
        se.push_back(e.std_error);
        method.push_back(std::string(to_string(e.method)));
    }
    return {{"signature", to_json(s.raw)},
            {"projected", to_json(s.projected)},
            {"weights", to_json(s.weights)},
            {"std_errors", std::move(se)},
            {"method", std::move(method)},
            {"samples", s.samples}};
}

json to_json(const TLimitWeights& t) {
    return {{"weights", to_json(t.weights)},
            {"std_errors", t.std_errors},
            {"method", t.mode == TLimitMode::Analytic ? "analytic" : "monte_carlo"},
            {"samples", t.samples}};
}

json to_json(const EllipticalVerdict& v) {
    return {{"attainable", v.attainable}, {"min_eigenvalue", v.min_eigenvalue}, {"back_transform", matrix_to_json(v.back_transform)}};
}

json to_json(const DiagnosticReport& r) {
    json diags = json::array();
    for (const auto& x : r.diagonals) {
        diags.push_back({{"k", x.k}, {"rows", x.rows}, {"tested", x.tested}, {"statistic", x.ks.statistic}, {"p_value", x.ks.p_value}});
    }
    return {{"d", r.d},
            {"n", r.n},
            {"on_diagonal_fraction", r.on_diagonal_fraction},
            {"diagonals", std::move(diags)},
            {"uniformity_tested", r.uniformity_tested},
            {"level", r.level},
            {"min_p_value", r.min_p_value},
            {"pass", r.pass}};
}

McConfig mc_from_json(const json& j, McConfig defaults) {
    if (j.is_null()) return defaults;
    if (!j.is_object()) malformed("Monte Carlo settings must be an object");
    auto unsigned_field = [&](const char* key, auto& target) {
        if (!j.contains(key)) return;
        const auto& v = j[key];
        if (!v.is_number_integer() || v.get<std::int64_t>() < 0) malformed(std::string("\"") + key + "\" must be a nonnegative integer");
        target = static_cast<std::remove_reference_t<decltype(target)>>(v.get<std::uint64_t>());
    };
    unsigned_field("samples", defaults.samples);
    unsigned_field("seed", defaults.seed);
    unsigned_field("threads", defaults.threads);
    if (j.contains("antithetic")) {
        if (!j["antithetic"].is_boolean()) malformed("\"antithetic\" must be a boolean");
        defaults.antithetic = j["antithetic"].get<bool>();
    }
    return defaults;
}

}  // namespace concordance
