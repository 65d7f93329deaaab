#include "concordance/estimation.hpp"

#include "concordance/error.hpp"
#include "concordance/random.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <thread>

namespace concordance {

namespace {

struct PairPattern {
    Mask greater = 0;  // coordinates where the first row exceeds the second
    Mask tied = 0;
};

PairPattern compare_rows(const Eigen::MatrixXd& x, Eigen::Index a, Eigen::Index b) {
    PairPattern p;
    for (Eigen::Index c = 0; c < x.cols(); ++c) {
        const double u = x(a, c), v = x(b, c);
        if (u > v) p.greater |= Mask{1} << c;
        else if (u == v) p.tied |= Mask{1} << c;
    }
    return p;
}

void accumulate(const PairPattern& p, int d, double weight, std::vector<double>& counts) {
    if (p.tied == 0) {
        counts[canonical_column(p.greater, d)] += weight;
        return;
    }
    const double share = weight / static_cast<double>(std::uint64_t{1} << std::popcount(p.tied));
    // Every submask of the tied coordinates is one resolution.
    Mask t = p.tied;
    while (true) {
        counts[canonical_column(p.greater | t, d)] += share;
        if (t == 0) break;
        t = (t - 1) & p.tied;
    }
}

// Without ties every pair has one pattern; masks for a row against all later rows
// are built column by column, then histogrammed by raw mask and folded at the end.
void count_tie_free(const Eigen::MatrixXd& x, int row_begin, int row_end, std::vector<double>& counts) {
    const auto n = x.rows();
    const int d = static_cast<int>(x.cols());
    std::vector<std::uint64_t> raw(std::size_t{1} << d, 0);
    std::vector<std::uint32_t> masks(static_cast<std::size_t>(n));
    for (int a = row_begin; a < row_end; ++a) {
        const auto len = static_cast<std::size_t>(n - a - 1);
        std::fill_n(masks.begin(), len, 0u);
        for (int c = 0; c < d; ++c) {
            const double* col = x.col(c).data() + a + 1;
            const double v = x(a, c);
            const std::uint32_t bit = 1u << c;
            for (std::size_t b = 0; b < len; ++b) masks[b] |= col[b] < v ? bit : 0u;
        }
        for (std::size_t b = 0; b < len; ++b) ++raw[masks[b]];
    }
    for (std::size_t m = 0; m < raw.size(); ++m)
        if (raw[m]) counts[canonical_column(static_cast<Mask>(m), d)] += static_cast<double>(raw[m]);
}

std::vector<double> count_patterns(const SampleMatrix& data, bool split_ties, const EstimationOptions& opt) {
    const int n = data.n(), d = data.d();
    const auto& x = data.values();
    const std::size_t width = extremal_count(d);

    const bool fast = d <= 16 && !data.has_ties();
    auto work = [&](int row_begin, int row_end, std::vector<double>& counts) {
        if (fast) {
            count_tie_free(x, row_begin, row_end, counts);
            return;
        }
        for (int a = row_begin; a < row_end; ++a)
            for (int b = a + 1; b < n; ++b) {
                const auto p = compare_rows(x, a, b);
                if (p.tied != 0 && !split_ties) {
                    throw Error(ErrorCode::TiesPresent, "ties present; use the tie-splitting estimator",
                                "rows " + std::to_string(a + 1) + " and " + std::to_string(b + 1));
                }
                accumulate(p, d, 1.0, counts);
            }
    };

    unsigned threads = opt.threads ? opt.threads : std::max(1u, std::thread::hardware_concurrency());
    if (n <= opt.parallel_threshold || threads == 1) {
        std::vector<double> counts(width, 0.0);
        work(0, n, counts);
        return counts;
    }

    // Row blocks with roughly equal pair counts; partial counts are summed in block order.
    std::vector<int> bounds{0};
    const double total = 0.5 * n * (n - 1.0);
    double acc = 0.0;
    for (int a = 0; a < n; ++a) {
        acc += n - 1 - a;
        if (acc >= total * static_cast<double>(bounds.size()) / threads && static_cast<unsigned>(bounds.size()) < threads) bounds.push_back(a + 1);
    }
    bounds.push_back(n);
    const std::size_t blocks = bounds.size() - 1;
    std::vector<std::vector<double>> partial(blocks, std::vector<double>(width, 0.0));
    std::vector<std::exception_ptr> errors(blocks);
    std::vector<std::thread> pool;
    for (std::size_t i = 0; i < blocks; ++i) {
        pool.emplace_back([&, i] {
            try {
                work(bounds[i], bounds[i + 1], partial[i]);
            } catch (...) {
                errors[i] = std::current_exception();
            }
        });
    }
    for (auto& t : pool) t.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
    std::vector<double> counts(width, 0.0);
    for (const auto& part : partial)
        for (std::size_t k = 0; k < width; ++k) counts[k] += part[k];
    return counts;
}

EmpiricalSignature finish(const SampleMatrix& data, std::vector<double> counts, bool tie_adjusted) {
    const int n = data.n(), d = data.d();
    EmpiricalSignature out;
    out.n_pairs = static_cast<std::uint64_t>(n) * static_cast<std::uint64_t>(n - 1) / 2;
    const double pairs = static_cast<double>(out.n_pairs);
    std::vector<double> w(counts.size());
    for (std::size_t k = 0; k < w.size(); ++k) w[k] = counts[k] / pairs;
    out.weights = MixtureWeights(d, std::move(w));
    out.full = extend_to_full(signature_from_weights(out.weights));
    out.tie_adjusted = tie_adjusted;
    out.pattern_counts = std::move(counts);
    return out;
}

void check_rows(const SampleMatrix& data) {
    if (data.n() < 2) throw Error(ErrorCode::TooFewRows, "at least two observations are required");
    if (data.d() > dimension_cap()) {
        throw Error(ErrorCode::DimensionTooLarge, "dimension " + std::to_string(data.d()) + " exceeds cap " + std::to_string(dimension_cap()));
    }
}

// ---- CSV -------------------------------------------------------------------

std::string trim(std::string_view s) {
    std::size_t a = 0, b = s.size();
    while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
    while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
    return std::string(s.substr(a, b - a));
}

// One RFC 4180 record; returns false at end of input.
bool read_record(std::istream& in, char delim, std::vector<std::string>& fields, int& line) {
    fields.clear();
    std::string field;
    bool quoted = false, any = false, was_quoted = false;
    int c;
    while ((c = in.get()) != EOF) {
        any = true;
        if (quoted) {
            if (c == '"') {
                if (in.peek() == '"') {
                    field.push_back('"');
                    in.get();
                } else {
                    quoted = false;
                }
            } else {
                if (c == '\n') ++line;
                field.push_back(static_cast<char>(c));
            }
        } else if (c == '"') {
            if (!trim(field).empty()) throw Error(ErrorCode::MalformedCsv, "stray quote", "line " + std::to_string(line));
            field.clear();
            quoted = was_quoted = true;
        } else if (c == delim) {
            fields.push_back(was_quoted ? field : trim(field));
            field.clear();
            was_quoted = false;
        } else if (c == '\n' || c == '\r') {
            if (c == '\r' && in.peek() == '\n') in.get();
            ++line;
            break;
        } else {
            field.push_back(static_cast<char>(c));
        }
    }
    if (quoted) throw Error(ErrorCode::MalformedCsv, "unterminated quoted field", "line " + std::to_string(line));
    if (!any) return false;
    fields.push_back(was_quoted ? field : trim(field));
    return true;
}

std::optional<double> parse_number(const std::string& s) {
    if (s.empty()) return std::nullopt;
    const char* first = s.data();
    if (*first == '+') ++first;
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(first, s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size()) return std::nullopt;
    return v;
}

bool blank(const std::vector<std::string>& fields) {
    return std::all_of(fields.begin(), fields.end(), [](const std::string& f) { return f.empty(); });
}

}  // namespace

SampleMatrix::SampleMatrix(Eigen::MatrixXd values, std::vector<std::string> column_names)
    : values_(std::move(values)), names_(std::move(column_names)) {
    if (values_.rows() < 2) throw Error(ErrorCode::TooFewRows, "at least two observations are required");
    if (values_.cols() < 2) throw Error(ErrorCode::OutOfRange, "at least two variables are required");
    if (values_.cols() > kMaxSubsetDimension) throw Error(ErrorCode::DimensionTooLarge, "too many variables");
    if (!values_.allFinite()) throw Error(ErrorCode::MalformedCsv, "sample contains non-finite values");
    if (!names_.empty() && static_cast<Eigen::Index>(names_.size()) != values_.cols()) {
        throw Error(ErrorCode::OutOfRange, "column name count does not match the number of columns");
    }
}

bool SampleMatrix::has_ties() const {
    for (Eigen::Index c = 0; c < values_.cols(); ++c) {
        std::vector<double> col(values_.col(c).data(), values_.col(c).data() + values_.rows());
        std::sort(col.begin(), col.end());
        if (std::adjacent_find(col.begin(), col.end()) != col.end()) return true;
    }
    return false;
}

Eigen::MatrixXi SampleMatrix::tie_counts() const {
    const auto d = values_.cols();
    Eigen::MatrixXi t = Eigen::MatrixXi::Zero(d, d);
    for (Eigen::Index a = 0; a < values_.rows(); ++a)
        for (Eigen::Index b = a + 1; b < values_.rows(); ++b)
            for (Eigen::Index i = 0; i < d; ++i) {
                if (values_(a, i) != values_(b, i)) continue;
                for (Eigen::Index j = i; j < d; ++j)
                    if (values_(a, j) == values_(b, j)) ++t(i, j);
            }
    return t;
}

EmpiricalSignature empirical_signature(const SampleMatrix& data, const EstimationOptions& options) {
    check_rows(data);
    return finish(data, count_patterns(data, false, options), false);
}

EmpiricalSignature empirical_signature_ties(const SampleMatrix& data, const EstimationOptions& options) {
    check_rows(data);
    return finish(data, count_patterns(data, true, options), data.has_ties());
}

BootstrapResult bootstrap_standard_errors(const SampleMatrix& data, int resamples, std::uint64_t seed) {
    check_rows(data);
    if (resamples < 2) throw Error(ErrorCode::OutOfRange, "at least two bootstrap resamples are required");
    const int n = data.n(), d = data.d();
    const auto& x = data.values();
    const std::size_t width = extremal_count(d);
    std::vector<Eigen::VectorXd> sig, wts;
    for (int r = 0; r < resamples; ++r) {
        RandomStream rng(seed, static_cast<std::uint64_t>(r));
        std::vector<int> idx(static_cast<std::size_t>(n));
        for (auto& i : idx) i = static_cast<int>(rng.below(static_cast<std::uint64_t>(n)));
        std::vector<double> counts(width, 0.0);
        double used = 0.0;
        for (int a = 0; a < n; ++a)
            for (int b = a + 1; b < n; ++b) {
                const int ia = idx[static_cast<std::size_t>(a)], ib = idx[static_cast<std::size_t>(b)];
                if (ia == ib) continue;
                accumulate(compare_rows(x, ia, ib), d, 1.0, counts);
                used += 1.0;
            }
        if (used == 0.0) continue;
        for (auto& c : counts) c /= used;
        const MixtureWeights w(d, counts);
        const auto s = signature_from_weights(w);
        sig.push_back(Eigen::Map<const Eigen::VectorXd>(s.values().data(), static_cast<Eigen::Index>(s.values().size())));
        wts.push_back(Eigen::Map<const Eigen::VectorXd>(counts.data(), static_cast<Eigen::Index>(width)));
    }
    auto spread = [](const std::vector<Eigen::VectorXd>& xs) {
        Eigen::VectorXd mean = Eigen::VectorXd::Zero(xs.front().size());
        for (const auto& v : xs) mean += v;
        mean /= static_cast<double>(xs.size());
        Eigen::VectorXd ss = Eigen::VectorXd::Zero(mean.size());
        for (const auto& v : xs) ss += (v - mean).cwiseAbs2();
        ss /= static_cast<double>(xs.size() - 1);
        const Eigen::VectorXd sd = ss.cwiseSqrt();
        return std::vector<double>(sd.data(), sd.data() + sd.size());
    };
    BootstrapResult out;
    out.resamples = static_cast<int>(sig.size());
    if (sig.size() < 2) throw Error(ErrorCode::TooFewRows, "bootstrap resamples degenerate");
    out.signature_se = spread(sig);
    out.weights_se = spread(wts);
    return out;
}

SampleMatrix ingest_csv(std::istream& in, const CsvOptions& options) {
    std::vector<std::vector<std::string>> records;
    std::vector<std::string> fields;
    int line = 1;
    while (read_record(in, options.delimiter, fields, line)) {
        if (blank(fields)) continue;
        records.push_back(fields);
    }
    if (records.empty()) throw Error(ErrorCode::MalformedCsv, "no data rows");

    bool header = false;
    if (options.header) {
        header = *options.header;
    } else {
        header = std::any_of(records.front().begin(), records.front().end(),
                             [](const std::string& f) { return !parse_number(f).has_value(); });
    }
    std::vector<std::string> names;
    if (header) {
        names = records.front();
        records.erase(records.begin());
    }
    const std::size_t width = header ? names.size() : (records.empty() ? 0 : records.front().size());
    for (std::size_t r = 0; r < records.size(); ++r) {
        if (records[r].size() != width) {
            throw Error(ErrorCode::RaggedRows, "row has " + std::to_string(records[r].size()) + " fields, expected " + std::to_string(width),
                        "data row " + std::to_string(r + 1));
        }
    }

    std::vector<std::size_t> keep;
    if (options.columns.empty()) {
        for (std::size_t c = 0; c < width; ++c) keep.push_back(c);
    } else {
        for (const auto& sel : options.columns) {
            auto it = std::find(names.begin(), names.end(), sel);
            if (it != names.end()) {
                keep.push_back(static_cast<std::size_t>(it - names.begin()));
                continue;
            }
            const auto pos = parse_number(sel);
            if (!pos || *pos < 1 || *pos > static_cast<double>(width) || *pos != std::floor(*pos)) {
                throw Error(ErrorCode::MalformedCsv, "unknown column '" + sel + "'");
            }
            keep.push_back(static_cast<std::size_t>(*pos) - 1);
        }
    }

    Eigen::MatrixXd values(static_cast<Eigen::Index>(records.size()), static_cast<Eigen::Index>(keep.size()));
    for (std::size_t r = 0; r < records.size(); ++r)
        for (std::size_t j = 0; j < keep.size(); ++j) {
            const auto& text = records[r][keep[j]];
            const auto v = parse_number(text);
            if (!v || !std::isfinite(*v)) {
                throw Error(ErrorCode::MalformedCsv, "non-numeric field '" + text + "'",
                            "data row " + std::to_string(r + 1) + ", column " + std::to_string(keep[j] + 1));
            }
            values(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(j)) = *v;
        }
    std::vector<std::string> kept_names;
    if (header)
        for (auto c : keep) kept_names.push_back(names[c]);

    if (options.log_returns) {
        if ((values.array() <= 0.0).any()) throw Error(ErrorCode::NonPositivePrice, "log returns need strictly positive prices");
        if (values.rows() < 3) throw Error(ErrorCode::TooFewRows, "log returns need at least three price rows");
        const auto m = values.rows() - 1;
        Eigen::MatrixXd ret = (values.bottomRows(m).array() / values.topRows(m).array()).log().matrix();
        return SampleMatrix(std::move(ret), std::move(kept_names));
    }
    return SampleMatrix(std::move(values), std::move(kept_names));
}

SampleMatrix ingest_csv_file(const std::string& path, const CsvOptions& options) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::MalformedCsv, "cannot open '" + path + "'");
    return ingest_csv(in, options);
}

}  // namespace concordance
