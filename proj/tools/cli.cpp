#include "concordance/error.hpp"
#include "concordance/json_io.hpp"
#include "concordance/reproduce.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

using namespace concordance;

namespace {

constexpr int kExitValidation = 2;
constexpr int kExitInfeasible = 3;

/// Raised for a verdict rather than a failure; the result has already been written.
struct Verdict {
    std::string message;
};

struct Common {
    int d = 0;
    std::string signature;
    std::string pairs;
    std::vector<std::string> sets;
    std::vector<std::string> targets;
    std::string kind = "kappa";
    std::uint64_t samples = 1'000'000;
    std::uint64_t seed = 0;
    std::string out;
    std::string format = "json";
    bool pretty = false;
};

std::string read_text(const std::string& path) {
    if (path == "-") {
        std::ostringstream os;
        os << std::cin.rdbuf();
        return os.str();
    }
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::MalformedInput, "cannot read " + path);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

json read_json(const std::string& path) {
    try {
        return json::parse(read_text(path));
    } catch (const json::parse_error& e) {
        throw Error(ErrorCode::MalformedInput, path + ": " + e.what());
    }
}

void emit(const Common& c, const std::string& text) {
    if (c.out.empty() || c.out == "-") {
        std::cout << text;
        if (!text.empty() && text.back() != '\n') std::cout << '\n';
        return;
    }
    std::ofstream f(c.out, std::ios::binary);
    if (!f) throw Error(ErrorCode::MalformedInput, "cannot write " + c.out);
    f << text;
    if (!text.empty() && text.back() != '\n') f << '\n';
}

void emit(const Common& c, const json& j) { emit(c, c.pretty ? j.dump(2) : j.dump()); }

std::string csv_row(const std::vector<double>& v) {
    std::ostringstream os;
    os.precision(17);
    for (std::size_t i = 0; i < v.size(); ++i) os << (i ? "," : "") << v[i];
    return os.str();
}

std::string label_text(const SubsetIndex& s) {
    std::string out;
    for (int m : s.members()) out += (out.empty() ? "" : "-") + std::to_string(m);
    return out;
}

bool csv(const Common& c) { return c.format == "csv"; }

void require_dimension(const Common& c) {
    if (c.d < 2) throw Error(ErrorCode::OutOfRange, "--d must be at least 2");
}

double as_kappa(double value, int size, const std::string& kind) {
    return kind == "tau" ? tau_to_kappa(value, size) : value;
}

PartialSignature read_partial(const Common& c) {
    PartialSignature p;
    if (!c.signature.empty()) {
        p = partial_from_json(read_json(c.signature));
    } else {
        require_dimension(c);
        if (!c.pairs.empty()) {
            json j{{"d", c.d}, {"pairs", parse_number_list(c.pairs)}, {"kind", c.kind}};
            p = partial_from_json(j);
        } else {
            p = PartialSignature::from_entries(c.d, {});
        }
    }
    const int d = p.dimension();
    for (const auto& entry : c.sets) {
        const auto eq = entry.find('=');
        if (eq == std::string::npos) throw Error(ErrorCode::MalformedInput, "--set expects LABEL=VALUE, got " + entry);
        const auto label = SubsetIndex::parse(d, entry.substr(0, eq));
        const double v = parse_number(entry.substr(eq + 1));
        p = p.with(label, as_kappa(v, label.size(), c.kind));
    }
    return p;
}

std::vector<SubsetIndex> read_targets(const Common& c, const PartialSignature& p) {
    if (c.targets.empty()) return p.missing_labels();
    std::vector<SubsetIndex> out;
    for (const auto& t : c.targets) out.push_back(SubsetIndex::parse(p.dimension(), t));
    return out;
}

CorrelationMatrix read_correlation(const Common& c, const std::string& matrix, const std::string& rho) {
    if (!matrix.empty()) return correlation_from_json(read_json(matrix));
    require_dimension(c);
    if (rho.empty()) throw Error(ErrorCode::MalformedInput, "give --matrix FILE or --d with --rho LIST");
    return CorrelationMatrix::from_pairs(c.d, parse_number_list(rho));
}

McConfig mc(const Common& c) {
    McConfig m;
    m.samples = c.samples;
    m.seed = c.seed;
    return m;
}

void add_common(CLI::App* sub, Common& c, bool partial, bool monte_carlo) {
    sub->add_option("--d", c.d, "Dimension");
    sub->add_option("--out", c.out, "Output file (default stdout)");
    sub->add_option("--format", c.format, "Output format")->check(CLI::IsMember({"json", "csv"}))->capture_default_str();
    sub->add_flag("--pretty", c.pretty, "Indent JSON output");
    if (partial) {
        sub->add_option("--signature", c.signature, "Signature JSON file ('-' for stdin)");
        sub->add_option("--pairs", c.pairs, "Pairwise values in lexicographic pair order; fractions allowed");
        sub->add_option("--set", c.sets, "Extra entry LABEL=VALUE, e.g. 1,2,3,4=0.4");
        sub->add_option("--kind", c.kind, "Values are concordance probabilities or Kendall's tau")
            ->check(CLI::IsMember({"kappa", "tau"}))
            ->capture_default_str();
        sub->add_option("--target", c.targets, "Target label, e.g. 1,2,3,4 (repeatable)");
    }
    if (monte_carlo) {
        sub->add_option("--mc-samples", c.samples, "Monte Carlo samples")->capture_default_str();
        sub->add_option("--seed", c.seed, "Random seed")->capture_default_str();
    }
}

int run(int argc, char** argv) {
    CLI::App app{"Concordance signatures: attainability, bounds, estimation and elliptical families"};
    app.require_subcommand(1);
    int cap = dimension_cap();
    app.add_option("--dimension-cap", cap, "Largest dimension accepted for dense work")->capture_default_str();

    Common c;
    std::function<void()> action;

    auto* amatrix = app.add_subcommand("amatrix", "Print the coefficient matrix A_d");
    add_common(amatrix, c, false, false);
    amatrix->callback([&] {
        action = [&] {
            require_dimension(c);
            const Eigen::MatrixXd A = build_A_matrix(c.d).dense();
            if (csv(c)) {
                std::string text;
                for (Eigen::Index i = 0; i < A.rows(); ++i) {
                    std::vector<double> row;
                    for (Eigen::Index j = 0; j < A.cols(); ++j) row.push_back(A(i, j));
                    text += csv_row(row) + "\n";
                }
                emit(c, text);
            } else {
                json rows = json::array();
                for (Eigen::Index i = 0; i < A.rows(); ++i) {
                    json row = json::array();
                    for (Eigen::Index j = 0; j < A.cols(); ++j) row.push_back(static_cast<int>(A(i, j)));
                    rows.push_back(row);
                }
                emit(c, rows);
            }
        };
    });

    std::string values;
    auto* solve = app.add_subcommand("solve", "Mixture weights of a complete even signature");
    add_common(solve, c, false, false);
    solve->add_option("--signature", c.signature, "Even signature JSON file ('-' for stdin)");
    solve->add_option("--values", values, "Even signature in graded order, starting with 1");
    solve->add_option("--kind", c.kind, "kappa or tau")->check(CLI::IsMember({"kappa", "tau"}));
    solve->callback([&] {
        action = [&] {
            EvenSignature kappa;
            if (!c.signature.empty()) {
                kappa = even_signature_from_json(read_json(c.signature));
            } else {
                require_dimension(c);
                kappa = even_signature_from_json({{"d", c.d}, {"values", parse_number_list(values)}, {"kind", c.kind}});
            }
            const auto raw = solve_signature_system(kappa.dimension(), kappa.values());
            const bool ok = std::all_of(raw.begin(), raw.end(), [](double w) { return w >= -kNegativityTolerance; });
            if (csv(c)) {
                std::string text = "k,w\n";
                for (std::size_t k = 0; k < raw.size(); ++k) text += std::to_string(k + 1) + "," + csv_row({raw[k]}) + "\n";
                emit(c, text);
            } else {
                json out = ok ? to_json(weights_from_signature(kappa)) : json{{"d", kappa.dimension()}, {"w", raw}};
                out["attainable"] = ok;
                emit(c, out);
            }
            if (!ok) throw Verdict{"not attainable: the solved weights have a negative entry"};
        };
    });

    std::string weights_file, weights_list;
    bool full = false;
    auto* signature = app.add_subcommand("signature", "Concordance signature of an extremal mixture");
    add_common(signature, c, false, false);
    signature->add_option("--weights", weights_file, "Weights JSON file ('-' for stdin)");
    signature->add_option("--w", weights_list, "Weights, 2^(d-1) values");
    signature->add_flag("--full", full, "Include odd subsets");
    auto read_weights = [&] {
        if (!weights_file.empty()) return weights_from_json(read_json(weights_file));
        require_dimension(c);
        return MixtureWeights(c.d, parse_number_list(weights_list));
    };
    signature->callback([&] {
        action = [&] {
            const auto kappa = signature_from_weights(read_weights());
            const auto write = [&](const std::vector<Mask>& labels, const std::vector<double>& v, const json& j) {
                if (!csv(c)) return emit(c, j);
                std::string text = "label,kappa\n";
                for (std::size_t i = 0; i < v.size(); ++i)
                    text += label_text(SubsetIndex(kappa.dimension(), labels[i])) + "," + csv_row({v[i]}) + "\n";
                emit(c, text);
            };
            if (full) {
                const auto f = extend_to_full(kappa);
                write(f.labels(), f.values(), to_json(f));
            } else {
                write(kappa.labels(), kappa.values(), to_json(kappa));
            }
        };
    });

    auto* check = app.add_subcommand("check", "Decide whether a partial signature is attainable");
    add_common(check, c, true, false);
    check->callback([&] {
        action = [&] {
            const auto cert = check_attainable(read_partial(c));
            emit(c, to_json(cert));
            if (!cert.feasible) throw Verdict{"not attainable: " + cert.infeasibility_reason.value_or("no feasible weights")};
        };
    });

    bool with_vertices = false;
    std::string collective;
    auto* bounds = app.add_subcommand("bounds", "Sharp bounds on unspecified concordance probabilities");
    add_common(bounds, c, true, false);
    bounds->add_flag("--vertices", with_vertices, "Also list the projected polytope vertices");
    bounds->add_option("--collective", collective, "Add the collectively smallest or largest completion")
        ->check(CLI::IsMember({"smallest", "largest"}));
    bounds->callback([&] {
        action = [&] {
            const auto p = read_partial(c);
            const auto targets = read_targets(c, p);
            if (targets.empty()) throw Error(ErrorCode::EmptyTargets, "the signature is complete; nothing to bound");
            const auto b = bound_missing(p, targets);
            if (csv(c)) {
                std::string text = "label,lower,upper\n";
                for (std::size_t i = 0; i < targets.size(); ++i)
                    text += label_text(targets[i]) + "," + csv_row({b.lower[i], b.upper[i]}) + "\n";
                return emit(c, text);
            }
            std::vector<std::vector<double>> projected;
            if (with_vertices) projected = project_vertices(enumerate_vertices(p), targets);
            json out = to_json(b, with_vertices ? &projected : nullptr);
            std::vector<double> lt, ut;
            for (std::size_t i = 0; i < targets.size(); ++i) {
                lt.push_back(kappa_to_tau(b.lower[i], targets[i].size()));
                ut.push_back(kappa_to_tau(b.upper[i], targets[i].size()));
            }
            out["lower_tau"] = lt;
            out["upper_tau"] = ut;
            if (!collective.empty()) {
                const auto e = collective_extremes(p, targets, collective == "smallest" ? Extreme::Smallest : Extreme::Largest);
                out["collective"] = {{"which", collective}, {"values", e.values}, {"weights", to_json(e.weights)},
                                     {"objective", e.objective}, {"duality_gap", e.duality_gap}};
            }
            emit(c, out);
        };
    });

    auto* vertices = app.add_subcommand("vertices", "Vertices of the weight polytope");
    add_common(vertices, c, true, false);
    vertices->callback([&] {
        action = [&] {
            const auto p = read_partial(c);
            EnumerationOptions opts;
            opts.dimension_cap = std::max(opts.dimension_cap, cap);
            const auto poly = enumerate_vertices(p, opts);
            if (csv(c)) {
                std::string text;
                for (const auto& v : poly.vertices) text += csv_row(v.values()) + "\n";
                return emit(c, text);
            }
            json out = to_json(poly);
            if (!c.targets.empty()) {
                const auto targets = read_targets(c, p);
                json t = json::array();
                for (const auto& s : targets) t.push_back(to_json(s));
                out["targets"] = t;
                out["projection"] = project_vertices(poly, targets);
            }
            emit(c, out);
        };
    });

    std::string csv_path, columns;
    bool header = false, no_header = false, log_returns = false, ties = false;
    int resamples = 0;
    auto* estimate = app.add_subcommand("estimate", "Empirical concordance signature of a data file");
    add_common(estimate, c, false, false);
    estimate->add_option("--csv", csv_path, "Data file ('-' for stdin)")->required();
    estimate->add_flag("--header", header, "First row holds column names");
    estimate->add_flag("--no-header", no_header, "First row is data");
    estimate->add_flag("--log-returns", log_returns, "Convert prices to log returns first");
    estimate->add_option("--columns", columns, "Column names or 1-based positions, comma separated");
    estimate->add_flag("--ties", ties, "Split tied pairs instead of rejecting them");
    estimate->add_option("--bootstrap", resamples, "Bootstrap resamples for standard errors")->capture_default_str();
    estimate->add_option("--seed", c.seed, "Bootstrap seed")->capture_default_str();
    estimate->callback([&] {
        action = [&] {
            CsvOptions opts;
            if (header) opts.header = true;
            if (no_header) opts.header = false;
            opts.log_returns = log_returns;
            if (!columns.empty()) {
                std::stringstream ss(columns);
                for (std::string col; std::getline(ss, col, ',');) opts.columns.push_back(col);
            }
            std::istringstream in(read_text(csv_path));
            const auto data = ingest_csv(in, opts);
            const auto est = ties ? empirical_signature_ties(data) : empirical_signature(data);
            if (csv(c)) {
                std::string text = "label,kappa\n";
                const auto even = est.full.even();
                for (std::size_t i = 0; i < even.values().size(); ++i)
                    text += label_text(SubsetIndex(data.d(), even.labels()[i])) + "," + csv_row({even[i]}) + "\n";
                return emit(c, text);
            }
            json out = to_json(est, data.n());
            out["column_names"] = data.column_names();
            if (resamples > 0) {
                const auto b = bootstrap_standard_errors(data, resamples, c.seed);
                out["bootstrap"] = {{"resamples", b.resamples}, {"signature_se", b.signature_se}, {"weights_se", b.weights_se}};
            }
            emit(c, out);
        };
    });

    std::string matrix, rho, kendall, tau, rhos;
    auto* elliptical = app.add_subcommand("elliptical", "Concordance signature of an elliptical copula");
    add_common(elliptical, c, false, true);
    elliptical->add_option("--matrix", matrix, "Correlation matrix JSON file");
    elliptical->add_option("--rho", rho, "Correlations in lexicographic pair order");
    elliptical->add_option("--kendall", kendall, "Kendall matrix JSON file: decide elliptical attainability");
    elliptical->add_option("--tau", tau, "Kendall's tau in lexicographic pair order: decide elliptical attainability");
    elliptical->add_option("--curve", rhos, "Skeletal signatures of equicorrelated copulas at these correlations");
    elliptical->callback([&] {
        action = [&] {
            if (!kendall.empty() || !tau.empty()) {
                Eigen::MatrixXd P;
                if (!kendall.empty()) {
                    const auto j = read_json(kendall);
                    P = matrix_from_json(j.is_object() ? j.at("matrix") : j);
                } else {
                    require_dimension(c);
                    const auto v = parse_number_list(tau);
                    if (v.size() != static_cast<std::size_t>(c.d * (c.d - 1) / 2))
                        throw Error(ErrorCode::MalformedInput, "--tau needs d(d-1)/2 values");
                    P = Eigen::MatrixXd::Identity(c.d, c.d);
                    std::size_t k = 0;
                    for (int i = 0; i < c.d; ++i)
                        for (int j = i + 1; j < c.d; ++j) P(i, j) = P(j, i) = v[k++];
                }
                const auto v = elliptical_attainable(P);
                json out = to_json(v);
                out["cut_polytope"] = to_json(check_cut_polytope(P));
                emit(c, out);
                if (!v.attainable) throw Verdict{"not attainable by an elliptical distribution"};
                return;
            }
            if (!rhos.empty()) {
                require_dimension(c);
                const auto curve = exchangeable_skeletal_curve(c.d, parse_number_list(rhos), mc(c));
                if (csv(c)) {
                    std::string text = "rho";
                    for (int m = 0; m <= c.d; m += 2) text += ",k" + std::to_string(m);
                    for (int m = 0; m <= c.d; m += 2) text += ",se" + std::to_string(m);
                    text += "\n";
                    for (const auto& pt : curve) {
                        std::vector<double> row{pt.rho};
                        row.insert(row.end(), pt.k.begin(), pt.k.end());
                        row.insert(row.end(), pt.std_error.begin(), pt.std_error.end());
                        text += csv_row(row) + "\n";
                    }
                    return emit(c, text);
                }
                json out = json::array();
                for (const auto& pt : curve) out.push_back({{"rho", pt.rho}, {"d", c.d}, {"k", pt.k}, {"std_error", pt.std_error}});
                return emit(c, out);
            }
            const auto s = elliptical_signature(read_correlation(c, matrix, rho), mc(c));
            emit(c, to_json(s));
        };
    });

    std::string mode = "analytic";
    auto* tlimit = app.add_subcommand("tlimit", "Extremal mixture approached by t copulas as nu -> 0");
    add_common(tlimit, c, false, true);
    tlimit->add_option("--matrix", matrix, "Correlation matrix JSON file");
    tlimit->add_option("--rho", rho, "Correlations in lexicographic pair order");
    tlimit->add_option("--mode", mode, "analytic or mc")->check(CLI::IsMember({"analytic", "mc", "monte_carlo"}))->capture_default_str();
    tlimit->callback([&] {
        action = [&] {
            const auto P = read_correlation(c, matrix, rho);
            const auto t = t_limit_weights(P, mode == "analytic" ? TLimitMode::Analytic : TLimitMode::MonteCarlo, mc(c));
            if (csv(c)) {
                std::string text = "k,w,se\n";
                for (std::size_t k = 0; k < t.weights.size(); ++k)
                    text += std::to_string(k + 1) + "," + csv_row({t.weights[k], t.std_errors[k]}) + "\n";
                return emit(c, text);
            }
            json out = to_json(t);
            out["zero_support"] = rank_deficient_support(P);
            emit(c, out);
        };
    });

    std::string k_list, v_list;
    auto* skeletal = app.add_subcommand("skeletal", "Equiconcordant signatures through B_d");
    add_common(skeletal, c, false, false);
    skeletal->add_option("--k", k_list, "kappa_0, kappa_2, kappa_4, ... (first entry 1)");
    skeletal->add_option("--v", v_list, "Group weights to expand");
    skeletal->add_option("--kind", c.kind, "kappa or tau")->check(CLI::IsMember({"kappa", "tau"}));
    skeletal->callback([&] {
        action = [&] {
            require_dimension(c);
            if (!v_list.empty()) {
                const auto w = expand_skeletal(parse_number_list(v_list), c.d);
                json out = to_json(w);
                out["skeletal"] = to_json(skeletal_of(signature_from_weights(w)));
                return emit(c, out);
            }
            auto k = parse_number_list(k_list);
            if (c.kind == "tau")
                for (std::size_t i = 1; i < k.size(); ++i) k[i] = tau_to_kappa(k[i], static_cast<int>(2 * i));
            const auto sol = skeletal_solve(make_skeletal(c.d, k));
            json out = to_json(sol, c.d);
            if (sol.attainable) out["weights"] = to_json(expand_skeletal(sol.v, c.d));
            emit(c, out);
            if (!sol.attainable) throw Verdict{"not attainable: the group weights have a negative entry"};
        };
    });

    auto* bmatrix = app.add_subcommand("bmatrix", "Exact B_d for skeletal signatures");
    add_common(bmatrix, c, false, false);
    bmatrix->callback([&] {
        action = [&] {
            require_dimension(c);
            const auto B = build_B_matrix_exact(c.d);
            if (csv(c)) {
                std::string text;
                for (const auto& r : B) {
                    for (std::size_t j = 0; j < r.size(); ++j) text += (j ? "," : "") + r[j].to_string();
                    text += "\n";
                }
                return emit(c, text);
            }
            json rows = json::array(), values = json::array();
            for (const auto& r : B) {
                json row = json::array(), vals = json::array();
                for (const auto& x : r) {
                    row.push_back(x.to_string());
                    vals.push_back(x.value());
                }
                rows.push_back(row);
                values.push_back(vals);
            }
            const auto profile = comonotonic_profile(c.d);
            emit(c, json{{"d", c.d}, {"B", rows}, {"values", values}, {"h", profile.h}, {"mu", profile.mu}});
        };
    });

    std::uint64_t n = 1000;
    std::string theta;
    auto* sample = app.add_subcommand("sample", "Draw from an extremal mixture");
    add_common(sample, c, false, false);
    sample->add_option("--weights", weights_file, "Weights JSON file ('-' for stdin)");
    sample->add_option("--w", weights_list, "Weights, 2^(d-1) values");
    sample->add_option("--theta", theta, "Draw the three-dimensional counterexample instead");
    sample->add_option("--n", n, "Rows")->capture_default_str()->check(CLI::Range(std::uint64_t{1}, std::uint64_t{10'000'000}));
    sample->add_option("--seed", c.seed, "Random seed")->capture_default_str();
    sample->callback([&] {
        action = [&] {
            Eigen::MatrixXd rows;
            json meta{{"n", n}, {"seed", c.seed}};
            if (!theta.empty()) {
                const double t = parse_number(theta);
                rows = sample_counterexample(t, n, c.seed);
                meta["theta"] = t;
            } else {
                const auto s = sample_mixture(read_weights(), n, c.seed);
                rows = s.values;
                meta["weights"] = to_json(s.weights);
                meta["diagonal"] = s.diagonal;
            }
            meta["d"] = rows.cols();
            if (csv(c)) {
                std::string text;
                text.reserve(static_cast<std::size_t>(rows.size()) * 20);
                for (Eigen::Index i = 0; i < rows.rows(); ++i) {
                    std::vector<double> r(rows.cols());
                    for (Eigen::Index j = 0; j < rows.cols(); ++j) r[j] = rows(i, j);
                    text += csv_row(r) + "\n";
                }
                return emit(c, text);
            }
            meta["rows"] = matrix_to_json(rows);
            emit(c, meta);
        };
    });

    double level = 0.01;
    bool pairwise = false;
    auto* validate = app.add_subcommand("validate", "Test whether a sample comes from an extremal mixture");
    add_common(validate, c, false, false);
    validate->add_option("--csv", csv_path, "Sample file, one row per line ('-' for stdin)")->required();
    validate->add_option("--level", level, "Significance level")->capture_default_str()->check(CLI::Range(0.0, 1.0));
    validate->add_flag("--pairs", pairwise, "Also validate every bivariate margin");
    validate->callback([&] {
        action = [&] {
            std::istringstream in(read_text(csv_path));
            CsvOptions opts;
            opts.header = false;
            const auto data = ingest_csv(in, opts);
            const auto report = validate_mixture(data.values(), level);
            json out = to_json(report);
            bool pairs_pass = true;
            if (pairwise) {
                json p = json::array();
                for (const auto& d : validate_pairs(data.values(), level)) {
                    p.push_back({{"i", d.i}, {"j", d.j}, {"report", to_json(d.report)}});
                    pairs_pass = pairs_pass && d.report.pass;
                }
                out["pairs"] = p;
                out["pairs_pass"] = pairs_pass;
            }
            emit(c, out);
            if (!report.pass) throw Verdict{"sample is not consistent with an extremal mixture"};
        };
    });

    std::string out_dir = "reproduction";
    auto* reproduce = app.add_subcommand("reproduce", "Recompute the published tables into a report directory");
    reproduce->add_option("--out", out_dir, "Report directory")->capture_default_str();
    reproduce->add_option("--seed", c.seed, "Monte Carlo seed")->capture_default_str();
    std::uint64_t repro_samples = 10'000'000;
    reproduce->add_option("--mc-samples", repro_samples, "Monte Carlo samples")->capture_default_str();
    reproduce->callback([&] {
        action = [&] {
            ReproduceOptions opts;
            opts.seed = c.seed;
            opts.samples = repro_samples;
            std::filesystem::create_directories(out_dir);
            json report{{"seed", opts.seed}, {"samples", opts.samples}, {"artifacts", json::array()}};
            bool all = true;
            for (const auto& a : reproduce_all(opts)) {
                std::ofstream(std::filesystem::path(out_dir) / (a.name + ".json")) << a.data.dump(2) << '\n';
                report["artifacts"].push_back(report_entry(a));
                std::cout << (a.pass ? "PASS " : "FAIL ") << a.title << ": " << a.summary << '\n';
                all = all && a.pass;
            }
            report["pass"] = all;
            std::ofstream(std::filesystem::path(out_dir) / "report.json") << report.dump(2) << '\n';
            if (!all) throw Verdict{"some artifacts deviate beyond tolerance; see " + (std::filesystem::path(out_dir) / "report.json").string()};
        };
    });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitValidation;
    }
    set_dimension_cap(cap);
    action();
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const Verdict& v) {
        std::cerr << v.message << '\n';
        return kExitInfeasible;
    } catch (const Error& e) {
        std::cerr << "error [" << to_string(e.code()) << "]: " << e.what();
        if (!e.detail().empty()) std::cerr << " (" << e.detail() << ")";
        std::cerr << '\n';
        const bool verdict = e.code() == ErrorCode::NotAttainable || e.code() == ErrorCode::Infeasible;
        if (verdict) std::cerr << "not attainable\n";
        return verdict ? kExitInfeasible : kExitValidation;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}
