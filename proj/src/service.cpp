#include "concordance/service.hpp"

#include "concordance/error.hpp"

#include <httplib.h>

#include <cstdlib>
#include <sstream>

namespace concordance {

namespace {

using httplib::Request;
using httplib::Response;

void send(Response& res, int status, const json& body) {
    res.status = status;
    res.set_content(body.dump(), "application/json");
}

json parse_body(const Request& req) {
    try {
        return json::parse(req.body);
    } catch (const json::parse_error& e) {
        throw Error(ErrorCode::MalformedInput, "request body is not valid JSON", e.what());
    }
}

bool flag(const json& body, const char* key) {
    if (!body.contains(key)) return false;
    if (!body[key].is_boolean()) throw Error(ErrorCode::MalformedInput, std::string("\"") + key + "\" must be a boolean");
    return body[key].get<bool>();
}

std::vector<SubsetIndex> targets_from(const json& body, const PartialSignature& partial) {
    if (!body.contains("targets")) return partial.missing_labels();
    const auto& t = body["targets"];
    if (!t.is_array()) throw Error(ErrorCode::MalformedInput, "\"targets\" must be an array of labels");
    std::vector<SubsetIndex> out;
    for (const auto& label : t) out.push_back(subset_from_json(partial.dimension(), label));
    return out;
}

json with_tau(json bounds, const std::vector<SubsetIndex>& targets) {
    json lo = json::array(), hi = json::array();
    for (std::size_t i = 0; i < targets.size(); ++i) {
        lo.push_back(kappa_to_tau(bounds["lower"][i].get<double>(), targets[i].size()));
        hi.push_back(kappa_to_tau(bounds["upper"][i].get<double>(), targets[i].size()));
    }
    bounds["lower_tau"] = std::move(lo);
    bounds["upper_tau"] = std::move(hi);
    return bounds;
}

json vertices_result(const PartialSignature& partial, const std::vector<SubsetIndex>& targets, std::stop_token stop) {
    EnumerationOptions opt;
    opt.stop = std::move(stop);
    const auto poly = enumerate_vertices(partial, opt);
    json out = to_json(poly);
    if (!targets.empty()) {
        json t = json::array();
        for (const auto& s : targets) t.push_back(to_json(s));
        out["targets"] = std::move(t);
        out["projection"] = project_vertices(poly, targets);
    }
    return out;
}

CsvOptions csv_options(const std::function<std::optional<std::string>(const std::string&)>& get) {
    CsvOptions o;
    auto boolean = [](const std::string& v) {
        if (v == "true" || v == "1") return true;
        if (v == "false" || v == "0") return false;
        throw Error(ErrorCode::MalformedInput, "expected true or false, got \"" + v + "\"");
    };
    if (auto v = get("header")) o.header = boolean(*v);
    if (auto v = get("log_returns")) o.log_returns = boolean(*v);
    if (auto v = get("delimiter")) {
        if (v->size() != 1) throw Error(ErrorCode::MalformedInput, "delimiter must be one character");
        o.delimiter = (*v)[0];
    }
    if (auto v = get("columns")) {
        std::stringstream ss(*v);
        std::string item;
        while (std::getline(ss, item, ','))
            if (!item.empty()) o.columns.push_back(item);
    }
    return o;
}

json estimate_result(const SampleMatrix& data, bool ties, int bootstrap, std::uint64_t seed) {
    const auto est = ties ? empirical_signature_ties(data) : empirical_signature(data);
    json out = to_json(est, data.n());
    out["column_names"] = data.column_names();
    if (bootstrap > 0) {
        const auto b = bootstrap_standard_errors(data, bootstrap, seed);
        out["bootstrap"] = {{"resamples", b.resamples}, {"signature_se", b.signature_se}, {"weights_se", b.weights_se}};
    }
    return out;
}

template <class Handler>
httplib::Server::Handler guarded(Handler h) {
    return [h](const Request& req, Response& res) {
        try {
            h(req, res);
        } catch (const ConstraintRejected& e) {
            json detail = json::object();
            if (e.rejection.lower) detail["lower"] = *e.rejection.lower;
            if (e.rejection.upper) detail["upper"] = *e.rejection.upper;
            if (e.rejection.value) detail["value"] = *e.rejection.value;
            send(res, 409, error_body("Infeasible", e.what(), detail));
        } catch (const Error& e) {
            send(res, http_status(e.code()), error_body(to_string(e.code()), e.what(), e.detail().empty() ? json(nullptr) : json(e.detail())));
        } catch (const json::exception& e) {
            send(res, 400, error_body("MalformedInput", "request does not match the schema", e.what()));
        } catch (const std::exception& e) {
            send(res, 500, error_body("Internal", e.what()));
        }
    };
}

std::optional<std::string> env(const char* name) {
    const char* v = std::getenv(name);
    if (!v || !*v) return std::nullopt;
    return std::string(v);
}

}  // namespace

ServiceConfig config_from_env(ServiceConfig c) {
    try {
        if (auto v = env("CONCORDANCE_BIND")) c.bind = *v;
        if (auto v = env("CONCORDANCE_PORT")) c.port = std::stoi(*v);
        if (auto v = env("CONCORDANCE_DIMENSION_CAP")) c.dimension_cap = std::stoi(*v);
        if (auto v = env("CONCORDANCE_DATA_DIR")) c.data_dir = *v;
        if (auto v = env("CONCORDANCE_MC_SAMPLES")) c.mc_defaults.samples = std::stoull(*v);
        if (auto v = env("CONCORDANCE_MC_SEED")) c.mc_defaults.seed = std::stoull(*v);
        if (auto v = env("CONCORDANCE_CORS_ORIGIN")) c.cors_origin = *v;
    } catch (const std::logic_error&) {
        throw Error(ErrorCode::MalformedInput, "invalid numeric value in a CONCORDANCE_* variable");
    }
    return c;
}

int http_status(ErrorCode code) {
    switch (code) {
        case ErrorCode::DimensionTooLarge: return 413;
        case ErrorCode::NotAttainable:
        case ErrorCode::Infeasible: return 422;
        case ErrorCode::Cancelled: return 409;
        case ErrorCode::NumericalFailure: return 500;
        default: return 400;
    }
}

json error_body(std::string_view code, std::string_view message, const json& detail) {
    return {{"code", code}, {"message", message}, {"detail", detail}};
}

std::string_view to_string(JobStatus s) {
    switch (s) {
        case JobStatus::Queued: return "queued";
        case JobStatus::Running: return "running";
        case JobStatus::Done: return "done";
        case JobStatus::Failed: return "failed";
        case JobStatus::Cancelled: return "cancelled";
    }
    return "unknown";
}

JobQueue::JobQueue(unsigned workers) {
    for (unsigned i = 0; i < std::max(1u, workers); ++i) workers_.emplace_back([this](std::stop_token st) { run(st); });
}

JobQueue::~JobQueue() {
    {
        std::lock_guard lock(mutex_);
        for (auto& [id, job] : jobs_) job->stop.request_stop();
    }
    for (auto& w : workers_) w.request_stop();
    ready_.notify_all();
}

std::string JobQueue::submit(std::string kind, Task task) {
    auto job = std::make_shared<Job>();
    job->kind = std::move(kind);
    job->task = std::move(task);
    {
        std::lock_guard lock(mutex_);
        job->id = "job-" + std::to_string(next_id_++);
        jobs_[job->id] = job;
        queue_.push_back(job);
    }
    ready_.notify_one();
    return job->id;
}

json JobQueue::describe(const std::string& id) const {
    std::lock_guard lock(mutex_);
    const auto it = jobs_.find(id);
    if (it == jobs_.end()) return nullptr;
    const auto& job = *it->second;
    json out{{"id", job.id}, {"kind", job.kind}, {"status", to_string(job.status)}};
    if (job.status == JobStatus::Done) out["result"] = job.result;
    if (job.status == JobStatus::Failed || job.status == JobStatus::Cancelled) out["error"] = job.error;
    return out;
}

bool JobQueue::cancel(const std::string& id) {
    std::lock_guard lock(mutex_);
    const auto it = jobs_.find(id);
    if (it == jobs_.end()) return false;
    auto& job = *it->second;
    job.stop.request_stop();
    if (job.status == JobStatus::Queued) {
        job.status = JobStatus::Cancelled;
        job.error = error_body("Cancelled", "job cancelled before it started");
    }
    return true;
}

void JobQueue::run(std::stop_token worker_stop) {
    while (true) {
        std::shared_ptr<Job> job;
        {
            std::unique_lock lock(mutex_);
            if (!ready_.wait(lock, worker_stop, [&] { return !queue_.empty(); })) return;
            job = queue_.front();
            queue_.pop_front();
            if (job->status == JobStatus::Cancelled) continue;
            job->status = JobStatus::Running;
        }
        json result, error;
        auto status = JobStatus::Done;
        try {
            result = job->task(job->stop.get_token());
        } catch (const Error& e) {
            status = e.code() == ErrorCode::Cancelled ? JobStatus::Cancelled : JobStatus::Failed;
            error = error_body(to_string(e.code()), e.what(), e.detail().empty() ? json(nullptr) : json(e.detail()));
        } catch (const std::exception& e) {
            status = JobStatus::Failed;
            error = error_body("Internal", e.what());
        }
        std::lock_guard lock(mutex_);
        job->status = status;
        job->result = std::move(result);
        job->error = std::move(error);
        job->task = nullptr;
    }
}

Service::Service(ServiceConfig config)
    : config_(std::move(config)), sessions_(config_.data_dir), jobs_(config_.job_workers), server_(std::make_unique<httplib::Server>()) {
    set_dimension_cap(config_.dimension_cap);
    routes();
}

Service::~Service() { stop(); }

bool Service::listen() { return server_->listen(config_.bind, config_.port); }

int Service::bind_any_port() { return server_->bind_to_any_port(config_.bind); }

bool Service::listen_after_bind() { return server_->listen_after_bind(); }

void Service::stop() {
    if (server_) server_->stop();
}

void Service::wait_until_ready() const { server_->wait_until_ready(); }

void Service::routes() {
    auto& s = *server_;
    const std::string origin = config_.cors_origin;

    s.set_post_routing_handler([origin](const Request&, Response& res) {
        res.set_header("Access-Control-Allow-Origin", origin);
        res.set_header("Vary", "Origin");
    });
    s.Options(R"(/v1/.*)", [](const Request&, Response& res) {
        res.status = 204;
        res.set_header("Access-Control-Allow-Methods", "GET, POST, DELETE, OPTIONS");
        res.set_header("Access-Control-Allow-Headers", "Content-Type");
        res.set_header("Access-Control-Max-Age", "600");
    });

    s.Get("/v1/health", guarded([this](const Request&, Response& res) {
        send(res, 200, {{"status", "ok"}, {"dimension_cap", dimension_cap()}, {"sessions", sessions_.ids().size()}});
    }));

    s.Post("/v1/attainability", guarded([](const Request& req, Response& res) {
        const auto cert = check_attainable(partial_from_json(parse_body(req)));
        if (cert.feasible) send(res, 200, to_json(cert));
        else send(res, 422, error_body("NotAttainable", cert.infeasibility_reason.value_or("not attainable"), to_json(cert)));
    }));

    s.Post("/v1/bounds", guarded([](const Request& req, Response& res) {
        const auto body = parse_body(req);
        const auto partial = partial_from_json(body);
        const auto targets = targets_from(body, partial);
        const auto report = bound_missing(partial, targets);
        std::vector<std::vector<double>> projected;
        if (flag(body, "vertices")) projected = project_vertices(enumerate_vertices(partial), targets);
        send(res, 200, with_tau(to_json(report, flag(body, "vertices") ? &projected : nullptr), targets));
    }));

    s.Post("/v1/vertices", guarded([this](const Request& req, Response& res) {
        const auto body = parse_body(req);
        const auto partial = partial_from_json(body);
        const auto targets = body.contains("targets") ? targets_from(body, partial) : std::vector<SubsetIndex>{};
        if (flag(body, "async") || partial.dimension() >= config_.job_dimension_threshold) {
            const auto id = jobs_.submit("vertices", [partial, targets](std::stop_token st) { return vertices_result(partial, targets, st); });
            send(res, 202, {{"job_id", id}, {"status", "queued"}});
            return;
        }
        send(res, 200, vertices_result(partial, targets, {}));
    }));

    s.Post("/v1/estimate", guarded([this](const Request& req, Response& res) {
        SampleMatrix data;
        bool ties = false, async = false;
        int bootstrap = 0;
        std::uint64_t seed = config_.mc_defaults.seed;
        if (req.is_multipart_form_data()) {
            if (!req.has_file("file")) throw Error(ErrorCode::MalformedInput, "multipart upload needs a \"file\" part");
            auto get = [&](const std::string& key) -> std::optional<std::string> {
                if (!req.has_file(key)) return std::nullopt;
                return req.get_file_value(key).content;
            };
            std::istringstream in(req.get_file_value("file").content);
            data = ingest_csv(in, csv_options(get));
            if (auto v = get("ties")) ties = *v == "true" || *v == "1";
            if (auto v = get("async")) async = *v == "true" || *v == "1";
            if (auto v = get("bootstrap")) bootstrap = std::stoi(*v);
            if (auto v = get("seed")) seed = std::stoull(*v);
        } else {
            const auto body = parse_body(req);
            ties = flag(body, "ties");
            async = flag(body, "async");
            bootstrap = body.value("bootstrap", 0);
            seed = body.value("seed", seed);
            if (body.contains("csv")) {
                auto get = [&](const std::string& key) -> std::optional<std::string> {
                    if (!body.contains(key)) return std::nullopt;
                    const auto& v = body[key];
                    if (v.is_string()) return v.get<std::string>();
                    if (v.is_array()) {
                        std::string joined;
                        for (const auto& x : v) joined += (joined.empty() ? "" : ",") + (x.is_string() ? x.get<std::string>() : x.dump());
                        return joined;
                    }
                    return v.dump();
                };
                std::istringstream in(body["csv"].get<std::string>());
                data = ingest_csv(in, csv_options(get));
            } else {
                data = SampleMatrix(rows_from_json(body.at("data")), body.value("column_names", std::vector<std::string>{}));
            }
        }
        if (bootstrap < 0) throw Error(ErrorCode::OutOfRange, "bootstrap resamples must be nonnegative");
        if (async || bootstrap > 0) {
            const auto id = jobs_.submit("estimate", [data, ties, bootstrap, seed](std::stop_token) { return estimate_result(data, ties, bootstrap, seed); });
            send(res, 202, {{"job_id", id}, {"status", "queued"}});
            return;
        }
        send(res, 200, estimate_result(data, ties, 0, seed));
    }));

    s.Post("/v1/elliptical", guarded([this](const Request& req, Response& res) {
        const auto body = parse_body(req);
        if (body.contains("kendall")) {
            const auto tau = matrix_from_json(body["kendall"]);
            send(res, 200, {{"elliptical", to_json(elliptical_attainable(tau))}, {"cut_polytope", to_json(check_cut_polytope(tau))}});
            return;
        }
        const auto p = correlation_from_json(body.contains("matrix") ? body["matrix"] : body);
        auto mc = mc_from_json(body.value("mc", json(nullptr)), config_.mc_defaults);
        auto task = [p, mc](std::stop_token st) mutable {
            mc.stop = st;
            json out = to_json(elliptical_signature(p, mc));
            out["kendall"] = matrix_to_json(arcsin_tau_matrix(p));
            return out;
        };
        if (flag(body, "async") || (p.dimension() >= 4 && mc.samples > config_.job_sample_threshold)) {
            send(res, 202, {{"job_id", jobs_.submit("elliptical", task)}, {"status", "queued"}});
            return;
        }
        send(res, 200, task({}));
    }));

    s.Post("/v1/tlimit", guarded([this](const Request& req, Response& res) {
        const auto body = parse_body(req);
        const auto p = correlation_from_json(body.contains("matrix") ? body["matrix"] : body);
        const auto mode_name = body.value("mode", std::string("analytic"));
        if (mode_name != "analytic" && mode_name != "monte_carlo") throw Error(ErrorCode::MalformedInput, "\"mode\" must be analytic or monte_carlo");
        const auto mode = mode_name == "analytic" ? TLimitMode::Analytic : TLimitMode::MonteCarlo;
        auto mc = mc_from_json(body.value("mc", json(nullptr)), config_.mc_defaults);
        auto task = [p, mode, mc](std::stop_token st) mutable {
            mc.stop = st;
            json out = to_json(t_limit_weights(p, mode, mc));
            out["zero_support"] = rank_deficient_support(p);
            return out;
        };
        const bool simulated = mode == TLimitMode::MonteCarlo || p.dimension() >= 4;
        if (flag(body, "async") || (simulated && mc.samples > config_.job_sample_threshold)) {
            send(res, 202, {{"job_id", jobs_.submit("tlimit", task)}, {"status", "queued"}});
            return;
        }
        send(res, 200, task({}));
    }));

    s.Post("/v1/skeletal", guarded([](const Request& req, Response& res) {
        const auto body = parse_body(req);
        if (body.contains("v")) {
            const int d = body.at("d").get<int>();
            const auto w = expand_skeletal(body["v"].get<std::vector<double>>(), d);
            send(res, 200, {{"weights", to_json(w)}, {"skeletal", to_json(skeletal_of(signature_from_weights(w)))}});
            return;
        }
        const auto sk = skeletal_from_json(body);
        const auto sol = skeletal_solve(sk);
        json out = to_json(sol, sk.d);
        out["weights"] = sol.attainable ? to_json(expand_skeletal(sol.v, sk.d)) : json(nullptr);
        send(res, 200, out);
    }));

    s.Get("/v1/bmatrix", guarded([](const Request& req, Response& res) {
        if (!req.has_param("d")) throw Error(ErrorCode::MalformedInput, "query parameter d is required");
        const int d = std::stoi(req.get_param_value("d"));
        json rows = json::array();
        for (const auto& row : build_B_matrix_exact(d)) {
            json r = json::array();
            for (const auto& q : row) r.push_back(q.to_string());
            rows.push_back(std::move(r));
        }
        send(res, 200, {{"d", d}, {"B", std::move(rows)}, {"values", matrix_to_json(build_B_matrix(d))}});
    }));

    s.Post("/v1/sample", guarded([](const Request& req, Response& res) {
        const auto body = parse_body(req);
        const auto n = body.value("n", std::uint64_t{1000});
        const auto seed = body.value("seed", std::uint64_t{0});
        const auto format = body.value("format", std::string("csv"));
        if (format != "csv" && format != "json") throw Error(ErrorCode::MalformedInput, "\"format\" must be csv or json");
        if (n > 10'000'000) throw Error(ErrorCode::OutOfRange, "at most 10^7 rows per request");
        Eigen::MatrixXd values;
        if (body.contains("counterexample")) {
            values = sample_counterexample(number_from_json(body["counterexample"].at("theta")), n, seed);
        } else {
            values = sample_mixture(weights_from_json(body.at("weights")), n, seed).values;
        }
        if (format == "json") {
            send(res, 200, matrix_to_json(values));
            return;
        }
        auto shared = std::make_shared<Eigen::MatrixXd>(std::move(values));
        res.set_chunked_content_provider("text/csv", [shared, row = Eigen::Index{0}](std::size_t, httplib::DataSink& sink) mutable {
            std::string chunk;
            char buf[32];
            for (int batch = 0; batch < 4096 && row < shared->rows(); ++batch, ++row) {
                for (Eigen::Index c = 0; c < shared->cols(); ++c) {
                    const int len = std::snprintf(buf, sizeof buf, "%.17g", (*shared)(row, c));
                    chunk.append(buf, static_cast<std::size_t>(len));
                    chunk.push_back(c + 1 < shared->cols() ? ',' : '\n');
                }
            }
            if (!chunk.empty()) sink.write(chunk.data(), chunk.size());
            if (row >= shared->rows()) sink.done();
            return true;
        });
    }));

    s.Post("/v1/validate", guarded([](const Request& req, Response& res) {
        const auto body = parse_body(req);
        const auto data = rows_from_json(body.at("data"));
        const double level = body.value("level", 0.01);
        json out = to_json(validate_mixture(data, level));
        if (flag(body, "pairs")) {
            json pairs = json::array();
            for (const auto& p : validate_pairs(data, level)) pairs.push_back({{"i", p.i}, {"j", p.j}, {"report", to_json(p.report)}});
            out["pairs"] = std::move(pairs);
        }
        send(res, 200, out);
    }));

    s.Post("/v1/sessions", guarded([this](const Request& req, Response& res) {
        const auto body = parse_body(req);
        const int d = body.at("d").get<int>();
        if (d < 2) throw Error(ErrorCode::OutOfRange, "dimension must be at least 2");
        if (d > dimension_cap()) throw Error(ErrorCode::DimensionTooLarge, "dimension exceeds cap " + std::to_string(dimension_cap()));
        std::vector<Constraint> constraints;
        for (const auto& c : body.value("constraints", json::array())) constraints.push_back(constraint_from_json(d, c));
        send(res, 201, to_json(*sessions_.create(d, constraints)));
    }));

    s.Get("/v1/sessions", guarded([this](const Request&, Response& res) { send(res, 200, {{"sessions", sessions_.ids()}}); }));

    s.Get(R"(/v1/sessions/([0-9a-f]+))", guarded([this](const Request& req, Response& res) {
        const auto snap = sessions_.get(req.matches[1]);
        if (!snap) send(res, 404, error_body("NotFound", "unknown session"));
        else send(res, 200, to_json(*snap));
    }));

    s.Delete(R"(/v1/sessions/([0-9a-f]+))", guarded([this](const Request& req, Response& res) {
        if (sessions_.erase(req.matches[1])) res.status = 204;
        else send(res, 404, error_body("NotFound", "unknown session"));
    }));

    s.Post(R"(/v1/sessions/([0-9a-f]+)/constraints)", guarded([this](const Request& req, Response& res) {
        const std::string id = req.matches[1];
        const auto cur = sessions_.get(id);
        if (!cur) {
            send(res, 404, error_body("NotFound", "unknown session"));
            return;
        }
        const auto c = constraint_from_json(cur->d, parse_body(req));
        send(res, 200, to_json(*sessions_.add_constraint(id, c)));
    }));

    s.Delete(R"(/v1/sessions/([0-9a-f]+)/constraints/([^/]+))", guarded([this](const Request& req, Response& res) {
        const std::string id = req.matches[1];
        const auto cur = sessions_.get(id);
        if (!cur) {
            send(res, 404, error_body("NotFound", "unknown session"));
            return;
        }
        const auto label = SubsetIndex::parse(cur->d, req.matches[2].str());
        const bool present = std::any_of(cur->constraints.begin(), cur->constraints.end(), [&](const Constraint& c) { return c.label == label; });
        if (!present) {
            send(res, 404, error_body("NotFound", "label " + label.to_string() + " is not constrained"));
            return;
        }
        send(res, 200, to_json(*sessions_.remove_constraint(id, label)));
    }));

    s.Get(R"(/v1/jobs/([A-Za-z0-9-]+))", guarded([this](const Request& req, Response& res) {
        const auto d = jobs_.describe(req.matches[1]);
        if (d.is_null()) send(res, 404, error_body("NotFound", "unknown job"));
        else send(res, 200, d);
    }));

    s.Delete(R"(/v1/jobs/([A-Za-z0-9-]+))", guarded([this](const Request& req, Response& res) {
        if (!jobs_.cancel(req.matches[1])) send(res, 404, error_body("NotFound", "unknown job"));
        else send(res, 202, jobs_.describe(req.matches[1]));
    }));
}

}  // namespace concordance
