#include "pharmaharvest/service.hpp"

#include "pharmaharvest/config.hpp"
#include "pharmaharvest/driver.hpp"
#include "pharmaharvest/faers.hpp"
#include "pharmaharvest/fetcher.hpp"
#include "pharmaharvest/pipeline.hpp"
#include "pharmaharvest/search.hpp"
#include "pharmaharvest/store.hpp"
#include "pharmaharvest/tabulate.hpp"
#include "pharmaharvest/text.hpp"

#include <httplib.h>

#include <cstdio>

namespace pharmaharvest::service {
namespace fs = std::filesystem;

std::string_view to_string(JobKind k) { return k == JobKind::Search ? "search" : "download"; }

std::string_view to_string(JobState s) {
    switch (s) {
        case JobState::Queued: return "queued";
        case JobState::Running: return "running";
        case JobState::Done: return "done";
        case JobState::Failed: return "failed";
        case JobState::NeedsHuman: return "needs_human";
    }
    return "unknown";
}

bool is_terminal(JobState s) { return s == JobState::Done || s == JobState::Failed || s == JobState::NeedsHuman; }

Json to_json(const Job& job) {
    Json j{{"id", job.id},
           {"kind", to_string(job.kind)},
           {"source", job.source},
           {"params", job.params},
           {"state", to_string(job.state)},
           {"progress", job.progress},
           {"result_ref", job.result_ref ? Json(*job.result_ref) : Json(nullptr)},
           {"error", job.error ? Json(*job.error) : Json(nullptr)},
           {"error_code", job.error_code ? Json(*job.error_code) : Json(nullptr)},
           {"records", job.records},
           {"records_truncated", job.records_truncated}};
    if (job.handoff) {
        j["handoff"] = Json{{"url", job.handoff->url},
                            {"expected_filename", job.handoff->expected_filename},
                            {"dest_path", job.handoff->dest_path},
                            {"message", job.handoff->message}};
    } else {
        j["handoff"] = nullptr;
    }
    return j;
}

// ---- job queue ----

JobQueue::JobQueue() : worker_([this] { run(); }) {}

JobQueue::~JobQueue() { shutdown(); }

std::string JobQueue::submit(Job job, Task task) {
    std::lock_guard lock(mu_);
    if (stopping_) throw InvalidArgument("service is shutting down");
    char buf[32];
    std::snprintf(buf, sizeof buf, "job-%06llu", static_cast<unsigned long long>(next_id_++));
    job.id = buf;
    job.state = JobState::Queued;
    job.progress = 0;
    const auto id = job.id;
    jobs_.emplace(id, std::move(job));
    order_.push_back(id);
    pending_.emplace_back(id, std::move(task));
    cv_.notify_all();
    return id;
}

std::optional<Job> JobQueue::get(const std::string& id) const {
    std::lock_guard lock(mu_);
    const auto it = jobs_.find(id);
    if (it == jobs_.end()) return std::nullopt;
    return it->second;
}

std::vector<Job> JobQueue::list() const {
    std::lock_guard lock(mu_);
    std::vector<Job> out;
    for (const auto& id : order_) out.push_back(jobs_.at(id));
    return out;
}

std::optional<Job> JobQueue::wait(const std::string& id, std::chrono::milliseconds timeout) const {
    std::unique_lock lock(mu_);
    cv_.wait_for(lock, timeout, [&] {
        const auto it = jobs_.find(id);
        return it == jobs_.end() || is_terminal(it->second.state);
    });
    const auto it = jobs_.find(id);
    if (it == jobs_.end()) return std::nullopt;
    return it->second;
}

void JobQueue::shutdown() {
    {
        std::lock_guard lock(mu_);
        if (stopping_ && !worker_.joinable()) return;
        stopping_ = true;
        cv_.notify_all();
    }
    if (worker_.joinable()) worker_.join();
}

void JobQueue::run() {
    for (;;) {
        std::pair<std::string, Task> next;
        {
            std::unique_lock lock(mu_);
            cv_.wait(lock, [&] { return stopping_ || !pending_.empty(); });
            if (stopping_) {
                for (auto& [id, task] : pending_) {
                    auto& job = jobs_.at(id);
                    job.state = JobState::Failed;
                    job.error = "service stopped before the job started";
                    job.error_code = "cancelled";
                }
                pending_.clear();
                cv_.notify_all();
                return;
            }
            next = std::move(pending_.front());
            pending_.pop_front();
            jobs_.at(next.first).state = JobState::Running;
            cv_.notify_all();
        }

        const auto& id = next.first;
        const Progress progress = [this, &id](double p) {
            std::lock_guard lock(mu_);
            jobs_.at(id).progress = std::clamp(p, 0.0, 1.0);
        };
        JobOutcome outcome;
        std::optional<std::pair<std::string, std::string>> failure;
        try {
            outcome = next.second(progress);
        } catch (const Error& e) {
            failure.emplace(e.code(), e.what());
        } catch (const std::exception& e) {
            failure.emplace("internal", e.what());
        }

        std::lock_guard lock(mu_);
        auto& job = jobs_.at(id);
        if (failure) {
            job.state = JobState::Failed;
            job.error_code = failure->first;
            job.error = failure->second;
        } else {
            job.state = outcome.state;
            job.progress = 1.0;
            job.result_ref = std::move(outcome.result_ref);
            job.records = std::move(outcome.records);
            job.records_truncated = outcome.records_truncated;
            job.handoff = std::move(outcome.handoff);
        }
        cv_.notify_all();
    }
}

// ---- HTTP service ----

namespace {

class HttpError : public Error {
public:
    HttpError(int status, std::string code, const std::string& message)
        : Error(std::move(code), message), status_(status) {}
    int status() const noexcept { return status_; }

private:
    int status_;
};

int status_for(const std::string& code) {
    if (code == "invalid_argument" || code == "parse_error" || code == "unknown_label" ||
        code == "class_missing_target")
        return 400;
    if (code == "not_found") return 404;
    if (code == "not_writable") return 409;
    return 500;
}

void send_json(httplib::Response& res, int status, const Json& body) {
    res.status = status;
    res.set_content(body.dump(), "application/json");
}

void send_error(httplib::Response& res, int status, const std::string& code, const std::string& message,
                Json detail = nullptr) {
    send_json(res, status, Json{{"code", code}, {"message", message}, {"detail", std::move(detail)}});
}

Json parse_body(const httplib::Request& req) {
    if (req.body.empty()) return Json::object();
    try {
        auto j = Json::parse(req.body);
        if (!j.is_object()) throw HttpError(400, "parse_error", "request body must be a JSON object");
        return j;
    } catch (const nlohmann::json::exception& e) {
        throw HttpError(400, "parse_error", std::string("request body is not JSON: ") + e.what());
    }
}

std::string string_field(const Json& body, const char* key) {
    if (!body.contains(key) || body.at(key).is_null()) return {};
    if (body.at(key).is_string()) return body.at(key).get<std::string>();
    if (body.at(key).is_number_integer()) return std::to_string(body.at(key).get<long long>());
    throw HttpError(400, "invalid_argument", std::string("field '") + key + "' must be a string");
}

std::vector<std::string> string_list(const Json& body, const char* key) {
    if (!body.contains(key) || body.at(key).is_null()) return {};
    try {
        return body.at(key).get<std::vector<std::string>>();
    } catch (const nlohmann::json::exception&) {
        throw HttpError(400, "invalid_argument", std::string("field '") + key + "' must be a list of strings");
    }
}

SourceId source_field(const Json& body) {
    const auto name = string_field(body, "source");
    const auto id = parse_source_id(name);
    if (!id) throw HttpError(400, "invalid_argument", "unknown source '" + name + "'");
    return *id;
}

Json api_spec() {
    auto op = [](const char* summary) { return Json{{"summary", summary}}; };
    return Json{
        {"openapi", "3.0.3"},
        {"info", {{"title", "pharmaharvest local API"}, {"version", "1"}}},
        {"paths",
         {{"/api/sources", {{"get", op("List the supported databases")}}},
          {"/api/search", {{"post", op("Queue a drug search: {source, term}; ?driver=replay|live")}}},
          {"/api/jobs", {{"get", op("List jobs")}}},
          {"/api/jobs/{id}", {{"get", op("Job state, progress, result reference and inline records")}}},
          {"/api/faers/quarters", {{"get", op("FAERS quarterly archives, newest first; ?driver=replay|live")}}},
          {"/api/download", {{"post", op("Queue a bulk download: {source: faers, quarter} or {source: vaers, year}")}}},
          {"/api/datasets", {{"get", op("Manifest entries of the data root")}}},
          {"/api/tabulate",
           {{"post", op("Count matrix from {datasets|records, drugs, terms, mode, class_members}")}}},
          {"/api/config", {{"get", op("Current data_root")}, {"put", op("Set data_root: {data_root}")}}},
          {"/api/spec", {{"get", op("This document")}}}}},
        {"components",
         {{"schemas",
           {{"Error", {{"type", "object"}, {"required", {"code", "message", "detail"}}}},
            {"Job",
             {{"type", "object"},
              {"properties",
               {{"state", {{"enum", {"queued", "running", "done", "failed", "needs_human"}}}},
                {"kind", {{"enum", {"search", "download"}}}}}}}}}}}}};
}

}  // namespace

struct Service::Impl {
    ServiceOptions opts;
    httplib::Server server;
    JobQueue jobs;
    std::mutex layout_mu;
    std::shared_ptr<store::Layout> layout;
    std::shared_ptr<fetch::Transport> live_transport;
    std::unique_ptr<fetch::Fetcher> live_fetcher;
    std::unique_ptr<fetch::DirectoryTransport> faers_replay_transport;
    std::unique_ptr<fetch::Fetcher> faers_replay_fetcher;
    std::thread thread;
    int bound_port = -1;

    explicit Impl(ServiceOptions o) : opts(std::move(o)) {
        opts.politeness.validate();
        // httplib defaults to SO_REUSEPORT, which would let a second
        // instance share a port that is already serving.
        server.set_socket_options([](socket_t sock) {
            int yes = 1;
            setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, &yes, sizeof yes);
        });
        layout = std::make_shared<store::Layout>(store::Layout::init(opts.data_root));
        live_transport = opts.live_transport ? opts.live_transport : std::make_shared<fetch::HttpTransport>();
        live_fetcher = std::make_unique<fetch::Fetcher>(*live_transport, SystemClock::instance(), opts.politeness);
        if (opts.replay_root) {
            faers_replay_transport = std::make_unique<fetch::DirectoryTransport>(*opts.replay_root / "faers");
            faers_replay_fetcher = std::make_unique<fetch::Fetcher>(*faers_replay_transport, SystemClock::instance(),
                                                                    opts.politeness);
        }
        routes();
    }

    std::shared_ptr<store::Layout> current_layout() {
        std::lock_guard lock(layout_mu);
        return layout;
    }

    bool replay_requested(const httplib::Request& req) const {
        const auto mode = req.has_param("driver") ? req.get_param_value("driver") : std::string("live");
        if (mode == "replay") {
            if (!opts.replay_root)
                throw HttpError(400, "invalid_argument", "replay driver requested but no replay root is configured");
            return true;
        }
        if (mode != "live") throw HttpError(400, "invalid_argument", "driver must be 'replay' or 'live'");
        return false;
    }

    fetch::Fetcher& bulk_fetcher(bool replay) { return replay ? *faers_replay_fetcher : *live_fetcher; }

    template <typename F>
    httplib::Server::Handler guarded(F f) {
        return [f](const httplib::Request& req, httplib::Response& res) {
            try {
                f(req, res);
            } catch (const HttpError& e) {
                send_error(res, e.status(), e.code(), e.what());
            } catch (const Error& e) {
                send_error(res, status_for(e.code()), e.code(), e.what());
            } catch (const nlohmann::json::exception& e) {
                send_error(res, 400, "parse_error", e.what());
            } catch (const std::exception& e) {
                send_error(res, 500, "internal", e.what());
            }
        };
    }

    JobOutcome search_task(const DrugQuery& query, bool replay, const JobQueue::Progress& progress) {
        std::unique_ptr<adapters::DocumentDriver> driver;
        if (replay) {
            driver = std::make_unique<adapters::ReplayDriver>(
                replay_session_dir(*opts.replay_root, query.source, query.term));
        } else {
            driver = std::make_unique<adapters::HttpDocumentDriver>(
                *live_fetcher, opts.politeness.settle_delay_for(query.source));
        }
        progress(0.1);
        auto outcome = adapters::run_search(query, *driver);
        progress(0.8);
        const auto layout = current_layout();
        JobOutcome out;
        out.result_ref = store_search(*layout, query, outcome);
        if (outcome.records.size() > opts.inline_record_cap) {
            outcome.records.resize(opts.inline_record_cap);
            out.records_truncated = true;
        }
        out.records = std::move(outcome.records);
        return out;
    }

    JobOutcome faers_task(const std::string& quarter, bool replay, const JobQueue::Progress& progress) {
        const auto [year, q] = adapters::parse_quarter_code(quarter);
        auto& fetcher = bulk_fetcher(replay);
        const auto index = fetcher.fetch(opts.faers_index_url);
        progress(0.2);
        const auto quarters = adapters::list_faers_quarters(index.body, index.url);
        const auto it = std::find_if(quarters.begin(), quarters.end(),
                                     [&](const adapters::QuarterRef& r) { return r.year == year && r.quarter == q; });
        if (it == quarters.end()) throw NotFound("FAERS quarter " + quarter + " is not listed");
        const auto layout = current_layout();
        JobOutcome out;
        out.result_ref = adapters::download_archive(*it, *layout, fetcher);
        return out;
    }

    void routes() {
        server.Get("/api/sources", guarded([](const httplib::Request&, httplib::Response& res) {
                       send_json(res, 200, Json(adapters::list_sources()));
                   }));

        server.Get("/api/spec", guarded([](const httplib::Request&, httplib::Response& res) {
                       send_json(res, 200, api_spec());
                   }));

        server.Post("/api/search", guarded([this](const httplib::Request& req, httplib::Response& res) {
                        const auto body = parse_body(req);
                        const auto source = source_field(body);
                        if (adapters::describe(source).access_mode != AccessMode::SearchAggregate)
                            throw HttpError(400, "invalid_argument",
                                            std::string(pharmaharvest::to_string(source)) +
                                                " is a bulk-download source; use /api/download");
                        const auto term = text::collapse_whitespace(string_field(body, "term"));
                        if (term.empty()) throw HttpError(422, "invalid_argument", "term must not be empty");
                        const bool replay = replay_requested(req);
                        const auto query = DrugQuery::make(term, source);

                        Job job;
                        job.kind = JobKind::Search;
                        job.source = source;
                        job.params = {{"term", term}, {"driver", replay ? "replay" : "live"}};
                        const auto id = jobs.submit(std::move(job), [this, query, replay](const auto& progress) {
                            return search_task(query, replay, progress);
                        });
                        send_json(res, 202, to_json(*jobs.get(id)));
                    }));

        server.Post("/api/download", guarded([this](const httplib::Request& req, httplib::Response& res) {
                        const auto body = parse_body(req);
                        const auto source = source_field(body);
                        const bool replay = replay_requested(req);
                        Job job;
                        job.kind = JobKind::Download;
                        job.source = source;
                        job.params["driver"] = replay ? "replay" : "live";
                        JobQueue::Task task;
                        if (source == SourceId::Faers) {
                            const auto quarter = string_field(body, "quarter");
                            adapters::parse_quarter_code(quarter);
                            job.params["quarter"] = quarter;
                            task = [this, quarter, replay](const auto& progress) {
                                return faers_task(quarter, replay, progress);
                            };
                        } else if (source == SourceId::Vaers) {
                            const auto year_text = string_field(body, "year");
                            int year = 0;
                            try {
                                year = std::stoi(year_text);
                            } catch (const std::exception&) {
                                throw HttpError(400, "invalid_argument", "year must be an integer");
                            }
                            job.params["year"] = std::to_string(year);
                            task = [this, year](const auto&) {
                                JobOutcome out;
                                out.state = JobState::NeedsHuman;
                                out.handoff = adapters::vaers_manual_handoff(year, *current_layout());
                                return out;
                            };
                        } else {
                            throw HttpError(400, "invalid_argument",
                                            std::string(pharmaharvest::to_string(source)) +
                                                " is searched, not downloaded; use /api/search");
                        }
                        const auto id = jobs.submit(std::move(job), std::move(task));
                        send_json(res, 202, to_json(*jobs.get(id)));
                    }));

        server.Get("/api/jobs", guarded([this](const httplib::Request&, httplib::Response& res) {
                       Json out = Json::array();
                       for (const auto& j : jobs.list()) out.push_back(to_json(j));
                       send_json(res, 200, out);
                   }));

        server.Get(R"(/api/jobs/([^/]+))", guarded([this](const httplib::Request& req, httplib::Response& res) {
                       const auto job = jobs.get(req.matches[1].str());
                       if (!job) throw HttpError(404, "not_found", "no job " + req.matches[1].str());
                       send_json(res, 200, to_json(*job));
                   }));

        server.Get("/api/faers/quarters", guarded([this](const httplib::Request& req, httplib::Response& res) {
                       auto& fetcher = bulk_fetcher(replay_requested(req));
                       const auto index = fetcher.fetch(opts.faers_index_url);
                       Json out = Json::array();
                       for (const auto& q : adapters::list_faers_quarters(index.body, index.url))
                           out.push_back(Json{{"year", q.year},
                                              {"quarter", "Q" + std::to_string(q.quarter)},
                                              {"code", q.code()},
                                              {"label", q.label},
                                              {"archive_url", q.archive_url}});
                       send_json(res, 200, out);
                   }));

        server.Get("/api/datasets", guarded([this](const httplib::Request&, httplib::Response& res) {
                       send_json(res, 200, Json(current_layout()->manifest().entries));
                   }));

        server.Post("/api/tabulate", guarded([this](const httplib::Request& req, httplib::Response& res) {
                        const auto body = parse_body(req);
                        const auto refs = string_list(body, "datasets");
                        std::vector<CountRecord> records;
                        if (body.contains("records") && !body.at("records").is_null())
                            records = body.at("records").get<std::vector<CountRecord>>();
                        if (refs.empty() && records.empty())
                            throw HttpError(400, "invalid_argument", "no datasets or records to tabulate");

                        const auto layout = current_layout();
                        const auto manifest = layout->manifest();
                        for (const auto& ref : refs) {
                            const auto it = std::find_if(manifest.entries.begin(), manifest.entries.end(),
                                                         [&](const ManifestEntry& e) { return e.file_path == ref; });
                            if (it == manifest.entries.end())
                                throw HttpError(404, "not_found", "dataset '" + ref + "' is not in the manifest");
                            auto loaded = load_dataset(*layout, *it);
                            records.insert(records.end(), std::make_move_iterator(loaded.begin()),
                                           std::make_move_iterator(loaded.end()));
                        }

                        tabulate::TableRequest request;
                        request.drugs = string_list(body, "drugs");
                        request.reactions = string_list(body, "terms");
                        const auto mode = string_field(body, "mode");
                        if (mode == "drug_based" || mode == "drug-based") {
                            request.mode = tabulate::OtherDrugsMode::drug_based(string_list(body, "class_members"));
                        } else if (!mode.empty() && mode != "ae_based" && mode != "ae-based") {
                            throw HttpError(400, "invalid_argument", "mode must be ae_based or drug_based");
                        }
                        const auto table = tabulate::build_table(records, request);

                        Json header = Json::array({"PT"});
                        for (const auto& d : table.matrix.drug_labels()) header.push_back(d);
                        if (table.other) header.push_back(tabulate::kOtherDrugsHeader);
                        Json rows = Json::array();
                        for (std::size_t i = 0; i < table.matrix.rows(); ++i) {
                            Json row = Json::array({table.matrix.ae_labels()[i]});
                            for (std::size_t j = 0; j < table.matrix.cols(); ++j) row.push_back(table.matrix.at(i, j));
                            if (table.other) row.push_back((*table.other)[i]);
                            rows.push_back(std::move(row));
                        }
                        send_json(res, 200,
                                  Json{{"matrix", table.matrix},
                                       {"other_drugs", table.other ? Json(*table.other) : Json(nullptr)},
                                       {"table", {{"header", header}, {"rows", rows}}},
                                       {"csv", tabulate::export_csv(table.matrix, table.other)}});
                    }));

        server.Get("/api/config", guarded([this](const httplib::Request&, httplib::Response& res) {
                       send_json(res, 200, Json{{"data_root", current_layout()->root().string()}});
                   }));

        server.Put("/api/config", guarded([this](const httplib::Request& req, httplib::Response& res) {
                       const auto body = parse_body(req);
                       const auto root = string_field(body, "data_root");
                       if (root.empty()) throw HttpError(400, "invalid_argument", "data_root must not be empty");
                       auto fresh = std::make_shared<store::Layout>(store::Layout::init(root));
                       {
                           std::lock_guard lock(layout_mu);
                           layout = fresh;
                       }
                       if (!opts.config_file.empty()) {
                           auto cfg = load_config(opts.config_file);
                           cfg.data_root = fresh->root();
                           save_config(opts.config_file, cfg);
                       }
                       send_json(res, 200, Json{{"data_root", fresh->root().string()}});
                   }));

        if (opts.static_dir) server.set_mount_point("/", opts.static_dir->string());
    }
};

Service::Service(ServiceOptions options) : impl_(std::make_unique<Impl>(std::move(options))) {}

Service::~Service() { stop(); }

void Service::bind() {
    if (impl_->bound_port >= 0) return;
    auto& o = impl_->opts;
    if (o.port == 0) {
        const int p = impl_->server.bind_to_any_port(o.bind);
        if (p < 0) throw PortInUse("cannot bind " + o.bind);
        impl_->bound_port = p;
    } else {
        if (!impl_->server.bind_to_port(o.bind, o.port))
            throw PortInUse("cannot bind " + o.bind + ":" + std::to_string(o.port));
        impl_->bound_port = o.port;
    }
}

int Service::port() const { return impl_->bound_port; }

void Service::run() {
    if (impl_->bound_port < 0) throw InvalidArgument("Service::run before bind");
    impl_->server.listen_after_bind();
}

void Service::start() {
    bind();
    impl_->thread = std::thread([this] { impl_->server.listen_after_bind(); });
    impl_->server.wait_until_ready();
}

void Service::stop() {
    if (!impl_) return;
    impl_->server.stop();
    if (impl_->thread.joinable()) impl_->thread.join();
    impl_->jobs.shutdown();
}

JobQueue& Service::jobs() { return impl_->jobs; }

}  // namespace pharmaharvest::service
