// pharmaharvest command-line front end.
//
// Exit codes:
//   0 success            4 page structure changed (DomDrift)
//   1 other failure      5 network or robots.txt refusal
//   2 usage error        6 file is not a zip archive
//   3 drug not found     7 port already in use

#include "pharmaharvest/bench.hpp"
#include "pharmaharvest/config.hpp"
#include "pharmaharvest/csv.hpp"
#include "pharmaharvest/driver.hpp"
#include "pharmaharvest/errors.hpp"
#include "pharmaharvest/faers.hpp"
#include "pharmaharvest/fetcher.hpp"
#include "pharmaharvest/pipeline.hpp"
#include "pharmaharvest/search.hpp"
#include "pharmaharvest/serialize.hpp"
#include "pharmaharvest/service.hpp"
#include "pharmaharvest/sources.hpp"
#include "pharmaharvest/store.hpp"
#include "pharmaharvest/tabulate.hpp"
#include "pharmaharvest/text.hpp"
#include "pharmaharvest/vaers.hpp"

#include <CLI11.hpp>

#include <csignal>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>

#include <pthread.h>

namespace fs = std::filesystem;
using namespace pharmaharvest;

namespace {

enum Exit { kOk = 0, kFailure = 1, kUsage = 2, kDrugNotFound = 3, kDomDrift = 4, kNetwork = 5, kNotAZip = 6,
            kPortBusy = 7 };

int exit_code_for(const std::string& code) {
    if (code == "drug_not_found") return kDrugNotFound;
    if (code == "dom_drift") return kDomDrift;
    if (code == "timeout" || code == "transport_error" || code == "exhausted_retries" || code == "robots_disallowed")
        return kNetwork;
    if (code == "not_a_zip") return kNotAZip;
    if (code == "port_in_use") return kPortBusy;
    if (code == "invalid_argument" || code == "class_missing_target" || code == "unknown_label") return kUsage;
    return kFailure;
}

class UsageError : public Error {
public:
    explicit UsageError(const std::string& message) : Error("invalid_argument", message) {}
};

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw NotFound("cannot read " + p.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_output(const std::string& path, const std::string& bytes) {
    if (path.empty() || path == "-") {
        std::cout << bytes;
        return;
    }
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw NotWritable("cannot write " + path);
    out << bytes;
}

SourceId parse_source(const std::string& name) {
    const auto id = parse_source_id(name);
    if (!id) throw UsageError("unknown source '" + name + "'");
    return *id;
}

std::vector<std::string> split_list(const std::vector<std::string>& values) {
    std::vector<std::string> out;
    for (const auto& v : values)
        for (const auto& part : text::split(v, ','))
            if (const auto t = text::collapse_whitespace(part); !t.empty()) out.push_back(t);
    return out;
}

struct Globals {
    std::string config_path = std::string(kConfigFileName);
    Config config;
};

fs::path data_root(const Globals& g, const std::string& out) {
    return out.empty() ? g.config.data_root : fs::path(out);
}

// ---- sources ----

struct SourcesArgs {
    bool json = false;
};

int cmd_sources(const SourcesArgs& a) {
    const auto& sources = adapters::list_sources();
    if (a.json) {
        std::cout << Json(sources).dump(2) << "\n";
        return kOk;
    }
    std::printf("%-11s %-28s %-8s %-5s %s\n", "ID", "ACCESS MODE", "LEVEL", "FMT", "NAME");
    for (const auto& s : sources)
        std::printf("%-11s %-28s %-8s %-5s %s\n", std::string(to_string(s.id)).c_str(),
                    std::string(to_string(s.access_mode)).c_str(), std::string(to_string(s.access_level)).c_str(),
                    std::string(to_string(s.native_format)).c_str(), s.display_name.c_str());
    return kOk;
}

// ---- search ----

struct SearchArgs {
    std::string source;
    std::string term;
    std::string driver = "live";
    std::string session;
    std::string replay_root;
    std::string record;
    std::string out;
    bool json = false;
};

struct LiveStack {
    fetch::HttpTransport transport;
    std::unique_ptr<fetch::Fetcher> fetcher;
    explicit LiveStack(const fetch::PolitenessPolicy& p)
        : fetcher(std::make_unique<fetch::Fetcher>(transport, SystemClock::instance(), p)) {}
};

fs::path session_dir_for(const std::string& session, const std::string& replay_root, SourceId source,
                         const std::string& term) {
    if (!session.empty()) return session;
    if (!replay_root.empty()) return replay_session_dir(replay_root, source, term);
    throw UsageError("--driver replay needs --session DIR or --replay-root DIR");
}

int cmd_search(const Globals& g, const SearchArgs& a) {
    const auto source = parse_source(a.source);
    if (adapters::describe(source).access_mode != AccessMode::SearchAggregate)
        throw UsageError(a.source + " is a bulk-download source; see the faers and vaers commands");
    const auto query = DrugQuery::make(a.term, source);

    std::unique_ptr<adapters::DocumentDriver> driver;
    std::unique_ptr<LiveStack> live;
    if (a.driver == "replay") {
        driver = std::make_unique<adapters::ReplayDriver>(session_dir_for(a.session, a.replay_root, source, a.term));
    } else if (a.driver == "live") {
        live = std::make_unique<LiveStack>(g.config.politeness);
        driver = std::make_unique<adapters::HttpDocumentDriver>(*live->fetcher,
                                                                g.config.politeness.settle_delay_for(source));
    } else {
        throw UsageError("--driver must be replay or live");
    }
    std::unique_ptr<adapters::RecordingDriver> recorder;
    adapters::DocumentDriver* active = driver.get();
    if (!a.record.empty()) {
        recorder = std::make_unique<adapters::RecordingDriver>(*driver, a.record, a.source, query.term);
        active = recorder.get();
    }

    std::cerr << "searching " << a.source << " for '" << query.term << "' (" << a.driver << ")\n";
    const auto outcome = adapters::run_search(query, *active);
    auto layout = store::Layout::init(data_root(g, a.out));
    const auto entry = store_search(layout, query, outcome);

    if (a.json) {
        std::cout << Json{{"records", outcome.records}, {"entry", entry}}.dump(2) << "\n";
    } else {
        std::cout << "rows: " << outcome.records.size() << "\n"
                  << "file: " << layout.resolve(entry).string() << "\n"
                  << "sha256: " << entry.checksum << "\n";
    }
    return kOk;
}

// ---- faers ----

struct FaersArgs {
    std::string index;
    std::string index_url = std::string(adapters::kFaersIndexUrl);
    std::string replay_root;
    std::string quarter;
    std::string out;
    bool json = false;
};

struct BulkStack {
    std::unique_ptr<fetch::Transport> transport;
    std::unique_ptr<fetch::Fetcher> fetcher;
};

BulkStack bulk_stack(const Globals& g, const std::string& replay_root) {
    BulkStack s;
    if (!replay_root.empty())
        s.transport = std::make_unique<fetch::DirectoryTransport>(replay_root);
    else
        s.transport = std::make_unique<fetch::HttpTransport>();
    s.fetcher = std::make_unique<fetch::Fetcher>(*s.transport, SystemClock::instance(), g.config.politeness);
    return s;
}

std::vector<adapters::QuarterRef> faers_quarters(const FaersArgs& a, fetch::Fetcher& fetcher) {
    if (!a.index.empty()) return adapters::list_faers_quarters(slurp(a.index), a.index_url);
    const auto page = fetcher.fetch(a.index_url);
    return adapters::list_faers_quarters(page.body, page.url);
}

int cmd_faers_list(const Globals& g, const FaersArgs& a) {
    auto stack = bulk_stack(g, a.replay_root);
    const auto quarters = faers_quarters(a, *stack.fetcher);
    if (a.json) {
        Json out = Json::array();
        for (const auto& q : quarters)
            out.push_back(Json{{"code", q.code()}, {"label", q.label}, {"archive_url", q.archive_url}});
        std::cout << out.dump(2) << "\n";
        return kOk;
    }
    for (const auto& q : quarters) std::printf("%-7s %-26s %s\n", q.code().c_str(), q.label.c_str(), q.archive_url.c_str());
    return kOk;
}

int cmd_faers_get(const Globals& g, const FaersArgs& a) {
    const auto [year, quarter] = adapters::parse_quarter_code(a.quarter);
    auto stack = bulk_stack(g, a.replay_root);
    const auto quarters = faers_quarters(a, *stack.fetcher);
    const auto it = std::find_if(quarters.begin(), quarters.end(), [&, y = year, q = quarter](const auto& r) {
        return r.year == y && r.quarter == q;
    });
    if (it == quarters.end()) throw NotFound("FAERS quarter " + a.quarter + " is not listed on the index page");
    auto layout = store::Layout::init(data_root(g, a.out));
    std::cerr << "downloading " << it->label << " from " << it->archive_url << "\n";
    const auto entry = adapters::download_archive(*it, layout, *stack.fetcher);
    if (a.json) {
        std::cout << Json(entry).dump(2) << "\n";
    } else {
        std::cout << "file: " << layout.resolve(entry).string() << "\n"
                  << "bytes: " << entry.byte_size << "\n"
                  << "sha256: " << entry.checksum << "\n";
    }
    return kOk;
}

// ---- vaers ----

struct VaersArgs {
    std::string index;
    std::string index_url = std::string(adapters::kVaersIndexUrl);
    std::string replay_root;
    int year = 0;
    std::string file;
    std::string out;
    bool json = false;
};

int cmd_vaers_list(const Globals& g, const VaersArgs& a) {
    std::vector<adapters::VaersFile> files;
    if (!a.index.empty()) {
        files = adapters::list_vaers_files(slurp(a.index), a.index_url);
    } else {
        auto stack = bulk_stack(g, a.replay_root);
        const auto page = stack.fetcher->fetch(a.index_url);
        files = adapters::list_vaers_files(page.body, page.url);
    }
    if (a.json) {
        Json out = Json::array();
        for (const auto& f : files)
            out.push_back(Json{{"year", f.year}, {"file_name", f.file_name}, {"archive_url", f.archive_url}});
        std::cout << out.dump(2) << "\n";
        return kOk;
    }
    for (const auto& f : files) std::printf("%d  %-20s %s\n", f.year, f.file_name.c_str(), f.archive_url.c_str());
    return kOk;
}

int cmd_vaers_handoff(const Globals& g, const VaersArgs& a) {
    const auto layout = store::Layout::init(data_root(g, a.out));
    const auto h = adapters::vaers_manual_handoff(a.year, layout);
    if (a.json) {
        std::cout << Json{{"url", h.url}, {"expected_filename", h.expected_filename}, {"dest_path", h.dest_path},
                          {"message", h.message}}
                         .dump(2)
                  << "\n";
    } else {
        std::cout << h.message << "\n";
    }
    return kOk;
}

int cmd_vaers_import(const Globals& g, const VaersArgs& a) {
    auto layout = store::Layout::init(data_root(g, a.out));
    const auto entry = adapters::import_external_file(a.file, a.year, layout);
    if (a.json) {
        std::cout << Json(entry).dump(2) << "\n";
    } else {
        std::cout << "file: " << layout.resolve(entry).string() << "\n"
                  << "sha256: " << entry.checksum << "\n";
    }
    return kOk;
}

// ---- tabulate ----

struct TabulateArgs {
    std::vector<std::string> inputs;
    std::string faers_zip;
    std::string faers_drug;
    std::string faers_reac;
    std::vector<std::string> roles;
    std::vector<std::string> drugs;
    std::vector<std::string> terms;
    std::vector<std::string> drug_class;
    std::string mode = "ae-based";
    std::string out;
    bool json = false;
};

int cmd_tabulate(const TabulateArgs& a) {
    std::vector<CountRecord> records;
    auto append = [&records](std::vector<CountRecord> more) {
        records.insert(records.end(), std::make_move_iterator(more.begin()), std::make_move_iterator(more.end()));
    };
    for (const auto& in : a.inputs) append(load_dataset_file(in));

    adapters::JoinOptions join;
    for (const auto& r : split_list(a.roles)) join.roles.insert(r);
    if (!a.faers_zip.empty()) append(adapters::join_faers_archive(slurp(a.faers_zip), join));
    if (!a.faers_drug.empty() || !a.faers_reac.empty()) {
        if (a.faers_drug.empty() || a.faers_reac.empty())
            throw UsageError("--faers-drug and --faers-reac must be given together");
        const auto drugs = adapters::parse_faers_drug_file(slurp(a.faers_drug));
        const auto reacs = adapters::parse_faers_reac_file(slurp(a.faers_reac));
        if (drugs.skipped + reacs.skipped > 0)
            std::cerr << "skipped " << drugs.skipped << " DRUG and " << reacs.skipped << " REAC malformed lines\n";
        append(adapters::join_faers(drugs.rows, reacs.rows, join));
    }
    if (records.empty() && a.inputs.empty() && a.faers_zip.empty() && a.faers_drug.empty())
        throw UsageError("nothing to tabulate: give --inputs and/or FAERS files");

    tabulate::TableRequest req;
    req.drugs = split_list(a.drugs);
    req.reactions = split_list(a.terms);
    const auto members = split_list(a.drug_class);
    if (a.mode == "drug-based" || a.mode == "drug_based") {
        if (members.empty()) throw UsageError("--mode drug-based needs --class");
        req.mode = tabulate::OtherDrugsMode::drug_based(members);
    } else if (a.mode != "ae-based" && a.mode != "ae_based") {
        throw UsageError("--mode must be ae-based or drug-based");
    } else if (!members.empty()) {
        throw UsageError("--class only applies with --mode drug-based");
    }

    const auto table = tabulate::build_table(records, req);
    write_output(a.out, a.json ? tabulate::export_json(table.matrix, table.other)
                               : tabulate::export_csv(table.matrix, table.other));
    if (!a.out.empty() && a.out != "-")
        std::cerr << table.matrix.rows() << " x " << table.matrix.cols() << " table written to " << a.out << "\n";
    return kOk;
}

// ---- bench ----

struct BenchArgs {
    std::string source;
    std::string term;
    int reps = 10;
    std::string session;
    std::string replay_root;
    bool live = false;
    std::string csv_out;
    bool json = false;
};

int cmd_bench(const Globals& g, const BenchArgs& a) {
    const auto source = parse_source(a.source);
    if (adapters::describe(source).access_mode != AccessMode::SearchAggregate)
        throw UsageError(a.source + " is not a search source");
    const auto query = DrugQuery::make(a.term, source);
    const auto settle = std::chrono::duration_cast<Nanos>(g.config.politeness.settle_delay_for(source));

    bench::TimingSummary summary;
    if (a.live) {
        std::cerr << "warning: live timings depend on network and site conditions and are not reproducible\n";
        LiveStack live(g.config.politeness);
        summary = bench::time_retrieval(source, a.reps, SystemClock::instance(), [&](int) {
            adapters::HttpDocumentDriver driver(*live.fetcher, settle);
            adapters::run_search(query, driver);
        });
    } else {
        const auto dir = session_dir_for(a.session, a.replay_root, source, a.term);
        VirtualClock clock;
        summary = bench::time_retrieval(source, a.reps, clock, [&](int) {
            adapters::ReplayDriver driver(dir, &clock, settle);
            adapters::run_search(query, driver);
        });
    }
    const std::vector<bench::TimingSummary> rows{summary};
    if (a.json) {
        std::cout << Json{{"source", summary.source}, {"n", summary.n},          {"mean_s", summary.mean_s},
                          {"sd_s", summary.sd_s},     {"median_s", summary.median_s}, {"q1_s", summary.q1_s},
                          {"q3_s", summary.q3_s},     {"samples_s", summary.samples_s}}
                         .dump(2)
                  << "\n";
    } else {
        std::cout << bench::format_table(rows);
        if (summary.n == 1) std::cout << "(n=1: SD reported as 0)\n";
    }
    if (!a.csv_out.empty()) write_output(a.csv_out, bench::format_csv(rows));
    return kOk;
}

// ---- serve ----

struct ServeArgs {
    int port = -1;
    std::string bind;
    std::string data_root;
    std::string replay_root;
    std::string static_dir;
};

int cmd_serve(const Globals& g, const ServeArgs& a) {
    service::ServiceOptions opts;
    opts.data_root = a.data_root.empty() ? g.config.data_root : fs::path(a.data_root);
    opts.config_file = g.config_path;
    opts.politeness = g.config.politeness;
    opts.bind = a.bind.empty() ? g.config.bind : a.bind;
    opts.port = a.port >= 0 ? a.port : g.config.port;
    if (!a.replay_root.empty()) opts.replay_root = a.replay_root;
    if (!a.static_dir.empty()) opts.static_dir = a.static_dir;

    // Signals are taken synchronously on this thread; every thread the
    // service starts inherits the blocked mask.
    sigset_t signals;
    sigemptyset(&signals);
    sigaddset(&signals, SIGINT);
    sigaddset(&signals, SIGTERM);
    pthread_sigmask(SIG_BLOCK, &signals, nullptr);

    service::Service svc(opts);
    svc.start();
    std::cerr << "listening on http://" << opts.bind << ":" << svc.port() << " (data root " << opts.data_root.string()
              << ")\n";
    std::cout << "port: " << svc.port() << std::endl;

    int sig = 0;
    sigwait(&signals, &sig);
    std::cerr << "signal " << sig << " received, finishing the running job\n";
    svc.stop();
    return kOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Pharmacovigilance data acquisition: search, download, tabulate, benchmark, serve"};
    app.require_subcommand(1);
    Globals g;
    app.add_option("--config", g.config_path, "Config file")->capture_default_str();

    SourcesArgs sources_args;
    auto* sources = app.add_subcommand("sources", "List supported databases");
    sources->add_flag("--json", sources_args.json, "Machine-readable output");

    SearchArgs search_args;
    auto* search = app.add_subcommand("search", "Retrieve aggregate counts for one drug");
    search->add_option("--source", search_args.source, "Database id")->required();
    search->add_option("--term", search_args.term, "Drug or vaccine name")->required();
    search->add_option("--driver", search_args.driver, "replay or live")->capture_default_str();
    search->add_option("--session", search_args.session, "Recorded session directory");
    search->add_option("--replay-root", search_args.replay_root, "Root of recorded sessions");
    search->add_option("--record", search_args.record, "Record the session into this directory");
    search->add_option("--out", search_args.out, "Data root");
    search->add_flag("--json", search_args.json, "Machine-readable output");

    FaersArgs faers_args;
    auto* faers = app.add_subcommand("faers", "FAERS quarterly extracts");
    faers->require_subcommand(1);
    auto* faers_list = faers->add_subcommand("list", "List available quarters");
    auto* faers_get = faers->add_subcommand("get", "Download one quarter");
    for (auto* c : {faers_list, faers_get}) {
        c->add_option("--index", faers_args.index, "Saved index page instead of fetching it");
        c->add_option("--index-url", faers_args.index_url, "Index page URL")->capture_default_str();
        c->add_option("--replay-root", faers_args.replay_root, "Serve index and archives from this directory");
        c->add_flag("--json", faers_args.json, "Machine-readable output");
    }
    faers_get->add_option("--quarter", faers_args.quarter, "e.g. 2025Q1")->required();
    faers_get->add_option("--out", faers_args.out, "Data root");

    VaersArgs vaers_args;
    auto* vaers = app.add_subcommand("vaers", "VAERS annual files (human-assisted download)");
    vaers->require_subcommand(1);
    auto* vaers_list = vaers->add_subcommand("list", "List annual files");
    vaers_list->add_option("--index", vaers_args.index, "Saved datasets page instead of fetching it");
    vaers_list->add_option("--index-url", vaers_args.index_url, "Datasets page URL")->capture_default_str();
    vaers_list->add_option("--replay-root", vaers_args.replay_root, "Serve the page from this directory");
    vaers_list->add_flag("--json", vaers_args.json, "Machine-readable output");
    auto* vaers_handoff = vaers->add_subcommand("handoff", "Print manual download instructions");
    vaers_handoff->add_option("--year", vaers_args.year, "Data year")->required();
    vaers_handoff->add_option("--out", vaers_args.out, "Data root");
    vaers_handoff->add_flag("--json", vaers_args.json, "Machine-readable output");
    auto* vaers_import = vaers->add_subcommand("import", "Store a manually downloaded file");
    vaers_import->add_option("file", vaers_args.file, "Downloaded zip")->required();
    vaers_import->add_option("--year", vaers_args.year, "Data year")->required();
    vaers_import->add_option("--out", vaers_args.out, "Data root");
    vaers_import->add_flag("--json", vaers_args.json, "Machine-readable output");

    TabulateArgs tab_args;
    auto* tab = app.add_subcommand("tabulate", "Build a PT x drug count table");
    tab->add_option("--inputs", tab_args.inputs, "Record CSV, DAEN .xlsx or FAERS .zip files");
    tab->add_option("--faers-zip", tab_args.faers_zip, "FAERS quarterly archive");
    tab->add_option("--faers-drug", tab_args.faers_drug, "FAERS DRUG file");
    tab->add_option("--faers-reac", tab_args.faers_reac, "FAERS REAC file");
    tab->add_option("--roles", tab_args.roles, "FAERS role_cod values to keep (default all)");
    tab->add_option("--drugs", tab_args.drugs, "Drug columns (comma separated or repeated)");
    tab->add_option("--terms", tab_args.terms, "Reaction rows to keep");
    tab->add_option("--class", tab_args.drug_class, "Drug class for drug-based mode");
    tab->add_option("--mode", tab_args.mode, "ae-based or drug-based")->capture_default_str();
    tab->add_option("--out", tab_args.out, "Output file (default stdout)");
    tab->add_flag("--json", tab_args.json, "JSON instead of CSV");

    BenchArgs bench_args;
    auto* bench = app.add_subcommand("bench", "Time repeated retrievals");
    bench->add_option("--source", bench_args.source, "Database id")->required();
    bench->add_option("--term", bench_args.term, "Drug name")->required();
    bench->add_option("--reps", bench_args.reps, "Repetitions")->capture_default_str()->check(CLI::PositiveNumber);
    bench->add_option("--session", bench_args.session, "Recorded session directory");
    bench->add_option("--replay-root", bench_args.replay_root, "Root of recorded sessions");
    bench->add_flag("--live", bench_args.live, "Time live retrievals instead of replay");
    bench->add_option("--csv", bench_args.csv_out, "Also write the CSV summary here");
    bench->add_flag("--json", bench_args.json, "Machine-readable output");

    ServeArgs serve_args;
    auto* serve = app.add_subcommand("serve", "Run the local HTTP API");
    serve->add_option("--port", serve_args.port, "Port (default 8799, 0 picks one)");
    serve->add_option("--bind", serve_args.bind, "Bind address (default 127.0.0.1)");
    serve->add_option("--data-root", serve_args.data_root, "Data root");
    serve->add_option("--replay-root", serve_args.replay_root, "Recorded sessions for ?driver=replay");
    serve->add_option("--static-dir", serve_args.static_dir, "Web UI assets served at /");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kOk : kUsage;
    }

    try {
        g.config = load_config(g.config_path);
        if (*sources) return cmd_sources(sources_args);
        if (*search) return cmd_search(g, search_args);
        if (*faers_list) return cmd_faers_list(g, faers_args);
        if (*faers_get) return cmd_faers_get(g, faers_args);
        if (*vaers_list) return cmd_vaers_list(g, vaers_args);
        if (*vaers_handoff) return cmd_vaers_handoff(g, vaers_args);
        if (*vaers_import) return cmd_vaers_import(g, vaers_args);
        if (*tab) return cmd_tabulate(tab_args);
        if (*bench) return cmd_bench(g, bench_args);
        if (*serve) return cmd_serve(g, serve_args);
    } catch (const Error& e) {
        std::cerr << "error [" << e.code() << "]: " << e.what() << "\n";
        return exit_code_for(e.code());
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kFailure;
    }
    return kUsage;
}
