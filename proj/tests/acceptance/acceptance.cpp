// Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any FAIL.

#include "pharmaharvest/bench.hpp"
#include "pharmaharvest/csv.hpp"
#include "pharmaharvest/driver.hpp"
#include "pharmaharvest/errors.hpp"
#include "pharmaharvest/faers.hpp"
#include "pharmaharvest/fetcher.hpp"
#include "pharmaharvest/pipeline.hpp"
#include "pharmaharvest/search.hpp"
#include "pharmaharvest/serialize.hpp"
#include "pharmaharvest/service.hpp"
#include "pharmaharvest/store.hpp"
#include "pharmaharvest/tabulate.hpp"

#include "oracles.hpp"
#include "support.hpp"
#include "alpha_blockers.hpp"

#include <httplib.h>

#include <chrono>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <thread>

using namespace pharmaharvest;
using namespace std::chrono_literals;
using testsupport::fixture;
using testsupport::slurp;
namespace fs = std::filesystem;

namespace {

struct Verdict {
    bool pass = false;
    std::string detail;
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(const char* f, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, v);
    return buf;
}

CountMatrix random_matrix(std::mt19937_64& rng, std::size_t I, std::size_t J) {
    std::vector<std::string> ae, drugs;
    char buf[32];
    for (std::size_t i = 0; i < I; ++i) {
        std::snprintf(buf, sizeof buf, "AE%02zu", i);
        ae.emplace_back(buf);
    }
    for (std::size_t j = 0; j < J; ++j) {
        std::snprintf(buf, sizeof buf, "Drug%02zu", j);
        drugs.emplace_back(buf);
    }
    std::uniform_int_distribution<std::uint64_t> count(0, 1'000'000);
    std::bernoulli_distribution sparse(0.2);
    std::vector<std::uint64_t> cells(I * J);
    for (auto& c : cells) c = sparse(rng) ? 0 : count(rng);
    return CountMatrix(std::move(ae), std::move(drugs), std::move(cells));
}

std::vector<std::uint64_t> cells_of(const CountMatrix& m) { return {m.cells().begin(), m.cells().end()}; }

bool same(const TwoByTwo& t, const oracle::Cells& o) { return t.a == o.a && t.b == o.b && t.c == o.c && t.d == o.d; }

// 1. AE-based 2x2 tables over random count matrices.
Verdict ae_based_identities() {
    const auto t0 = std::chrono::steady_clock::now();
    std::mt19937_64 rng(20250612);
    std::uniform_int_distribution<std::size_t> dim(1, 20);
    for (int trial = 0; trial < 10'000; ++trial) {
        const auto I = dim(rng), J = dim(rng);
        const auto m = random_matrix(rng, I, J);
        const auto marg = tabulate::marginals(m);
        const auto i = std::uniform_int_distribution<std::size_t>(0, I - 1)(rng);
        const auto j = std::uniform_int_distribution<std::size_t>(0, J - 1)(rng);
        const auto t = tabulate::two_by_two(m, m.ae_labels()[i], m.drug_labels()[j], tabulate::OtherDrugsMode::ae_based());
        const auto want = oracle::partition(cells_of(m), I, J, i, j, oracle::all_but(J, j));
        const bool identities = t.a == m.at(i, j) && t.a + t.b == marg.row_totals[i] &&
                                t.a + t.c == marg.col_totals[j] && t.total() == marg.grand;
        if (!identities || !same(t, want))
            return {false, "trial " + std::to_string(trial) + " disagrees with the partition oracle"};
    }
    const double s = seconds_since(t0);
    return {s < 10.0, "10000 matrices, " + fmt("%.2f", s) + " s (limit 10 s)"};
}

// 2. Replayed DMA sessions reproduce the twenty published cells.
Verdict dma_table() {
    const auto t0 = std::chrono::steady_clock::now();
    std::vector<CountRecord> records;
    for (const auto& d : alpha_blockers::kDrugs) {
        adapters::ReplayDriver driver(replay_session_dir(fixture("replay"), SourceId::Dma, d));
        auto out = adapters::run_search(DrugQuery::make(d, SourceId::Dma), driver);
        records.insert(records.end(), out.records.begin(), out.records.end());
    }
    tabulate::TableRequest req;
    req.drugs = alpha_blockers::kDrugs;
    req.reactions = alpha_blockers::kPts;
    const auto table = tabulate::build_table(records, req);
    const double s = seconds_since(t0);
    if (table.matrix.drug_labels() != alpha_blockers::kDrugs || table.matrix.ae_labels() != alpha_blockers::kPts)
        return {false, "unexpected labels"};
    int matching = 0;
    for (std::size_t k = 0; k < alpha_blockers::kCells.size(); ++k) matching += table.matrix.cells()[k] == alpha_blockers::kCells[k];
    return {matching == 20 && s < 5.0,
            std::to_string(matching) + "/20 cells, " + fmt("%.3f", s) + " s (limit 5 s)"};
}

// 3. Drug-based comparator over random matrices and classes.
Verdict drug_based_partition() {
    std::mt19937_64 rng(7351);
    std::uniform_int_distribution<std::size_t> dim(1, 20);
    for (int trial = 0; trial < 1000; ++trial) {
        const auto I = dim(rng), J = dim(rng);
        const auto m = random_matrix(rng, I, J);
        const auto i = std::uniform_int_distribution<std::size_t>(0, I - 1)(rng);
        const auto j = std::uniform_int_distribution<std::size_t>(0, J - 1)(rng);
        std::vector<bool> outside(J);
        std::vector<std::string> members{m.drug_labels()[j]};
        std::bernoulli_distribution in_class(0.4);
        for (std::size_t k = 0; k < J; ++k) {
            if (k == j) continue;
            if (in_class(rng))
                members.push_back(m.drug_labels()[k]);
            else
                outside[k] = true;
        }
        std::shuffle(members.begin(), members.end(), rng);
        const auto t =
            tabulate::two_by_two(m, m.ae_labels()[i], m.drug_labels()[j], tabulate::OtherDrugsMode::drug_based(members));
        if (!same(t, oracle::partition(cells_of(m), I, J, i, j, outside)))
            return {false, "trial " + std::to_string(trial) + " disagrees with the partition oracle"};

        const auto single = tabulate::two_by_two(m, m.ae_labels()[i], m.drug_labels()[j],
                                                 tabulate::OtherDrugsMode::drug_based({m.drug_labels()[j]}));
        const auto ae = tabulate::two_by_two(m, m.ae_labels()[i], m.drug_labels()[j], tabulate::OtherDrugsMode::ae_based());
        if (!(single == ae)) return {false, "trial " + std::to_string(trial) + ": singleton class differs from AE-based"};
    }
    return {true, "1000 matrices; singleton class equals AE-based"};
}

// 4. FAERS synthetic quarter: library join and CLI statin class table against
// a nested-loop count.
Verdict faers_join() {
    const auto drug_text = slurp(fixture("faers/DRUG25Q1.txt"));
    const auto reac_text = slurp(fixture("faers/REAC25Q1.txt"));
    const auto want = oracle::faers_counts(drug_text, reac_text);

    const auto drugs = adapters::parse_faers_drug_file(drug_text);
    const auto reacs = adapters::parse_faers_reac_file(reac_text);
    const auto joined = adapters::join_faers(drugs.rows, reacs.rows);
    std::map<std::pair<std::string, std::string>, std::uint64_t> got;
    for (const auto& r : joined) got[{oracle::lower(r.drug), oracle::lower(r.reaction)}] += r.count;
    if (got != want)
        return {false, "join has " + std::to_string(got.size()) + " cells, oracle " + std::to_string(want.size())};

    const std::vector<std::string> statins{"Atorvastatin", "Fluvastatin", "Lovastatin",
                                           "Pravastatin",  "Rosuvastatin", "Simvastatin"};
    std::string list;
    for (const auto& s : statins) list += (list.empty() ? "" : ",") + s;
    testsupport::TempDir tmp;
    const auto out = tmp / "statin_class.csv";
    const auto r = testsupport::run_command(
        testsupport::cli() + " --config " + testsupport::quote(tmp / "none.toml") + " tabulate --faers-drug " +
        testsupport::quote(fixture("faers/DRUG25Q1.txt")) + " --faers-reac " +
        testsupport::quote(fixture("faers/REAC25Q1.txt")) + " --mode drug-based --drugs " + list + " --class " + list +
        " --out " + testsupport::quote(out) + " 2>/dev/null");
    if (r.exit_code != 0) return {false, "CLI tabulate exited " + std::to_string(r.exit_code)};
    const auto table = tabulate::parse_csv(slurp(out));
    if (table.matrix.drug_labels() != statins || !table.other) return {false, "CSV is not PT x statins + Other Drugs"};
    const auto rows = oracle::class_table(want, statins);
    if (table.matrix.rows() != rows.size()) return {false, "row count differs from oracle"};
    for (std::size_t i = 0; i < table.matrix.rows(); ++i) {
        const auto it = rows.find(oracle::lower(table.matrix.ae_labels()[i]));
        if (it == rows.end()) return {false, "unexpected PT " + table.matrix.ae_labels()[i]};
        for (std::size_t j = 0; j < statins.size(); ++j)
            if (table.matrix.at(i, j) != it->second.members[j])
                return {false, table.matrix.ae_labels()[i] + " / " + statins[j] + " differs"};
        if ((*table.other)[i] != it->second.other) return {false, table.matrix.ae_labels()[i] + " Other Drugs differs"};
    }
    return {true, std::to_string(want.size()) + " join cells; " + std::to_string(table.matrix.rows()) +
                      "-row statin table matches"};
}

// 5. Politeness and benchmark statistics.
Verdict politeness_and_bench() {
    fetch::PolitenessPolicy policy;
    policy.min_interhost_delay = 2000ms;
    double span = 0;
    {
        VirtualClock clock;
        std::vector<MonoTime> dispatched;
        testsupport::ScriptedTransport t([&](const std::string& url) -> fetch::TransportResponse {
            if (url.ends_with("/robots.txt")) return {404, "", "text/plain"};
            dispatched.push_back(clock.now());
            return {200, "ok", "text/html"};
        });
        fetch::Fetcher f(t, clock, policy);
        for (int k = 0; k < 5; ++k) f.fetch("https://pv.test/page" + std::to_string(k));
        if (dispatched.size() != 5) return {false, "expected 5 page dispatches"};
        span = std::chrono::duration<double>(dispatched.back() - dispatched.front()).count();
        if (span < 8.0) return {false, "5 fetches spanned " + fmt("%.3f", span) + " s"};
    }
    {
        VirtualClock clock;
        testsupport::ScriptedTransport t([](const std::string& url) -> fetch::TransportResponse {
            if (url.ends_with("/robots.txt")) return {200, "User-agent: *\nDisallow: /private/\n", "text/plain"};
            return {200, "body", "text/html"};
        });
        fetch::Fetcher f(t, clock, policy);
        bool refused = false;
        try {
            f.fetch("https://pv.test/private/report");
        } catch (const RobotsDisallowed&) {
            refused = true;
        }
        const auto body_requests = t.urls().size() - t.count_ending("/robots.txt");
        if (!refused || body_requests != 0)
            return {false, "disallowed path made " + std::to_string(body_requests) + " body requests"};
    }
    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 200; ++trial) {
        const auto n = std::uniform_int_distribution<int>(2, 40)(rng);
        std::lognormal_distribution<double> dur(3.0, 0.5);
        std::vector<double> x(static_cast<std::size_t>(n));
        for (auto& v : x) v = dur(rng);
        const auto got = bench::summarize(SourceId::Dma, x);
        const auto want = oracle::stats(x);
        for (auto [g, w] : {std::pair{got.mean_s, want.mean}, {got.sd_s, want.sd}, {got.median_s, want.median},
                            {got.q1_s, want.q1}, {got.q3_s, want.q3}})
            if (!oracle::rel_close(g, w, 1e-12)) return {false, "bench stats trial " + std::to_string(trial)};
    }
    return {true, "5 fetches span " + fmt("%.3f", span) + " s (>= 8 s); robots refusal made 0 body requests; stats within 1e-12"};
}

// 6. Replay determinism and store integrity.
Verdict replay_determinism() {
    const std::vector<std::pair<SourceId, std::string>> queries{
        {SourceId::Dma, "Alfuzosin"},          {SourceId::Lareb, "Atorvastatin"}, {SourceId::Medsafe, "Atorvastatin"},
        {SourceId::VigiAccess, "Atorvastatin"}, {SourceId::Daen, "Atorvastatin"}};
    auto run = [&](const fs::path& root) {
        VirtualClock clock(parse_rfc3339("2025-06-12T10:00:00Z"));
        auto layout = store::Layout::init(root, clock);
        std::vector<std::string> canonical;
        for (const auto& [source, term] : queries) {
            adapters::ReplayDriver driver(replay_session_dir(fixture("replay"), source, term));
            const auto query = DrugQuery::make(term, source);
            const auto outcome = adapters::run_search(query, driver);
            canonical.push_back(csv::write_records(outcome.records));
            const auto entry = store_search(layout, query, outcome);
            canonical.push_back(entry.file_path + " " + entry.checksum);
        }
        return std::pair{canonical, layout.verify().ok};
    };
    testsupport::TempDir a, b;
    const auto [first, ok_a] = run(a.path());
    const auto [second, ok_b] = run(b.path());
    if (first != second) return {false, "replayed output differs between runs"};
    return {ok_a && ok_b, std::to_string(queries.size()) + " sessions byte-identical; verify " +
                              (ok_a && ok_b ? "ok" : "FAILED")};
}

// 7. Local service end to end.
Verdict service_flow() {
    testsupport::TempDir tmp;
    service::ServiceOptions o;
    o.data_root = tmp / "data";
    o.replay_root = fixture("replay");
    o.politeness.min_interhost_delay = 1ms;
    o.port = 0;
    service::Service svc(o);
    svc.start();
    httplib::Client client("127.0.0.1", svc.port());
    client.set_read_timeout(30, 0);

    auto wait = [&](const std::string& id) -> std::string {
        for (int k = 0; k < 600; ++k) {
            const auto r = client.Get("/api/jobs/" + id);
            if (!r || r->status != 200) return "lost";
            const auto state = Json::parse(r->body).at("state").get<std::string>();
            if (state != "queued" && state != "running") return state;
            std::this_thread::sleep_for(50ms);
        }
        return "timeout";
    };

    const auto sources = client.Get("/api/sources");
    if (!sources || sources->status != 200) return {false, "/api/sources unavailable"};
    const auto n = Json::parse(sources->body).size();

    const auto search = client.Post("/api/search?driver=replay", R"({"source":"dma","term":"Alfuzosin"})",
                                    "application/json");
    if (!search || search->status != 202) return {false, "search not accepted"};
    const auto search_state = wait(Json::parse(search->body).at("id"));

    const auto download = client.Post("/api/download", R"({"source":"vaers","year":2024})", "application/json");
    if (!download || download->status != 202) return {false, "download not accepted"};
    const auto download_state = wait(Json::parse(download->body).at("id"));
    svc.stop();

    return {n == 7 && search_state == "done" && download_state == "needs_human",
            std::to_string(n) + " sources; DMA search " + search_state + "; VAERS download " + download_state};
}

}  // namespace

int main() {
    const std::vector<std::pair<const char*, std::function<Verdict()>>> criteria{
        {"AE-based 2x2 identities on random matrices", ae_based_identities},
        {"DMA replay reproduces the alpha-blocker table", dma_table},
        {"Drug-based comparator matches the partition oracle", drug_based_partition},
        {"FAERS join and statin class table match the nested-loop oracle", faers_join},
        {"Politeness spacing, robots refusal and benchmark statistics", politeness_and_bench},
        {"Replay determinism and store verification", replay_determinism},
        {"Local service: sources, search job, VAERS hand-off", service_flow},
    };
    int failures = 0;
    for (std::size_t k = 0; k < criteria.size(); ++k) {
        Verdict v;
        try {
            v = criteria[k].second();
        } catch (const std::exception& e) {
            v = {false, std::string("exception: ") + e.what()};
        }
        failures += !v.pass;
        std::printf("%s %zu %s: %s\n", v.pass ? "PASS" : "FAIL", k + 1, criteria[k].first, v.detail.c_str());
        std::fflush(stdout);
    }
    return failures == 0 ? 0 : 1;
}
