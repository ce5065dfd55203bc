#include "pharmaharvest/config.hpp"
#include "pharmaharvest/service.hpp"
#include "pharmaharvest/store.hpp"

#include "support.hpp"
#include "alpha_blockers.hpp"

#include <gtest/gtest.h>
#include <httplib.h>

#include <thread>

using namespace pharmaharvest;
using namespace std::chrono_literals;
using testsupport::fixture;
namespace fs = std::filesystem;

namespace {

class Api : public ::testing::Test {
protected:
    void SetUp() override {
        service::ServiceOptions o;
        o.data_root = tmp_ / "data";
        o.config_file = tmp_ / "pharmaharvest.toml";
        o.replay_root = fixture("replay");
        o.politeness.min_interhost_delay = 1ms;
        o.port = 0;
        svc_ = std::make_unique<service::Service>(o);
        svc_->start();
        client_ = std::make_unique<httplib::Client>("127.0.0.1", svc_->port());
        client_->set_read_timeout(30, 0);
    }
    void TearDown() override { svc_->stop(); }

    std::pair<int, Json> get(const std::string& path) {
        auto r = client_->Get(path);
        if (!r) return {-1, nullptr};
        return {r->status, Json::parse(r->body)};
    }
    std::pair<int, Json> post(const std::string& path, const Json& body) {
        auto r = client_->Post(path, body.dump(), "application/json");
        if (!r) return {-1, nullptr};
        return {r->status, Json::parse(r->body)};
    }
    std::pair<int, Json> put(const std::string& path, const Json& body) {
        auto r = client_->Put(path, body.dump(), "application/json");
        if (!r) return {-1, nullptr};
        return {r->status, Json::parse(r->body)};
    }

    Json settle(const std::string& id) {
        for (int i = 0; i < 600; ++i) {
            const auto [status, job] = get("/api/jobs/" + id);
            if (status != 200) return job;
            const auto state = job.at("state").get<std::string>();
            if (state != "queued" && state != "running") return job;
            std::this_thread::sleep_for(50ms);
        }
        return nullptr;
    }

    testsupport::TempDir tmp_;
    std::unique_ptr<service::Service> svc_;
    std::unique_ptr<httplib::Client> client_;
};

}  // namespace

TEST_F(Api, SourcesAndSpec) {
    const auto [status, body] = get("/api/sources");
    EXPECT_EQ(status, 200);
    ASSERT_EQ(body.size(), 7u);
    EXPECT_EQ(body[0].at("id"), "daen");
    const auto [s2, spec] = get("/api/spec");
    EXPECT_EQ(s2, 200);
    EXPECT_TRUE(spec.at("paths").contains("/api/tabulate"));
}

TEST_F(Api, ReplaySearchReachesDone) {
    const auto [status, queued] = post("/api/search?driver=replay", {{"source", "dma"}, {"term", "Alfuzosin"}});
    ASSERT_EQ(status, 202);
    EXPECT_TRUE(queued.at("state") == "queued" || queued.at("state") == "running") << queued.dump();
    const auto job = settle(queued.at("id"));
    ASSERT_EQ(job.at("state"), "done") << job.dump();
    EXPECT_EQ(job.at("progress"), 1.0);
    bool seen = false;
    for (const auto& r : job.at("records"))
        if (r.at("reaction") == "Dizziness") {
            EXPECT_EQ(r.at("count"), 32);
            seen = true;
        }
    EXPECT_TRUE(seen);
    const auto ref = job.at("result_ref");
    EXPECT_TRUE(fs::exists(tmp_ / "data" / ref.at("file_path").get<std::string>()));

    const auto [s2, datasets] = get("/api/datasets");
    EXPECT_EQ(s2, 200);
    EXPECT_EQ(datasets.size(), 1u);
    const auto [s3, jobs] = get("/api/jobs");
    EXPECT_EQ(s3, 200);
    EXPECT_EQ(jobs.size(), 1u);
}

TEST_F(Api, SearchValidation) {
    EXPECT_EQ(post("/api/search?driver=replay", {{"source", "faers"}, {"term", "x"}}).first, 400);
    EXPECT_EQ(post("/api/search?driver=replay", {{"source", "dma"}, {"term", "   "}}).first, 422);
    EXPECT_EQ(post("/api/search?driver=replay", {{"source", "nope"}, {"term", "x"}}).first, 400);
    EXPECT_EQ(post("/api/search?driver=warp", {{"source", "dma"}, {"term", "x"}}).first, 400);
    const auto r = client_->Post("/api/search", "{not json", "application/json");
    ASSERT_TRUE(r);
    EXPECT_EQ(r->status, 400);
    const auto err = Json::parse(r->body);
    EXPECT_EQ(err.at("code"), "parse_error");
    EXPECT_TRUE(err.contains("detail"));
    EXPECT_EQ(get("/api/jobs/job-999999").first, 404);
}

TEST_F(Api, DriftedSessionFailsWithCode) {
    const auto [status, queued] = post("/api/search?driver=replay", {{"source", "lareb"}, {"term", "Pitavastatin"}});
    ASSERT_EQ(status, 202);
    const auto job = settle(queued.at("id"));
    EXPECT_EQ(job.at("state"), "failed");
    EXPECT_EQ(job.at("error_code"), "dom_drift");
}

TEST_F(Api, FaersDownloadAndQuarters) {
    const auto [s1, quarters] = get("/api/faers/quarters?driver=replay");
    ASSERT_EQ(s1, 200);
    EXPECT_EQ(quarters.size(), 6u);
    EXPECT_EQ(quarters[0].at("code"), "2025Q1");

    const auto [status, queued] = post("/api/download?driver=replay", {{"source", "faers"}, {"quarter", "2025Q1"}});
    ASSERT_EQ(status, 202);
    const auto job = settle(queued.at("id"));
    ASSERT_EQ(job.at("state"), "done") << job.dump();
    EXPECT_EQ(job.at("result_ref").at("file_path"), "faers/2025q1.zip");
    EXPECT_TRUE(store::Layout::init(tmp_ / "data").verify().ok);

    EXPECT_EQ(post("/api/download?driver=replay", {{"source", "faers"}, {"quarter", "Q1"}}).first, 400);
    EXPECT_EQ(post("/api/download?driver=replay", {{"source", "dma"}}).first, 400);
}

TEST_F(Api, VaersNeedsHuman) {
    const auto [status, queued] = post("/api/download", {{"source", "vaers"}, {"year", 2024}});
    ASSERT_EQ(status, 202);
    const auto job = settle(queued.at("id"));
    ASSERT_EQ(job.at("state"), "needs_human") << job.dump();
    const auto& h = job.at("handoff");
    EXPECT_EQ(h.at("url"), "https://vaers.hhs.gov/data/datasets.html");
    EXPECT_EQ(h.at("expected_filename"), "2024VAERSData.zip");
    EXPECT_NE(h.at("message").get<std::string>().find("CAPTCHA"), std::string::npos);
}

TEST_F(Api, TabulateStoredDatasets) {
    Json refs = Json::array();
    for (const auto& d : alpha_blockers::kDrugs) {
        const auto [status, queued] = post("/api/search?driver=replay", {{"source", "dma"}, {"term", d}});
        ASSERT_EQ(status, 202);
        const auto job = settle(queued.at("id"));
        ASSERT_EQ(job.at("state"), "done") << d;
        refs.push_back(job.at("result_ref").at("file_path"));
    }
    const auto [status, body] =
        post("/api/tabulate", {{"datasets", refs}, {"terms", {"Dizziness", "Syncope", "Fatigue", "Headache"}}});
    ASSERT_EQ(status, 200) << body.dump();
    const auto m = body.at("matrix").get<CountMatrix>();
    EXPECT_EQ(m.drug_labels(), alpha_blockers::kDrugs);
    EXPECT_EQ(m.ae_labels(), alpha_blockers::kPts);
    EXPECT_EQ(std::vector<std::uint64_t>(m.cells().begin(), m.cells().end()), alpha_blockers::kCells);
    EXPECT_TRUE(body.at("other_drugs").is_null());
    EXPECT_EQ(body.at("table").at("header")[0], "PT");

    const auto [s2, drug_based] = post("/api/tabulate", {{"datasets", refs},
                                                         {"terms", {"Dizziness", "Syncope"}},
                                                         {"drugs", {"Alfuzosin", "Doxazosin"}},
                                                         {"mode", "drug_based"},
                                                         {"class_members", {"Alfuzosin", "Doxazosin"}}});
    ASSERT_EQ(s2, 200) << drug_based.dump();
    EXPECT_EQ(drug_based.at("other_drugs").get<std::vector<std::uint64_t>>(), (std::vector<std::uint64_t>{28, 14}));

    EXPECT_EQ(post("/api/tabulate", {{"datasets", Json::array({"dma/missing.csv"})}}).first, 404);
    EXPECT_EQ(post("/api/tabulate", Json::object()).first, 400);
    EXPECT_EQ(post("/api/tabulate", {{"datasets", refs}, {"drugs", Json::array({"Nope"})}}).first, 400);
}

TEST_F(Api, ConfigSwitchesDataRoot) {
    const auto fresh = tmp_ / "other-root";
    const auto [status, body] = put("/api/config", {{"data_root", fresh.string()}});
    ASSERT_EQ(status, 200);
    int folders = 0;
    for (const auto& e : fs::directory_iterator(fresh))
        if (e.is_directory()) ++folders;
    EXPECT_EQ(folders, 7);
    EXPECT_EQ(get("/api/config").second.at("data_root"), body.at("data_root"));
    EXPECT_EQ(load_config(tmp_ / "pharmaharvest.toml").data_root, fs::path(body.at("data_root").get<std::string>()));

    testsupport::spit(tmp_ / "plain-file", "x");
    EXPECT_EQ(put("/api/config", {{"data_root", (tmp_ / "plain-file" / "sub").string()}}).first, 409);
    EXPECT_EQ(put("/api/config", {{"data_root", ""}}).first, 400);
}

TEST(ApiPort, BusyPortIsPortInUse) {
    testsupport::TempDir tmp;
    service::ServiceOptions o;
    o.data_root = tmp / "data";
    o.port = 0;
    service::Service first(o);
    first.bind();
    o.port = first.port();
    service::Service second(o);
    EXPECT_THROW(second.bind(), service::PortInUse);
}
