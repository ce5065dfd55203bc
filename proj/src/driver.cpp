#include "pharmaharvest/driver.hpp"

#include "pharmaharvest/errors.hpp"
#include "pharmaharvest/fetcher.hpp"
#include "pharmaharvest/serialize.hpp"
#include "pharmaharvest/url.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

namespace pharmaharvest::adapters {
namespace fs = std::filesystem;

namespace {

std::optional<std::string> slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) return std::nullopt;
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void spit(const fs::path& p, std::string_view bytes) {
    std::ofstream out(p, std::ios::binary | std::ios::trunc);
    if (!out) throw NotWritable("cannot write " + p.string());
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

Page make_page(std::string url, std::string html) {
    auto doc = dom::Document::parse_html(html);
    return Page{std::move(url), std::move(html), std::move(doc)};
}

}  // namespace

std::string ReplayStep::file_name() const {
    char buf[16];
    std::snprintf(buf, sizeof buf, "%02d_", step);
    return buf + action + (action == "export" ? ".bin" : ".html");
}

ReplaySession ReplaySession::read(const fs::path& dir) {
    const auto text = slurp(dir / "session.json");
    if (!text) throw NotFound("replay session not found: " + (dir / "session.json").string());
    ReplaySession s;
    try {
        const auto j = Json::parse(*text);
        s.source = j.value("source", "");
        s.term = j.value("term", "");
        s.recorded_at = parse_rfc3339(j.at("recorded_at").get<std::string>());
        for (const auto& st : j.at("steps")) {
            ReplayStep step;
            step.step = st.at("step").get<int>();
            step.action = st.at("action").get<std::string>();
            if (st.contains("selector") && !st.at("selector").is_null())
                step.selector = st.at("selector").get<std::string>();
            step.url = st.value("url", "");
            s.steps.push_back(std::move(step));
        }
    } catch (const nlohmann::json::exception& e) {
        throw ParseError("malformed session.json in " + dir.string() + ": " + e.what());
    }
    return s;
}

void ReplaySession::write(const fs::path& dir) const {
    Json steps_json = Json::array();
    for (const auto& st : steps) {
        steps_json.push_back(Json{{"step", st.step},
                                  {"action", st.action},
                                  {"selector", st.selector ? Json(*st.selector) : Json(nullptr)},
                                  {"url", st.url}});
    }
    const Json j{{"format", 1},
                 {"source", source},
                 {"term", term},
                 {"recorded_at", format_rfc3339(recorded_at)},
                 {"steps", std::move(steps_json)}};
    spit(dir / "session.json", j.dump(2) + "\n");
}

// ---- replay ----

ReplayDriver::ReplayDriver(fs::path dir, Clock* clock, Nanos settle)
    : dir_(std::move(dir)), session_(ReplaySession::read(dir_)), clock_(clock), settle_(settle) {}

const ReplayStep& ReplayDriver::next(std::string_view action, std::optional<std::string_view> selector,
                                     std::optional<std::string_view> url) {
    const std::string wanted(selector.value_or(url.value_or("")));
    if (cursor_ >= session_.steps.size())
        throw DomDrift(wanted, "replay session ended before " + std::string(action));
    const auto& step = session_.steps[cursor_];
    if (step.action != action)
        throw ReplayMismatch("step " + std::to_string(step.step) + ": expected '" + step.action + "', driver issued '" +
                             std::string(action) + "'");
    if (selector && step.selector.value_or("") != *selector)
        throw ReplayMismatch("step " + std::to_string(step.step) + ": recorded selector '" +
                             step.selector.value_or("") + "', driver issued '" + std::string(*selector) + "'");
    if (url && step.url != *url)
        throw ReplayMismatch("step " + std::to_string(step.step) + ": recorded url '" + step.url +
                             "', driver issued '" + std::string(*url) + "'");
    ++cursor_;
    if (clock_) clock_->sleep_for(settle_);
    return step;
}

std::string ReplayDriver::read_snapshot(const ReplayStep& step, std::string_view wanted) const {
    auto bytes = slurp(dir_ / step.file_name());
    if (!bytes) throw DomDrift(std::string(wanted), "snapshot " + step.file_name() + " missing from replay session");
    return std::move(*bytes);
}

Page ReplayDriver::page_for(const ReplayStep& step, std::string_view wanted) {
    return make_page(step.url, read_snapshot(step, wanted));
}

Page ReplayDriver::load(std::string_view url) {
    const auto& step = next("load", std::nullopt, url);
    return page_for(step, url);
}

Page ReplayDriver::click(std::string_view selector) {
    const auto& step = next("click", selector, std::nullopt);
    return page_for(step, selector);
}

Page ReplayDriver::wait_for(std::string_view selector) {
    const auto& step = next("wait", selector, std::nullopt);
    return page_for(step, selector);
}

std::string ReplayDriver::export_file(std::string_view selector) {
    const auto& step = next("export", selector, std::nullopt);
    return read_snapshot(step, selector);
}

// ---- recording ----

RecordingDriver::RecordingDriver(DocumentDriver& inner, fs::path dir, std::string source, std::string term)
    : inner_(inner), dir_(std::move(dir)) {
    fs::create_directories(dir_);
    session_.source = std::move(source);
    session_.term = std::move(term);
}

void RecordingDriver::record(std::string action, std::optional<std::string> selector, const std::string& url,
                             const std::string& bytes) {
    ReplayStep step;
    step.step = static_cast<int>(session_.steps.size()) + 1;
    step.action = std::move(action);
    step.selector = std::move(selector);
    step.url = url;
    spit(dir_ / step.file_name(), bytes);
    session_.steps.push_back(std::move(step));
    session_.recorded_at = inner_.snapshot_time();
    session_.write(dir_);
}

Page RecordingDriver::load(std::string_view url) {
    auto page = inner_.load(url);
    record("load", std::nullopt, std::string(url), page.html);
    return page;
}

Page RecordingDriver::click(std::string_view selector) {
    auto page = inner_.click(selector);
    record("click", std::string(selector), page.url, page.html);
    return page;
}

Page RecordingDriver::wait_for(std::string_view selector) {
    auto page = inner_.wait_for(selector);
    record("wait", std::string(selector), page.url, page.html);
    return page;
}

std::string RecordingDriver::export_file(std::string_view selector) {
    auto bytes = inner_.export_file(selector);
    record("export", std::string(selector), "", bytes);
    return bytes;
}

// ---- static http ----

HttpDocumentDriver::HttpDocumentDriver(fetch::Fetcher& fetcher, Nanos settle, int max_waits)
    : fetcher_(fetcher), settle_(settle), max_waits_(max_waits) {}

Page HttpDocumentDriver::load(std::string_view url) {
    auto result = fetcher_.fetch(url);
    last_fetch_ = result.finished_at;
    fetcher_.clock().sleep_for(settle_);
    current_ = make_page(result.url, std::move(result.body));
    return make_page(current_->url, current_->html);
}

std::string HttpDocumentDriver::href_of(std::string_view selector) const {
    if (!current_) throw DriverError("no page loaded");
    const auto* node = current_->document.select_one(selector);
    if (!node) throw DomDrift(std::string(selector), "live page " + current_->url);
    for (const char* key : {"href", "data-href", "action"})
        if (const auto* v = node->attr(key); v && !v->empty()) return resolve_url(current_->url, *v);
    throw DomDrift(std::string(selector) + "[href]",
                   "element needs script execution, which the static HTTP driver does not provide");
}

Page HttpDocumentDriver::click(std::string_view selector) { return load(href_of(selector)); }

Page HttpDocumentDriver::wait_for(std::string_view selector) {
    if (!current_) throw DriverError("no page loaded");
    for (int i = 0; i < max_waits_; ++i) {
        if (current_->document.select_one(selector)) break;
        fetcher_.clock().sleep_for(settle_);
        load(current_->url);
    }
    return make_page(current_->url, current_->html);
}

std::string HttpDocumentDriver::export_file(std::string_view selector) {
    auto result = fetcher_.fetch(href_of(selector));
    last_fetch_ = result.finished_at;
    return std::move(result.body);
}

}  // namespace pharmaharvest::adapters
