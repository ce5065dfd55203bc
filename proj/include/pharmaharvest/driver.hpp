#pragma once

#include "pharmaharvest/clock.hpp"
#include "pharmaharvest/dom.hpp"
#include "pharmaharvest/timefmt.hpp"

#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace pharmaharvest::fetch {
class Fetcher;
}

namespace pharmaharvest::adapters {

/// One observed state of a page.
struct Page {
    std::string url;
    std::string html;
    dom::Document document;
};

/// Browser-like access to a source. Every interaction returns the page as
/// it looks after the interaction has settled.
class DocumentDriver {
public:
    virtual ~DocumentDriver() = default;

    virtual Page load(std::string_view url) = 0;
    virtual Page click(std::string_view selector) = 0;
    /// Waits until `selector` is present, or gives up; the caller inspects
    /// the returned page to tell which.
    virtual Page wait_for(std::string_view selector) = 0;
    /// Bytes of the file the element at `selector` points to.
    virtual std::string export_file(std::string_view selector) = 0;

    /// Provenance time for records derived from the current session.
    virtual Timestamp snapshot_time() const = 0;
};

struct ReplayStep {
    int step = 0;
    std::string action;  ///< load | click | wait | export
    std::optional<std::string> selector;
    std::string url;

    /// "NN_<action>.html", or ".bin" for exports.
    std::string file_name() const;
};

/// Parsed session.json of a recorded session directory.
struct ReplaySession {
    std::string source;
    std::string term;
    Timestamp recorded_at{};
    std::vector<ReplayStep> steps;

    static ReplaySession read(const std::filesystem::path& dir);
    void write(const std::filesystem::path& dir) const;
};

/// Serves a recorded session. Steps are consumed strictly in order: an
/// action whose kind, selector or URL differs from the next recorded step
/// raises ReplayMismatch; running past the end of the session or reaching
/// a step whose snapshot file is missing raises DomDrift, since the page
/// the caller expected never materialised. Never touches the network.
class ReplayDriver final : public DocumentDriver {
public:
    /// `settle` is slept on `clock` after every step.
    explicit ReplayDriver(std::filesystem::path dir, Clock* clock = nullptr, Nanos settle = Nanos::zero());

    Page load(std::string_view url) override;
    Page click(std::string_view selector) override;
    Page wait_for(std::string_view selector) override;
    std::string export_file(std::string_view selector) override;
    Timestamp snapshot_time() const override { return session_.recorded_at; }

    const ReplaySession& session() const noexcept { return session_; }
    std::size_t steps_consumed() const noexcept { return cursor_; }

private:
    const ReplayStep& next(std::string_view action, std::optional<std::string_view> selector,
                           std::optional<std::string_view> url);
    std::string read_snapshot(const ReplayStep& step, std::string_view wanted) const;
    Page page_for(const ReplayStep& step, std::string_view wanted);

    std::filesystem::path dir_;
    ReplaySession session_;
    std::size_t cursor_ = 0;
    Clock* clock_;
    Nanos settle_;
};

/// Forwards to another driver and writes every observed snapshot into a
/// session directory that ReplayDriver can serve later.
class RecordingDriver final : public DocumentDriver {
public:
    RecordingDriver(DocumentDriver& inner, std::filesystem::path dir, std::string source, std::string term);

    Page load(std::string_view url) override;
    Page click(std::string_view selector) override;
    Page wait_for(std::string_view selector) override;
    std::string export_file(std::string_view selector) override;
    Timestamp snapshot_time() const override { return inner_.snapshot_time(); }

private:
    void record(std::string action, std::optional<std::string> selector, const std::string& url,
                const std::string& bytes);

    DocumentDriver& inner_;
    std::filesystem::path dir_;
    ReplaySession session_;
};

/// Live driver for static markup: loads go through the polite Fetcher,
/// clicks follow the element's href (or data-href), waits re-fetch the
/// current page a bounded number of times. Script-driven widgets are out
/// of its reach and surface as DomDrift.
class HttpDocumentDriver final : public DocumentDriver {
public:
    explicit HttpDocumentDriver(fetch::Fetcher& fetcher, Nanos settle = Nanos::zero(), int max_waits = 3);

    Page load(std::string_view url) override;
    Page click(std::string_view selector) override;
    Page wait_for(std::string_view selector) override;
    std::string export_file(std::string_view selector) override;
    Timestamp snapshot_time() const override { return last_fetch_; }

private:
    std::string href_of(std::string_view selector) const;

    fetch::Fetcher& fetcher_;
    Nanos settle_;
    int max_waits_;
    std::optional<Page> current_;
    Timestamp last_fetch_{};
};

}  // namespace pharmaharvest::adapters
