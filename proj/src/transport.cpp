#include "pharmaharvest/transport.hpp"

#include "pharmaharvest/errors.hpp"
#include "pharmaharvest/url.hpp"

#include <httplib.h>

#include <fstream>
#include <sstream>

namespace pharmaharvest::fetch {

TransportResponse HttpTransport::get(const TransportRequest& request) {
    const Url url = parse_url(request.url);
    httplib::Client client(url.origin());
    const auto secs = std::chrono::duration_cast<std::chrono::seconds>(request.timeout);
    const auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(request.timeout - secs);
    client.set_connection_timeout(secs.count(), usecs.count());
    client.set_read_timeout(secs.count(), usecs.count());
    client.set_write_timeout(secs.count(), usecs.count());
    client.set_follow_location(true);

    httplib::Headers headers{{"User-Agent", request.user_agent}};
    auto result = client.Get(url.target, headers);
    if (!result) {
        const auto err = result.error();
        if (err == httplib::Error::ConnectionTimeout || err == httplib::Error::Read)
            throw Timeout("request to " + request.url + " timed out (" + httplib::to_string(err) + ")");
        throw TransportError("request to " + request.url + " failed: " + httplib::to_string(err));
    }
    TransportResponse out;
    out.status = result->status;
    out.body = std::move(result->body);
    out.content_type = result->get_header_value("Content-Type");
    return out;
}

TransportResponse DirectoryTransport::get(const TransportRequest& request) {
    ++hits_;
    const auto path = parse_url(request.url).path();
    const auto name = path.substr(path.find_last_of('/') + 1);
    TransportResponse out;
    std::ifstream in(dir_ / name, std::ios::binary);
    if (name.empty() || !in) {
        out.status = 404;
        return out;
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    out.status = 200;
    out.body = ss.str();
    out.content_type = name.size() > 4 && name.substr(name.size() - 4) == ".zip" ? "application/zip" : "text/html";
    return out;
}

}  // namespace pharmaharvest::fetch
