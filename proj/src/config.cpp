#include "pharmaharvest/config.hpp"

#include "pharmaharvest/errors.hpp"
#include "pharmaharvest/store.hpp"
#include "pharmaharvest/text.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <variant>

namespace pharmaharvest {
namespace {

using Value = std::variant<std::string, long long, bool>;

[[noreturn]] void fail(int line, const std::string& what) {
    throw ParseError("pharmaharvest.toml line " + std::to_string(line) + ": " + what);
}

Value parse_value(std::string_view v, int line) {
    if (v.empty()) fail(line, "missing value");
    if (v.front() == '"') {
        std::string out;
        std::size_t i = 1;
        for (; i < v.size() && v[i] != '"'; ++i) {
            if (v[i] != '\\') {
                out.push_back(v[i]);
                continue;
            }
            if (++i >= v.size()) fail(line, "dangling escape");
            switch (v[i]) {
                case 'n': out.push_back('\n'); break;
                case 't': out.push_back('\t'); break;
                case '"': out.push_back('"'); break;
                case '\\': out.push_back('\\'); break;
                default: fail(line, "unsupported escape");
            }
        }
        if (i >= v.size()) fail(line, "unterminated string");
        const auto rest = text::trim(v.substr(i + 1));
        if (!rest.empty() && rest.front() != '#') fail(line, "trailing characters after string");
        return out;
    }
    const auto hash = v.find('#');
    const auto bare = std::string(text::trim(v.substr(0, hash)));
    if (bare == "true") return true;
    if (bare == "false") return false;
    std::string digits;
    for (char c : bare)
        if (c != '_') digits.push_back(c);
    long long n = 0;
    const auto [p, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), n);
    if (ec != std::errc{} || p != digits.data() + digits.size() || digits.empty())
        fail(line, "unsupported value '" + bare + "'");
    return n;
}

long long as_int(const Value& v, int line, std::string_view key) {
    if (const auto* n = std::get_if<long long>(&v)) return *n;
    fail(line, std::string(key) + " must be an integer");
}

std::string as_string(const Value& v, int line, std::string_view key) {
    if (const auto* s = std::get_if<std::string>(&v)) return *s;
    fail(line, std::string(key) + " must be a string");
}

std::string quote(const std::string& s) {
    std::string out = "\"";
    for (char c : s) {
        if (c == '"' || c == '\\') out.push_back('\\');
        out.push_back(c);
    }
    return out + "\"";
}

}  // namespace

Config parse_config(std::string_view toml) {
    Config cfg;
    std::string table;
    int line_no = 0;
    for (const auto& raw : text::split(toml, '\n')) {
        ++line_no;
        const auto line = text::trim(raw);
        if (line.empty() || line.front() == '#') continue;
        if (line.front() == '[') {
            const auto close = line.find(']');
            if (close == std::string_view::npos) fail(line_no, "unterminated table header");
            table = std::string(text::trim(line.substr(1, close - 1)));
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string_view::npos) fail(line_no, "expected key = value");
        const auto key = std::string(text::trim(line.substr(0, eq)));
        const auto value = parse_value(text::trim(line.substr(eq + 1)), line_no);

        if (table.empty() && key == "data_root") {
            cfg.data_root = as_string(value, line_no, key);
        } else if (table == "politeness") {
            auto& p = cfg.politeness;
            if (key == "min_interhost_delay_ms") p.min_interhost_delay = fetch::Millis(as_int(value, line_no, key));
            else if (key == "per_step_settle_ms") p.per_step_settle_delay = fetch::Millis(as_int(value, line_no, key));
            else if (key == "max_retries") p.max_retries = static_cast<int>(as_int(value, line_no, key));
            else if (key == "request_timeout_ms") p.request_timeout = fetch::Millis(as_int(value, line_no, key));
            else if (key == "user_agent") p.user_agent = as_string(value, line_no, key);
            else fail(line_no, "unknown key politeness." + key);
        } else if (table == "politeness.settle_ms") {
            const auto id = parse_source_id(key);
            if (!id) fail(line_no, "unknown source '" + key + "'");
            cfg.politeness.settle_overrides[*id] = fetch::Millis(as_int(value, line_no, key));
        } else if (table == "service") {
            if (key == "port") cfg.port = static_cast<int>(as_int(value, line_no, key));
            else if (key == "bind") cfg.bind = as_string(value, line_no, key);
            else fail(line_no, "unknown key service." + key);
        } else {
            fail(line_no, "unknown key " + (table.empty() ? key : table + "." + key));
        }
    }
    try {
        cfg.politeness.validate();
    } catch (const InvalidArgument& e) {
        throw ParseError(std::string("pharmaharvest.toml: ") + e.what());
    }
    return cfg;
}

Config load_config(const std::filesystem::path& file) {
    std::ifstream in(file, std::ios::binary);
    if (!in) return Config{};
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

std::string render_config(const Config& c) {
    const auto& p = c.politeness;
    std::ostringstream out;
    out << "data_root = " << quote(c.data_root.string()) << "\n\n"
        << "[politeness]\n"
        << "min_interhost_delay_ms = " << p.min_interhost_delay.count() << "\n"
        << "per_step_settle_ms = " << p.per_step_settle_delay.count() << "\n"
        << "max_retries = " << p.max_retries << "\n"
        << "request_timeout_ms = " << p.request_timeout.count() << "\n"
        << "user_agent = " << quote(p.user_agent) << "\n";
    if (!p.settle_overrides.empty()) {
        out << "\n[politeness.settle_ms]\n";
        for (const auto& [id, ms] : p.settle_overrides) out << to_string(id) << " = " << ms.count() << "\n";
    }
    out << "\n[service]\nport = " << c.port << "\nbind = " << quote(c.bind) << "\n";
    return out.str();
}

void save_config(const std::filesystem::path& file, const Config& config) {
    store::atomic_write(file, render_config(config));
}

}  // namespace pharmaharvest
