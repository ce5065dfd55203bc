#include "pharmaharvest/csv.hpp"

#include "pharmaharvest/errors.hpp"

#include <algorithm>
#include <charconv>
#include <tuple>

namespace pharmaharvest::csv {

std::string format_row(std::span<const std::string> fields) {
    std::string out;
    for (std::size_t i = 0; i < fields.size(); ++i) {
        if (i) out.push_back(',');
        const auto& f = fields[i];
        if (f.find_first_of(",\"\r\n") == std::string::npos) {
            out += f;
            continue;
        }
        out.push_back('"');
        for (char c : f) {
            if (c == '"') out.push_back('"');
            out.push_back(c);
        }
        out.push_back('"');
    }
    out += "\r\n";
    return out;
}

std::vector<Row> parse(std::string_view doc) {
    std::vector<Row> rows;
    Row row;
    std::string field;
    bool in_quotes = false;
    bool row_has_content = false;
    for (std::size_t i = 0; i < doc.size(); ++i) {
        const char c = doc[i];
        if (in_quotes) {
            if (c == '"') {
                if (i + 1 < doc.size() && doc[i + 1] == '"') {
                    field.push_back('"');
                    ++i;
                } else {
                    in_quotes = false;
                }
            } else {
                field.push_back(c);
            }
            continue;
        }
        switch (c) {
            case '"':
                in_quotes = true;
                row_has_content = true;
                break;
            case ',':
                row.push_back(std::move(field));
                field.clear();
                row_has_content = true;
                break;
            case '\r':
                if (i + 1 < doc.size() && doc[i + 1] == '\n') break;
                [[fallthrough]];
            case '\n':
                row.push_back(std::move(field));
                field.clear();
                rows.push_back(std::move(row));
                row = {};
                row_has_content = false;
                break;
            default:
                field.push_back(c);
                row_has_content = true;
        }
    }
    if (in_quotes) throw ParseError("unterminated quoted CSV field");
    if (row_has_content) {
        row.push_back(std::move(field));
        rows.push_back(std::move(row));
    }
    return rows;
}

std::string write_records(std::span<const CountRecord> records) {
    std::vector<const CountRecord*> order;
    order.reserve(records.size());
    for (const auto& r : records) order.push_back(&r);
    std::sort(order.begin(), order.end(), [](const CountRecord* x, const CountRecord* y) {
        return std::forward_as_tuple(x->source, x->drug, x->soc, x->reaction, x->count) <
               std::forward_as_tuple(y->source, y->drug, y->soc, y->reaction, y->count);
    });

    std::string out(kRecordHeader);
    out += "\r\n";
    for (const auto* r : order) {
        const std::string fields[] = {
            std::string(to_string(r->source)),
            r->drug,
            r->soc.value_or(""),
            r->reaction,
            std::to_string(r->count),
            format_rfc3339(r->retrieved_at),
            r->adapter_version,
        };
        out += format_row(fields);
    }
    return out;
}

std::vector<CountRecord> read_records(std::string_view document) {
    if (document.starts_with("\xEF\xBB\xBF")) document.remove_prefix(3);
    const auto rows = parse(document);
    if (rows.empty()) throw ParseError("CSV document is empty");

    std::string header;
    for (std::size_t i = 0; i < rows[0].size(); ++i) header += (i ? "," : "") + rows[0][i];
    if (header != kRecordHeader) throw ParseError("unexpected CSV header: " + header);

    std::vector<CountRecord> out;
    out.reserve(rows.size() - 1);
    for (std::size_t n = 1; n < rows.size(); ++n) {
        const auto& row = rows[n];
        if (row.size() != 7) throw ParseError("CSV row " + std::to_string(n + 1) + " has wrong field count");
        CountRecord r;
        const auto source = parse_source_id(row[0]);
        if (!source) throw ParseError("unknown source '" + row[0] + "'");
        r.source = *source;
        r.drug = row[1];
        r.raw_drug = row[1];
        if (!row[2].empty()) r.soc = row[2];
        r.reaction = row[3];
        const auto* first = row[4].data();
        const auto* last = first + row[4].size();
        auto [ptr, ec] = std::from_chars(first, last, r.count);
        if (ec != std::errc{} || ptr != last || row[4].empty())
            throw ParseError("bad count '" + row[4] + "' in CSV row " + std::to_string(n + 1));
        r.retrieved_at = parse_rfc3339(row[5]);
        r.adapter_version = row[6];
        out.push_back(std::move(r));
    }
    return out;
}

}  // namespace pharmaharvest::csv
