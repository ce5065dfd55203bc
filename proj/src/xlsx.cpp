#include "pharmaharvest/xlsx.hpp"

#include "pharmaharvest/dom.hpp"
#include "pharmaharvest/errors.hpp"
#include "pharmaharvest/text.hpp"
#include "pharmaharvest/zip.hpp"

#include <map>

namespace pharmaharvest::xlsx {
namespace {

std::string require_member(const zip::Archive& archive, const std::string& name) {
    auto member = archive.extract(name);
    if (!member) throw ParseError("xlsx: missing part " + name);
    return std::move(*member);
}

// "BC12" -> zero-based column 54
std::size_t column_index(std::string_view ref) {
    std::size_t col = 0;
    std::size_t letters = 0;
    for (char c : ref) {
        if (c >= 'A' && c <= 'Z') col = col * 26 + static_cast<std::size_t>(c - 'A' + 1);
        else if (c >= 'a' && c <= 'z') col = col * 26 + static_cast<std::size_t>(c - 'a' + 1);
        else break;
        ++letters;
    }
    if (letters == 0) throw ParseError("xlsx: bad cell reference '" + std::string(ref) + "'");
    return col - 1;
}

std::string string_item_text(const dom::Node& si) {
    // Plain <t>, or rich-text runs <r><t>; phonetic runs (<rPh>) excluded.
    std::string out;
    for (const auto* child : si.element_children()) {
        if (child->local_name() == "t") out += child->raw_text();
        else if (child->local_name() == "r")
            for (const auto* t : child->children_named("t")) out += t->raw_text();
    }
    return out;
}

std::string resolve_part(const std::string& target) {
    if (target.starts_with("/")) return target.substr(1);
    std::vector<std::string> out;
    for (const auto& seg : text::split("xl/" + target, '/')) {
        if (seg == "..") {
            if (!out.empty()) out.pop_back();
        } else if (!seg.empty() && seg != ".") {
            out.push_back(seg);
        }
    }
    std::string path;
    for (const auto& seg : out) path += (path.empty() ? "" : "/") + seg;
    return path;
}

}  // namespace

std::vector<Sheet> read_workbook(std::string_view bytes) {
    if (!zip::looks_like_zip(bytes)) throw ParseError("xlsx: not a zip container");
    const zip::Archive archive(bytes);

    const auto workbook = dom::Document::parse_xml(require_member(archive, "xl/workbook.xml"));
    const auto rels = dom::Document::parse_xml(require_member(archive, "xl/_rels/workbook.xml.rels"));

    std::map<std::string, std::string> targets;
    for (const auto* rel : rels.root().descendants_named("Relationship")) {
        const auto* id = rel->attr("Id");
        const auto* target = rel->attr("Target");
        if (id && target) targets[*id] = resolve_part(*target);
    }

    std::vector<std::string> shared;
    if (auto sst = archive.extract("xl/sharedStrings.xml")) {
        const auto doc = dom::Document::parse_xml(*sst);
        for (const auto* si : doc.root().descendants_named("si")) shared.push_back(string_item_text(*si));
    }

    std::vector<Sheet> out;
    const auto sheet_nodes = workbook.root().descendants_named("sheet");
    if (sheet_nodes.empty()) throw ParseError("xlsx: workbook lists no sheets");
    for (const auto* s : sheet_nodes) {
        Sheet sheet;
        if (const auto* name = s->attr("name")) sheet.name = *name;
        const std::string* rid = s->attr("r:id");
        if (!rid) {
            for (const auto& [k, v] : s->attributes)
                if (k.ends_with(":id")) rid = &v;
        }
        if (!rid || !targets.count(*rid)) throw ParseError("xlsx: sheet '" + sheet.name + "' has no part");
        const auto doc = dom::Document::parse_xml(require_member(archive, targets[*rid]));

        for (const auto* row : doc.root().descendants_named("row")) {
            std::size_t row_index = sheet.rows.size();
            if (const auto* r = row->attr("r")) {
                const auto parsed = std::stoul(*r);
                if (parsed == 0) throw ParseError("xlsx: row index 0");
                row_index = parsed - 1;
            }
            if (row_index < sheet.rows.size()) throw ParseError("xlsx: rows out of order");
            sheet.rows.resize(row_index + 1);
            auto& cells = sheet.rows.back();
            for (const auto* c : row->children_named("c")) {
                std::size_t col = cells.size();
                if (const auto* ref = c->attr("r")) col = column_index(*ref);
                const auto* type = c->attr("t");
                std::string value;
                if (type && *type == "inlineStr") {
                    if (const auto* is = c->first_child_named("is")) value = string_item_text(*is);
                } else if (const auto* v = c->first_child_named("v")) {
                    value = v->raw_text();
                    if (type && *type == "s") {
                        const auto idx = std::stoul(value);
                        if (idx >= shared.size()) throw ParseError("xlsx: shared string index out of range");
                        value = shared[idx];
                    }
                }
                if (cells.size() <= col) cells.resize(col + 1);
                cells[col] = std::move(value);
            }
        }
        out.push_back(std::move(sheet));
    }
    return out;
}

}  // namespace pharmaharvest::xlsx
