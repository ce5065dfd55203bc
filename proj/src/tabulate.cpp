#include "pharmaharvest/tabulate.hpp"

#include "pharmaharvest/csv.hpp"
#include "pharmaharvest/errors.hpp"
#include "pharmaharvest/serialize.hpp"
#include "pharmaharvest/text.hpp"

#include <algorithm>
#include <charconv>
#include <map>
#include <set>

namespace pharmaharvest::tabulate {
namespace {

struct Label {
    std::string display;
    std::size_t index = 0;
};

void note_label(std::map<std::string, Label>& labels, std::string_view raw) {
    const auto display = text::collapse_whitespace(raw);
    const auto key = text::label_key(display);
    auto [it, inserted] = labels.emplace(key, Label{display, 0});
    if (!inserted && display < it->second.display) it->second.display = display;
}

std::size_t require_drug(const CountMatrix& m, std::string_view drug) {
    const auto j = m.drug_index(drug);
    if (!j) throw UnknownLabel("drug '" + std::string(drug) + "' is not a column of the matrix");
    return *j;
}

std::size_t require_ae(const CountMatrix& m, std::string_view ae) {
    const auto i = m.ae_index(ae);
    if (!i) throw UnknownLabel("reaction '" + std::string(ae) + "' is not a row of the matrix");
    return *i;
}

std::vector<bool> class_mask(const CountMatrix& m, std::span<const std::string> members) {
    std::vector<bool> in_class(m.cols(), false);
    for (const auto& member : members) in_class[require_drug(m, member)] = true;
    return in_class;
}

std::uint64_t parse_u64(std::string_view s, std::string_view what) {
    std::uint64_t v = 0;
    const auto t = text::trim(s);
    const auto [p, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (ec != std::errc{} || p != t.data() + t.size() || t.empty())
        throw ParseError("bad count '" + std::string(s) + "' in " + std::string(what));
    return v;
}

}  // namespace

CountMatrix assemble_matrix(std::span<const CountRecord> records) {
    std::map<std::string, Label> aes, drugs;
    for (const auto& r : records) {
        note_label(aes, r.reaction);
        note_label(drugs, r.drug);
    }
    std::vector<std::string> ae_labels, drug_labels;
    for (auto& [key, label] : aes) {
        label.index = ae_labels.size();
        ae_labels.push_back(label.display);
    }
    for (auto& [key, label] : drugs) {
        label.index = drug_labels.size();
        drug_labels.push_back(label.display);
    }
    std::vector<std::uint64_t> cells(ae_labels.size() * drug_labels.size(), 0);
    for (const auto& r : records) {
        const auto i = aes.at(text::label_key(r.reaction)).index;
        const auto j = drugs.at(text::label_key(r.drug)).index;
        cells[i * drug_labels.size() + j] += r.count;
    }
    return CountMatrix(std::move(ae_labels), std::move(drug_labels), std::move(cells));
}

Marginals marginals(const CountMatrix& m) {
    Marginals out;
    out.row_totals.assign(m.rows(), 0);
    out.col_totals.assign(m.cols(), 0);
    for (std::size_t i = 0; i < m.rows(); ++i) {
        for (std::size_t j = 0; j < m.cols(); ++j) {
            const auto v = m.at(i, j);
            out.row_totals[i] += v;
            out.col_totals[j] += v;
            out.grand += v;
        }
    }
    return out;
}

TwoByTwo two_by_two(const CountMatrix& m, std::string_view ae, std::string_view drug, const OtherDrugsMode& mode) {
    const auto i = require_ae(m, ae);
    const auto j = require_drug(m, drug);

    std::vector<bool> excluded(m.cols(), false);
    if (mode.kind == OtherDrugsMode::Kind::AeBased) {
        excluded[j] = true;
    } else {
        excluded = class_mask(m, mode.class_members);
        if (!excluded[j])
            throw ClassMissingTarget("drug class does not contain the target drug '" + std::string(drug) + "'");
    }

    TwoByTwo t;
    t.a = m.at(i, j);
    std::uint64_t col = 0, comparator_total = 0;
    for (std::size_t r = 0; r < m.rows(); ++r) {
        col += m.at(r, j);
        for (std::size_t k = 0; k < m.cols(); ++k)
            if (!excluded[k]) comparator_total += m.at(r, k);
    }
    for (std::size_t k = 0; k < m.cols(); ++k)
        if (!excluded[k]) t.b += m.at(i, k);
    t.c = col - t.a;
    t.d = comparator_total - t.b;
    return t;
}

std::vector<std::uint64_t> other_drugs_column(const CountMatrix& m, std::span<const std::string> class_members) {
    const auto in_class = class_mask(m, class_members);
    std::vector<std::uint64_t> out(m.rows(), 0);
    for (std::size_t i = 0; i < m.rows(); ++i)
        for (std::size_t k = 0; k < m.cols(); ++k)
            if (!in_class[k]) out[i] += m.at(i, k);
    return out;
}

CountMatrix select_drugs(const CountMatrix& m, std::span<const std::string> drugs) {
    std::set<std::size_t> keep;
    for (const auto& d : drugs) keep.insert(require_drug(m, d));
    std::vector<std::string> labels;
    for (const auto j : keep) labels.push_back(m.drug_labels()[j]);
    std::vector<std::uint64_t> cells;
    cells.reserve(m.rows() * keep.size());
    for (std::size_t i = 0; i < m.rows(); ++i)
        for (const auto j : keep) cells.push_back(m.at(i, j));
    return CountMatrix(m.ae_labels(), std::move(labels), std::move(cells));
}

CountMatrix select_reactions(const CountMatrix& m, std::span<const std::string> reactions) {
    std::set<std::size_t> keep;
    for (const auto& r : reactions) keep.insert(require_ae(m, r));
    std::vector<std::string> labels;
    std::vector<std::uint64_t> cells;
    for (const auto i : keep) {
        labels.push_back(m.ae_labels()[i]);
        for (std::size_t j = 0; j < m.cols(); ++j) cells.push_back(m.at(i, j));
    }
    return CountMatrix(std::move(labels), m.drug_labels(), std::move(cells));
}

TableResult build_table(std::span<const CountRecord> records, const TableRequest& request) {
    const auto full = assemble_matrix(records);
    TableResult out;
    if (request.mode.kind == OtherDrugsMode::Kind::DrugBased) {
        if (request.mode.class_members.empty()) throw ClassMissingTarget("drug-based mode needs a drug class");
        out.other = other_drugs_column(full, request.mode.class_members);
        std::set<std::string> members;
        for (const auto& m : request.mode.class_members) members.insert(text::label_key(m));
        const auto& targets = request.drugs.empty() ? full.drug_labels() : request.drugs;
        for (const auto& d : targets) {
            require_drug(full, d);
            if (!members.count(text::label_key(d)))
                throw ClassMissingTarget("drug class does not contain the target drug '" + d + "'");
        }
    }
    out.matrix = request.drugs.empty() ? full : select_drugs(full, request.drugs);
    if (!request.reactions.empty()) {
        std::set<std::size_t> keep;
        for (const auto& r : request.reactions) keep.insert(require_ae(full, r));
        if (out.other) {
            std::vector<std::uint64_t> filtered;
            for (const auto i : keep) filtered.push_back((*out.other)[i]);
            out.other = std::move(filtered);
        }
        out.matrix = select_reactions(out.matrix, request.reactions);
    }
    return out;
}

std::string export_csv(const CountMatrix& m, const std::optional<std::vector<std::uint64_t>>& other) {
    if (other && other->size() != m.rows()) throw InvalidArgument("other-drugs column length differs from row count");
    std::vector<std::string> row{"PT"};
    row.insert(row.end(), m.drug_labels().begin(), m.drug_labels().end());
    if (other) row.emplace_back(kOtherDrugsHeader);
    std::string out = csv::format_row(row);
    for (std::size_t i = 0; i < m.rows(); ++i) {
        row.assign({m.ae_labels()[i]});
        for (std::size_t j = 0; j < m.cols(); ++j) row.push_back(std::to_string(m.at(i, j)));
        if (other) row.push_back(std::to_string((*other)[i]));
        out += csv::format_row(row);
    }
    return out;
}

std::string export_json(const CountMatrix& m, const std::optional<std::vector<std::uint64_t>>& other) {
    if (other && other->size() != m.rows()) throw InvalidArgument("other-drugs column length differs from row count");
    Json j = m;
    j["other_drugs"] = other ? Json(*other) : Json(nullptr);
    return j.dump(2) + "\n";
}

std::string export_csv(const TwoByTwo& t) {
    const std::vector<std::string> header{"a", "b", "c", "d"};
    const std::vector<std::string> row{std::to_string(t.a), std::to_string(t.b), std::to_string(t.c),
                                       std::to_string(t.d)};
    return csv::format_row(header) + csv::format_row(row);
}

std::string export_json(const TwoByTwo& t) { return Json(t).dump(2) + "\n"; }

ParsedTable parse_csv(std::string_view document) {
    const auto rows = csv::parse(document);
    if (rows.empty() || rows.front().empty() || rows.front().front() != "PT")
        throw ParseError("table CSV must start with a PT column");
    auto header = rows.front();
    const bool has_other = header.size() > 1 && header.back() == kOtherDrugsHeader;
    const std::size_t ndrugs = header.size() - 1 - (has_other ? 1 : 0);
    std::vector<std::string> drugs(header.begin() + 1, header.begin() + 1 + static_cast<std::ptrdiff_t>(ndrugs));
    std::vector<std::string> aes;
    std::vector<std::uint64_t> cells, other;
    for (std::size_t r = 1; r < rows.size(); ++r) {
        const auto& row = rows[r];
        if (row.size() != header.size()) throw ParseError("table CSV row " + std::to_string(r + 1) + " has wrong width");
        aes.push_back(row[0]);
        for (std::size_t j = 0; j < ndrugs; ++j) cells.push_back(parse_u64(row[1 + j], "table CSV"));
        if (has_other) other.push_back(parse_u64(row.back(), "table CSV"));
    }
    ParsedTable out;
    try {
        out.matrix = CountMatrix(std::move(aes), std::move(drugs), std::move(cells));
    } catch (const InvalidArgument& e) {
        throw ParseError(std::string("table CSV: ") + e.what());
    }
    if (has_other) out.other = std::move(other);
    return out;
}

ParsedTable parse_json(std::string_view document) {
    ParsedTable out;
    try {
        const auto j = Json::parse(document);
        out.matrix = j.get<CountMatrix>();
        if (j.contains("other_drugs") && !j.at("other_drugs").is_null())
            out.other = j.at("other_drugs").get<std::vector<std::uint64_t>>();
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("table JSON: ") + e.what());
    }
    return out;
}

}  // namespace pharmaharvest::tabulate
