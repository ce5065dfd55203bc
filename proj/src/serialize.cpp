#include "pharmaharvest/serialize.hpp"

#include "pharmaharvest/errors.hpp"

namespace pharmaharvest {
namespace {

template <typename T, typename Parser>
T parse_enum(const Json& j, Parser parse, const char* what) {
    const auto name = j.get<std::string>();
    const auto value = parse(name);
    if (!value) throw ParseError(std::string("unknown ") + what + " '" + name + "'");
    return *value;
}

std::optional<std::string> opt_string(const Json& j, const char* key) {
    if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
    return j.at(key).get<std::string>();
}

}  // namespace

void to_json(Json& j, SourceId v) { j = std::string(to_string(v)); }
void from_json(const Json& j, SourceId& v) { v = parse_enum<SourceId>(j, parse_source_id, "source"); }
void to_json(Json& j, AccessMode v) { j = std::string(to_string(v)); }
void from_json(const Json& j, AccessMode& v) { v = parse_enum<AccessMode>(j, parse_access_mode, "access mode"); }
void to_json(Json& j, AccessLevel v) { j = std::string(to_string(v)); }
void from_json(const Json& j, AccessLevel& v) { v = parse_enum<AccessLevel>(j, parse_access_level, "access level"); }
void to_json(Json& j, FileFormat v) { j = std::string(to_string(v)); }
void from_json(const Json& j, FileFormat& v) { v = parse_enum<FileFormat>(j, parse_file_format, "format"); }

void to_json(Json& j, const SourceDescriptor& v) {
    j = Json{{"id", v.id},
             {"display_name", v.display_name},
             {"access_mode", v.access_mode},
             {"access_level", v.access_level},
             {"native_format", v.native_format},
             {"base_url", v.base_url},
             {"robots_url", v.robots_url ? Json(*v.robots_url) : Json(nullptr)}};
}

void from_json(const Json& j, SourceDescriptor& v) {
    j.at("id").get_to(v.id);
    j.at("display_name").get_to(v.display_name);
    j.at("access_mode").get_to(v.access_mode);
    j.at("access_level").get_to(v.access_level);
    j.at("native_format").get_to(v.native_format);
    j.at("base_url").get_to(v.base_url);
    v.robots_url = opt_string(j, "robots_url");
}

void to_json(Json& j, const CountRecord& v) {
    j = Json{{"source", v.source},
             {"drug", v.drug},
             {"raw_drug", v.raw_drug},
             {"soc", v.soc ? Json(*v.soc) : Json(nullptr)},
             {"reaction", v.reaction},
             {"count", v.count},
             {"retrieved_at", format_rfc3339(v.retrieved_at)},
             {"adapter_version", v.adapter_version}};
}

void from_json(const Json& j, CountRecord& v) {
    j.at("source").get_to(v.source);
    j.at("drug").get_to(v.drug);
    v.raw_drug = j.contains("raw_drug") ? j.at("raw_drug").get<std::string>() : v.drug;
    v.soc = opt_string(j, "soc");
    j.at("reaction").get_to(v.reaction);
    j.at("count").get_to(v.count);
    v.retrieved_at = parse_rfc3339(j.at("retrieved_at").get<std::string>());
    j.at("adapter_version").get_to(v.adapter_version);
}

void to_json(Json& j, const CountMatrix& v) {
    Json cells = Json::array();
    for (std::size_t i = 0; i < v.rows(); ++i) {
        Json row = Json::array();
        for (std::size_t c = 0; c < v.cols(); ++c) row.push_back(v.at(i, c));
        cells.push_back(std::move(row));
    }
    j = Json{{"ae_labels", v.ae_labels()}, {"drug_labels", v.drug_labels()}, {"cells", std::move(cells)}};
}

void from_json(const Json& j, CountMatrix& v) {
    auto ae = j.at("ae_labels").get<std::vector<std::string>>();
    auto drugs = j.at("drug_labels").get<std::vector<std::string>>();
    std::vector<std::uint64_t> cells;
    const auto& rows = j.at("cells");
    if (rows.size() != ae.size()) throw ParseError("matrix row count does not match ae_labels");
    for (const auto& row : rows) {
        if (row.size() != drugs.size()) throw ParseError("matrix column count does not match drug_labels");
        for (const auto& c : row) cells.push_back(c.get<std::uint64_t>());
    }
    v = CountMatrix(std::move(ae), std::move(drugs), std::move(cells));
}

void to_json(Json& j, const TwoByTwo& v) { j = Json{{"a", v.a}, {"b", v.b}, {"c", v.c}, {"d", v.d}}; }

void from_json(const Json& j, TwoByTwo& v) {
    j.at("a").get_to(v.a);
    j.at("b").get_to(v.b);
    j.at("c").get_to(v.c);
    j.at("d").get_to(v.d);
}

void to_json(Json& j, const ManifestEntry& v) {
    j = Json{{"source", v.source},
             {"query_or_quarter", v.query_or_quarter},
             {"file_path", v.file_path},
             {"format", v.format},
             {"byte_size", v.byte_size},
             {"checksum", v.checksum},
             {"retrieved_at", format_rfc3339(v.retrieved_at)},
             {"source_url", v.source_url}};
}

void from_json(const Json& j, ManifestEntry& v) {
    j.at("source").get_to(v.source);
    j.at("query_or_quarter").get_to(v.query_or_quarter);
    j.at("file_path").get_to(v.file_path);
    j.at("format").get_to(v.format);
    j.at("byte_size").get_to(v.byte_size);
    j.at("checksum").get_to(v.checksum);
    v.retrieved_at = parse_rfc3339(j.at("retrieved_at").get<std::string>());
    j.at("source_url").get_to(v.source_url);
}

void to_json(Json& j, const DatasetManifest& v) {
    j = Json{{"schema_version", DatasetManifest::kSchemaVersion}, {"entries", v.entries}};
}

void from_json(const Json& j, DatasetManifest& v) {
    const int version = j.value("schema_version", 0);
    if (version != DatasetManifest::kSchemaVersion)
        throw ParseError("unsupported manifest schema_version " + std::to_string(version));
    v.entries = j.at("entries").get<std::vector<ManifestEntry>>();
}

}  // namespace pharmaharvest
