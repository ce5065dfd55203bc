#pragma once

#include "pharmaharvest/types.hpp"

#include <json.hpp>

namespace pharmaharvest {

using Json = nlohmann::json;

// nlohmann ADL hooks. Enums serialize as their lowercase wire names and
// optionals as null. from_json throws ParseError on unknown enum names.

void to_json(Json& j, SourceId v);
void from_json(const Json& j, SourceId& v);
void to_json(Json& j, AccessMode v);
void from_json(const Json& j, AccessMode& v);
void to_json(Json& j, AccessLevel v);
void from_json(const Json& j, AccessLevel& v);
void to_json(Json& j, FileFormat v);
void from_json(const Json& j, FileFormat& v);

void to_json(Json& j, const SourceDescriptor& v);
void from_json(const Json& j, SourceDescriptor& v);
void to_json(Json& j, const CountRecord& v);
void from_json(const Json& j, CountRecord& v);
void to_json(Json& j, const CountMatrix& v);
void from_json(const Json& j, CountMatrix& v);
void to_json(Json& j, const TwoByTwo& v);
void from_json(const Json& j, TwoByTwo& v);
void to_json(Json& j, const ManifestEntry& v);
void from_json(const Json& j, ManifestEntry& v);
void to_json(Json& j, const DatasetManifest& v);
void from_json(const Json& j, DatasetManifest& v);

}  // namespace pharmaharvest
