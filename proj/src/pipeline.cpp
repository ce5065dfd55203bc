#include "pharmaharvest/pipeline.hpp"

#include "pharmaharvest/csv.hpp"
#include "pharmaharvest/errors.hpp"
#include "pharmaharvest/faers.hpp"
#include "pharmaharvest/text.hpp"

#include <fstream>
#include <sstream>

namespace pharmaharvest {
namespace fs = std::filesystem;

namespace {

std::vector<CountRecord> decode(FileFormat format, const std::string& bytes, const std::string& label,
                                Timestamp retrieved_at, const std::string& where) {
    switch (format) {
        case FileFormat::Csv: return csv::read_records(bytes);
        case FileFormat::Xlsx: return adapters::parse_daen_export(bytes, label, retrieved_at);
        case FileFormat::Zip: {
            adapters::JoinOptions opts;
            opts.retrieved_at = retrieved_at;
            return adapters::join_faers_archive(bytes, opts);
        }
    }
    throw InvalidArgument("unsupported dataset format for " + where);
}

}  // namespace

ManifestEntry store_search(store::Layout& layout, const DrugQuery& query, const adapters::SearchOutcome& outcome) {
    if (query.source == SourceId::Daen) {
        if (!outcome.export_bytes) throw InvalidArgument("DAEN search outcome carries no export workbook");
        const auto at = outcome.records.empty() ? std::optional<Timestamp>{} : outcome.records.front().retrieved_at;
        return layout.write_blob(SourceId::Daen, query.term, *outcome.export_bytes, FileFormat::Xlsx,
                                 store::BlobNaming::Timestamped, at, outcome.source_url);
    }
    return layout.write_records(query.source, query.term, outcome.records, outcome.source_url);
}

std::vector<CountRecord> load_dataset(const store::Layout& layout, const ManifestEntry& entry) {
    return decode(entry.format, layout.read(entry), entry.query_or_quarter, entry.retrieved_at, entry.file_path);
}

std::vector<CountRecord> load_dataset_file(const fs::path& file) {
    std::ifstream in(file, std::ios::binary);
    if (!in) throw NotFound("cannot read " + file.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    const auto ext = text::lower(file.extension().string());
    const auto format = parse_file_format(ext.empty() ? ext : ext.substr(1));
    if (!format) throw InvalidArgument(file.string() + ": expected a .csv, .xlsx or .zip dataset");
    return decode(*format, ss.str(), file.stem().string(), Timestamp{}, file.string());
}

fs::path replay_session_dir(const fs::path& root, SourceId source, std::string_view term) {
    return root / std::string(to_string(source)) / text::slug(term);
}

}  // namespace pharmaharvest
