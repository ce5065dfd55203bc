#include "pharmaharvest/sources.hpp"

#include "pharmaharvest/errors.hpp"

#include <cctype>

namespace pharmaharvest::adapters {

const std::vector<SourceDescriptor>& list_sources() {
    static const std::vector<SourceDescriptor> sources = {
        {SourceId::Daen, "Australian Database of Adverse Event Notifications (DAEN)", AccessMode::SearchAggregate,
         AccessLevel::Medium, FileFormat::Xlsx, "https://www.tga.gov.au/safety/database-adverse-event-notifications-daen",
         "https://www.tga.gov.au/robots.txt"},
        {SourceId::Dma, "Danish Medicines Agency (DMA)", AccessMode::SearchAggregate, AccessLevel::Limited,
         FileFormat::Csv,
         "https://laegemiddelstyrelsen.dk/en/sideeffects/side-effects-of-medicines/"
         "interactive-adverse-drug-reaction-overviews/",
         std::nullopt},
        {SourceId::Lareb, "Netherlands Pharmacovigilance Centre Lareb", AccessMode::SearchAggregate,
         AccessLevel::Limited, FileFormat::Csv, "https://www.lareb.nl/en/", std::nullopt},
        {SourceId::Medsafe, "New Zealand Medsafe", AccessMode::SearchAggregate, AccessLevel::Medium, FileFormat::Csv,
         "https://www.medsafe.govt.nz/SMARS/Default", "https://www.medsafe.govt.nz/robots.txt"},
        {SourceId::Faers, "FDA Adverse Event Reporting System (FAERS)", AccessMode::BulkQuarterly, AccessLevel::High,
         FileFormat::Zip, std::string(kFaersIndexUrl), "https://www.fda.gov/robots.txt"},
        {SourceId::Vaers, "Vaccine Adverse Event Reporting System (VAERS)", AccessMode::BulkAnnualHumanAssisted,
         AccessLevel::High, FileFormat::Zip, std::string(kVaersIndexUrl), std::nullopt},
        {SourceId::VigiAccess, "WHO VigiAccess", AccessMode::SearchAggregate, AccessLevel::Limited, FileFormat::Csv,
         "https://www.vigiaccess.org/", std::nullopt},
    };
    return sources;
}

const SourceDescriptor& describe(SourceId id) {
    for (const auto& d : list_sources())
        if (d.id == id) return d;
    throw InvalidArgument("unknown source");
}

std::string percent_encode(std::string_view s) {
    static constexpr char kHex[] = "0123456789ABCDEF";
    std::string out;
    for (char c : s) {
        const auto u = static_cast<unsigned char>(c);
        if (std::isalnum(u) || c == '-' || c == '.' || c == '_' || c == '~') {
            out.push_back(c);
        } else {
            out.push_back('%');
            out.push_back(kHex[u >> 4]);
            out.push_back(kHex[u & 0xF]);
        }
    }
    return out;
}

std::string search_url(SourceId id, std::string_view term) {
    const auto q = percent_encode(term);
    switch (id) {
        case SourceId::Daen: return "https://daen.tga.gov.au/medicines-search/?q=" + q;
        case SourceId::Dma: return describe(id).base_url + "?search=" + q;
        case SourceId::Lareb: return "https://www.lareb.nl/en/search-drug?q=" + q;
        case SourceId::Medsafe: return "https://www.medsafe.govt.nz/SMARS/Default?ingredient=" + q;
        case SourceId::VigiAccess: return "https://www.vigiaccess.org/search?q=" + q;
        case SourceId::Faers:
        case SourceId::Vaers: break;
    }
    throw InvalidArgument(std::string(to_string(id)) + " has no search entry point");
}

}  // namespace pharmaharvest::adapters
