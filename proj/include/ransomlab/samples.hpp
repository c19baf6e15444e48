#pragma once

#include <compare>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "ransomlab/family.hpp"

namespace ransomlab::forensics {

struct Date {
    int year = 0;
    int month = 0;
    int day = 0;

    auto operator<=>(const Date&) const = default;
};

Date parse_date(std::string_view iso); // YYYY-MM-DD
std::string format_date(const Date& d);

// One analyzed sample. Row 7 of the source table is a gap (the sample exists
// in the tally but its hash and date never made it into the published table);
// it is kept as a placeholder with missing = true and no md5/date.
struct SampleRecord {
    int row = 0;
    Family family = Family::cryptolocker;
    std::string md5; // lowercase hex; empty for the placeholder row
    std::optional<Date> compile_date;
    bool anomalous = false; // asterisked in the source: tweaked/bad clock
    bool missing = false;

    bool operator==(const SampleRecord&) const = default;
};

std::vector<SampleRecord> load_sample_dataset(const std::filesystem::path& file);
std::vector<SampleRecord> load_sample_dataset(); // bundled data file

struct FamilyWindow {
    Date first_seen;
    Date cutoff;
};

// First-sighting windows derived from the family timeline, all closing at the
// 2014-11 analysis cutoff.
std::map<Family, FamilyWindow> default_family_windows();

// Records whose compile date falls before the family's first sighting or
// after the cutoff. Placeholder rows carry no date and are never flagged.
// Throws when a record's family has no window.
std::vector<SampleRecord> flag_anomalous_dates(const std::vector<SampleRecord>& records,
                                               const std::map<Family, FamilyWindow>& windows);

// The six families in first-sighting order with their approximate first
// sighting.
std::vector<std::pair<Family, Date>> family_timeline();

} // namespace ransomlab::forensics
