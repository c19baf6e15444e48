#include "ransomlab/samples.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <sstream>

#include "ransomlab/datadir.hpp"
#include "ransomlab/error.hpp"

namespace ransomlab::forensics {

namespace {

constexpr Date kAnalysisCutoff{2014, 11, 30};

bool is_lower_hex_string(std::string_view s)
{
    return std::all_of(s.begin(), s.end(), [](char c) {
        return (c >= '0' && c <= '9') || (c >= 'a' && c <= 'f');
    });
}

std::vector<std::string> split_tsv(const std::string& line)
{
    std::vector<std::string> fields;
    std::size_t start = 0;
    for (std::size_t i = 0; i <= line.size(); ++i) {
        if (i == line.size() || line[i] == '\t') {
            fields.emplace_back(line, start, i - start);
            start = i + 1;
        }
    }
    return fields;
}

} // namespace

Date parse_date(std::string_view iso)
{
    Date d;
    if (iso.size() != 10 || iso[4] != '-' || iso[7] != '-')
        throw Error("bad date: " + std::string(iso));
    auto num = [&](std::size_t pos, std::size_t len, int& out) {
        auto [p, ec] = std::from_chars(iso.data() + pos, iso.data() + pos + len, out);
        if (ec != std::errc() || p != iso.data() + pos + len)
            throw Error("bad date: " + std::string(iso));
    };
    num(0, 4, d.year);
    num(5, 2, d.month);
    num(8, 2, d.day);
    if (d.month < 1 || d.month > 12 || d.day < 1 || d.day > 31)
        throw Error("bad date: " + std::string(iso));
    return d;
}

std::string format_date(const Date& d)
{
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%04d-%02d-%02d", d.year, d.month, d.day);
    return buf;
}

std::vector<SampleRecord> load_sample_dataset(const std::filesystem::path& file)
{
    std::ifstream in(file);
    if (!in)
        throw Error("cannot open sample dataset: " + file.string());

    std::vector<SampleRecord> records;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line.front() == '#')
            continue;
        auto fields = split_tsv(line);
        if (fields.size() != 5)
            throw Error("sample dataset line " + std::to_string(line_no) +
                        ": expected 5 tab-separated fields");

        SampleRecord rec;
        auto [p, ec] = std::from_chars(fields[0].data(), fields[0].data() + fields[0].size(),
                                       rec.row);
        if (ec != std::errc())
            throw Error("sample dataset line " + std::to_string(line_no) + ": bad row number");
        rec.family = parse_family(fields[1]);

        const std::string& flags = fields[4];
        rec.anomalous = flags.find("anomalous") != std::string::npos;
        rec.missing = flags.find("missing") != std::string::npos;

        if (rec.missing) {
            if (fields[2] != "-" || fields[3] != "-")
                throw Error("sample dataset line " + std::to_string(line_no) +
                            ": placeholder rows carry no hash or date");
        } else {
            rec.md5 = fields[2];
            if (rec.md5.empty() || !is_lower_hex_string(rec.md5))
                throw Error("sample dataset line " + std::to_string(line_no) +
                            ": md5 must be lowercase hex");
            rec.compile_date = parse_date(fields[3]);
        }
        records.push_back(std::move(rec));
    }
    return records;
}

std::vector<SampleRecord> load_sample_dataset()
{
    return load_sample_dataset(default_data_dir() / "samples.tsv");
}

std::vector<std::pair<Family, Date>> family_timeline()
{
    // Approximate first sightings: Dirty Decrypt summer 2013, CryptoLocker
    // fall 2013, CryptoWall late 2013, Critroni summer 2014, TorrentLocker
    // mid 2014, Cryptographic Locker August 2014.
    return {
        {Family::dirty_decrypt, {2013, 6, 1}},
        {Family::cryptolocker, {2013, 9, 1}},
        {Family::cryptowall, {2013, 11, 1}},
        {Family::critroni, {2014, 6, 1}},
        {Family::torrentlocker, {2014, 7, 1}},
        {Family::cryptographic_locker, {2014, 8, 1}},
    };
}

std::map<Family, FamilyWindow> default_family_windows()
{
    std::map<Family, FamilyWindow> windows;
    for (const auto& [family, first_seen] : family_timeline())
        windows[family] = {first_seen, kAnalysisCutoff};
    return windows;
}

std::vector<SampleRecord> flag_anomalous_dates(const std::vector<SampleRecord>& records,
                                               const std::map<Family, FamilyWindow>& windows)
{
    std::vector<SampleRecord> flagged;
    for (const SampleRecord& rec : records) {
        if (!rec.compile_date)
            continue;
        auto it = windows.find(rec.family);
        if (it == windows.end())
            throw Error("no window for family " + std::string(family_key(rec.family)));
        const FamilyWindow& w = it->second;
        if (*rec.compile_date < w.first_seen || *rec.compile_date > w.cutoff)
            flagged.push_back(rec);
    }
    return flagged;
}

} // namespace ransomlab::forensics
