#include "ransomlab/taxonomy.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>

#include "ransomlab/datadir.hpp"
#include "ransomlab/error.hpp"

namespace ransomlab::exposure {

namespace {

std::string lowercase(std::string_view s)
{
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return std::tolower(c); });
    return out;
}

std::optional<std::string> final_extension(std::string_view filename)
{
    if (auto slash = filename.find_last_of("/\\"); slash != std::string_view::npos)
        filename.remove_prefix(slash + 1);
    auto dot = filename.find_last_of('.');
    if (dot == std::string_view::npos || dot + 1 == filename.size())
        return std::nullopt;
    return lowercase(filename.substr(dot + 1));
}

void scan_dir(const std::filesystem::path& dir, const std::map<std::string, Category>& table,
              CategoryReport& report, bool list_paths)
{
    std::error_code ec;
    std::filesystem::directory_iterator it(dir, ec);
    if (ec) {
        report.warnings.push_back(dir.string() + ": " + ec.message());
        return;
    }
    for (const auto& entry : it) {
        std::error_code entry_ec;
        if (entry.is_symlink(entry_ec) || entry_ec)
            continue; // never traverse or count through symlinks
        if (entry.is_directory(entry_ec) && !entry_ec) {
            scan_dir(entry.path(), table, report, list_paths);
            continue;
        }
        if (!entry.is_regular_file(entry_ec) || entry_ec)
            continue;

        ++report.total_files_seen;
        auto ext = final_extension(entry.path().filename().string());
        if (!ext)
            continue;
        auto hit = table.find(*ext);
        if (hit == table.end())
            continue;
        ++report.counts[hit->second];
        if (list_paths)
            report.matched_paths->push_back(entry.path().string());
    }
}

} // namespace

std::string_view category_key(Category c)
{
    switch (c) {
    case Category::doc: return "doc";
    case Category::img: return "img";
    case Category::av: return "av";
    case Category::src: return "src";
    case Category::cad: return "cad";
    case Category::db: return "db";
    case Category::sec: return "sec";
    case Category::arch: return "arch";
    case Category::fin: return "fin";
    case Category::bak: return "bak";
    case Category::oth: return "oth";
    }
    return "?";
}

Category parse_category(std::string_view text)
{
    for (Category c : kAllCategories)
        if (category_key(c) == text)
            return c;
    throw Error("unknown category: " + std::string(text));
}

ExtensionTaxonomy load_taxonomy(const std::filesystem::path& file)
{
    std::ifstream in(file);
    if (!in)
        throw Error("cannot open taxonomy: " + file.string());

    ExtensionTaxonomy tax;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line.front() == '#')
            continue;

        auto tab1 = line.find('\t');
        auto tab2 = tab1 == std::string::npos ? std::string::npos : line.find('\t', tab1 + 1);
        if (tab2 == std::string::npos)
            throw Error("taxonomy line " + std::to_string(line_no) +
                        ": expected family<TAB>extension<TAB>category");

        Family family = parse_family(std::string_view(line).substr(0, tab1));
        std::string ext = lowercase(std::string_view(line).substr(tab1 + 1, tab2 - tab1 - 1));
        Category cat = parse_category(std::string_view(line).substr(tab2 + 1));

        if (ext.empty() || ext.front() == '.')
            throw Error("taxonomy line " + std::to_string(line_no) +
                        ": extension must be non-empty and dotless");
        auto [_, inserted] = tax.entries[family].emplace(ext, cat);
        if (!inserted)
            throw Error("taxonomy line " + std::to_string(line_no) + ": duplicate entry " +
                        std::string(family_key(family)) + "/" + ext);
    }
    return tax;
}

ExtensionTaxonomy load_taxonomy()
{
    return load_taxonomy(default_data_dir() / "taxonomy.tsv");
}

std::optional<Category> categorize(const ExtensionTaxonomy& tax, std::string_view filename,
                                   Family family)
{
    auto ext = final_extension(filename);
    if (!ext)
        return std::nullopt;
    auto fam = tax.entries.find(family);
    if (fam == tax.entries.end())
        return std::nullopt;
    auto hit = fam->second.find(*ext);
    if (hit == fam->second.end())
        return std::nullopt;
    return hit->second;
}

CategoryReport scan_tree(const ExtensionTaxonomy& tax, const std::filesystem::path& root,
                         Family family, bool list_paths)
{
    std::error_code ec;
    if (!std::filesystem::is_directory(root, ec) || ec)
        throw Error("scan root is not a directory: " + root.string());

    CategoryReport report;
    report.family = family;
    if (list_paths)
        report.matched_paths.emplace();

    static const std::map<std::string, Category> kEmpty;
    auto fam = tax.entries.find(family);
    const auto& table = fam == tax.entries.end() ? kEmpty : fam->second;

    scan_dir(root, table, report, list_paths);
    if (report.matched_paths)
        std::sort(report.matched_paths->begin(), report.matched_paths->end());
    return report;
}

std::map<Category, std::size_t> taxonomy_stats(const ExtensionTaxonomy& tax, Family family)
{
    auto fam = tax.entries.find(family);
    if (fam == tax.entries.end())
        throw Error("unknown family: no taxonomy rows for " + std::string(family_key(family)));

    std::map<Category, std::size_t> stats;
    for (const auto& [ext, cat] : fam->second)
        ++stats[cat];
    return stats;
}

} // namespace ransomlab::exposure
