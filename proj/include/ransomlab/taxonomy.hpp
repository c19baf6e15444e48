#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "ransomlab/family.hpp"

namespace ransomlab::exposure {

// The 11 target-file categories.
enum class Category { doc, img, av, src, cad, db, sec, arch, fin, bak, oth };

inline constexpr Category kAllCategories[] = {
    Category::doc, Category::img, Category::av,   Category::src,
    Category::cad, Category::db,  Category::sec,  Category::arch,
    Category::fin, Category::bak, Category::oth,
};

std::string_view category_key(Category c);
Category parse_category(std::string_view text);

// Per-family extension -> category tables. Extensions are lowercase without
// the dot; each (family, extension) pair maps to exactly one category.
struct ExtensionTaxonomy {
    std::map<Family, std::map<std::string, Category>> entries;
};

// Loads the family<TAB>extension<TAB>category data file. Duplicate rows and
// unknown categories are errors.
ExtensionTaxonomy load_taxonomy(const std::filesystem::path& file);
ExtensionTaxonomy load_taxonomy(); // bundled data file

// Category for a filename under one family's targeting list, using only the
// final extension (archive.tar.gz -> gz), case-insensitively. Absent when the
// family does not target it or the name has no extension.
std::optional<Category> categorize(const ExtensionTaxonomy& tax, std::string_view filename,
                                   Family family);

struct CategoryReport {
    Family family = Family::cryptolocker;
    std::map<Category, std::uint64_t> counts;
    std::optional<std::vector<std::string>> matched_paths;
    std::uint64_t total_files_seen = 0;
    std::vector<std::string> warnings; // unreadable subtrees, scan continued
};

// Walks regular files under root (symlinks are not traversed) and counts how
// many fall in each targeted category for the family.
CategoryReport scan_tree(const ExtensionTaxonomy& tax, const std::filesystem::path& root,
                         Family family, bool list_paths = false);

// Extension count per category for one family. Throws for a family the
// taxonomy does not know.
std::map<Category, std::size_t> taxonomy_stats(const ExtensionTaxonomy& tax, Family family);

} // namespace ransomlab::exposure
