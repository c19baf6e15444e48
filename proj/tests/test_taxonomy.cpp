#include <doctest.h>

#include <numeric>

#include "ransomlab/error.hpp"
#include "ransomlab/samples.hpp"
#include "ransomlab/taxonomy.hpp"
#include "support/tmpdir.hpp"

using namespace ransomlab;
using namespace ransomlab::exposure;

#ifndef RANSOMLAB_TEST_DATA_DIR
#define RANSOMLAB_TEST_DATA_DIR "data"
#endif

namespace {

const ExtensionTaxonomy& tax()
{
    static const ExtensionTaxonomy t =
        load_taxonomy(std::filesystem::path(RANSOMLAB_TEST_DATA_DIR) / "taxonomy.tsv");
    return t;
}

std::size_t total(Family f)
{
    const auto& table = tax().entries.at(f);
    return table.size();
}

} // namespace

TEST_CASE("per-family extension counts satisfy the documented sizes")
{
    CHECK(total(Family::dirty_decrypt) == 8);
    CHECK(total(Family::cryptolocker) >= 70);
    CHECK(total(Family::torrentlocker) > 200);
}

TEST_CASE("torrentlocker image formats top out at 70 and lead every tally")
{
    auto tl = taxonomy_stats(tax(), Family::torrentlocker);
    std::size_t tl_img = tl.at(Category::img);
    CHECK(tl_img <= 70);
    for (const auto& [cat, count] : tl)
        CHECK(count <= tl_img);
    for (Family f : kAllFamilies) {
        auto stats = taxonomy_stats(tax(), f);
        auto it = stats.find(Category::img);
        CHECK((it == stats.end() ? 0 : it->second) <= tl_img);
    }
}

TEST_CASE("stats partition the family's extensions")
{
    for (Family f : kAllFamilies) {
        auto stats = taxonomy_stats(tax(), f);
        std::size_t sum = 0;
        for (const auto& [cat, count] : stats)
            sum += count;
        CHECK(sum == total(f));
    }
}

TEST_CASE("category coverage grows along the timeline")
{
    std::size_t prev = 0;
    for (const auto& [family, first_seen] : forensics::family_timeline()) {
        std::size_t coverage = taxonomy_stats(tax(), family).size();
        CHECK(coverage >= prev);
        prev = coverage;
    }

    // and later families keep covering what Dirty Decrypt covered
    auto dd = taxonomy_stats(tax(), Family::dirty_decrypt);
    for (Family f : kAllFamilies)
        for (const auto& [cat, count] : dd)
            CHECK(taxonomy_stats(tax(), f).count(cat) == 1);
}

TEST_CASE("categorize uses the final extension, case-insensitively")
{
    CHECK(categorize(tax(), "raw.craw", Family::torrentlocker) == Category::img);
    CHECK(categorize(tax(), "photo.jpg", Family::cryptolocker) == Category::img);
    CHECK(categorize(tax(), "A.JPG", Family::cryptolocker) ==
          categorize(tax(), "a.jpg", Family::cryptolocker));
    CHECK(categorize(tax(), "shots.djvu", Family::torrentlocker) == Category::doc);
    CHECK(categorize(tax(), "model.blend", Family::torrentlocker) == Category::cad);
    CHECK(categorize(tax(), "archive.tar.gz", Family::torrentlocker) == Category::arch);

    CHECK_FALSE(categorize(tax(), "README", Family::cryptolocker).has_value());
    CHECK_FALSE(categorize(tax(), "trailing.", Family::cryptolocker).has_value());
    CHECK_FALSE(categorize(tax(), "noidea.zzz9", Family::torrentlocker).has_value());
    // dirty decrypt does not target archives
    CHECK_FALSE(categorize(tax(), "a.zip", Family::dirty_decrypt).has_value());
}

TEST_CASE("scan_tree counts per category and is deterministic")
{
    testsupport::TmpDir tmp;
    tmp.write("a/report.doc", "x");
    tmp.write("a/b/notes.doc", "x");
    tmp.write("c/final.doc", "x");
    tmp.write("c/photo.jpg", "x");
    tmp.write("c/d/photo2.JPG", "x");
    tmp.write("junk.xyz", "x");
    tmp.write("README", "x");

    auto report = scan_tree(tax(), tmp.path(), Family::cryptolocker);
    CHECK(report.total_files_seen == 7);
    CHECK(report.counts.at(Category::doc) == 3);
    CHECK(report.counts.at(Category::img) == 2);
    CHECK(report.counts.size() == 2); // nothing else matched
    CHECK(report.warnings.empty());

    auto again = scan_tree(tax(), tmp.path(), Family::cryptolocker);
    CHECK(again.counts == report.counts);
    CHECK(again.total_files_seen == report.total_files_seen);

    auto with_paths = scan_tree(tax(), tmp.path(), Family::cryptolocker, true);
    REQUIRE(with_paths.matched_paths.has_value());
    CHECK(with_paths.matched_paths->size() == 5);
}

TEST_CASE("scan_tree on an empty directory yields zero counts")
{
    testsupport::TmpDir tmp;
    auto report = scan_tree(tax(), tmp.path(), Family::torrentlocker);
    CHECK(report.total_files_seen == 0);
    CHECK(report.counts.empty());
}

TEST_CASE("scan_tree does not follow symlinks")
{
    testsupport::TmpDir tmp;
    tmp.write("real/secret.doc", "x");
    std::error_code ec;
    std::filesystem::create_directory_symlink(tmp.path() / "real", tmp.path() / "link", ec);
    REQUIRE_FALSE(ec);
    std::filesystem::create_symlink(tmp.path() / "real" / "secret.doc",
                                    tmp.path() / "alias.doc", ec);
    REQUIRE_FALSE(ec);

    auto report = scan_tree(tax(), tmp.path(), Family::cryptolocker);
    CHECK(report.total_files_seen == 1); // just real/secret.doc
    CHECK(report.counts.at(Category::doc) == 1);
}

TEST_CASE("loader rejects duplicates and unknown categories")
{
    testsupport::TmpDir tmp;
    auto dup = tmp.write("dup.tsv", "cryptolocker\tdoc\tdoc\ncryptolocker\tdoc\timg\n");
    CHECK_THROWS_WITH_AS(load_taxonomy(dup), doctest::Contains("duplicate"), Error);
    auto badcat = tmp.write("badcat.tsv", "cryptolocker\tdoc\tpaperwork\n");
    CHECK_THROWS_WITH_AS(load_taxonomy(badcat), doctest::Contains("unknown category"), Error);
    auto badrow = tmp.write("badrow.tsv", "cryptolocker doc\n");
    CHECK_THROWS_AS(load_taxonomy(badrow), Error);
}

TEST_CASE("taxonomy_stats for an absent family is an error")
{
    ExtensionTaxonomy empty;
    CHECK_THROWS_WITH_AS(taxonomy_stats(empty, Family::critroni),
                         doctest::Contains("unknown family"), Error);
}
