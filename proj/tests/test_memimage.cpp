#include <doctest.h>

#include <map>
#include <random>

#include "ransomlab/error.hpp"
#include "ransomlab/memimage.hpp"
#include "support/tmpdir.hpp"

using namespace ransomlab;
using namespace ransomlab::forensics;

namespace {

MemoryWrite write_at(std::uint64_t base, Bytes payload, std::string file = "")
{
    return MemoryWrite{base, std::move(payload), std::move(file)};
}

// Naive per-byte replay: the oracle reassembly is a map from address to
// (value, write count).
struct ByteMapOracle {
    std::map<std::uint64_t, std::pair<std::uint8_t, int>> bytes;

    void apply(const MemoryWrite& w)
    {
        for (std::size_t i = 0; i < w.payload.size(); ++i) {
            auto& slot = bytes[w.base_address + i];
            slot.first = w.payload[i];
            ++slot.second;
        }
    }
};

Bytes pattern(std::size_t n, std::uint8_t seed)
{
    Bytes out(n);
    for (std::size_t i = 0; i < n; ++i)
        out[i] = static_cast<std::uint8_t>(seed + i);
    return out;
}

// Minimal PE: MZ stub, e_lfanew at 0x3c -> 0x80, PE\0\0 + COFF header there.
Bytes minimal_pe(std::size_t total = 0x400)
{
    Bytes img(total, 0);
    img[0] = 'M';
    img[1] = 'Z';
    img[0x3c] = 0x80;
    img[0x80] = 'P';
    img[0x81] = 'E';
    img[0x84] = 0x4c; // machine 0x014c, x86
    img[0x85] = 0x01;
    img[0x86] = 0x01; // one section
    return img;
}

} // namespace

TEST_CASE("adjacent writes reassemble with no gaps or overlaps")
{
    std::vector<MemoryWrite> writes = {write_at(0x400000, pattern(512, 1)),
                                       write_at(0x400200, pattern(256, 9))};
    auto img = reassemble_image(writes);
    CHECK(img.load_base == 0x400000);
    CHECK(img.image.size() == 768);
    CHECK(img.gaps.empty());
    CHECK(img.overlaps.empty());
    CHECK(img.image[0] == 1);
    CHECK(img.image[512] == 9);
}

TEST_CASE("overlapping writes report the overlap and the later write wins")
{
    std::vector<MemoryWrite> writes = {write_at(0x400000, Bytes(512, 0xaa)),
                                       write_at(0x400100, Bytes(512, 0xbb))};
    auto img = reassemble_image(writes);
    CHECK(img.image.size() == 768);
    REQUIRE(img.overlaps.size() == 1);
    CHECK(img.overlaps[0] == Range{256, 256});
    CHECK(img.gaps.empty());
    CHECK(img.image[255] == 0xaa);
    CHECK(img.image[256] == 0xbb);
    CHECK(img.image[511] == 0xbb);
}

TEST_CASE("uncovered bytes are zero-filled and reported as gaps")
{
    std::vector<MemoryWrite> writes = {write_at(0x1000, Bytes(16, 0x11)),
                                       write_at(0x1020, Bytes(16, 0x22))};
    auto img = reassemble_image(writes);
    CHECK(img.image.size() == 0x30);
    REQUIRE(img.gaps.size() == 1);
    CHECK(img.gaps[0] == Range{16, 16});
    for (int i = 16; i < 32; ++i)
        CHECK(img.image[static_cast<std::size_t>(i)] == 0);
}

TEST_CASE("reassembly rejects empty input")
{
    CHECK_THROWS_AS(reassemble_image({}), Error);
}

TEST_CASE("randomized write sets match the per-byte replay oracle")
{
    std::mt19937 rng(0x5eed0006);
    std::uniform_int_distribution<std::uint64_t> base_dist(0, 64 * 1024 - 1);
    std::uniform_int_distribution<std::size_t> len_dist(1, 4096);
    std::uniform_int_distribution<int> byte(0, 255);
    std::uniform_int_distribution<int> count_dist(1, 32);

    for (int round = 0; round < 100; ++round) {
        std::vector<MemoryWrite> writes;
        ByteMapOracle oracle;
        int n = count_dist(rng);
        for (int k = 0; k < n; ++k) {
            std::uint64_t base = 0x10000000 + base_dist(rng);
            std::size_t len = std::min<std::size_t>(len_dist(rng), 64 * 1024);
            Bytes payload(len);
            for (auto& b : payload)
                b = static_cast<std::uint8_t>(byte(rng));
            MemoryWrite w = write_at(base, std::move(payload));
            oracle.apply(w);
            writes.push_back(std::move(w));
        }

        auto img = reassemble_image(writes);

        REQUIRE(!oracle.bytes.empty());
        CHECK(img.load_base == oracle.bytes.begin()->first);
        CHECK(img.load_base + img.image.size() == oracle.bytes.rbegin()->first + 1);

        std::vector<Range> want_gaps, want_overlaps;
        for (std::uint64_t off = 0; off < img.image.size(); ++off) {
            auto it = oracle.bytes.find(img.load_base + off);
            std::uint8_t expect = it == oracle.bytes.end() ? 0 : it->second.first;
            REQUIRE(img.image[static_cast<std::size_t>(off)] == expect);

            auto extend = [&](std::vector<Range>& rs) {
                if (!rs.empty() && rs.back().offset + rs.back().length == off)
                    ++rs.back().length;
                else
                    rs.push_back({off, 1});
            };
            if (it == oracle.bytes.end())
                extend(want_gaps);
            else if (it->second.second >= 2)
                extend(want_overlaps);
        }
        CHECK(img.gaps == want_gaps);
        CHECK(img.overlaps == want_overlaps);
    }
}

TEST_CASE("directory loading parses hex names and warns on strays")
{
    testsupport::TmpDir tmp;
    tmp.write("400000.bin", std::string(512, 'A'));
    tmp.write("400200.bin", std::string(256, 'B'));
    tmp.write("notes.txt", "analyst scratch");
    tmp.write("zz.bin", "not hex... wait, zz is not hex");

    auto loaded = load_memory_writes(tmp.path());
    REQUIRE(loaded.writes.size() == 2);
    CHECK(loaded.writes[0].base_address == 0x400000);
    CHECK(loaded.writes[0].payload.size() == 512);
    CHECK(loaded.writes[0].source_file == "400000.bin");
    CHECK(loaded.writes[1].base_address == 0x400200);
    CHECK(loaded.writes.size() + loaded.warnings.size() == 4);
}

TEST_CASE("trace loading checks sizes")
{
    testsupport::TmpDir tmp;
    tmp.write("401000.bin", std::string(64, 'x'));
    auto trace = tmp.write("trace.jsonl",
                           R"({"base": "0x401000", "size": 64, "file": "401000.bin"})" "\n");
    auto loaded = load_memory_writes(trace);
    REQUIRE(loaded.writes.size() == 1);
    CHECK(loaded.writes[0].base_address == 0x401000);

    auto bad = tmp.write("bad.jsonl",
                         R"({"base": "0x401000", "size": 128, "file": "401000.bin"})" "\n");
    CHECK_THROWS_WITH_AS(load_memory_writes(bad), doctest::Contains("size mismatch"), Error);
}

TEST_CASE("detect_pe on a reassembled minimal PE")
{
    Bytes img = minimal_pe();
    std::vector<MemoryWrite> writes = {
        write_at(0x400000, Bytes(img.begin(), img.begin() + 0x200)),
        write_at(0x400200, Bytes(img.begin() + 0x200, img.end()))};
    auto assembled = reassemble_image(writes);
    auto pe = detect_pe(assembled);
    REQUIRE(pe.has_value());
    CHECK(pe->pe_header_offset == 0x80);
    CHECK(pe->machine == 0x014c);
    CHECK(pe->section_count == 1);
}

TEST_CASE("detect_pe stays absent on junk")
{
    ReassembledImage img;
    img.image.assign(0x200, 0);
    CHECK_FALSE(detect_pe(img).has_value()); // all zeros

    img.image = minimal_pe();
    img.image[1] = 'X';
    CHECK_FALSE(detect_pe(img).has_value()); // broken magic

    img.image = minimal_pe();
    img.image.resize(0x82); // truncated just before the full PE header
    CHECK_FALSE(detect_pe(img).has_value());

    img.image = minimal_pe();
    img.image[0x3c] = 0xff; // e_lfanew way out of range
    img.image[0x3d] = 0xff;
    img.image[0x3e] = 0xff;
    img.image[0x3f] = 0x7f;
    CHECK_FALSE(detect_pe(img).has_value());

    img.image.clear();
    CHECK_FALSE(detect_pe(img).has_value());
}
