#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "ransomlab/bytes.hpp"

namespace ransomlab::forensics {

// One hooked WriteProcessMemory call: target address plus the dumped buffer.
struct MemoryWrite {
    std::uint64_t base_address = 0;
    Bytes payload;
    std::string source_file;
};

struct LoadedWrites {
    std::vector<MemoryWrite> writes; // ordered by base, then file name
    std::vector<std::string> warnings;
};

// Loads a dump set from either a directory of <hex>.bin files (the address is
// the file name) or a JSON-lines trace of {base, size, file} records. Files
// that do not fit the naming scheme are skipped with a warning; an unreadable
// file or a size mismatch is an error.
LoadedWrites load_memory_writes(const std::filesystem::path& source);

struct Range {
    std::uint64_t offset = 0;
    std::uint64_t length = 0;

    bool operator==(const Range&) const = default;
};

// The image restored from a write set. Later writes win on overlap; bytes no
// write covered are zero and reported as gaps.
struct ReassembledImage {
    std::uint64_t load_base = 0;
    Bytes image;
    std::vector<Range> gaps;     // sorted, disjoint
    std::vector<Range> overlaps; // sorted, disjoint; every multiply-written byte
};

ReassembledImage reassemble_image(std::span<const MemoryWrite> writes);

struct PeSummary {
    std::uint32_t pe_header_offset = 0;
    std::uint16_t machine = 0;
    std::uint16_t section_count = 0;
};

// Present iff the image starts "MZ", the offset at 0x3c stays in bounds, and
// a complete "PE\0\0" + COFF header sits there.
std::optional<PeSummary> detect_pe(const ReassembledImage& image);

} // namespace ransomlab::forensics
