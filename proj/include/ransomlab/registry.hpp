#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace ransomlab::forensics {

enum class RegKind { sz, dword };

struct RegValue {
    std::string name; // "(Default)" for the @ value
    RegKind kind = RegKind::sz;
    std::string string_data;      // REG_SZ
    std::uint32_t dword_data = 0; // REG_DWORD

    bool operator==(const RegValue&) const = default;
};

// One exported key with its values in file order. Value names are unique
// within a key.
struct RegistryExport {
    std::string key_path;
    std::vector<RegValue> values;

    bool operator==(const RegistryExport&) const = default;
};

// Parses a version-5 text registry export (signature line, [key] header,
// "name"=dword:HEX / "name"="string" / @="..." lines). Throws
// Error("not a registry export") when the signature is missing and
// Error("line N: ...") for malformed lines.
RegistryExport parse_reg_export(std::string_view text);

// Reads a .reg file from disk, accepting UTF-16LE (BOM) or UTF-8 (with or
// without BOM) encodings.
RegistryExport load_reg_export(const std::filesystem::path& path);

// Writes the export back in the same format parse_reg_export reads;
// parse(serialize(x)) == x.
std::string serialize_reg_export(const RegistryExport& exp);

// CryptoLocker keeps the list of files it encrypted as value names under a
// per-infection key named Cryptolocker_ + 4 digits.
struct EncryptedFileEntry {
    std::string file_path;
    std::uint32_t dword_value = 0; // stored verbatim; meaning unknown

    bool operator==(const EncryptedFileEntry&) const = default;
};

// Returns the file entries of an export whose key leaf matches
// Cryptolocker_#### (case-insensitive): REG_DWORD values whose names parse as
// Windows paths. Anything else, including "(Default)", is skipped. A
// non-matching key yields an empty list.
std::vector<EncryptedFileEntry> extract_encrypted_file_list(const RegistryExport& exp);

} // namespace ransomlab::forensics
