#include "ransomlab/registry.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <sstream>

#include "ransomlab/error.hpp"

namespace ransomlab::forensics {

namespace {

constexpr std::string_view kSignature = "Windows Registry Editor Version 5.00";
constexpr std::string_view kDefaultName = "(Default)";

[[noreturn]] void line_error(std::size_t line_no, const std::string& what)
{
    throw Error("line " + std::to_string(line_no) + ": " + what);
}

std::string_view trim(std::string_view s)
{
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front())))
        s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back())))
        s.remove_suffix(1);
    return s;
}

// Reads a quoted string starting at s[0] == '"'; returns the unescaped text
// and the index just past the closing quote.
std::pair<std::string, std::size_t> read_quoted(std::string_view s, std::size_t line_no)
{
    std::string out;
    std::size_t i = 1;
    while (i < s.size()) {
        char c = s[i];
        if (c == '\\') {
            if (i + 1 >= s.size())
                line_error(line_no, "dangling escape in quoted string");
            out.push_back(s[i + 1]);
            i += 2;
        } else if (c == '"') {
            return {out, i + 1};
        } else {
            out.push_back(c);
            ++i;
        }
    }
    line_error(line_no, "unterminated quoted string");
}

std::string escape_quoted(std::string_view s)
{
    std::string out;
    out.reserve(s.size());
    for (char c : s) {
        if (c == '\\' || c == '"')
            out.push_back('\\');
        out.push_back(c);
    }
    return out;
}

// UTF-16LE to UTF-8, surrogate pairs included.
std::string utf16le_to_utf8(std::string_view data)
{
    std::string out;
    out.reserve(data.size() / 2);
    auto unit = [&](std::size_t i) -> std::uint32_t {
        return static_cast<std::uint8_t>(data[i]) |
               (static_cast<std::uint32_t>(static_cast<std::uint8_t>(data[i + 1])) << 8);
    };
    std::size_t i = 0;
    while (i + 1 < data.size()) {
        std::uint32_t cp = unit(i);
        i += 2;
        if (cp >= 0xd800 && cp <= 0xdbff && i + 1 < data.size()) {
            std::uint32_t low = unit(i);
            if (low >= 0xdc00 && low <= 0xdfff) {
                cp = 0x10000 + ((cp - 0xd800) << 10) + (low - 0xdc00);
                i += 2;
            }
        }
        if (cp < 0x80) {
            out.push_back(static_cast<char>(cp));
        } else if (cp < 0x800) {
            out.push_back(static_cast<char>(0xc0 | (cp >> 6)));
            out.push_back(static_cast<char>(0x80 | (cp & 0x3f)));
        } else if (cp < 0x10000) {
            out.push_back(static_cast<char>(0xe0 | (cp >> 12)));
            out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3f)));
            out.push_back(static_cast<char>(0x80 | (cp & 0x3f)));
        } else {
            out.push_back(static_cast<char>(0xf0 | (cp >> 18)));
            out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3f)));
            out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3f)));
            out.push_back(static_cast<char>(0x80 | (cp & 0x3f)));
        }
    }
    return out;
}

bool is_windows_path(std::string_view name)
{
    if (name.size() >= 3 && std::isalpha(static_cast<unsigned char>(name[0])) &&
        name[1] == ':' && name[2] == '\\')
        return true;
    return name.size() >= 2 && name[0] == '\\' && name[1] == '\\'; // UNC
}

} // namespace

RegistryExport parse_reg_export(std::string_view text)
{
    // tolerate a UTF-8 BOM
    if (text.size() >= 3 && static_cast<unsigned char>(text[0]) == 0xef &&
        static_cast<unsigned char>(text[1]) == 0xbb &&
        static_cast<unsigned char>(text[2]) == 0xbf)
        text.remove_prefix(3);

    std::istringstream stream{std::string(text)};
    std::string raw;
    std::size_t line_no = 0;

    bool signature_seen = false;
    bool key_seen = false;
    RegistryExport exp;

    while (std::getline(stream, raw)) {
        ++line_no;
        if (!raw.empty() && raw.back() == '\r')
            raw.pop_back();
        std::string_view line = trim(raw);

        if (!signature_seen) {
            if (line.empty())
                continue;
            if (line != kSignature)
                throw Error("not a registry export: missing version-5 signature");
            signature_seen = true;
            continue;
        }

        if (line.empty() || line.front() == ';')
            continue;

        if (line.front() == '[') {
            if (line.back() != ']')
                line_error(line_no, "unterminated key header");
            if (key_seen)
                line_error(line_no, "multiple keys in one export are not supported");
            exp.key_path = std::string(line.substr(1, line.size() - 2));
            key_seen = true;
            continue;
        }

        if (!key_seen)
            line_error(line_no, "value line before any [key] header");

        RegValue value;
        std::size_t after_name = 0;
        if (line.front() == '@') {
            value.name = std::string(kDefaultName);
            after_name = 1;
        } else if (line.front() == '"') {
            auto [name, next] = read_quoted(line, line_no);
            value.name = name;
            after_name = next;
        } else {
            line_error(line_no, "expected a quoted value name or @");
        }

        if (after_name >= line.size() || line[after_name] != '=')
            line_error(line_no, "expected '=' after value name");
        std::string_view rhs = line.substr(after_name + 1);

        if (rhs.rfind("dword:", 0) == 0) {
            std::string_view hex = rhs.substr(6);
            if (hex.empty() || hex.size() > 8 ||
                !std::all_of(hex.begin(), hex.end(), [](char c) {
                    return std::isxdigit(static_cast<unsigned char>(c));
                }))
                line_error(line_no, "malformed dword value");
            value.kind = RegKind::dword;
            std::from_chars(hex.data(), hex.data() + hex.size(), value.dword_data, 16);
        } else if (!rhs.empty() && rhs.front() == '"') {
            auto [data, next] = read_quoted(rhs, line_no);
            if (next != rhs.size())
                line_error(line_no, "trailing characters after string value");
            value.kind = RegKind::sz;
            value.string_data = data;
        } else {
            line_error(line_no, "unsupported value data (only REG_SZ and REG_DWORD)");
        }

        for (const RegValue& existing : exp.values)
            if (existing.name == value.name)
                line_error(line_no, "duplicate value name \"" + value.name + "\"");
        exp.values.push_back(std::move(value));
    }

    if (!signature_seen)
        throw Error("not a registry export: empty input");
    if (!key_seen)
        throw Error("not a registry export: no [key] header");
    return exp;
}

RegistryExport load_reg_export(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw Error("cannot open registry export: " + path.string());
    std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());

    if (bytes.size() >= 2 && static_cast<unsigned char>(bytes[0]) == 0xff &&
        static_cast<unsigned char>(bytes[1]) == 0xfe)
        return parse_reg_export(utf16le_to_utf8(std::string_view(bytes).substr(2)));
    return parse_reg_export(bytes);
}

std::string serialize_reg_export(const RegistryExport& exp)
{
    std::string out;
    out += kSignature;
    out += "\r\n\r\n[";
    out += exp.key_path;
    out += "]\r\n";
    for (const RegValue& v : exp.values) {
        if (v.name == kDefaultName)
            out += '@';
        else
            out += '"' + escape_quoted(v.name) + '"';
        out += '=';
        if (v.kind == RegKind::dword) {
            char buf[16];
            std::snprintf(buf, sizeof(buf), "dword:%08x", v.dword_data);
            out += buf;
        } else {
            out += '"' + escape_quoted(v.string_data) + '"';
        }
        out += "\r\n";
    }
    return out;
}

std::vector<EncryptedFileEntry> extract_encrypted_file_list(const RegistryExport& exp)
{
    std::string_view leaf = exp.key_path;
    if (auto pos = leaf.find_last_of('\\'); pos != std::string_view::npos)
        leaf.remove_prefix(pos + 1);

    // Cryptolocker_ followed by exactly four digits, case-insensitive.
    constexpr std::string_view prefix = "cryptolocker_";
    if (leaf.size() != prefix.size() + 4)
        return {};
    for (std::size_t i = 0; i < prefix.size(); ++i)
        if (std::tolower(static_cast<unsigned char>(leaf[i])) != prefix[i])
            return {};
    for (std::size_t i = prefix.size(); i < leaf.size(); ++i)
        if (!std::isdigit(static_cast<unsigned char>(leaf[i])))
            return {};

    std::vector<EncryptedFileEntry> entries;
    for (const RegValue& v : exp.values) {
        if (v.kind != RegKind::dword || !is_windows_path(v.name))
            continue;
        entries.push_back({v.name, v.dword_data});
    }
    return entries;
}

} // namespace ransomlab::forensics
