#include "ransomlab/memimage.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>

#include <nlohmann/json.hpp>

#include "ransomlab/error.hpp"

namespace ransomlab::forensics {

namespace {

// 1 GiB cap on the reassembled span; anything larger is a bogus trace, not a
// process image.
constexpr std::uint64_t kMaxSpan = 1ull << 30;

Bytes read_file(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw Error("cannot read dump file: " + path.string());
    Bytes data((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return data;
}

std::optional<std::uint64_t> parse_hex_stem(std::string_view stem)
{
    if (stem.empty() || stem.size() > 16)
        return std::nullopt;
    std::uint64_t value = 0;
    auto [p, ec] = std::from_chars(stem.data(), stem.data() + stem.size(), value, 16);
    if (ec != std::errc() || p != stem.data() + stem.size())
        return std::nullopt;
    return value;
}

std::uint64_t parse_base_field(const nlohmann::json& v, std::size_t line_no)
{
    if (v.is_number_unsigned())
        return v.get<std::uint64_t>();
    if (v.is_string()) {
        std::string s = v.get<std::string>();
        std::string_view sv = s;
        int radix = 10;
        if (sv.rfind("0x", 0) == 0 || sv.rfind("0X", 0) == 0) {
            sv.remove_prefix(2);
            radix = 16;
        }
        std::uint64_t value = 0;
        auto [p, ec] = std::from_chars(sv.data(), sv.data() + sv.size(), value, radix);
        if (ec == std::errc() && p == sv.data() + sv.size())
            return value;
    }
    throw Error("line " + std::to_string(line_no) + ": bad base address");
}

LoadedWrites load_from_directory(const std::filesystem::path& dir)
{
    LoadedWrites result;
    for (const auto& entry : std::filesystem::directory_iterator(dir)) {
        if (!entry.is_regular_file())
            continue;
        const std::filesystem::path& p = entry.path();
        std::string name = p.filename().string();

        std::string ext = p.extension().string();
        std::transform(ext.begin(), ext.end(), ext.begin(),
                       [](unsigned char c) { return std::tolower(c); });
        auto base = parse_hex_stem(p.stem().string());
        if (ext != ".bin" || !base) {
            result.warnings.push_back("skipped " + name + ": not a <hex>.bin dump name");
            continue;
        }

        Bytes payload = read_file(p);
        if (payload.empty()) {
            result.warnings.push_back("skipped " + name + ": empty dump");
            continue;
        }
        result.writes.push_back({*base, std::move(payload), name});
    }
    return result;
}

LoadedWrites load_from_trace(const std::filesystem::path& trace)
{
    LoadedWrites result;
    std::ifstream in(trace);
    if (!in)
        throw Error("cannot open trace: " + trace.string());
    std::filesystem::path dir = trace.parent_path();

    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty())
            continue;
        nlohmann::json rec;
        try {
            rec = nlohmann::json::parse(line);
        } catch (const nlohmann::json::exception& e) {
            throw Error("line " + std::to_string(line_no) + ": " + e.what());
        }
        if (!rec.contains("base") || !rec.contains("size") || !rec.contains("file"))
            throw Error("line " + std::to_string(line_no) +
                        ": trace record needs base, size, and file");

        std::uint64_t base = parse_base_field(rec["base"], line_no);
        std::uint64_t size = rec["size"].get<std::uint64_t>();
        std::filesystem::path file = dir / rec["file"].get<std::string>();

        Bytes payload = read_file(file);
        if (payload.size() != size)
            throw Error("line " + std::to_string(line_no) + ": size mismatch for " +
                        file.filename().string() + " (trace says " + std::to_string(size) +
                        ", file has " + std::to_string(payload.size()) + ")");
        if (payload.empty()) {
            result.warnings.push_back("skipped " + file.filename().string() + ": empty dump");
            continue;
        }
        result.writes.push_back({base, std::move(payload), file.filename().string()});
    }
    return result;
}

} // namespace

LoadedWrites load_memory_writes(const std::filesystem::path& source)
{
    LoadedWrites result;
    if (std::filesystem::is_directory(source))
        result = load_from_directory(source);
    else if (std::filesystem::is_regular_file(source))
        result = load_from_trace(source);
    else
        throw Error("no such dump source: " + source.string());

    std::stable_sort(result.writes.begin(), result.writes.end(),
                     [](const MemoryWrite& a, const MemoryWrite& b) {
                         if (a.base_address != b.base_address)
                             return a.base_address < b.base_address;
                         return a.source_file < b.source_file;
                     });
    return result;
}

ReassembledImage reassemble_image(std::span<const MemoryWrite> writes)
{
    if (writes.empty())
        throw Error("no memory writes to reassemble");

    std::uint64_t lo = writes[0].base_address;
    std::uint64_t hi = 0;
    for (const MemoryWrite& w : writes) {
        if (w.payload.empty())
            throw Error("empty write payload from " + w.source_file);
        lo = std::min(lo, w.base_address);
        hi = std::max(hi, w.base_address + w.payload.size());
    }
    std::uint64_t span = hi - lo;
    if (span > kMaxSpan)
        throw Error("write set spans " + std::to_string(span) + " bytes; refusing to allocate");

    ReassembledImage out;
    out.load_base = lo;
    out.image.assign(span, 0);

    // writes counted per byte; 2+ means the byte was overwritten at least once
    std::vector<std::uint8_t> hits(span, 0);
    for (const MemoryWrite& w : writes) {
        std::size_t off = static_cast<std::size_t>(w.base_address - lo);
        std::copy(w.payload.begin(), w.payload.end(), out.image.begin() + off);
        for (std::size_t i = 0; i < w.payload.size(); ++i)
            if (hits[off + i] < 2)
                ++hits[off + i];
    }

    auto collect = [&](auto pred) {
        std::vector<Range> ranges;
        std::uint64_t start = 0;
        bool open = false;
        for (std::uint64_t i = 0; i < span; ++i) {
            if (pred(hits[i])) {
                if (!open) {
                    start = i;
                    open = true;
                }
            } else if (open) {
                ranges.push_back({start, i - start});
                open = false;
            }
        }
        if (open)
            ranges.push_back({start, span - start});
        return ranges;
    };
    out.gaps = collect([](std::uint8_t h) { return h == 0; });
    out.overlaps = collect([](std::uint8_t h) { return h >= 2; });
    return out;
}

std::optional<PeSummary> detect_pe(const ReassembledImage& img)
{
    const Bytes& b = img.image;
    if (b.size() < 0x40 || b[0] != 'M' || b[1] != 'Z')
        return std::nullopt;

    std::uint32_t pe_off = static_cast<std::uint32_t>(b[0x3c]) |
                           (static_cast<std::uint32_t>(b[0x3d]) << 8) |
                           (static_cast<std::uint32_t>(b[0x3e]) << 16) |
                           (static_cast<std::uint32_t>(b[0x3f]) << 24);

    // need the 4-byte signature plus the 20-byte COFF header
    if (pe_off > b.size() || b.size() - pe_off < 24)
        return std::nullopt;
    if (b[pe_off] != 'P' || b[pe_off + 1] != 'E' || b[pe_off + 2] != 0 || b[pe_off + 3] != 0)
        return std::nullopt;

    PeSummary summary;
    summary.pe_header_offset = pe_off;
    summary.machine = static_cast<std::uint16_t>(b[pe_off + 4] | (b[pe_off + 5] << 8));
    summary.section_count = static_cast<std::uint16_t>(b[pe_off + 6] | (b[pe_off + 7] << 8));
    return summary;
}

} // namespace ransomlab::forensics
