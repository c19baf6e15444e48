#include "ransomlab/cli.hpp"

#include <atomic>
#include <chrono>
#include <csignal>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <thread>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "ransomlab/cryptolocker.hpp"
#include "ransomlab/cryptowall.hpp"
#include "ransomlab/datadir.hpp"
#include "ransomlab/detect.hpp"
#include "ransomlab/envelope.hpp"
#include "ransomlab/error.hpp"
#include "ransomlab/memimage.hpp"
#include "ransomlab/registry.hpp"
#include "ransomlab/samples.hpp"
#include "ransomlab/sinkhole.hpp"
#include "ransomlab/taxonomy.hpp"

namespace ransomlab::cli {

namespace {

using nlohmann::json;

struct UsageError : Error {
    using Error::Error;
};

struct GlobalOpts {
    std::string format = "table";
    bool quiet = false;
    std::string data_dir;

    bool json() const { return format == "json"; }
    std::filesystem::path data() const
    {
        return data_dir.empty() ? default_data_dir() : std::filesystem::path(data_dir);
    }
};

std::string read_text_file(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw Error("cannot open file: " + path);
    return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

// --- table helper ---------------------------------------------------------

void print_table(std::ostream& out, const std::vector<std::string>& header,
                 const std::vector<std::vector<std::string>>& rows)
{
    std::vector<std::size_t> widths(header.size());
    for (std::size_t c = 0; c < header.size(); ++c)
        widths[c] = header[c].size();
    for (const auto& row : rows)
        for (std::size_t c = 0; c < row.size() && c < widths.size(); ++c)
            widths[c] = std::max(widths[c], row[c].size());

    auto emit = [&](const std::vector<std::string>& row) {
        for (std::size_t c = 0; c < row.size(); ++c) {
            out << std::left << std::setw(static_cast<int>(widths[c])) << row[c];
            out << (c + 1 == row.size() ? "" : "  ");
        }
        out << '\n';
    };
    emit(header);
    std::vector<std::string> rule;
    for (std::size_t w : widths)
        rule.push_back(std::string(w, '-'));
    emit(rule);
    for (const auto& row : rows)
        emit(row);
}

// --- sinkhole -------------------------------------------------------------

std::atomic<bool> g_stop_requested{false};
void stop_signal_handler(int) { g_stop_requested.store(true); }

struct SinkholeOpts {
    std::string family;
    std::uint16_t port = 80;
    std::string key_file;
    std::string fixture_file;
    bool bypass = false;
    std::string log_file = "sinkhole.jsonl";
};

int cmd_sinkhole(const GlobalOpts& g, const SinkholeOpts& o, std::ostream& out, std::ostream& err)
{
    sinkhole::SinkholeConfig cfg;
    cfg.family = parse_family(o.family);
    cfg.port = o.port;
    cfg.bypass_mode = o.bypass;
    cfg.log_path = o.log_file;
    if (const char* env = std::getenv("RANSOMLAB_LOG"); env && *env)
        cfg.log_path = env; // environment wins over the flag
    if (!o.key_file.empty())
        cfg.server_private_pem = read_text_file(o.key_file);
    cfg.response_fixture = sinkhole::load_fixture(cfg.family, o.fixture_file);

    std::string log_path = cfg.log_path;
    sinkhole::Sinkhole service(std::move(cfg));
    service.start();
    if (!g.quiet)
        err << "sinkhole: " << o.family << (o.bypass ? " (bypass)" : "") << " listening on port "
            << service.port() << ", logging to " << log_path << "\n";

    g_stop_requested.store(false);
    std::signal(SIGINT, stop_signal_handler);
    std::signal(SIGTERM, stop_signal_handler);
    while (!g_stop_requested.load())
        std::this_thread::sleep_for(std::chrono::milliseconds(100));
    service.stop();
    if (!g.quiet)
        err << "sinkhole: stopped\n";
    (void)out;
    return 0;
}

// --- encode / decode ------------------------------------------------------

struct CodecOpts {
    std::string family = "cryptowall";
    std::string path;
    std::string data;
    std::string param = "u";
    std::string body;
    std::string response_hex;
    std::string fixture_file;
    std::string frame_file;
    bool response = false;
};

int cmd_encode(const GlobalOpts& g, const CodecOpts& o, std::ostream& out)
{
    if (parse_family(o.family) != Family::cryptowall)
        throw UsageError("encode supports the cryptowall codec only");
    auto key = cryptowall::derive_rc4_key(o.path);

    std::string body;
    if (o.response) {
        if (o.fixture_file.empty())
            throw UsageError("encode --response needs --fixture");
        auto fixture = sinkhole::load_fixture(Family::cryptowall, o.fixture_file);
        body = cryptowall::encode_response(key, std::get<cryptowall::CwServerMessage>(fixture));
    } else {
        if (o.param.size() != 1)
            throw UsageError("--param must be a single letter a-z");
        body = cryptowall::encode_request(key, bytes_of(o.data), o.param[0]);
    }

    if (g.json())
        out << json{{"body", body}}.dump() << '\n';
    else
        out << body << '\n';
    return 0;
}

json server_message_json(const cryptowall::CwServerMessage& msg)
{
    return json{{"build_id", msg.build_id},
                {"payment_domain", msg.payment_domain},
                {"victim_id", msg.victim_id},
                {"country", msg.country},
                {"public_key_pem", msg.public_key_pem}};
}

int cmd_decode(const GlobalOpts& g, const CodecOpts& o, std::ostream& out)
{
    Family family = parse_family(o.family);

    if (family == Family::cryptolocker) {
        if (o.frame_file.empty())
            throw UsageError("decode --family cryptolocker needs --frame-file");
        std::string raw = read_text_file(o.frame_file);
        auto r = cryptolocker::parse_response(bytes_of(raw));
        if (g.json()) {
            out << json{{"version", r.version},
                        {"c2_ip", r.c2_ip},
                        {"public_key_pem", r.public_key_pem}}
                       .dump()
                << '\n';
        } else {
            out << "version: " << r.version << "\nc2_ip: " << r.c2_ip << "\n"
                << r.public_key_pem;
        }
        return 0;
    }

    if (family != Family::cryptowall)
        throw UsageError("decode supports cryptowall and cryptolocker");

    auto key = cryptowall::derive_rc4_key(o.path);
    if (!o.response_hex.empty()) {
        auto msg = cryptowall::decode_response(key, o.response_hex);
        if (g.json())
            out << server_message_json(msg).dump() << '\n';
        else
            out << cryptowall::serialize_server_message(msg) << '\n';
        return 0;
    }
    if (o.body.empty())
        throw UsageError("decode needs --body or --response-hex");

    Bytes plain = cryptowall::decode_request(key, o.body);
    if (g.json())
        out << json{{"plaintext", text_of(plain)}, {"plaintext_hex", to_hex(plain)}}.dump(
                   -1, ' ', false, json::error_handler_t::replace)
            << '\n';
    else
        out << text_of(plain) << '\n';
    return 0;
}

// --- detect ----------------------------------------------------------------

struct DetectOpts {
    std::string input_file;
    std::string commands_file;
};

detect::HttpTransaction transaction_from_json(const json& j)
{
    detect::HttpTransaction txn;
    txn.method = j.value("method", "");
    txn.host = j.value("host", "");
    txn.path = j.value("path", "/");
    if (j.contains("headers")) {
        const json& h = j["headers"];
        if (h.is_object())
            for (auto it = h.begin(); it != h.end(); ++it)
                txn.headers.emplace_back(it.key(), it.value().get<std::string>());
        else if (h.is_array())
            for (const auto& pair : h)
                txn.headers.emplace_back(pair.at(0).get<std::string>(),
                                         pair.at(1).get<std::string>());
    }
    if (j.contains("body_b64"))
        txn.body = base64_decode(j["body_b64"].get<std::string>());
    else if (j.contains("body"))
        txn.body = bytes_of(j["body"].get<std::string>());
    else if (j.contains("raw_body")) // sinkhole log records
        txn.body = base64_decode(j["raw_body"].get<std::string>());
    return txn;
}

int cmd_detect(const GlobalOpts& g, const DetectOpts& o, std::ostream& out)
{
    json results = json::array();
    std::vector<std::vector<std::string>> rows;

    if (!o.input_file.empty()) {
        std::ifstream in(o.input_file);
        if (!in)
            throw Error("cannot open input: " + o.input_file);
        std::string line;
        std::size_t line_no = 0;
        while (std::getline(in, line)) {
            ++line_no;
            if (line.empty())
                continue;
            json j;
            try {
                j = json::parse(line);
            } catch (const json::exception& e) {
                throw Error("input line " + std::to_string(line_no) + ": " + e.what());
            }
            auto txn = transaction_from_json(j);
            for (const auto& hit : detect::classify(txn)) {
                json r{{"line", line_no},
                       {"family", family_key(hit.family)},
                       {"confidence", hit.confidence == detect::Confidence::strong ? "strong"
                                                                                   : "weak"},
                       {"reason", hit.reason}};
                if (hit.decrypted)
                    r["decrypted_hex"] = to_hex(*hit.decrypted);
                results.push_back(r);
                rows.push_back({std::to_string(line_no), std::string(family_key(hit.family)),
                                hit.confidence == detect::Confidence::strong ? "strong" : "weak",
                                hit.reason});
            }
        }
    }

    if (!o.commands_file.empty()) {
        std::ifstream in(o.commands_file);
        if (!in)
            throw Error("cannot open commands file: " + o.commands_file);
        std::vector<std::string> lines;
        std::string line;
        while (std::getline(in, line))
            lines.push_back(line);
        for (const auto& hit : detect::detect_recovery_tampering(lines)) {
            results.push_back(json{{"line", hit.line_index + 1},
                                   {"tamper", tamper_kind_name(hit.kind)},
                                   {"command", hit.command}});
            rows.push_back({std::to_string(hit.line_index + 1), "-",
                            std::string(detect::tamper_kind_name(hit.kind)), hit.command});
        }
    }

    if (g.json())
        out << results.dump() << '\n';
    else if (rows.empty())
        out << "no hits\n";
    else
        print_table(out, {"line", "family", "verdict", "detail"}, rows);
    return 0;
}

// --- forensics --------------------------------------------------------------

int cmd_reg_list(const GlobalOpts& g, const std::string& file, std::ostream& out)
{
    auto exp = forensics::load_reg_export(file);
    auto entries = forensics::extract_encrypted_file_list(exp);

    if (g.json()) {
        json j{{"key_path", exp.key_path},
               {"value_count", exp.values.size()},
               {"entries", json::array()}};
        for (const auto& e : entries)
            j["entries"].push_back({{"path", e.file_path}, {"value", e.dword_value}});
        out << j.dump() << '\n';
        return 0;
    }

    out << "key: " << exp.key_path << "  (" << exp.values.size() << " values, "
        << entries.size() << " encrypted-file entries)\n";
    std::vector<std::vector<std::string>> rows;
    for (const auto& e : entries) {
        char hex[16];
        std::snprintf(hex, sizeof(hex), "0x%08x", e.dword_value);
        rows.push_back({e.file_path, hex});
    }
    print_table(out, {"encrypted file", "dword"}, rows);
    return 0;
}

int cmd_reassemble(const GlobalOpts& g, const std::string& source, const std::string& out_file,
                   std::ostream& out, std::ostream& err)
{
    auto loaded = forensics::load_memory_writes(source);
    if (!g.quiet)
        for (const auto& w : loaded.warnings)
            err << "reassemble: " << w << '\n';
    auto image = forensics::reassemble_image(loaded.writes);
    auto pe = forensics::detect_pe(image);

    if (!out_file.empty()) {
        std::ofstream os(out_file, std::ios::binary);
        if (!os)
            throw Error("cannot write image: " + out_file);
        os.write(reinterpret_cast<const char*>(image.image.data()),
                 static_cast<std::streamsize>(image.image.size()));
    }

    auto ranges_json = [](const std::vector<forensics::Range>& rs) {
        json a = json::array();
        for (const auto& r : rs)
            a.push_back({{"offset", r.offset}, {"length", r.length}});
        return a;
    };
    if (g.json()) {
        json j{{"load_base", image.load_base},
               {"size", image.image.size()},
               {"writes", loaded.writes.size()},
               {"gaps", ranges_json(image.gaps)},
               {"overlaps", ranges_json(image.overlaps)},
               {"warnings", loaded.warnings}};
        if (pe)
            j["pe"] = {{"header_offset", pe->pe_header_offset},
                       {"machine", pe->machine},
                       {"sections", pe->section_count}};
        out << j.dump() << '\n';
        return 0;
    }

    out << "load base: 0x" << std::hex << image.load_base << std::dec << "\n"
        << "image size: " << image.image.size() << " bytes from " << loaded.writes.size()
        << " writes\n"
        << "gaps: " << image.gaps.size() << ", overlaps: " << image.overlaps.size() << "\n";
    if (pe)
        out << "PE image: header at offset 0x" << std::hex << pe->pe_header_offset << std::dec
            << ", " << pe->section_count << " section(s)\n";
    else
        out << "no PE signature\n";
    return 0;
}

struct SamplesOpts {
    std::string family;
    bool anomalies = false;
};

int cmd_samples(const GlobalOpts& g, const SamplesOpts& o, std::ostream& out)
{
    auto records = forensics::load_sample_dataset(g.data() / "samples.tsv");
    auto flagged = forensics::flag_anomalous_dates(records, forensics::default_family_windows());
    auto is_flagged = [&](const forensics::SampleRecord& r) {
        return std::any_of(flagged.begin(), flagged.end(),
                           [&](const auto& f) { return f.row == r.row; });
    };

    std::optional<Family> family;
    if (!o.family.empty())
        family = parse_family(o.family);

    json arr = json::array();
    std::vector<std::vector<std::string>> rows;
    for (const auto& r : records) {
        if (family && r.family != *family)
            continue;
        if (o.anomalies && !is_flagged(r))
            continue;
        std::string date = r.compile_date ? forensics::format_date(*r.compile_date) : "-";
        std::string note;
        if (r.missing)
            note = "not published";
        else if (r.anomalous)
            note = "anomalous (source)";
        else if (is_flagged(r))
            note = "anomalous (rule)";
        arr.push_back(json{{"row", r.row},
                           {"family", family_key(r.family)},
                           {"md5", r.md5},
                           {"compile_date", date},
                           {"anomalous", r.anomalous},
                           {"rule_flagged", !r.missing && is_flagged(r)},
                           {"missing", r.missing}});
        rows.push_back({std::to_string(r.row), std::string(family_name(r.family)),
                        r.missing ? "-" : r.md5, date, note});
    }

    if (g.json())
        out << arr.dump() << '\n';
    else
        print_table(out, {"row", "family", "md5", "compiled", "notes"}, rows);
    return 0;
}

// --- scan --------------------------------------------------------------------

struct ScanOpts {
    std::string root;
    std::string family;
    bool list_paths = false;
};

int cmd_scan(const GlobalOpts& g, const ScanOpts& o, std::ostream& out, std::ostream& err)
{
    auto tax = exposure::load_taxonomy(g.data() / "taxonomy.tsv");
    Family family = parse_family(o.family);
    auto report = exposure::scan_tree(tax, o.root, family, o.list_paths);

    if (!g.quiet)
        for (const auto& w : report.warnings)
            err << "scan: " << w << '\n';

    std::uint64_t matched = 0;
    for (const auto& [cat, count] : report.counts)
        matched += count;

    if (g.json()) {
        json counts = json::object();
        for (exposure::Category c : exposure::kAllCategories) {
            auto it = report.counts.find(c);
            counts[std::string(exposure::category_key(c))] =
                it == report.counts.end() ? 0 : it->second;
        }
        json j{{"family", family_key(family)},
               {"counts", counts},
               {"total_files_seen", report.total_files_seen},
               {"matched", matched},
               {"warnings", report.warnings}};
        if (report.matched_paths)
            j["matched_paths"] = *report.matched_paths;
        out << j.dump() << '\n';
        return 0;
    }

    std::vector<std::vector<std::string>> rows;
    for (exposure::Category c : exposure::kAllCategories) {
        auto it = report.counts.find(c);
        rows.push_back({std::string(exposure::category_key(c)),
                        std::to_string(it == report.counts.end() ? 0 : it->second)});
    }
    print_table(out, {"category", "files"}, rows);
    out << matched << " of " << report.total_files_seen << " files would be targeted by "
        << family_name(family) << '\n';
    if (report.matched_paths)
        for (const auto& p : *report.matched_paths)
            out << p << '\n';
    return 0;
}

} // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err)
{
    CLI::App app{"ransomlab: crypto-ransomware C&C emulation and forensics toolkit"};
    app.require_subcommand(1);
    app.fallthrough();

    GlobalOpts g;
    app.add_option("--format", g.format, "Output format")
        ->check(CLI::IsMember({"table", "json"}))
        ->capture_default_str();
    app.add_flag("--quiet", g.quiet, "Suppress informational messages");
    app.add_option("--data-dir", g.data_dir, "Directory holding samples.tsv and taxonomy.tsv");

    SinkholeOpts sink;
    auto* sc_sink = app.add_subcommand("sinkhole", "Run a fake C&C server and log victims");
    sc_sink->add_option("--family", sink.family, "cryptowall or cryptolocker")->required();
    sc_sink->add_option("--port", sink.port, "TCP port (default 80)");
    sc_sink->add_option("--key", sink.key_file, "Server private key PEM (cryptolocker full mode)");
    sc_sink->add_option("--fixture", sink.fixture_file, "Response fixture file")->required();
    sc_sink->add_flag("--bypass", sink.bypass, "Serve the plaintext frame (cryptolocker only)");
    sc_sink->add_option("--log", sink.log_file, "JSON-lines victim log")->capture_default_str();

    CodecOpts codec;
    auto* sc_encode = app.add_subcommand("encode", "Encode a CryptoWall request or response body");
    sc_encode->add_option("--family", codec.family, "Protocol family")->capture_default_str();
    sc_encode->add_option("--path", codec.path, "URL path; its bytes are the RC4 key")->required();
    sc_encode->add_option("--data", codec.data, "Plaintext to encrypt");
    sc_encode->add_option("--param", codec.param, "Parameter name (one letter)")
        ->capture_default_str();
    sc_encode->add_flag("--response", codec.response, "Encode a server message instead");
    sc_encode->add_option("--fixture", codec.fixture_file, "Server message fixture file");

    CodecOpts dec;
    auto* sc_decode = app.add_subcommand("decode", "Decode a captured body or response");
    sc_decode->add_option("--family", dec.family, "Protocol family")->capture_default_str();
    sc_decode->add_option("--path", dec.path, "URL path the body was posted to");
    sc_decode->add_option("--body", dec.body, "Request body (x=hex...)");
    sc_decode->add_option("--response-hex", dec.response_hex, "Response body hex");
    sc_decode->add_option("--frame-file", dec.frame_file, "NUL-framed response file (cryptolocker)");

    DetectOpts det;
    auto* sc_detect = app.add_subcommand("detect", "Classify captured HTTP transactions");
    sc_detect->add_option("--input", det.input_file, "JSON-lines of HTTP transactions");
    sc_detect->add_option("--commands", det.commands_file,
                          "Command lines to check for recovery tampering");

    auto* sc_forensics = app.add_subcommand("forensics", "Host-side artifact analysis");
    sc_forensics->require_subcommand(1);
    std::string reg_file;
    auto* sc_reg = sc_forensics->add_subcommand("reg-list",
                                                "Recover the encrypted-file list from a .reg export");
    sc_reg->add_option("file", reg_file, "Registry export file")->required();
    std::string dump_source, image_out;
    auto* sc_asm = sc_forensics->add_subcommand("reassemble",
                                                "Rebuild an injected image from memory-write dumps");
    sc_asm->add_option("source", dump_source, "Dump directory or JSON-lines trace")->required();
    sc_asm->add_option("--out", image_out, "Write the reassembled image here");
    SamplesOpts fsamples;
    auto* sc_fsamples = sc_forensics->add_subcommand("samples", "Query the sample dataset");
    sc_fsamples->add_option("--family", fsamples.family, "Filter by family");
    sc_fsamples->add_flag("--anomalies", fsamples.anomalies, "Only rule-flagged rows");

    SamplesOpts dsamples;
    auto* sc_dataset = app.add_subcommand("dataset", "Show the analyzed-sample dataset");
    sc_dataset->add_option("--family", dsamples.family, "Filter by family");
    sc_dataset->add_flag("--anomalies", dsamples.anomalies, "Only rule-flagged rows");

    ScanOpts scan;
    auto* sc_scan = app.add_subcommand("scan", "Measure filesystem exposure for a family");
    sc_scan->add_option("--root", scan.root, "Directory to walk")->required();
    sc_scan->add_option("--family", scan.family, "Family whose extension list to apply")
        ->required();
    sc_scan->add_flag("--list-paths", scan.list_paths, "List matched file paths");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        app.exit(e, out, err);
        return 0;
    } catch (const CLI::CallForAllHelp& e) {
        app.exit(e, out, err);
        return 0;
    } catch (const CLI::ParseError& e) {
        app.exit(e, out, err);
        return 2;
    }

    std::string active = app.get_subcommands().front()->get_name();
    try {
        if (sc_sink->parsed())
            return cmd_sinkhole(g, sink, out, err);
        if (sc_encode->parsed())
            return cmd_encode(g, codec, out);
        if (sc_decode->parsed())
            return cmd_decode(g, dec, out);
        if (sc_detect->parsed())
            return cmd_detect(g, det, out);
        if (sc_forensics->parsed()) {
            if (sc_reg->parsed())
                return cmd_reg_list(g, reg_file, out);
            if (sc_asm->parsed())
                return cmd_reassemble(g, dump_source, image_out, out, err);
            if (sc_fsamples->parsed())
                return cmd_samples(g, fsamples, out);
        }
        if (sc_dataset->parsed())
            return cmd_samples(g, dsamples, out);
        if (sc_scan->parsed())
            return cmd_scan(g, scan, out, err);
        throw UsageError("no subcommand selected");
    } catch (const UsageError& e) {
        err << active << ": " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        err << active << ": " << e.what() << '\n';
        return 1;
    }
}

} // namespace ransomlab::cli
