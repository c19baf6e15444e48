// Acceptance suite: one check per shipping criterion, one PASS/FAIL line
// each, nonzero exit when anything fails or overruns its time budget.

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <functional>
#include <map>
#include <random>
#include <regex>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <httplib.h>

#include "ransomlab/cryptolocker.hpp"
#include "ransomlab/cryptowall.hpp"
#include "ransomlab/detect.hpp"
#include "ransomlab/envelope.hpp"
#include "ransomlab/error.hpp"
#include "ransomlab/memimage.hpp"
#include "ransomlab/rc4.hpp"
#include "ransomlab/registry.hpp"
#include "ransomlab/samples.hpp"
#include "ransomlab/sinkhole.hpp"
#include "ransomlab/taxonomy.hpp"
#include "support/rc4_oracle.hpp"
#include "support/tmpdir.hpp"

#ifndef RANSOMLAB_TEST_DATA_DIR
#define RANSOMLAB_TEST_DATA_DIR "data"
#endif

using namespace ransomlab;

namespace {

const std::filesystem::path kDataDir = RANSOMLAB_TEST_DATA_DIR;

struct CheckFailure : std::runtime_error {
    using std::runtime_error::runtime_error;
};

void require(bool ok, const std::string& what)
{
    if (!ok)
        throw CheckFailure(what);
}

// shared 2048-bit pair; generating it is not part of any criterion's budget
const RsaKeyPair& server_keys()
{
    static const RsaKeyPair pair = generate_rsa_keypair(2048);
    return pair;
}

cryptowall::CwServerMessage cw_fixture()
{
    return {216, "1test.onion", "1a2b", "US", server_keys().public_pem};
}

std::string random_token(std::mt19937& rng, std::size_t min_len, std::size_t max_len,
                         std::string_view alphabet)
{
    std::uniform_int_distribution<std::size_t> len(min_len, max_len);
    std::uniform_int_distribution<std::size_t> pick(0, alphabet.size() - 1);
    std::string out;
    std::size_t n = len(rng);
    for (std::size_t i = 0; i < n; ++i)
        out.push_back(alphabet[pick(rng)]);
    return out;
}

Bytes random_bytes(std::mt19937& rng, std::size_t min_len, std::size_t max_len)
{
    std::uniform_int_distribution<std::size_t> len(min_len, max_len);
    std::uniform_int_distribution<int> byte(0, 255);
    Bytes out(len(rng));
    for (auto& b : out)
        b = static_cast<std::uint8_t>(byte(rng));
    return out;
}

// --- criterion bodies -------------------------------------------------------

void criterion_appendix_b_sinkhole()
{
    testsupport::TmpDir tmp;
    sinkhole::SinkholeConfig cfg;
    cfg.family = Family::cryptowall;
    cfg.port = 0;
    cfg.response_fixture = cw_fixture();
    cfg.log_path = (tmp.path() / "log.jsonl").string();

    sinkhole::Sinkhole service(cfg);
    service.start();
    {
        httplib::Client client("127.0.0.1", service.port());
        client.set_keep_alive(true);
        client.set_tcp_nodelay(true);

        // the documented exchange, byte for byte
        auto key = cryptowall::derive_rc4_key("/gate77");
        std::string body = cryptowall::encode_request(key, bytes_of("crypt1|test"), 'u');
        auto res = client.Post("/gate77", body, "application/x-www-form-urlencoded");
        require(res && res->status == 200, "fixture request failed");
        auto msg = cryptowall::decode_response(key, res->body);
        require(msg == cw_fixture(), "fixture message not recovered byte-exactly");
        require(msg.build_id == 216 && msg.payment_domain == "1test.onion" &&
                    msg.victim_id == "1a2b" && msg.country == "US",
                "fixture fields drifted");

        std::mt19937 rng(0xacce0001);
        for (int i = 0; i < 100; ++i) {
            std::string path =
                "/" + random_token(rng, 1, 18, "abcdefghijklmnopqrstuvwxyz0123456789");
            auto pkey = cryptowall::derive_rc4_key(path);
            Bytes plain = random_bytes(rng, 1, 160);
            char param = static_cast<char>('a' + rng() % 26);
            std::string rbody = cryptowall::encode_request(pkey, plain, param);

            auto rres = client.Post(path, rbody, "application/x-www-form-urlencoded");
            require(rres && rres->status == 200, "random round-trip request failed");
            require(cryptowall::decode_response(pkey, rres->body) == cw_fixture(),
                    "random round-trip lost the fixture message");
        }
    } // close the client connection before stopping the service
    service.stop();

    require(sinkhole::read_log(cfg.log_path).size() == 101, "expected 101 log records");
}

void criterion_appendix_a_bypass()
{
    testsupport::TmpDir tmp;
    cryptolocker::ClResponse fixture{1, "172.16.10.10", server_keys().public_pem};

    sinkhole::SinkholeConfig cfg;
    cfg.family = Family::cryptolocker;
    cfg.port = 0;
    cfg.bypass_mode = true;
    cfg.response_fixture = fixture;
    cfg.log_path = (tmp.path() / "log.jsonl").string();

    sinkhole::Sinkhole service(cfg);
    service.start();
    httplib::Client client("127.0.0.1", service.port());
    auto res = client.Get("/");
    service.stop();
    require(res && res->status == 200, "bypass request failed");

    std::string expect = "1";
    expect.push_back('\0');
    expect += "172.16.10.10";
    expect.push_back('\0');
    expect += server_keys().public_pem;
    expect.push_back('\0');
    require(res->body == expect, "bypass body is not the verbatim frame");

    auto parsed = cryptolocker::parse_response(bytes_of(res->body));
    require(parsed == fixture, "parse_response does not invert the frame");
}

void criterion_handshake()
{
    const auto& pair = server_keys();
    std::mt19937 rng(0xacce0003);
    auto printable = [&](std::size_t max_len) {
        return random_token(rng, 0, max_len,
                            "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789 ._-");
    };

    for (int round = 0; round < 1000; ++round) {
        cryptolocker::VictimReport report{printable(24), printable(24), printable(10),
                                          printable(16)};
        cryptolocker::ClResponse response{static_cast<std::uint32_t>(1 + rng() % 99),
                                          std::to_string(rng() % 256) + "." +
                                              std::to_string(rng() % 256) + "." +
                                              std::to_string(rng() % 256) + "." +
                                              std::to_string(rng() % 256),
                                          pair.public_pem};

        auto hello = cryptolocker::client_hello(report, pair.public_pem);
        auto accepted = cryptolocker::server_accept(hello.blob, pair.private_pem);
        require(accepted.report == report, "handshake lost the report");
        auto finished = cryptolocker::client_finish(
            cryptolocker::server_reply(response, accepted.session_key), hello.session_key);
        require(finished == response, "handshake lost the response");
    }

    // corruption sweeps over one fixture exchange
    cryptolocker::VictimReport report{"WIN-FIXTURE", "5.1.2600", "en-US", "bot-1"};
    auto hello = cryptolocker::client_hello(report, pair.public_pem);
    for (std::size_t pos = 0; pos < hello.blob.size(); ++pos) {
        Bytes bad = hello.blob;
        bad[pos] ^= 0xff;
        bool rejected = false;
        try {
            (void)cryptolocker::server_accept(bad, pair.private_pem);
        } catch (const Error&) {
            rejected = true;
        }
        require(rejected, "hello corruption at byte " + std::to_string(pos) + " got through");
    }

    auto accepted = cryptolocker::server_accept(hello.blob, pair.private_pem);
    cryptolocker::ClResponse response{1, "172.16.10.10", pair.public_pem};
    Bytes reply = cryptolocker::server_reply(response, accepted.session_key);
    for (std::size_t pos = 0; pos < reply.size(); ++pos) {
        Bytes bad = reply;
        bad[pos] ^= 0xff;
        bool rejected = false;
        try {
            (void)cryptolocker::client_finish(bad, hello.session_key);
        } catch (const Error&) {
            rejected = true;
        }
        require(rejected, "reply corruption at byte " + std::to_string(pos) + " got through");
    }
}

void criterion_rc4()
{
    require(to_hex(rc4_apply(rc4_ksa(bytes_of("Key")), bytes_of("Plaintext"))) ==
                "bbf316e8d940af0ad3",
            "Key/Plaintext vector mismatch");
    require(to_hex(rc4_apply(rc4_ksa(bytes_of("Wiki")), bytes_of("pedia"))) == "1021bf0420",
            "Wiki/pedia vector mismatch");

    std::mt19937 rng(0xacce0004);
    for (int i = 0; i < 10000; ++i) {
        Bytes key = random_bytes(rng, 1, 40);
        Bytes msg = random_bytes(rng, 0, 192);
        require(rc4_apply(rc4_ksa(key), msg) == oracle::rc4(key, msg),
                "rc4 disagrees with the oracle at round " + std::to_string(i));
    }
}

void criterion_detector_grammar()
{
    // exhaustive agreement with the reference expression over a reduced
    // alphabet, all bodies up to length 4
    const std::regex reference("^[a-z]=[a-z0-9]+$");
    const std::string alphabet = "az09=A";
    std::vector<std::string> frontier = {""};
    for (int len = 1; len <= 4; ++len) {
        std::vector<std::string> next;
        for (const auto& prefix : frontier)
            for (char c : alphabet)
                next.push_back(prefix + c);
        for (const auto& body : next)
            require(detect::match_cryptowall_body(body) == std::regex_match(body, reference),
                    "grammar disagreement on \"" + body + "\"");
        frontier = std::move(next);
    }

    // 100% of encoder output is flagged
    std::mt19937 rng(0xacce0005);
    for (int i = 0; i < 200; ++i) {
        auto key = cryptowall::derive_rc4_key(
            "/" + random_token(rng, 1, 12, "abcdefghijklmnopqrstuvwxyz0123456789"));
        std::string body = cryptowall::encode_request(key, random_bytes(rng, 1, 96),
                                                      static_cast<char>('a' + rng() % 26));
        require(detect::match_cryptowall_body(body), "encoder body evaded the detector");
    }

    // zero hits on a benign form-post corpus
    const std::vector<std::string> benign = {
        "user=admin&pass=hunter2",
        "username=alice&remember=1",
        "q=weather+in+cupertino",
        "search=c%2B%2B+ransomware",
        "id=12345&action=view",
        "email=bob%40example.com&subscribe=yes",
        "token=ABCDEF123456",
        "csrf=9f86d081884c7d659a2feaa0c55ad015a",
        "comment=hello+world&submit=Post",
        "page=2&sort=desc",
        "lang=en-US",
        "theme=dark&font=large",
        "a=B3", // uppercase in the value
        "X=ff00",
        "data={\"k\":\"v\"}",
        "payload=<xml version=\"1.0\"?>",
        "login=root&pwd=",
        "cart=widget,gadget&qty=3",
        "callback=jsonp_12_ab",
        "filter[]=new&filter[]=hot",
        "utm_source=newsletter&utm_medium=email",
        "next=%2Faccount%2Fsettings",
        "file=report.pdf",
        "v=1.2.3",
        "debug=true",
        "ts=1415000000&sig=00ff00ff",
        "name=J+Smith&age=44",
        "city=San+Jose&state=CA",
        "phone=555-0100",
        "zip=95014",
        "amount=10.00&currency=USD",
        "card=4111111111111111",
        "otp=482910",
        "session=deadbeefcafef00d;Path=/",
        "ref=https%3A%2F%2Fexample.com",
        "mode=edit&id=7",
        "tag=c&tag=cpp", // repeated parameter
        "b=0F12AB",      // uppercase hex
        "body text without any equals sign",
        "=orphanvalue",
        "key=",
        "multi\nline=payload",
        "u =0f12ab",
        "u= 0f12ab",
        "u=0f12ab&",
        "answer=42&question=life",
        "color=%23ff0000",
        "note=trailing space ",
        "emoji=%F0%9F%98%80",
        "empty",
    };
    require(benign.size() >= 50, "benign corpus shrank");
    for (const auto& body : benign)
        require(!detect::match_cryptowall_body(body),
                "benign body was flagged: \"" + body + "\"");
}

void criterion_dataset()
{
    auto records = forensics::load_sample_dataset(kDataDir / "samples.tsv");
    require(records.size() == 28, "expected 28 records, got " + std::to_string(records.size()));

    auto visible = [&](Family f) {
        return std::count_if(records.begin(), records.end(), [&](const auto& r) {
            return r.family == f && !r.missing;
        });
    };
    require(visible(Family::cryptolocker) == 13, "cryptolocker visible row count");
    require(visible(Family::cryptowall) == 9, "cryptowall row count");
    require(visible(Family::critroni) == 1, "critroni row count");
    require(visible(Family::dirty_decrypt) == 1, "dirty decrypt row count");
    require(visible(Family::torrentlocker) == 2, "torrentlocker row count");
    require(visible(Family::cryptographic_locker) == 1, "cryptographic locker row count");

    std::set<int> starred;
    for (const auto& r : records)
        if (r.anomalous)
            starred.insert(r.row);
    require(starred == std::set<int>{13, 14, 18, 23}, "asterisked rows are not {13,14,18,23}");

    auto flagged = forensics::flag_anomalous_dates(records, forensics::default_family_windows());
    std::set<int> flagged_rows;
    for (const auto& r : flagged)
        flagged_rows.insert(r.row);
    for (int row : starred)
        require(flagged_rows.count(row) == 1,
                "rule failed to flag asterisked row " + std::to_string(row));
}

void criterion_taxonomy()
{
    auto tax = exposure::load_taxonomy(kDataDir / "taxonomy.tsv");

    auto count = [&](Family f) { return tax.entries.at(f).size(); };
    require(count(Family::dirty_decrypt) == 8, "dirty decrypt must target exactly 8 extensions");
    require(count(Family::cryptolocker) >= 70, "cryptolocker must target at least 70");
    require(count(Family::torrentlocker) > 200, "torrentlocker must target more than 200");

    auto tl = exposure::taxonomy_stats(tax, Family::torrentlocker);
    std::size_t tl_img = tl.at(exposure::Category::img);
    require(tl_img <= 70, "torrentlocker img count exceeds 70");
    for (const auto& [cat, n] : tl)
        require(n <= tl_img, "torrentlocker img is not its largest category");
    for (Family f : kAllFamilies) {
        auto stats = exposure::taxonomy_stats(tax, f);
        auto it = stats.find(exposure::Category::img);
        require((it == stats.end() ? 0 : it->second) <= tl_img,
                "some family tops torrentlocker's img count");
    }

    std::size_t prev = 0;
    for (const auto& [family, first_seen] : forensics::family_timeline()) {
        std::size_t coverage = exposure::taxonomy_stats(tax, family).size();
        require(coverage >= prev,
                "category coverage shrinks at " + std::string(family_key(family)));
        prev = coverage;
    }
}

void criterion_reassembly()
{
    std::mt19937 rng(0xacce0008);
    std::uniform_int_distribution<int> writes_dist(1, 32);
    std::uniform_int_distribution<std::uint64_t> base_dist(0, 60 * 1024);
    std::uniform_int_distribution<std::size_t> len_dist(1, 4 * 1024);
    std::uniform_int_distribution<int> byte(0, 255);

    for (int round = 0; round < 500; ++round) {
        std::vector<forensics::MemoryWrite> writes;
        std::map<std::uint64_t, std::pair<std::uint8_t, int>> replay;
        int n = writes_dist(rng);
        for (int k = 0; k < n; ++k) {
            std::uint64_t base = 0x00400000 + base_dist(rng);
            Bytes payload(len_dist(rng));
            for (auto& b : payload)
                b = static_cast<std::uint8_t>(byte(rng));
            for (std::size_t i = 0; i < payload.size(); ++i) {
                auto& slot = replay[base + i];
                slot.first = payload[i];
                ++slot.second;
            }
            writes.push_back({base, std::move(payload), ""});
        }

        auto img = forensics::reassemble_image(writes);
        require(img.load_base == replay.begin()->first, "load base drifted");
        require(img.load_base + img.image.size() == replay.rbegin()->first + 1,
                "image span drifted");
        require(img.image.size() <= 64 * 1024, "span larger than intended by the generator");

        std::vector<forensics::Range> want_gaps, want_overlaps;
        for (std::uint64_t off = 0; off < img.image.size(); ++off) {
            auto it = replay.find(img.load_base + off);
            std::uint8_t expect = it == replay.end() ? 0 : it->second.first;
            require(img.image[static_cast<std::size_t>(off)] == expect,
                    "byte mismatch at offset " + std::to_string(off));
            auto extend = [&](std::vector<forensics::Range>& rs) {
                if (!rs.empty() && rs.back().offset + rs.back().length == off)
                    ++rs.back().length;
                else
                    rs.push_back({off, 1});
            };
            if (it == replay.end())
                extend(want_gaps);
            else if (it->second.second >= 2)
                extend(want_overlaps);
        }
        require(img.gaps == want_gaps, "gap map mismatch");
        require(img.overlaps == want_overlaps, "overlap map mismatch");
    }

    // synthetic dump directory holding a minimal PE
    testsupport::TmpDir tmp;
    std::string pe(0x400, '\0');
    pe[0] = 'M';
    pe[1] = 'Z';
    pe[0x3c] = static_cast<char>(0x80);
    pe[0x80] = 'P';
    pe[0x81] = 'E';
    pe[0x84] = static_cast<char>(0x4c);
    pe[0x85] = 0x01;
    pe[0x86] = 0x02; // two sections
    tmp.write("400000.bin", pe.substr(0, 0x180));
    tmp.write("400180.bin", pe.substr(0x180));
    tmp.write("readme.txt", "not a dump");

    auto loaded = forensics::load_memory_writes(tmp.path());
    require(loaded.writes.size() == 2, "dump directory load miscounted");
    require(loaded.warnings.size() == 1, "stray file should warn");
    auto img = forensics::reassemble_image(loaded.writes);
    require(img.gaps.empty() && img.overlaps.empty(), "synthetic PE should be contiguous");
    auto summary = forensics::detect_pe(img);
    require(summary.has_value(), "PE not detected in reassembled image");
    require(summary->pe_header_offset == 0x80 && summary->section_count == 2,
            "PE summary fields wrong");
}

void criterion_registry_fixture()
{
    auto exp = forensics::load_reg_export(kDataDir / "fixtures" / "cryptolocker_0388.reg");
    require(exp.values.size() == 20,
            "fixture should parse to 20 entries, got " + std::to_string(exp.values.size()));

    auto entries = forensics::extract_encrypted_file_list(exp);
    require(entries.size() == 19, "expected the 19 file rows");
    for (const auto& e : entries)
        require(e.file_path != "(Default)", "(Default) leaked into the file list");

    std::size_t dword_rows = 0;
    for (const auto& v : exp.values)
        if (v.kind == forensics::RegKind::dword)
            ++dword_rows;
    require(dword_rows == entries.size(), "every dword path row must be returned");

    require(entries.front().file_path ==
                    "C:\\Documents and Settings\\Default User\\Templates\\excel.xls" &&
                entries.front().dword_value == 0x00af1408,
            "first file row mismatch");
}

void criterion_tamper_detector()
{
    std::vector<std::string> malicious = {
        "vssadmin.exe Delete Shadows /All /Quiet",
        "bcdedit /set {default} recoveryenabled No",
        "bcdedit /set {default} bootstatuspolicy ignoreallfailures",
        "reg add \"HKLM\\SOFTWARE\\Microsoft\\Windows NT\\CurrentVersion\\SystemRestore\" /v DisableSR /t REG_DWORD /d 1 /f",
    };
    auto hits = detect::detect_recovery_tampering(malicious);
    require(hits.size() == 4, "expected 4 tamper hits");
    std::set<detect::TamperKind> kinds;
    for (const auto& h : hits)
        kinds.insert(h.kind);
    require(kinds.size() == 4, "each command line must map to its own tamper kind");

    std::vector<std::string> benign = {
        "vssadmin list shadows",
        "bcdedit /enum all",
        "reg query HKLM\\SOFTWARE\\Microsoft /v DisableSR",
        "xcopy C:\\data D:\\backup /e /h",
        "schtasks /query /tn backup",
    };
    require(detect::detect_recovery_tampering(benign).empty(),
            "benign admin command was flagged");
}

// --- driver -----------------------------------------------------------------

struct Criterion {
    int id;
    const char* label;
    double limit_seconds;
    std::function<void()> body;
};

} // namespace

int main()
{
    const std::vector<Criterion> criteria = {
        {1, "cryptowall sinkhole fidelity (live round-trip)", 5.0, criterion_appendix_b_sinkhole},
        {2, "cryptolocker bypass frame fidelity", 1.0, criterion_appendix_a_bypass},
        {3, "hybrid handshake identity and corruption rejection", 60.0, criterion_handshake},
        {4, "rc4 vs independent oracle and published vectors", 10.0, criterion_rc4},
        {5, "request-body detector grammar", 10.0, criterion_detector_grammar},
        {6, "sample dataset exactness", 1.0, criterion_dataset},
        {7, "extension taxonomy constraints", 1.0, criterion_taxonomy},
        {8, "memory-write reassembly vs replay oracle", 30.0, criterion_reassembly},
        {9, "registry fixture extraction", 1.0, criterion_registry_fixture},
        {10, "recovery-tampering detector", 1.0, criterion_tamper_detector},
    };

    (void)server_keys(); // keygen happens outside the timed sections

    int failures = 0;
    for (const auto& c : criteria) {
        auto start = std::chrono::steady_clock::now();
        std::string failure;
        try {
            c.body();
        } catch (const std::exception& e) {
            failure = e.what();
        }
        double seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

        bool timed_out = seconds > c.limit_seconds;
        bool pass = failure.empty() && !timed_out;
        if (!pass)
            ++failures;

        std::printf("[%2d] %s  %-52s (%.2fs, limit %.0fs)\n", c.id, pass ? "PASS" : "FAIL",
                    c.label, seconds, c.limit_seconds);
        if (!failure.empty())
            std::printf("     reason: %s\n", failure.c_str());
        else if (timed_out)
            std::printf("     reason: exceeded the %.0fs budget\n", c.limit_seconds);
    }

    std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failures,
                criteria.size());
    return failures == 0 ? 0 : 1;
}
