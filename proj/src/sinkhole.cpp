#include "ransomlab/sinkhole.hpp"

#include <atomic>
#include <ctime>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "ransomlab/error.hpp"

namespace ransomlab::sinkhole {

namespace {

using nlohmann::json;

// First name=value pair in wire order, body first, then the query string —
// the same pair the reference servers read.
std::optional<std::pair<std::string, std::string>> first_param(std::string_view body,
                                                               std::string_view query)
{
    for (std::string_view source : {body, query}) {
        if (source.empty())
            continue;
        std::string_view pair = source.substr(0, source.find('&'));
        auto eq = pair.find('=');
        if (eq == std::string_view::npos)
            continue;
        return std::make_pair(std::string(pair.substr(0, eq)), std::string(pair.substr(eq + 1)));
    }
    return std::nullopt;
}

std::string dump_lossy(const json& j)
{
    // invalid UTF-8 in decrypted payloads must not kill the log writer
    return j.dump(-1, ' ', false, json::error_handler_t::replace);
}

std::string query_of(const detect::HttpTransaction& txn)
{
    auto q = txn.path.find('?');
    return q == std::string::npos ? std::string() : txn.path.substr(q + 1);
}

std::string path_of(const detect::HttpTransaction& txn)
{
    auto q = txn.path.find('?');
    return q == std::string::npos ? txn.path : txn.path.substr(0, q);
}

} // namespace

void validate_config(const SinkholeConfig& cfg)
{
    if (cfg.family != Family::cryptolocker && cfg.family != Family::cryptowall)
        throw Error("sinkhole family must be cryptolocker or cryptowall");
    if (cfg.bypass_mode && cfg.family != Family::cryptolocker)
        throw Error("bypass mode only applies to the cryptolocker family");
    if (cfg.family == Family::cryptowall &&
        !std::holds_alternative<cryptowall::CwServerMessage>(cfg.response_fixture))
        throw Error("cryptowall sinkhole needs a server-message fixture");
    if (cfg.family == Family::cryptolocker &&
        !std::holds_alternative<cryptolocker::ClResponse>(cfg.response_fixture))
        throw Error("cryptolocker sinkhole needs a response-frame fixture");
    if (cfg.family == Family::cryptolocker && !cfg.bypass_mode &&
        cfg.server_private_pem.empty())
        throw Error("cryptolocker full mode needs the server private key");
    if (cfg.log_path.empty())
        throw Error("sinkhole needs a log path");
}

ResponseFixture load_fixture(Family family, const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw Error("cannot open fixture: " + path.string());
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());

    if (family == Family::cryptowall) {
        // strip one trailing newline so `echo`-made fixtures work
        while (!text.empty() && (text.back() == '\n' || text.back() == '\r'))
            text.pop_back();
        return cryptowall::parse_server_message(text);
    }
    if (family == Family::cryptolocker) {
        std::istringstream lines(text);
        std::string version_line, ip_line;
        if (!std::getline(lines, version_line) || !std::getline(lines, ip_line))
            throw Error("malformed fixture: expected version line, ip line, then PEM");
        std::string pem((std::istreambuf_iterator<char>(lines)), std::istreambuf_iterator<char>());
        cryptolocker::ClResponse r;
        r.version = static_cast<std::uint32_t>(std::stoul(version_line));
        r.c2_ip = ip_line;
        r.public_key_pem = pem;
        cryptolocker::frame_response(r); // validates
        return r;
    }
    throw Error("no fixture format for family " + std::string(family_key(family)));
}

std::string victim_record_to_json(const VictimRecord& rec)
{
    json j{
        {"timestamp", rec.timestamp},
        {"source_address", rec.source_address},
        {"method", rec.method},
        {"path", rec.path},
        {"raw_body", rec.raw_body_b64},
        {"response", rec.response_body},
        {"family", rec.family},
    };
    if (rec.decrypted_message)
        j["decrypted_message"] = *rec.decrypted_message;
    return dump_lossy(j);
}

VictimRecord victim_record_from_json(std::string_view line)
{
    json j = json::parse(line); // caller wraps parse errors with the line number
    VictimRecord rec;
    rec.timestamp = j.at("timestamp").get<std::string>();
    rec.source_address = j.at("source_address").get<std::string>();
    rec.method = j.at("method").get<std::string>();
    rec.path = j.at("path").get<std::string>();
    rec.raw_body_b64 = j.at("raw_body").get<std::string>();
    rec.response_body = j.at("response").get<std::string>();
    rec.family = j.at("family").get<std::string>();
    if (j.contains("decrypted_message"))
        rec.decrypted_message = j["decrypted_message"].get<std::string>();
    return rec;
}

std::pair<SinkholeReply, VictimRecord> handle_transaction(const SinkholeConfig& cfg,
                                                          const detect::HttpTransaction& txn,
                                                          const std::string& source_address,
                                                          const std::string& timestamp)
{
    VictimRecord rec;
    rec.timestamp = timestamp;
    rec.source_address = source_address;
    rec.method = txn.method;
    rec.path = txn.path;
    rec.raw_body_b64 = base64_encode(txn.body);
    rec.family = family_key(cfg.family);

    SinkholeReply reply; // 200 no matter what happens below

    if (cfg.family == Family::cryptowall) {
        const auto& fixture = std::get<cryptowall::CwServerMessage>(cfg.response_fixture);
        try {
            auto key = cryptowall::derive_rc4_key(path_of(txn));
            auto param = first_param(text_of(txn.body), query_of(txn));
            if (!param)
                throw Error("no parameter");
            Bytes plain = cryptowall::decode_request(key, param->first + "=" + param->second);
            rec.decrypted_message = text_of(plain);
            reply.body = cryptowall::encode_response(key, fixture);
            rec.response_body = reply.body;
        } catch (const Error&) {
            // sinkholes never explain themselves: 200 with an empty body
            reply.body.clear();
            rec.response_body.clear();
            rec.decrypted_message.reset();
        }
        return {reply, rec};
    }

    // cryptolocker
    const auto& fixture = std::get<cryptolocker::ClResponse>(cfg.response_fixture);
    if (cfg.bypass_mode) {
        // the client's CryptDecrypt is hooked out, so serve the bare frame
        Bytes frame = cryptolocker::frame_response(fixture);
        reply.body = text_of(frame);
        reply.content_type = "application/octet-stream";
        rec.response_body = reply.body;
        return {reply, rec};
    }

    try {
        auto accepted = cryptolocker::server_accept(txn.body, cfg.server_private_pem);
        Bytes sealed = cryptolocker::server_reply(fixture, accepted.session_key);
        reply.body = text_of(sealed);
        reply.content_type = "application/octet-stream";
        rec.response_body = to_hex(sealed);
        rec.decrypted_message = text_of(cryptolocker::serialize_report(accepted.report));
    } catch (const Error&) {
        reply.body.clear();
        rec.response_body.clear();
        rec.decrypted_message.reset();
    }
    return {reply, rec};
}

std::vector<VictimRecord> read_log(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw Error("cannot open log: " + path.string());

    std::vector<VictimRecord> records;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty())
            continue;
        try {
            records.push_back(victim_record_from_json(line));
        } catch (const std::exception& e) {
            throw Error("log line " + std::to_string(line_no) + ": " + e.what());
        }
    }
    return records;
}

std::string utc_timestamp()
{
    std::time_t now = std::time(nullptr);
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

struct Sinkhole::Impl {
    SinkholeConfig cfg;
    httplib::Server server;
    std::thread worker;
    std::uint16_t bound_port = 0;
    std::ofstream log;
    std::mutex log_mutex;

    explicit Impl(SinkholeConfig c) : cfg(std::move(c)) {}

    void append(const VictimRecord& rec)
    {
        std::lock_guard lock(log_mutex);
        log << victim_record_to_json(rec) << '\n';
        log.flush();
    }

    void handle(const httplib::Request& req, httplib::Response& res)
    {
        detect::HttpTransaction txn;
        txn.method = req.method;
        txn.host = req.get_header_value("Host");
        txn.path = req.target.empty() ? req.path : req.target;
        for (const auto& [name, value] : req.headers)
            txn.headers.emplace_back(name, value);
        txn.body = bytes_of(req.body);

        std::string source = req.remote_addr + ":" + std::to_string(req.remote_port);
        auto [reply, rec] = handle_transaction(cfg, txn, source, utc_timestamp());
        append(rec);
        res.status = reply.status;
        res.set_content(reply.body, reply.content_type);
    }
};

Sinkhole::Sinkhole(SinkholeConfig cfg) : impl_(std::make_unique<Impl>(std::move(cfg)))
{
    validate_config(impl_->cfg);
}

Sinkhole::~Sinkhole()
{
    stop();
}

void Sinkhole::start()
{
    Impl& impl = *impl_;
    impl.log.open(impl.cfg.log_path, std::ios::app | std::ios::binary);
    if (!impl.log)
        throw Error("cannot open log for append: " + impl.cfg.log_path);

    auto handler = [&impl](const httplib::Request& req, httplib::Response& res) {
        impl.handle(req, res);
    };
    impl.server.set_tcp_nodelay(true);
    // bounds how long stop() waits on idle keep-alive connections
    impl.server.set_keep_alive_timeout(1);
    // SO_REUSEADDR only: a second sinkhole on the same port must fail loudly
    // instead of silently sharing it via SO_REUSEPORT
    impl.server.set_socket_options([](socket_t sock) {
        int yes = 1;
        setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, reinterpret_cast<const void*>(&yes),
                   sizeof(yes));
    });
    // a C&C impersonator answers every path and method
    impl.server.Get(".*", handler);
    impl.server.Post(".*", handler);
    impl.server.Put(".*", handler);
    impl.server.Patch(".*", handler);
    impl.server.Delete(".*", handler);
    impl.server.Options(".*", handler);

    if (impl.cfg.port == 0) {
        int port = impl.server.bind_to_any_port("0.0.0.0");
        if (port <= 0)
            throw Error("failed to bind an ephemeral port");
        impl.bound_port = static_cast<std::uint16_t>(port);
    } else {
        if (!impl.server.bind_to_port("0.0.0.0", impl.cfg.port))
            throw Error("failed to bind port " + std::to_string(impl.cfg.port));
        impl.bound_port = impl.cfg.port;
    }

    impl.worker = std::thread([&impl] { impl.server.listen_after_bind(); });
    impl.server.wait_until_ready();
}

void Sinkhole::stop()
{
    Impl& impl = *impl_;
    if (impl.worker.joinable()) {
        impl.server.stop();
        impl.worker.join();
    }
    if (impl.log.is_open()) {
        impl.log.flush();
        impl.log.close();
    }
}

std::uint16_t Sinkhole::port() const
{
    return impl_->bound_port;
}

} // namespace ransomlab::sinkhole
