#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <variant>

#include "ransomlab/cryptolocker.hpp"
#include "ransomlab/cryptowall.hpp"
#include "ransomlab/detect.hpp"

namespace ransomlab::sinkhole {

// What the fake C&C answers with: a framed CryptoLocker response or a
// CryptoWall server message, depending on the family being impersonated.
using ResponseFixture = std::variant<cryptolocker::ClResponse, cryptowall::CwServerMessage>;

struct SinkholeConfig {
    std::uint16_t port = 80; // 0 = pick an ephemeral port
    Family family = Family::cryptowall;
    std::string server_private_pem; // cryptolocker full mode only
    ResponseFixture response_fixture;
    bool bypass_mode = false; // cryptolocker only: serve the frame in plaintext
    std::string log_path;
};

// Validates the family/bypass/fixture combination. Throws on nonsense like
// bypass_mode with family = cryptowall.
void validate_config(const SinkholeConfig& cfg);

// Parses a fixture file. CryptoWall: the file holds the serialized server
// message ({build|domain|victim|CC|PEM}). CryptoLocker: first line version,
// second line C&C IPv4, remaining lines the public key PEM.
ResponseFixture load_fixture(Family family, const std::filesystem::path& path);

// One completed transaction as logged, one JSON object per line.
struct VictimRecord {
    std::string timestamp; // UTC ISO-8601
    std::string source_address;
    std::string method;
    std::string path;
    std::string raw_body_b64;
    std::optional<std::string> decrypted_message; // present iff decryption worked
    std::string response_body; // response hex (cryptowall / sealed reply) or frame text
    std::string family;

    bool operator==(const VictimRecord&) const = default;
};

std::string victim_record_to_json(const VictimRecord& rec);
VictimRecord victim_record_from_json(std::string_view line);

struct SinkholeReply {
    int status = 200;
    std::string content_type = "text/plain";
    std::string body;
};

// The handler core: pure given the config, the request, and the metadata the
// transport knows. Never signals errors to the client; an undecodable request
// still gets a 200 so the sinkhole cannot be fingerprinted.
std::pair<SinkholeReply, VictimRecord> handle_transaction(const SinkholeConfig& cfg,
                                                          const detect::HttpTransaction& txn,
                                                          const std::string& source_address,
                                                          const std::string& timestamp);

// Reads a JSON-lines victim log back. A malformed line is an error naming the
// line number.
std::vector<VictimRecord> read_log(const std::filesystem::path& path);

// The live service. start() binds (throwing on failure, port in the message)
// and serves on a background thread until stop(); every completed transaction
// appends exactly one log line.
class Sinkhole {
public:
    explicit Sinkhole(SinkholeConfig cfg);
    ~Sinkhole();

    Sinkhole(const Sinkhole&) = delete;
    Sinkhole& operator=(const Sinkhole&) = delete;

    void start();
    void stop();
    std::uint16_t port() const; // actual bound port once started

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

std::string utc_timestamp(); // current time, ISO-8601 Z

} // namespace ransomlab::sinkhole
