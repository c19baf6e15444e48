#include "ransomlab/envelope.hpp"

#include <memory>

#include <openssl/bio.h>
#include <openssl/crypto.h>
#include <openssl/err.h>
#include <openssl/evp.h>
#include <openssl/pem.h>
#include <openssl/rand.h>
#include <openssl/rsa.h>

#include "ransomlab/error.hpp"

namespace ransomlab {

namespace {

struct BioFree {
    void operator()(BIO* b) const { BIO_free(b); }
};
struct PkeyFree {
    void operator()(EVP_PKEY* p) const { EVP_PKEY_free(p); }
};
struct PkeyCtxFree {
    void operator()(EVP_PKEY_CTX* c) const { EVP_PKEY_CTX_free(c); }
};
struct CipherCtxFree {
    void operator()(EVP_CIPHER_CTX* c) const { EVP_CIPHER_CTX_free(c); }
};

using BioPtr = std::unique_ptr<BIO, BioFree>;
using PkeyPtr = std::unique_ptr<EVP_PKEY, PkeyFree>;
using PkeyCtxPtr = std::unique_ptr<EVP_PKEY_CTX, PkeyCtxFree>;
using CipherCtxPtr = std::unique_ptr<EVP_CIPHER_CTX, CipherCtxFree>;

[[noreturn]] void throw_openssl(const std::string& what)
{
    unsigned long code = ERR_get_error();
    char buf[256] = {0};
    if (code != 0)
        ERR_error_string_n(code, buf, sizeof(buf));
    ERR_clear_error();
    throw Error(what + (buf[0] ? std::string(": ") + buf : std::string()));
}

PkeyPtr load_public(const std::string& pem)
{
    BioPtr bio(BIO_new_mem_buf(pem.data(), static_cast<int>(pem.size())));
    if (!bio)
        throw_openssl("key load failure");
    PkeyPtr key(PEM_read_bio_PUBKEY(bio.get(), nullptr, nullptr, nullptr));
    if (!key)
        throw_openssl("key load failure: bad public PEM");
    return key;
}

PkeyPtr load_private(const std::string& pem)
{
    BioPtr bio(BIO_new_mem_buf(pem.data(), static_cast<int>(pem.size())));
    if (!bio)
        throw_openssl("key load failure");
    PkeyPtr key(PEM_read_bio_PrivateKey(bio.get(), nullptr, nullptr, nullptr));
    if (!key)
        throw_openssl("key load failure: bad private PEM");
    return key;
}

std::string pem_of(EVP_PKEY* key, bool private_half)
{
    BioPtr bio(BIO_new(BIO_s_mem()));
    if (!bio)
        throw_openssl("key export failure");
    int rc = private_half
                 ? PEM_write_bio_PrivateKey(bio.get(), key, nullptr, nullptr, 0, nullptr, nullptr)
                 : PEM_write_bio_PUBKEY(bio.get(), key);
    if (rc != 1)
        throw_openssl("key export failure");
    char* data = nullptr;
    long len = BIO_get_mem_data(bio.get(), &data);
    return std::string(data, static_cast<std::size_t>(len));
}

// Two independent subkeys from the session key; the raw key never touches
// the cipher or the MAC directly.
std::array<std::uint8_t, 32> subkey(const SessionKey& sk, std::string_view label)
{
    std::array<std::uint8_t, 32> out{};
    std::size_t out_len = 0;
    if (!EVP_Q_mac(nullptr, "HMAC", nullptr, "SHA256", nullptr,
                   sk.key_bytes.data(), sk.key_bytes.size(),
                   reinterpret_cast<const unsigned char*>(label.data()), label.size(),
                   out.data(), out.size(), &out_len) ||
        out_len != out.size())
        throw_openssl("mac failure");
    return out;
}

std::array<std::uint8_t, 32> envelope_tag(const SessionKey& sk,
                                          std::span<const std::uint8_t> iv_and_body)
{
    auto mac_key = subkey(sk, "ransomlab/envelope/mac");
    std::array<std::uint8_t, 32> tag{};
    std::size_t tag_len = 0;
    if (!EVP_Q_mac(nullptr, "HMAC", nullptr, "SHA256", nullptr,
                   mac_key.data(), mac_key.size(),
                   iv_and_body.data(), iv_and_body.size(),
                   tag.data(), tag.size(), &tag_len) ||
        tag_len != tag.size())
        throw_openssl("mac failure");
    return tag;
}

constexpr std::size_t kIvLen = 16;
constexpr std::size_t kBlockLen = 16;
constexpr std::size_t kTagLen = 32;

} // namespace

SessionKey random_session_key()
{
    SessionKey sk;
    if (RAND_bytes(sk.key_bytes.data(), static_cast<int>(sk.key_bytes.size())) != 1)
        throw_openssl("rng failure");
    return sk;
}

RsaKeyPair generate_rsa_keypair(int bits)
{
    if (bits != 2048 && bits != 3072 && bits != 4096)
        throw Error("unsupported bit size: " + std::to_string(bits));

    PkeyPtr key(EVP_PKEY_Q_keygen(nullptr, nullptr, "RSA", static_cast<size_t>(bits)));
    if (!key)
        throw_openssl("key generation failure");

    RsaKeyPair pair;
    pair.modulus_bits = bits;
    pair.private_pem = pem_of(key.get(), true);
    pair.public_pem = pem_of(key.get(), false);
    return pair;
}

std::string public_pem_from_private(const std::string& private_pem)
{
    PkeyPtr key = load_private(private_pem);
    return pem_of(key.get(), false);
}

std::size_t rsa_modulus_size(const std::string& pem)
{
    BioPtr bio(BIO_new_mem_buf(pem.data(), static_cast<int>(pem.size())));
    if (!bio)
        throw_openssl("key load failure");
    PkeyPtr key(PEM_read_bio_PUBKEY(bio.get(), nullptr, nullptr, nullptr));
    if (!key) {
        ERR_clear_error();
        key = load_private(pem);
    }
    int n = EVP_PKEY_get_size(key.get());
    if (n <= 0)
        throw_openssl("key size failure");
    return static_cast<std::size_t>(n);
}

Bytes wrap_session_key(const SessionKey& sk, const std::string& public_pem)
{
    PkeyPtr key = load_public(public_pem);
    PkeyCtxPtr ctx(EVP_PKEY_CTX_new(key.get(), nullptr));
    if (!ctx || EVP_PKEY_encrypt_init(ctx.get()) != 1 ||
        EVP_PKEY_CTX_set_rsa_padding(ctx.get(), RSA_PKCS1_OAEP_PADDING) != 1)
        throw_openssl("wrap failure");

    std::size_t out_len = 0;
    if (EVP_PKEY_encrypt(ctx.get(), nullptr, &out_len,
                         sk.key_bytes.data(), sk.key_bytes.size()) != 1)
        throw_openssl("wrap failure");
    Bytes out(out_len);
    if (EVP_PKEY_encrypt(ctx.get(), out.data(), &out_len,
                         sk.key_bytes.data(), sk.key_bytes.size()) != 1)
        throw_openssl("wrap failure");
    out.resize(out_len);
    return out;
}

SessionKey unwrap_session_key(std::span<const std::uint8_t> blob,
                              const std::string& private_pem)
{
    PkeyPtr key = load_private(private_pem);
    PkeyCtxPtr ctx(EVP_PKEY_CTX_new(key.get(), nullptr));
    if (!ctx || EVP_PKEY_decrypt_init(ctx.get()) != 1 ||
        EVP_PKEY_CTX_set_rsa_padding(ctx.get(), RSA_PKCS1_OAEP_PADDING) != 1)
        throw_openssl("unwrap failure");

    std::size_t out_len = 0;
    if (EVP_PKEY_decrypt(ctx.get(), nullptr, &out_len, blob.data(), blob.size()) != 1) {
        ERR_clear_error();
        throw Error("envelope open failure: key unwrap rejected");
    }
    Bytes out(out_len);
    if (EVP_PKEY_decrypt(ctx.get(), out.data(), &out_len, blob.data(), blob.size()) != 1) {
        ERR_clear_error();
        throw Error("envelope open failure: key unwrap rejected");
    }
    if (out_len != 32)
        throw Error("envelope open failure: unwrapped key has wrong length");

    SessionKey sk;
    std::copy_n(out.begin(), 32, sk.key_bytes.begin());
    return sk;
}

Bytes aes_encrypt(const SessionKey& sk, std::span<const std::uint8_t> plaintext)
{
    auto enc_key = subkey(sk, "ransomlab/envelope/enc");

    Bytes out(kIvLen);
    if (RAND_bytes(out.data(), static_cast<int>(kIvLen)) != 1)
        throw_openssl("rng failure");

    CipherCtxPtr ctx(EVP_CIPHER_CTX_new());
    if (!ctx ||
        EVP_EncryptInit_ex(ctx.get(), EVP_aes_256_cbc(), nullptr,
                           enc_key.data(), out.data()) != 1)
        throw_openssl("encrypt failure");

    out.resize(kIvLen + plaintext.size() + kBlockLen);
    int written = 0;
    int total = 0;
    if (!plaintext.empty() &&
        EVP_EncryptUpdate(ctx.get(), out.data() + kIvLen, &written,
                          plaintext.data(), static_cast<int>(plaintext.size())) != 1)
        throw_openssl("encrypt failure");
    total = written;
    if (EVP_EncryptFinal_ex(ctx.get(), out.data() + kIvLen + total, &written) != 1)
        throw_openssl("encrypt failure");
    total += written;
    out.resize(kIvLen + static_cast<std::size_t>(total));

    auto tag = envelope_tag(sk, out);
    out.insert(out.end(), tag.begin(), tag.end());
    return out;
}

Bytes aes_decrypt(const SessionKey& sk, std::span<const std::uint8_t> ciphertext)
{
    if (ciphertext.size() < kIvLen + kBlockLen + kTagLen)
        throw Error("malformed ciphertext: too short");
    std::size_t body_len = ciphertext.size() - kTagLen;
    if ((body_len - kIvLen) % kBlockLen != 0)
        throw Error("malformed ciphertext: body not block-aligned");

    auto expect = envelope_tag(sk, ciphertext.first(body_len));
    if (CRYPTO_memcmp(expect.data(), ciphertext.data() + body_len, kTagLen) != 0)
        throw Error("envelope open failure: authentication tag mismatch");

    auto enc_key = subkey(sk, "ransomlab/envelope/enc");
    CipherCtxPtr ctx(EVP_CIPHER_CTX_new());
    if (!ctx ||
        EVP_DecryptInit_ex(ctx.get(), EVP_aes_256_cbc(), nullptr,
                           enc_key.data(), ciphertext.data()) != 1)
        throw_openssl("decrypt failure");

    Bytes out(body_len - kIvLen + kBlockLen);
    int written = 0;
    int total = 0;
    if (EVP_DecryptUpdate(ctx.get(), out.data(), &written,
                          ciphertext.data() + kIvLen,
                          static_cast<int>(body_len - kIvLen)) != 1) {
        ERR_clear_error();
        throw Error("envelope open failure: decrypt rejected");
    }
    total = written;
    if (EVP_DecryptFinal_ex(ctx.get(), out.data() + total, &written) != 1) {
        ERR_clear_error();
        throw Error("envelope open failure: bad padding");
    }
    total += written;
    out.resize(static_cast<std::size_t>(total));
    return out;
}

} // namespace ransomlab
