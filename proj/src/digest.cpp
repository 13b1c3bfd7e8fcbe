#include "picl/digest.hpp"

#include <array>
#include <fstream>

#include <openssl/evp.h>

#include "picl/common.hpp"

namespace picl {

namespace {

std::string finish_hex(EVP_MD_CTX* ctx) {
    std::array<unsigned char, EVP_MAX_MD_SIZE> digest{};
    unsigned int len = 0;
    if (EVP_DigestFinal_ex(ctx, digest.data(), &len) != 1)
        throw runtime_failure("digest finalization failed");
    static const char* hex = "0123456789abcdef";
    std::string out;
    out.reserve(len * 2);
    for (unsigned int i = 0; i < len; ++i) {
        out.push_back(hex[digest[i] >> 4]);
        out.push_back(hex[digest[i] & 0xF]);
    }
    return out;
}

struct ctx_guard {
    EVP_MD_CTX* ctx;
    ctx_guard() : ctx(EVP_MD_CTX_new()) {
        if (!ctx || EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr) != 1)
            throw runtime_failure("cannot initialize SHA-256");
    }
    ~ctx_guard() { EVP_MD_CTX_free(ctx); }
};

}  // namespace

std::string sha256_hex(std::string_view bytes) {
    ctx_guard g;
    if (EVP_DigestUpdate(g.ctx, bytes.data(), bytes.size()) != 1)
        throw runtime_failure("digest update failed");
    return finish_hex(g.ctx);
}

std::string sha256_hex_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw data_error("cannot open file for digest: " + path.string());
    ctx_guard g;
    std::array<char, 1 << 16> buf;
    while (in) {
        in.read(buf.data(), static_cast<std::streamsize>(buf.size()));
        const std::streamsize got = in.gcount();
        if (got > 0 && EVP_DigestUpdate(g.ctx, buf.data(), static_cast<std::size_t>(got)) != 1)
            throw runtime_failure("digest update failed");
    }
    return finish_hex(g.ctx);
}

}  // namespace picl
