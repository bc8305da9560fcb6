#include "dirsteer/digest.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <array>
#include <fstream>
#include <vector>

#include "dirsteer/error.hpp"

#ifndef DIRSTEER_VERSION_STRING
#define DIRSTEER_VERSION_STRING "0.0.0"
#endif

namespace dirsteer {

namespace fs = std::filesystem;

Sha256::Sha256() : ctx_(EVP_MD_CTX_new()) {
    if (ctx_ == nullptr || EVP_DigestInit_ex(static_cast<EVP_MD_CTX*>(ctx_), EVP_sha256(), nullptr) != 1) {
        fail(ErrorCode::kIo, "cannot initialise SHA-256 context");
    }
}

Sha256::~Sha256() { EVP_MD_CTX_free(static_cast<EVP_MD_CTX*>(ctx_)); }

Sha256& Sha256::update(std::span<const std::byte> bytes) {
    EVP_DigestUpdate(static_cast<EVP_MD_CTX*>(ctx_), bytes.data(), bytes.size());
    return *this;
}

Sha256& Sha256::update(std::string_view text) {
    return update(std::as_bytes(std::span(text.data(), text.size())));
}

std::string Sha256::hex() {
    std::array<unsigned char, EVP_MAX_MD_SIZE> out{};
    unsigned int len = 0;
    EVP_DigestFinal_ex(static_cast<EVP_MD_CTX*>(ctx_), out.data(), &len);
    static constexpr char kDigits[] = "0123456789abcdef";
    std::string s;
    s.reserve(2 * len);
    for (unsigned int i = 0; i < len; ++i) {
        s.push_back(kDigits[out[i] >> 4]);
        s.push_back(kDigits[out[i] & 0xf]);
    }
    return s;
}

std::string sha256_hex(std::string_view text) { return Sha256().update(text).hex(); }

namespace {

void hash_file(Sha256& h, const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(ErrorCode::kIo, "cannot open " + path.string());
    std::vector<char> buf(1 << 16);
    while (in) {
        in.read(buf.data(), static_cast<std::streamsize>(buf.size()));
        auto n = static_cast<std::size_t>(in.gcount());
        if (n > 0) h.update(std::string_view(buf.data(), n));
    }
    if (in.bad()) fail(ErrorCode::kIo, "read failed: " + path.string());
}

}  // namespace

std::string sha256_path(const fs::path& path) {
    std::error_code ec;
    if (!fs::exists(path, ec)) fail(ErrorCode::kMissingFile, path.string() + " does not exist");
    Sha256 h;
    if (fs::is_directory(path, ec)) {
        std::vector<fs::path> files;
        for (const auto& entry : fs::directory_iterator(path)) {
            if (entry.is_regular_file()) files.push_back(entry.path());
        }
        std::sort(files.begin(), files.end());
        for (const auto& f : files) {
            h.update(f.filename().string());
            h.update(std::string_view("\0", 1));
            hash_file(h, f);
        }
    } else {
        hash_file(h, path);
    }
    return h.hex();
}

std::string_view tool_version() noexcept { return DIRSTEER_VERSION_STRING; }

}  // namespace dirsteer
