#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <string_view>

namespace dirsteer {

/// Incremental SHA-256; hex() finalizes.
class Sha256 {
public:
    Sha256();
    ~Sha256();
    Sha256(const Sha256&) = delete;
    Sha256& operator=(const Sha256&) = delete;

    Sha256& update(std::span<const std::byte> bytes);
    Sha256& update(std::string_view text);
    std::string hex();

private:
    void* ctx_;
};

std::string sha256_hex(std::string_view text);

/// Hash of a file's bytes, or of a directory's regular files (sorted by name,
/// each prefixed by its name). Throws kMissingFile / kIo.
std::string sha256_path(const std::filesystem::path& path);

std::string_view tool_version() noexcept;

}  // namespace dirsteer
