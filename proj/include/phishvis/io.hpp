#pragma once

#include <filesystem>
#include <fstream>
#include <iterator>
#include <string>

#include "phishvis/bytevis.hpp"
#include "phishvis/error.hpp"

namespace phishvis {

inline Bytes read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw Error(ErrorKind::InvalidInput, "cannot open " + path.string());
    }
    return Bytes(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

/// Writes via a sibling temp file and rename so readers never see a partial file.
inline void write_file(const std::filesystem::path& path, ByteView data) {
    std::error_code ec;
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        out.write(reinterpret_cast<const char*>(data.data()), static_cast<std::streamsize>(data.size()));
        if (!out) {
            throw Error(ErrorKind::StoreWriteFailed, "cannot write " + tmp.string());
        }
    }
    std::filesystem::rename(tmp, path, ec);
    if (ec) {
        throw Error(ErrorKind::StoreWriteFailed, "cannot rename into " + path.string() + ": " + ec.message());
    }
}

} // namespace phishvis
