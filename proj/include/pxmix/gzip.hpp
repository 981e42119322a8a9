#pragma once

#include <cstdint>
#include <string>
#include <string_view>

#include <zlib.h>

#include "pxmix/util.hpp"

namespace pxmix {

// Deterministic gzip framing: level 9, mtime pinned to 0 and OS byte pinned
// to 255 ("unknown") so the same input always yields the same bytes.
inline constexpr int kGzipLevel = 9;
inline constexpr int kGzipOsByte = 255;

inline std::string gzip_compress_bytes(std::string_view doc) {
    z_stream zs{};
    if (deflateInit2(&zs, kGzipLevel, Z_DEFLATED, 15 + 16, 9, Z_DEFAULT_STRATEGY) != Z_OK)
        throw DataError("gzip: deflateInit2 failed");
    gz_header header{};
    header.time = 0;
    header.os = kGzipOsByte;
    if (deflateSetHeader(&zs, &header) != Z_OK) {
        deflateEnd(&zs);
        throw DataError("gzip: deflateSetHeader failed");
    }
    std::string out;
    out.resize(deflateBound(&zs, static_cast<uLong>(doc.size())) + 32);
    zs.next_in = reinterpret_cast<Bytef*>(const_cast<char*>(doc.data()));
    zs.avail_in = static_cast<uInt>(doc.size());
    zs.next_out = reinterpret_cast<Bytef*>(out.data());
    zs.avail_out = static_cast<uInt>(out.size());
    int rc = deflate(&zs, Z_FINISH);
    if (rc != Z_STREAM_END) {
        deflateEnd(&zs);
        throw DataError("gzip: deflate failed with code " + std::to_string(rc));
    }
    out.resize(zs.total_out);
    deflateEnd(&zs);
    return out;
}

inline std::string gzip_decompress_bytes(std::string_view gz) {
    z_stream zs{};
    if (inflateInit2(&zs, 15 + 16) != Z_OK) throw DataError("gzip: inflateInit2 failed");
    std::string out;
    out.resize(gz.size() * 4 + 256);
    zs.next_in = reinterpret_cast<Bytef*>(const_cast<char*>(gz.data()));
    zs.avail_in = static_cast<uInt>(gz.size());
    std::size_t written = 0;
    for (;;) {
        zs.next_out = reinterpret_cast<Bytef*>(out.data() + written);
        zs.avail_out = static_cast<uInt>(out.size() - written);
        int rc = inflate(&zs, Z_NO_FLUSH);
        written = zs.total_out;
        if (rc == Z_STREAM_END) break;
        if (rc == Z_OK || rc == Z_BUF_ERROR) {
            if (zs.avail_in == 0 && rc == Z_BUF_ERROR) {
                inflateEnd(&zs);
                throw DataError("gzip: truncated stream");
            }
            out.resize(out.size() * 2 + 256);
            continue;
        }
        inflateEnd(&zs);
        throw DataError("gzip: corrupt stream (inflate code " + std::to_string(rc) + ")");
    }
    out.resize(written);
    inflateEnd(&zs);
    return out;
}

}  // namespace pxmix
