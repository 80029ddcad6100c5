#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <cstring>
#include <type_traits>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "aprkit/apr.hpp"
#include "aprkit/errors.hpp"
#include "aprkit/linear_access.hpp"
#include "aprkit/pixel_volume.hpp"

// Binary container for an APR plus its particle values, and a minimal raw
// volume format. Layouts are documented in docs/FORMATS.md. All multi-byte
// fields are little-endian; serialization is byte-for-byte deterministic.

namespace aprkit {

namespace detail {

inline constexpr char kAprMagic[4] = {'A', 'P', 'R', 'B'};
inline constexpr std::uint8_t kAprVersion = 1;

template <typename T>
void write_pod(std::ostream& os, T v) {
    static_assert(std::is_trivially_copyable_v<T>);
    os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T read_pod(std::istream& is, const char* field) {
    T v{};
    is.read(reinterpret_cast<char*>(&v), sizeof(T));
    if (!is) throw TruncatedFileError(std::string("unexpected end of file reading ") + field);
    return v;
}

template <typename T>
void write_array(std::ostream& os, const std::vector<T>& v) {
    static_assert(std::is_trivially_copyable_v<T>);
    write_pod<std::uint64_t>(os, v.size());
    if (!v.empty())
        os.write(reinterpret_cast<const char*>(v.data()),
                 static_cast<std::streamsize>(v.size() * sizeof(T)));
}

template <typename T>
std::vector<T> read_array(std::istream& is, const char* field, std::uint64_t max_count) {
    const auto n = read_pod<std::uint64_t>(is, field);
    if (n > max_count)
        throw BadFormatError(std::string("implausible element count for ") + field);
    std::vector<T> v(n);
    if (n) {
        is.read(reinterpret_cast<char*>(v.data()), static_cast<std::streamsize>(n * sizeof(T)));
        if (!is) throw TruncatedFileError(std::string("unexpected end of file reading ") + field);
    }
    return v;
}

inline void write_access(std::ostream& os, const LinearAccess& a) {
    write_pod<std::int32_t>(os, a.l_min);
    write_pod<std::int32_t>(os, a.l_max);
    for (int l = 0; l <= a.l_max; ++l) {
        write_pod<std::int32_t>(os, a.z_dim[l]);
        write_pod<std::int32_t>(os, a.x_dim[l]);
        write_pod<std::int32_t>(os, a.y_dim[l]);
    }
    write_array(os, a.level_offset);
    write_array(os, a.xz_end);
    write_array(os, a.y_idx);
}

inline LinearAccess read_access(std::istream& is, const char* what) {
    LinearAccess a;
    a.l_min = read_pod<std::int32_t>(is, "l_min");
    a.l_max = read_pod<std::int32_t>(is, "l_max");
    if (a.l_min < 0 || a.l_max < a.l_min || a.l_max > 40)
        throw BadFormatError(std::string(what) + ": bad level range");
    a.z_dim.resize(a.l_max + 1);
    a.x_dim.resize(a.l_max + 1);
    a.y_dim.resize(a.l_max + 1);
    for (int l = 0; l <= a.l_max; ++l) {
        a.z_dim[l] = read_pod<std::int32_t>(is, "z_dim");
        a.x_dim[l] = read_pod<std::int32_t>(is, "x_dim");
        a.y_dim[l] = read_pod<std::int32_t>(is, "y_dim");
        if (a.z_dim[l] < 0 || a.x_dim[l] < 0 || a.y_dim[l] < 0 || a.y_dim[l] > kMaxYDim)
            throw BadFormatError(std::string(what) + ": bad level grid dims");
    }
    constexpr std::uint64_t cap = std::uint64_t(1) << 40;
    a.level_offset = read_array<std::uint64_t>(is, "level_offset", cap);
    a.xz_end = read_array<std::uint64_t>(is, "xz_end", cap);
    a.y_idx = read_array<std::uint16_t>(is, "y_idx", cap);
    if (a.level_offset.size() != static_cast<std::size_t>(a.l_max + 1))
        throw BadFormatError(std::string(what) + ": level_offset length mismatch");
    return a;
}

} // namespace detail

// Writes an APR and its leaf particle values. Interior-node values are
// derivable and not stored.
inline void write_apr(std::ostream& os, const APR& apr, const ParticleValues& values) {
    if (values.size() != apr.access.particle_count())
        throw RangeError("write_apr: value count does not match particle count");
    os.write(detail::kAprMagic, 4);
    detail::write_pod<std::uint8_t>(os, detail::kAprVersion);
    for (int d = 0; d < 3; ++d) detail::write_pod<std::uint32_t>(os, apr.source_dims[d]);
    detail::write_pod<double>(os, apr.params.rel_error);
    detail::write_pod<std::uint8_t>(os, static_cast<std::uint8_t>(apr.params.sigma.mode));
    detail::write_pod<double>(os, apr.params.sigma.value);
    detail::write_pod<std::int32_t>(os, apr.params.sigma.window_radius);
    detail::write_pod<double>(os, apr.params.sigma.floor);
    detail::write_pod<std::uint8_t>(os, static_cast<std::uint8_t>(apr.params.gradient));
    detail::write_pod<std::int32_t>(os, apr.params.smoothing_passes);
    detail::write_access(os, apr.access);
    detail::write_access(os, apr.tree_access);
    detail::write_array(os, values);
    if (!os) throw IoError("write_apr: stream write failed");
}

// Reads an APR written by write_apr and validates it structurally before
// returning. Throws BadFormatError on malformed content and
// TruncatedFileError when the stream ends early.
inline APR read_apr(std::istream& is, ParticleValues& values) {
    char magic[4];
    is.read(magic, 4);
    if (!is) throw TruncatedFileError("unexpected end of file reading magic");
    if (std::memcmp(magic, detail::kAprMagic, 4) != 0)
        throw BadFormatError("not an APR file (bad magic)");
    const auto version = detail::read_pod<std::uint8_t>(is, "version");
    if (version != detail::kAprVersion)
        throw BadFormatError("unsupported APR file version " + std::to_string(version));

    APR apr;
    for (int d = 0; d < 3; ++d) {
        const auto v = detail::read_pod<std::uint32_t>(is, "dims");
        if (v == 0 || v > (1u << 30)) throw BadFormatError("bad source dims");
        apr.source_dims[d] = static_cast<int>(v);
    }
    apr.params.rel_error = detail::read_pod<double>(is, "rel_error");
    const auto smode = detail::read_pod<std::uint8_t>(is, "sigma mode");
    if (smode > 1) throw BadFormatError("bad sigma mode");
    apr.params.sigma.mode = static_cast<SigmaMode>(smode);
    apr.params.sigma.value = detail::read_pod<double>(is, "sigma value");
    apr.params.sigma.window_radius = detail::read_pod<std::int32_t>(is, "sigma window");
    apr.params.sigma.floor = detail::read_pod<double>(is, "sigma floor");
    const auto gmode = detail::read_pod<std::uint8_t>(is, "gradient mode");
    if (gmode > 1) throw BadFormatError("bad gradient mode");
    apr.params.gradient = static_cast<GradientMode>(gmode);
    apr.params.smoothing_passes = detail::read_pod<std::int32_t>(is, "smoothing passes");

    apr.access = detail::read_access(is, "leaf access");
    apr.tree_access = detail::read_access(is, "tree access");
    values = detail::read_array<float>(is, "leaf values", std::uint64_t(1) << 40);
    if (values.size() != apr.access.particle_count())
        throw BadFormatError("leaf value count does not match particle count");

    const ValidationReport rep = validate(apr.access, apr.source_dims);
    if (!rep.ok) throw BadFormatError("invalid APR structure: " + rep.message);
    return apr;
}

inline void save_apr(const std::string& path, const APR& apr, const ParticleValues& values) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw IoError("cannot open for writing: " + path);
    write_apr(os, apr, values);
    if (!os) throw IoError("write failed: " + path);
}

inline APR load_apr(const std::string& path, ParticleValues& values) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw IoError("cannot open for reading: " + path);
    return read_apr(is, values);
}

enum class RawType { F32, U16, U8 };

// Raw volume: a short text header (dims, element type, byte order) terminated
// by a blank line, then the little-endian payload in (z, x, y) order.
inline void write_raw_volume(std::ostream& os, const PixelVolume& v, RawType type = RawType::F32) {
    os << "dims " << v.nz << ' ' << v.nx << ' ' << v.ny << '\n';
    os << "type " << (type == RawType::F32 ? "f32" : type == RawType::U16 ? "u16" : "u8") << '\n';
    os << "byteorder little\n\n";
    if (type == RawType::F32) {
        os.write(reinterpret_cast<const char*>(v.values.data()),
                 static_cast<std::streamsize>(v.size() * 4));
    } else if (type == RawType::U16) {
        std::vector<std::uint16_t> buf(v.size());
        for (std::size_t i = 0; i < v.size(); ++i)
            buf[i] = static_cast<std::uint16_t>(std::min(std::max(v.values[i], 0.0f), 65535.0f));
        os.write(reinterpret_cast<const char*>(buf.data()),
                 static_cast<std::streamsize>(buf.size() * 2));
    } else {
        std::vector<std::uint8_t> buf(v.size());
        for (std::size_t i = 0; i < v.size(); ++i)
            buf[i] = static_cast<std::uint8_t>(std::min(std::max(v.values[i], 0.0f), 255.0f));
        os.write(reinterpret_cast<const char*>(buf.data()),
                 static_cast<std::streamsize>(buf.size()));
    }
    if (!os) throw IoError("write_raw_volume: stream write failed");
}

inline PixelVolume read_raw_volume(std::istream& is) {
    int nz = -1, nx = -1, ny = -1;
    RawType type = RawType::F32;
    bool have_dims = false, have_type = false, have_order = false;
    std::string line;
    while (std::getline(is, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) break;
        std::istringstream ls(line);
        std::string key;
        ls >> key;
        if (key == "dims") {
            ls >> nz >> nx >> ny;
            if (!ls || nz <= 0 || nx <= 0 || ny <= 0)
                throw BadFormatError("raw volume: bad dims line");
            have_dims = true;
        } else if (key == "type") {
            std::string t;
            ls >> t;
            if (t == "f32") type = RawType::F32;
            else if (t == "u16") type = RawType::U16;
            else if (t == "u8") type = RawType::U8;
            else throw BadFormatError("raw volume: unknown element type " + t);
            have_type = true;
        } else if (key == "byteorder") {
            std::string o;
            ls >> o;
            if (o != "little") throw BadFormatError("raw volume: unsupported byte order " + o);
            have_order = true;
        } else {
            throw BadFormatError("raw volume: unknown header key " + key);
        }
    }
    if (!have_dims || !have_type || !have_order)
        throw BadFormatError("raw volume: incomplete header");

    PixelVolume v(nz, nx, ny);
    const std::size_t n = v.size();
    if (type == RawType::F32) {
        is.read(reinterpret_cast<char*>(v.values.data()), static_cast<std::streamsize>(n * 4));
        if (!is) throw TruncatedFileError("raw volume: payload shorter than header dims");
    } else if (type == RawType::U16) {
        std::vector<std::uint16_t> buf(n);
        is.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(n * 2));
        if (!is) throw TruncatedFileError("raw volume: payload shorter than header dims");
        for (std::size_t i = 0; i < n; ++i) v.values[i] = static_cast<float>(buf[i]);
    } else {
        std::vector<std::uint8_t> buf(n);
        is.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(n));
        if (!is) throw TruncatedFileError("raw volume: payload shorter than header dims");
        for (std::size_t i = 0; i < n; ++i) v.values[i] = static_cast<float>(buf[i]);
    }
    return v;
}

inline void save_raw_volume(const std::string& path, const PixelVolume& v,
                            RawType type = RawType::F32) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw IoError("cannot open for writing: " + path);
    write_raw_volume(os, v, type);
}

inline PixelVolume load_raw_volume(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw IoError("cannot open for reading: " + path);
    return read_raw_volume(is);
}

} // namespace aprkit
