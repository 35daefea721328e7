#include "lmd/snapshot.hpp"

#include <cstdio>
#include <cstring>
#include <fstream>

namespace lmd {

namespace {

constexpr char kMagic[4] = {'P', 'F', 'L', 'D'};
constexpr std::uint32_t kVersion = 1;
constexpr std::uint32_t kNumFields = 3;

// The on-disk format is little-endian; this code assumes a little-endian
// host, which the build targets.
template <typename T>
void put(std::ofstream& os, T value) {
    os.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
T get(std::ifstream& is, const char* what) {
    T value{};
    is.read(reinterpret_cast<char*>(&value), sizeof(T));
    if (!is) throw IoError(std::string("snapshot: truncated header at ") + what);
    return value;
}

void put_block(std::ofstream& os, const Field2D& f) {
    os.write(reinterpret_cast<const char*>(f.v.data()),
             static_cast<std::streamsize>(f.v.size() * sizeof(double)));
}

void get_block(std::ifstream& is, Field2D& f, const char* name) {
    is.read(reinterpret_cast<char*>(f.v.data()),
            static_cast<std::streamsize>(f.v.size() * sizeof(double)));
    if (!is) throw IoError(std::string("snapshot: truncated payload in field ") + name);
}

} // namespace

void write_snapshot(const FieldState& state, const std::string& path) {
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os) throw IoError("snapshot: cannot open for writing: " + path);
    os.write(kMagic, 4);
    put<std::uint32_t>(os, kVersion);
    put<std::uint32_t>(os, static_cast<std::uint32_t>(state.grid.nx));
    put<std::uint32_t>(os, static_cast<std::uint32_t>(state.grid.ny));
    put<std::uint32_t>(os, kNumFields);
    put<double>(os, state.time_s);
    put<std::uint64_t>(os, state.step);
    put_block(os, state.phi);
    put_block(os, state.cA);
    put_block(os, state.cB);
    if (!os) throw IoError("snapshot: write failed: " + path);
}

FieldState read_snapshot(const std::string& path, double dx_nm) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw IoError("snapshot: cannot open for reading: " + path);

    char magic[4];
    is.read(magic, 4);
    if (!is || std::memcmp(magic, kMagic, 4) != 0)
        throw IoError("snapshot: bad magic in " + path);
    const auto version = get<std::uint32_t>(is, "version");
    if (version != kVersion)
        throw IoError("snapshot: unsupported version " + std::to_string(version) + " in " + path);
    const auto nx = get<std::uint32_t>(is, "nx");
    const auto ny = get<std::uint32_t>(is, "ny");
    if (nx == 0 || ny == 0 || nx > (1u << 20) || ny > (1u << 20))
        throw IoError("snapshot: implausible dimensions in " + path);
    const auto n_fields = get<std::uint32_t>(is, "n_fields");
    if (n_fields != kNumFields)
        throw IoError("snapshot: unexpected n_fields " + std::to_string(n_fields) + " in " + path);

    GridSpec grid;
    grid.nx = static_cast<int>(nx);
    grid.ny = static_cast<int>(ny);
    grid.dx_nm = dx_nm;

    FieldState state(grid);
    state.time_s = get<double>(is, "time_s");
    state.step = get<std::uint64_t>(is, "step");
    get_block(is, state.phi, "phi");
    get_block(is, state.cA, "cA");
    get_block(is, state.cB, "cB");
    if (is.peek() != std::ifstream::traits_type::eof())
        throw IoError("snapshot: trailing bytes beyond the declared payload in " + path);
    return state;
}

std::string snapshot_filename(std::uint64_t step) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "snapshot_%012llu.pfld",
                  static_cast<unsigned long long>(step));
    return buf;
}

} // namespace lmd
