#include "hb/checkpoint.hpp"

#include <cstring>
#include <fstream>
#include <memory>
#include <vector>

#include "hb/errors.hpp"
#include "hb/grid.hpp"

namespace hb {

namespace {

constexpr char kMagic[4] = {'H', 'B', 'A', 'L'};

void put_u32(std::string& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void put_f64(std::string& out, double v) {
    std::uint64_t bits;
    std::memcpy(&bits, &v, 8);
    for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((bits >> (8 * i)) & 0xff));
}

class Reader {
  public:
    explicit Reader(const std::string& path) : in_(path, std::ios::binary), path_(path) {
        if (!in_) throw IoError("cannot open checkpoint file " + path);
    }
    void bytes(char* dst, std::size_t n) {
        in_.read(dst, static_cast<std::streamsize>(n));
        if (static_cast<std::size_t>(in_.gcount()) != n)
            throw IoError("checkpoint file " + path_ + " is truncated");
    }
    std::uint8_t u8() {
        char c;
        bytes(&c, 1);
        return static_cast<std::uint8_t>(c);
    }
    std::uint32_t u32() {
        unsigned char b[4];
        bytes(reinterpret_cast<char*>(b), 4);
        return b[0] | (b[1] << 8) | (b[2] << 16) | (std::uint32_t{b[3]} << 24);
    }
    double f64() {
        unsigned char b[8];
        bytes(reinterpret_cast<char*>(b), 8);
        std::uint64_t bits = 0;
        for (int i = 7; i >= 0; --i) bits = (bits << 8) | b[i];
        double v;
        std::memcpy(&v, &bits, 8);
        return v;
    }
    bool at_end() {
        in_.peek();
        return in_.eof();
    }

  private:
    std::ifstream in_;
    std::string path_;
};

void write_file(const std::string& path, const std::string& blob) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + path + " for writing");
    out.write(blob.data(), static_cast<std::streamsize>(blob.size()));
    out.flush();
    if (!out) throw IoError("short write to " + path);
}

std::string header(std::uint8_t kind, std::uint8_t dim, std::uint32_t count, double extent,
                   double gamma1, double gamma2, std::size_t samples) {
    std::string blob;
    blob.reserve(4 + 4 + 1 + 1 + 4 + 24 + 16 * samples);
    blob.append(kMagic, 4);
    put_u32(blob, kCheckpointVersion);
    blob.push_back(static_cast<char>(kind));
    blob.push_back(static_cast<char>(dim));
    put_u32(blob, count);
    put_f64(blob, extent);
    put_f64(blob, gamma1);
    put_f64(blob, gamma2);
    return blob;
}

}  // namespace

void save_checkpoint(const std::string& path, const TensorField& u, double gamma1,
                     double gamma2) {
    std::string blob =
        header(kCheckpointTensor, static_cast<std::uint8_t>(u.grid.dim()),
               static_cast<std::uint32_t>(u.grid.n()), u.grid.half_extent(), gamma1, gamma2,
               u.v.size());
    for (const cplx& z : u.v) {
        put_f64(blob, z.real());
        put_f64(blob, z.imag());
    }
    write_file(path, blob);
}

void save_checkpoint(const std::string& path, const RadialField& u, double gamma1,
                     double gamma2) {
    std::string blob =
        header(kCheckpointRadial, static_cast<std::uint8_t>(u.grid->dim()),
               static_cast<std::uint32_t>(u.grid->count()), u.grid->r_max(), gamma1, gamma2,
               u.v.size());
    for (double x : u.v) {
        put_f64(blob, x);
        put_f64(blob, 0.0);
    }
    write_file(path, blob);
}

LoadedCheckpoint load_checkpoint(const std::string& path) {
    Reader rd(path);
    char magic[4];
    rd.bytes(magic, 4);
    if (std::memcmp(magic, kMagic, 4) != 0)
        throw IoError("checkpoint file " + path + " has the wrong magic bytes");
    const std::uint32_t version = rd.u32();
    if (version != kCheckpointVersion)
        throw IoError("checkpoint file " + path + " has unsupported format version " +
                               std::to_string(version));
    LoadedCheckpoint loaded;
    loaded.kind = rd.u8();
    const int dim = rd.u8();
    const std::uint32_t count = rd.u32();
    const double extent = rd.f64();
    loaded.gamma1 = rd.f64();
    loaded.gamma2 = rd.f64();
    if (loaded.kind == kCheckpointTensor) {
        TensorField u{TensorGrid(dim, extent, static_cast<int>(count)), {}};
        u.v.resize(u.grid.size());
        for (cplx& z : u.v) {
            const double re = rd.f64();
            const double im = rd.f64();
            z = cplx(re, im);
        }
        loaded.tensor = std::move(u);
    } else if (loaded.kind == kCheckpointRadial) {
        auto g = std::make_shared<RadialGrid>(dim, static_cast<int>(count), extent);
        RadialField u{g, {}};
        u.v.resize(count);
        for (double& x : u.v) {
            x = rd.f64();
            const double im = rd.f64();
            if (im != 0.0)
                throw IoError("checkpoint file " + path +
                                       " stores a complex field on a radial grid");
        }
        loaded.radial = std::move(u);
    } else {
        throw IoError("checkpoint file " + path + " has unknown grid kind " +
                               std::to_string(loaded.kind));
    }
    if (!rd.at_end())
        throw IoError("checkpoint file " + path + " has trailing bytes");
    return loaded;
}

}  // namespace hb
