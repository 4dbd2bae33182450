#include "jointmeas/trajectory_io.hpp"

#include <bit>
#include <cstring>
#include <istream>
#include <ostream>

#include "jointmeas/config.hpp"

namespace jmeas {

namespace {

constexpr char kMagic[8] = {'J', 'M', 'T', 'R', 'A', 'J', 0, 0};

template <typename U>
void put_le(std::ostream& out, U v) {
    char bytes[sizeof(U)];
    for (std::size_t i = 0; i < sizeof(U); ++i) bytes[i] = static_cast<char>((v >> (8 * i)) & 0xff);
    out.write(bytes, sizeof(U));
}

void put_f64(std::ostream& out, double v) { put_le(out, std::bit_cast<std::uint64_t>(v)); }

template <typename U>
U get_le(std::istream& in) {
    unsigned char bytes[sizeof(U)];
    if (!in.read(reinterpret_cast<char*>(bytes), sizeof(U))) throw FormatError("trajectory dump: truncated");
    U v = 0;
    for (std::size_t i = 0; i < sizeof(U); ++i) v |= static_cast<U>(bytes[i]) << (8 * i);
    return v;
}

double get_f64(std::istream& in) { return std::bit_cast<double>(get_le<std::uint64_t>(in)); }

std::uint64_t get_count(std::istream& in, std::uint64_t limit) {
    const auto n = get_le<std::uint64_t>(in);
    if (n > limit) throw FormatError("trajectory dump: implausible length");
    return n;
}

}  // namespace

void write_trajectory(std::ostream& out, const TrajectoryRecord& rec, std::uint64_t params_hash) {
    std::uint32_t flags = 0;
    if (!rec.rho.empty()) flags |= 1u;
    if (!rec.current.empty()) flags |= 2u;
    if (rec.aborted) flags |= 4u;
    out.write(kMagic, sizeof(kMagic));
    put_le<std::uint32_t>(out, kTrajectoryFormatVersion);
    put_le<std::uint32_t>(out, flags);
    put_le<std::uint64_t>(out, rec.seed);
    put_le<std::uint64_t>(out, params_hash);
    put_f64(out, rec.dt);
    put_le<std::uint64_t>(out, static_cast<std::uint64_t>(rec.n_steps));
    put_le<std::uint64_t>(out, static_cast<std::uint64_t>(rec.stride));
    put_le<std::uint32_t>(out, static_cast<std::uint32_t>(rec.current_bin));
    put_le<std::uint32_t>(out, static_cast<std::uint32_t>(rec.retried_steps));
    put_f64(out, rec.gamma11_steady);
    put_f64(out, rec.abort_time);
    put_le<std::uint64_t>(out, rec.times.size());
    for (double v : rec.times) put_f64(out, v);
    for (double v : rec.s) put_f64(out, v);
    for (double v : rec.theta_ac) put_f64(out, v);
    if (flags & 1u) {
        for (const Mat4& rho : rec.rho) {
            for (int col = 0; col < 4; ++col) {
                for (int row = 0; row < 4; ++row) {
                    put_f64(out, rho(row, col).real());
                    put_f64(out, rho(row, col).imag());
                }
            }
        }
    }
    if (flags & 2u) {
        put_le<std::uint64_t>(out, rec.current.size());
        for (double v : rec.current) put_f64(out, v);
    }
    put_le<std::uint32_t>(out, static_cast<std::uint32_t>(rec.diagnostic.size()));
    out.write(rec.diagnostic.data(), static_cast<std::streamsize>(rec.diagnostic.size()));
}

LoadedTrajectory read_trajectory(std::istream& in) {
    char magic[8];
    if (!in.read(magic, sizeof(magic)) || std::memcmp(magic, kMagic, sizeof(magic)) != 0) {
        throw FormatError("trajectory dump: bad magic");
    }
    const auto version = get_le<std::uint32_t>(in);
    if (version != kTrajectoryFormatVersion) {
        throw FormatError("trajectory dump: unsupported version " + std::to_string(version));
    }
    LoadedTrajectory lt;
    TrajectoryRecord& rec = lt.record;
    const auto flags = get_le<std::uint32_t>(in);
    rec.seed = get_le<std::uint64_t>(in);
    lt.params_hash = get_le<std::uint64_t>(in);
    rec.dt = get_f64(in);
    rec.n_steps = static_cast<long long>(get_le<std::uint64_t>(in));
    rec.stride = static_cast<long long>(get_le<std::uint64_t>(in));
    rec.current_bin = static_cast<int>(get_le<std::uint32_t>(in));
    rec.retried_steps = static_cast<int>(get_le<std::uint32_t>(in));
    rec.gamma11_steady = get_f64(in);
    rec.abort_time = get_f64(in);
    rec.aborted = (flags & 4u) != 0;
    constexpr std::uint64_t kLimit = 1ULL << 32;
    const auto n = get_count(in, kLimit);
    rec.times.resize(n);
    rec.s.resize(n);
    rec.theta_ac.resize(n);
    for (auto& v : rec.times) v = get_f64(in);
    for (auto& v : rec.s) v = get_f64(in);
    for (auto& v : rec.theta_ac) v = get_f64(in);
    if (flags & 1u) {
        rec.rho.resize(n);
        for (Mat4& rho : rec.rho) {
            for (int col = 0; col < 4; ++col) {
                for (int row = 0; row < 4; ++row) {
                    const double re = get_f64(in);
                    rho(row, col) = cplx(re, get_f64(in));
                }
            }
        }
    }
    if (flags & 2u) {
        rec.current.resize(get_count(in, kLimit));
        for (auto& v : rec.current) v = get_f64(in);
    }
    rec.diagnostic.resize(get_le<std::uint32_t>(in));
    if (!rec.diagnostic.empty() && !in.read(rec.diagnostic.data(), static_cast<std::streamsize>(rec.diagnostic.size()))) {
        throw FormatError("trajectory dump: truncated");
    }
    return lt;
}

void write_s_csv(std::ostream& out, const TrajectoryRecord& rec) {
    out << "t,s,theta_ac\n";
    for (std::size_t i = 0; i < rec.times.size(); ++i) {
        out << format_double(rec.times[i]) << ',' << format_double(rec.s[i]) << ',' << format_double(rec.theta_ac[i])
            << '\n';
    }
}

void write_current_csv(std::ostream& out, const TrajectoryRecord& rec) {
    out << "t,J\n";
    for (std::size_t i = 0; i < rec.current.size(); ++i) {
        const double t = static_cast<double>((i + 1) * static_cast<std::size_t>(rec.current_bin)) * rec.dt;
        out << format_double(t) << ',' << format_double(rec.current[i]) << '\n';
    }
}

}  // namespace jmeas
