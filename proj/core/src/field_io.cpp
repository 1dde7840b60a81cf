#include "hmlab/field_io.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iomanip>

#include "hmlab/error.hpp"
#include "json_util.hpp"

namespace hmlab {

static_assert(std::endian::native == std::endian::little, "field dumps assume a little-endian host");

namespace {

constexpr char kMagic[4] = {'H', 'M', 'L', 'F'};
constexpr std::uint32_t kVersion = 1;

template <class T>
void put(std::ostream& os, T v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <class T>
T take(std::istream& is) {
  T v{};
  if (!is.read(reinterpret_cast<char*>(&v), sizeof(T))) throw Error(ErrorCode::IoError, "truncated field dump");
  return v;
}

}  // namespace

void write_field(std::ostream& os, const Field& f) {
  const LatticeInfo& in = f.info;
  os.write(kMagic, 4);
  put<std::uint32_t>(os, kVersion);
  put<std::uint32_t>(os, static_cast<std::uint32_t>(in.n));
  for (int a = 0; a < in.n; ++a) put<std::int64_t>(os, in.dims[a]);
  for (int a = 0; a < in.n; ++a) put<double>(os, in.box.lo[a]);
  for (int a = 0; a < in.n; ++a) put<double>(os, in.box.hi[a]);
  put<double>(os, in.h);
  for (int a = 0; a < in.n; ++a) put<std::uint8_t>(os, in.mirror[a] ? 1 : 0);
  put<std::uint64_t>(os, f.gamma_hash);
  put<std::uint64_t>(os, f.values.size());
  os.write(reinterpret_cast<const char*>(f.values.data()), static_cast<std::streamsize>(f.values.size() * sizeof(double)));
  if (!os) throw Error(ErrorCode::IoError, "failed to write field dump");
}

void write_field(const std::string& path, const Field& f) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error(ErrorCode::IoError, "cannot open " + path);
  write_field(os, f);
}

Field read_field(std::istream& is) {
  char magic[4];
  if (!is.read(magic, 4) || std::memcmp(magic, kMagic, 4) != 0) throw Error(ErrorCode::IoError, "not a field dump");
  if (take<std::uint32_t>(is) != kVersion) throw Error(ErrorCode::IoError, "unsupported field dump version");
  Field f;
  LatticeInfo& in = f.info;
  in.n = static_cast<int>(take<std::uint32_t>(is));
  if (in.n < 1 || in.n > kMaxDim) throw Error(ErrorCode::IoError, "bad dimension in field dump");
  in.box = Box{Point(in.n), Point(in.n)};
  for (int a = 0; a < in.n; ++a) in.dims[a] = take<std::int64_t>(is);
  for (int a = 0; a < in.n; ++a) in.box.lo[a] = take<double>(is);
  for (int a = 0; a < in.n; ++a) in.box.hi[a] = take<double>(is);
  in.h = take<double>(is);
  for (int a = 0; a < in.n; ++a) in.mirror[a] = take<std::uint8_t>(is) != 0;
  f.gamma_hash = take<std::uint64_t>(is);
  const auto count = take<std::uint64_t>(is);
  std::int64_t stride = 1;
  for (int a = 0; a < in.n; ++a) {
    if (in.dims[a] < 1) throw Error(ErrorCode::IoError, "bad lattice size in field dump");
    in.strides[a] = stride;
    stride *= in.dims[a];
  }
  if (static_cast<std::uint64_t>(stride) != count) throw Error(ErrorCode::IoError, "field dump size mismatch");
  f.values.resize(count);
  if (!is.read(reinterpret_cast<char*>(f.values.data()), static_cast<std::streamsize>(count * sizeof(double))))
    throw Error(ErrorCode::IoError, "truncated field dump");
  return f;
}

Field read_field(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error(ErrorCode::IoError, "cannot open " + path);
  return read_field(is);
}

void write_field_slice_csv(std::ostream& os, const Field& f, int axis, double coordinate) {
  const LatticeInfo& in = f.info;
  if (axis < 0 || axis >= in.n) throw Error(ErrorCode::InvalidArgument, "slice axis out of range");
  const auto k = static_cast<std::int64_t>(std::llround((coordinate - in.box.lo[axis]) / in.h));
  if (k < 0 || k >= in.dims[axis]) throw Error(ErrorCode::InvalidArgument, "slice coordinate outside the box");
  for (int a = 0; a < in.n; ++a) os << 'x' << (a + 1) << ',';
  os << "value\n" << std::setprecision(17);
  for (std::size_t idx = 0; idx < in.size(); ++idx) {
    if (in.lattice(idx)[axis] != k) continue;
    const Point p = in.node(idx);
    for (int a = 0; a < in.n; ++a) os << p[a] << ',';
    os << f.values[idx] << '\n';
  }
}

void write_solve_stats_json(std::ostream& os, const SolveStats& stats, std::size_t nnz) {
  detail::ordered_json j;
  j["nnz"] = nnz;
  j["unknowns"] = stats.unknowns;
  j["iterations"] = stats.iterations;
  j["residual"] = stats.residual;
  os << j.dump(2) << '\n';
}

}  // namespace hmlab
