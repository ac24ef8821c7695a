#include "visco/snapshot_io.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

#include "visco/error.hpp"

namespace visco {

namespace {

constexpr char kMagic[4] = {'V', 'E', 'L', '2'};

class Writer {
 public:
  explicit Writer(std::size_t reserve) { buf_.reserve(reserve); }

  void u32(std::uint32_t v) {
    for (int b = 0; b < 4; ++b) buf_.push_back(static_cast<std::uint8_t>(v >> (8 * b)));
  }
  void f64(double v) {
    const auto bits = std::bit_cast<std::uint64_t>(v);
    for (int b = 0; b < 8; ++b) buf_.push_back(static_cast<std::uint8_t>(bits >> (8 * b)));
  }
  void raw(const char* p, std::size_t n) { buf_.insert(buf_.end(), p, p + n); }

  std::vector<std::uint8_t> take() { return std::move(buf_); }

 private:
  std::vector<std::uint8_t> buf_;
};

class Reader {
 public:
  explicit Reader(const std::vector<std::uint8_t>& bytes) : b_(bytes) {}

  void need(std::size_t n) const {
    if (pos_ + n > b_.size()) throw Error(Errc::IoError, "snapshot truncated");
  }
  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int k = 0; k < 4; ++k) v |= static_cast<std::uint32_t>(b_[pos_ + k]) << (8 * k);
    pos_ += 4;
    return v;
  }
  double f64() {
    need(8);
    std::uint64_t v = 0;
    for (int k = 0; k < 8; ++k) v |= static_cast<std::uint64_t>(b_[pos_ + k]) << (8 * k);
    pos_ += 8;
    return std::bit_cast<double>(v);
  }
  bool magic() {
    need(4);
    const bool ok = std::memcmp(b_.data() + pos_, kMagic, 4) == 0;
    pos_ += 4;
    return ok;
  }
  bool at_end() const { return pos_ == b_.size(); }

 private:
  const std::vector<std::uint8_t>& b_;
  std::size_t pos_ = 0;
};

}  // namespace

std::vector<std::uint8_t> encode_snapshot(const State& state, const ModelParams& params) {
  const Grid2& g = state.grid();
  Writer w(48 + 6 * 8 * g.size());
  w.raw(kMagic, 4);
  w.u32(kSnapshotVersion);
  w.u32(static_cast<std::uint32_t>(g.n()));
  w.f64(g.length());
  w.f64(state.t);
  w.f64(params.mu);
  w.f64(params.eta);
  w.f64(params.delta);
  for (std::size_t c = 0; c < 2; ++c)
    for (double v : state.u.comp(c)) w.f64(v);
  for (std::size_t c = 0; c < 4; ++c)
    for (double v : state.F.comp(c)) w.f64(v);
  return w.take();
}

Snapshot decode_snapshot(const std::vector<std::uint8_t>& bytes) {
  Reader r(bytes);
  if (!r.magic()) throw Error(Errc::IoError, "snapshot: bad magic");
  const std::uint32_t version = r.u32();
  if (version != kSnapshotVersion) throw Error(Errc::IoError, "snapshot: unsupported version " + std::to_string(version));
  const std::uint32_t n = r.u32();
  const double L = r.f64();
  if (n < 8 || n > (1u << 16)) throw Error(Errc::IoError, "snapshot: implausible grid size");
  r.need(8 * 4 + std::size_t{6} * 8 * n * n);
  Snapshot s{State(Grid2(static_cast<int>(n), L)), {}};
  s.state.t = r.f64();
  s.params.mu = r.f64();
  s.params.eta = r.f64();
  s.params.delta = r.f64();
  for (std::size_t c = 0; c < 2; ++c)
    for (double& v : s.state.u.comp(c)) v = r.f64();
  for (std::size_t c = 0; c < 4; ++c)
    for (double& v : s.state.F.comp(c)) v = r.f64();
  if (!r.at_end()) throw Error(Errc::IoError, "snapshot: trailing bytes");
  return s;
}

void write_snapshot(const std::filesystem::path& path, const State& state, const ModelParams& params) {
  const auto bytes = encode_snapshot(state, params);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(Errc::IoError, "cannot open " + path.string() + " for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(Errc::IoError, "write failed: " + path.string());
}

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::IoError, "cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

Snapshot read_snapshot(const std::filesystem::path& path) { return decode_snapshot(read_file_bytes(path)); }

}  // namespace visco
