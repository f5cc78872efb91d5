#include "checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

#include "errors.hpp"

namespace claqs::checkpoint {

namespace {

constexpr char kMagic[8] = {'C', 'L', 'A', 'Q', 'S', 'C', 'K', 'P'};
constexpr std::uint32_t kVersion = 1;

class Writer {
 public:
  void bytes(const void* p, std::size_t n) {
    const auto* c = static_cast<const char*>(p);
    buf_.insert(buf_.end(), c, c + n);
  }
  template <typename T>
  void uint(T v) {
    for (std::size_t i = 0; i < sizeof(T); ++i) buf_.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
  }
  void f64(double v) { uint(std::bit_cast<std::uint64_t>(v)); }
  void str64(const std::string& s) {
    uint<std::uint64_t>(s.size());
    bytes(s.data(), s.size());
  }
  void str32(const std::string& s) {
    uint<std::uint32_t>(static_cast<std::uint32_t>(s.size()));
    bytes(s.data(), s.size());
  }
  const std::vector<char>& data() const { return buf_; }

 private:
  std::vector<char> buf_;
};

class Reader {
 public:
  explicit Reader(std::vector<char> buf) : buf_(std::move(buf)) {}

  void need(std::size_t n) const {
    if (pos_ + n > buf_.size()) throw Error(ErrorKind::Parse, "checkpoint truncated");
  }
  template <typename T>
  T uint() {
    need(sizeof(T));
    T v = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i) {
      v |= static_cast<T>(static_cast<unsigned char>(buf_[pos_ + i])) << (8 * i);
    }
    pos_ += sizeof(T);
    return v;
  }
  double f64() { return std::bit_cast<double>(uint<std::uint64_t>()); }
  std::string str(std::size_t n) {
    need(n);
    std::string s(buf_.data() + pos_, n);
    pos_ += n;
    return s;
  }
  std::string str64() { return str(uint<std::uint64_t>()); }
  std::string str32() { return str(uint<std::uint32_t>()); }
  bool done() const { return pos_ == buf_.size(); }

 private:
  std::vector<char> buf_;
  std::size_t pos_ = 0;
};

}  // namespace

void save(const std::filesystem::path& path, const Checkpoint& ckpt) {
  Writer w;
  w.bytes(kMagic, sizeof(kMagic));
  w.uint(kVersion);
  w.str64(ckpt.config_json);
  w.uint<std::uint64_t>(ckpt.step);
  w.uint<std::uint64_t>(ckpt.epoch);
  w.str64(ckpt.rng_state);
  w.uint<std::uint32_t>(static_cast<std::uint32_t>(ckpt.vocab.size()));
  for (const auto& t : ckpt.vocab) w.str32(t);
  w.uint<std::uint32_t>(static_cast<std::uint32_t>(ckpt.params.list.size()));
  for (const auto& p : ckpt.params.list) {
    w.str32(p.name);
    w.uint<std::uint8_t>(p.real_valued ? 1 : 0);
    w.uint<std::uint32_t>(static_cast<std::uint32_t>(p.shape.size()));
    for (auto d : p.shape) w.uint<std::uint64_t>(d);
    for (auto v : p.value) {
      w.f64(v.real());
      w.f64(v.imag());
    }
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::Io, "cannot write " + path.string());
  out.write(w.data().data(), static_cast<std::streamsize>(w.data().size()));
  if (!out) throw Error(ErrorKind::Io, "write failure on " + path.string());
}

Checkpoint load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, "cannot read " + path.string());
  Reader r(std::vector<char>(std::istreambuf_iterator<char>(in), {}));
  if (r.str(sizeof(kMagic)) != std::string(kMagic, sizeof(kMagic))) {
    throw Error(ErrorKind::Parse, path.string() + " is not a checkpoint");
  }
  if (r.uint<std::uint32_t>() != kVersion) {
    throw Error(ErrorKind::Parse, "unsupported checkpoint version");
  }
  Checkpoint ckpt;
  ckpt.config_json = r.str64();
  ckpt.step = r.uint<std::uint64_t>();
  ckpt.epoch = r.uint<std::uint64_t>();
  ckpt.rng_state = r.str64();
  const auto vocab = r.uint<std::uint32_t>();
  for (std::uint32_t i = 0; i < vocab; ++i) ckpt.vocab.push_back(r.str32());
  const auto count = r.uint<std::uint32_t>();
  for (std::uint32_t i = 0; i < count; ++i) {
    model::Param p;
    p.name = r.str32();
    p.real_valued = r.uint<std::uint8_t>() != 0;
    const auto ndim = r.uint<std::uint32_t>();
    for (std::uint32_t d = 0; d < ndim; ++d) p.shape.push_back(r.uint<std::uint64_t>());
    const std::size_t n = ad::numel(p.shape);
    r.need(n * 16);
    p.value.resize(n);
    for (auto& v : p.value) {
      const double re = r.f64();
      v = {re, r.f64()};
    }
    const auto dot = p.name.find('.');
    p.group = dot == std::string::npos ? p.name : p.name.substr(0, dot);
    p.decay = p.name != "b";
    ckpt.params.list.push_back(std::move(p));
  }
  if (!r.done()) throw Error(ErrorKind::Parse, "trailing bytes in checkpoint");
  return ckpt;
}

}  // namespace claqs::checkpoint
