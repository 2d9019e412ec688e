#include "gfk/checkpoint.hpp"

#include <cstdint>
#include <cstring>
#include <fstream>

#include "gfk/errors.hpp"

namespace gfk {

namespace {

constexpr char kMagic[4] = {'G', 'F', 'K', '1'};
constexpr std::uint16_t kVersion = 1;

void put_u16(std::string& buf, std::uint16_t v) {
  buf.push_back(static_cast<char>(v & 0xff));
  buf.push_back(static_cast<char>((v >> 8) & 0xff));
}

void put_u32(std::string& buf, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) buf.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void put_u64(std::string& buf, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) buf.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void put_str(std::string& buf, const std::string& s) {
  put_u32(buf, static_cast<std::uint32_t>(s.size()));
  buf.append(s);
}

struct Reader {
  const unsigned char* p;
  std::size_t left;
  void need(std::size_t n) {
    if (left < n) throw DataFormatError("checkpoint file truncated");
  }
  std::uint16_t u16() {
    need(2);
    const std::uint16_t v = static_cast<std::uint16_t>(p[0] | (p[1] << 8));
    p += 2;
    left -= 2;
    return v;
  }
  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(p[static_cast<std::size_t>(i)]) << (8 * i);
    p += 4;
    left -= 4;
    return v;
  }
  std::uint64_t u64() {
    need(8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(p[static_cast<std::size_t>(i)]) << (8 * i);
    p += 8;
    left -= 8;
    return v;
  }
  std::string str() {
    const std::uint32_t n = u32();
    need(n);
    std::string s(reinterpret_cast<const char*>(p), n);
    p += n;
    left -= n;
    return s;
  }
  double f64() {
    const std::uint64_t bits = u64();
    double v;
    std::memcpy(&v, &bits, 8);
    return v;
  }
};

}  // namespace

void write_checkpoint(const Checkpoint& ck, const std::string& path) {
  std::string buf;
  buf.append(kMagic, 4);
  put_u16(buf, kVersion);
  put_u32(buf, static_cast<std::uint32_t>(ck.meta.size()));
  for (const auto& [k, v] : ck.meta) {
    put_str(buf, k);
    put_str(buf, v);
  }
  put_u32(buf, static_cast<std::uint32_t>(ck.arrays.size()));
  for (const auto& [k, arr] : ck.arrays) {
    put_str(buf, k);
    put_u64(buf, arr.size());
    for (double x : arr) {
      std::uint64_t bits;
      std::memcpy(&bits, &x, 8);
      put_u64(buf, bits);
    }
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataFormatError("cannot open for writing: " + path);
  out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
  if (!out) throw DataFormatError("short write to " + path);
}

Checkpoint read_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataFormatError("cannot open checkpoint file: " + path);
  std::string raw((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  Reader r{reinterpret_cast<const unsigned char*>(raw.data()), raw.size()};
  r.need(4);
  if (std::memcmp(r.p, kMagic, 4) != 0)
    throw DataFormatError("not a GFK1 checkpoint: " + path);
  r.p += 4;
  r.left -= 4;
  if (r.u16() != kVersion)
    throw DataFormatError("unsupported checkpoint version in " + path);

  Checkpoint ck;
  const std::uint32_t n_meta = r.u32();
  for (std::uint32_t i = 0; i < n_meta; ++i) {
    const std::string k = r.str();
    ck.meta[k] = r.str();
  }
  const std::uint32_t n_arr = r.u32();
  for (std::uint32_t i = 0; i < n_arr; ++i) {
    const std::string k = r.str();
    const std::uint64_t count = r.u64();
    std::vector<double> arr;
    arr.reserve(count);
    for (std::uint64_t j = 0; j < count; ++j) arr.push_back(r.f64());
    ck.arrays[k] = std::move(arr);
  }
  if (r.left != 0) throw DataFormatError("trailing bytes in " + path);
  return ck;
}

}  // namespace gfk
