#include "gfk/dataset.hpp"

#include <cstdio>
#include <cstring>
#include <fstream>

#include "gfk/errors.hpp"

namespace gfk {

namespace {

constexpr char kMagic[4] = {'M', 'A', 'G', 'D'};
constexpr std::uint16_t kVersion = 1;
// f64 t, 3 f64 position, 9 f64 orientation, 3 f64 clean, 3 f64 measured, u16
constexpr std::size_t kRecordBytes = 19 * 8 + 2;

void put_f64(std::string& buf, double v) {
  std::uint64_t bits;
  std::memcpy(&bits, &v, 8);
  for (int i = 0; i < 8; ++i) buf.push_back(static_cast<char>((bits >> (8 * i)) & 0xff));
}

void put_u16(std::string& buf, std::uint16_t v) {
  buf.push_back(static_cast<char>(v & 0xff));
  buf.push_back(static_cast<char>((v >> 8) & 0xff));
}

void put_u32(std::string& buf, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) buf.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

struct Reader {
  const unsigned char* p;
  std::size_t left;

  void need(std::size_t n) {
    if (left < n) throw DataFormatError("dataset file truncated");
  }
  double f64() {
    need(8);
    std::uint64_t bits = 0;
    for (int i = 0; i < 8; ++i) bits |= static_cast<std::uint64_t>(p[static_cast<std::size_t>(i)]) << (8 * i);
    p += 8;
    left -= 8;
    double v;
    std::memcpy(&v, &bits, 8);
    return v;
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
};

void check_invariants(const FlightDataset& ds) {
  for (std::size_t i = 1; i < ds.records.size(); ++i)
    if (!(ds.records[i].t > ds.records[i - 1].t))
      throw DataFormatError("dataset timestamps must be strictly increasing");
  for (const auto& r : ds.records)
    if (ds.context_classes > 0 && r.context >= ds.context_classes)
      throw DataFormatError("record context label exceeds the class count");
}

}  // namespace

void write_dataset(const FlightDataset& ds, const std::string& path) {
  check_invariants(ds);
  std::string buf;
  buf.reserve(16 + ds.records.size() * kRecordBytes);
  buf.append(kMagic, 4);
  put_u16(buf, kVersion);
  put_u32(buf, static_cast<std::uint32_t>(ds.records.size()));
  put_u32(buf, ds.context_classes);
  put_u16(buf, static_cast<std::uint16_t>(ds.provenance));
  for (const auto& r : ds.records) {
    put_f64(buf, r.t);
    for (int i = 0; i < 3; ++i) put_f64(buf, r.position[static_cast<std::size_t>(i)]);
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) put_f64(buf, r.orientation[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)]);
    for (int i = 0; i < 3; ++i) put_f64(buf, r.clean[static_cast<std::size_t>(i)]);
    for (int i = 0; i < 3; ++i) put_f64(buf, r.measured[static_cast<std::size_t>(i)]);
    put_u16(buf, r.context);
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataFormatError("cannot open for writing: " + path);
  out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
  if (!out) throw DataFormatError("short write to " + path);
}

FlightDataset read_dataset(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataFormatError("cannot open dataset file: " + path);
  std::string raw((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  Reader r{reinterpret_cast<const unsigned char*>(raw.data()), raw.size()};

  r.need(4);
  if (std::memcmp(r.p, kMagic, 4) != 0)
    throw DataFormatError("not a MAGD dataset: " + path);
  r.p += 4;
  r.left -= 4;
  if (r.u16() != kVersion) throw DataFormatError("unsupported MAGD version in " + path);

  FlightDataset ds;
  const std::uint32_t count = r.u32();
  ds.context_classes = r.u32();
  ds.provenance = static_cast<DataProvenance>(r.u16());
  ds.records.reserve(count);
  for (std::uint32_t k = 0; k < count; ++k) {
    FlightRecord rec;
    rec.t = r.f64();
    for (int i = 0; i < 3; ++i) rec.position[static_cast<std::size_t>(i)] = r.f64();
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) rec.orientation[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = r.f64();
    for (int i = 0; i < 3; ++i) rec.clean[static_cast<std::size_t>(i)] = r.f64();
    for (int i = 0; i < 3; ++i) rec.measured[static_cast<std::size_t>(i)] = r.f64();
    rec.context = r.u16();
    ds.records.push_back(rec);
  }
  if (r.left != 0) throw DataFormatError("trailing bytes in " + path);
  check_invariants(ds);
  return ds;
}

void export_csv(const FlightDataset& ds, const std::string& path) {
  std::FILE* f = std::fopen(path.c_str(), "w");
  if (!f) throw DataFormatError("cannot open for writing: " + path);
  std::fputs(
      "t,px,py,pz,r00,r01,r02,r10,r11,r12,r20,r21,r22,"
      "clean_x,clean_y,clean_z,meas_x,meas_y,meas_z,context\n",
      f);
  for (const auto& r : ds.records) {
    std::fprintf(f, "%.17g,%.17g,%.17g,%.17g", r.t, r.position[0], r.position[1],
                 r.position[2]);
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j)
        std::fprintf(f, ",%.17g", r.orientation[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)]);
    for (int i = 0; i < 3; ++i) std::fprintf(f, ",%.17g", r.clean[static_cast<std::size_t>(i)]);
    for (int i = 0; i < 3; ++i) std::fprintf(f, ",%.17g", r.measured[static_cast<std::size_t>(i)]);
    std::fprintf(f, ",%u\n", static_cast<unsigned>(r.context));
  }
  std::fclose(f);
}

NoiseConfig regime_config(NoiseRegime regime) {
  NoiseConfig cfg;
  switch (regime) {
    case NoiseRegime::calm:
      cfg.eddy_sigma = 2.0;
      cfg.drift_rate = 1.0;
      cfg.thermal_amplitude = 1.0;
      cfg.white_sigma = 0.5;
      return cfg;
    case NoiseRegime::moderate:
      return cfg;
    case NoiseRegime::severe:
      cfg.eddy_lambda = 0.8;
      cfg.eddy_sigma = 15.0;
      cfg.drift_rate = 6.0;
      cfg.thermal_amplitude = 8.0;
      cfg.white_sigma = 3.0;
      return cfg;
  }
  throw ConfigError("invalid noise regime");
}

std::uint16_t context_label(TrajectoryPattern pattern, NoiseRegime regime) {
  return static_cast<std::uint16_t>(static_cast<int>(pattern) * 3 +
                                    static_cast<int>(regime));
}

FlightDataset generate_flight(const GroundTruthField& gt, const FlightConfig& cfg) {
  const auto poses = gen_trajectory(cfg.pattern, cfg.duration_s, cfg.rate_hz,
                                    cfg.jitter, cfg.seed);
  std::vector<Vec3d> clean(poses.size());
  std::vector<double> ts(poses.size());
  for (std::size_t i = 0; i < poses.size(); ++i) {
    clean[i] = eval_field(gt, poses[i].position);
    ts[i] = poses[i].t;
  }
  const auto interference = platform_interference(poses, clean, cfg.interference);
  const auto noise = sample_noise(regime_config(cfg.regime), ts, cfg.seed ^ 0x9e3779b97f4a7c15ULL);

  FlightDataset ds;
  ds.context_classes = 9;
  ds.records.reserve(poses.size());
  const std::uint16_t label = context_label(cfg.pattern, cfg.regime);
  for (std::size_t i = 0; i < poses.size(); ++i) {
    FlightRecord r;
    r.t = poses[i].t;
    r.position = poses[i].position;
    r.orientation = poses[i].orientation;
    r.clean = clean[i];
    r.measured = clean[i] + interference[i] + noise[i];
    r.context = label;
    ds.records.push_back(r);
  }
  return ds;
}

}  // namespace gfk
