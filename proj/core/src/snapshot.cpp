#include "topics/snapshot.hpp"

#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>

#include "topics/errors.hpp"

namespace topics {

namespace {

constexpr std::array<char, 8> kMagic = {'T', 'O', 'P', 'I', 'C', 'M', 'D', 'L'};
constexpr std::uint32_t kVersion = 1;

void put_bytes_le(std::ostream& out, std::uint64_t v, int n_bytes) {
  char buf[8];
  for (int i = 0; i < n_bytes; ++i) buf[i] = static_cast<char>((v >> (8 * i)) & 0xff);
  out.write(buf, n_bytes);
}

std::uint64_t get_bytes_le(std::istream& in, int n_bytes) {
  char buf[8];
  in.read(buf, n_bytes);
  if (!in) throw IoError("snapshot truncated");
  std::uint64_t v = 0;
  for (int i = 0; i < n_bytes; ++i) {
    v |= static_cast<std::uint64_t>(static_cast<unsigned char>(buf[i])) << (8 * i);
  }
  return v;
}

void put_u32(std::ostream& out, std::uint32_t v) { put_bytes_le(out, v, 4); }
void put_u64(std::ostream& out, std::uint64_t v) { put_bytes_le(out, v, 8); }
void put_f64(std::ostream& out, double v) { put_bytes_le(out, std::bit_cast<std::uint64_t>(v), 8); }

std::uint32_t get_u32(std::istream& in) { return static_cast<std::uint32_t>(get_bytes_le(in, 4)); }
std::uint64_t get_u64(std::istream& in) { return get_bytes_le(in, 8); }
double get_f64(std::istream& in) { return std::bit_cast<double>(get_bytes_le(in, 8)); }

void put_row_major(std::ostream& out, const RowMajorMatrixXd& m) {
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) put_f64(out, m(r, c));
  }
}

void get_row_major(std::istream& in, RowMajorMatrixXd& m) {
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) m(r, c) = get_f64(in);
  }
}

}  // namespace

void save_snapshot(const std::string& path, const ModelStats& stats, const HyperParams& hyper) {
  if (hyper.n_words() != stats.n_words()) {
    throw ConfigError("save_snapshot: hyperparameter W does not match statistics W");
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path + " for writing");
  out.write(kMagic.data(), static_cast<std::streamsize>(kMagic.size()));
  put_u32(out, kVersion);
  put_u64(out, static_cast<std::uint64_t>(stats.n_topics()));
  put_u64(out, static_cast<std::uint64_t>(stats.n_words()));
  put_u64(out, static_cast<std::uint64_t>(stats.n_docs()));
  put_f64(out, hyper.alpha());
  for (Eigen::Index w = 0; w < hyper.n_words(); ++w) put_f64(out, hyper.eta(w));
  put_row_major(out, stats.n_phi);
  for (Eigen::Index k = 0; k < stats.n_z.size(); ++k) put_f64(out, stats.n_z[k]);
  put_row_major(out, stats.n_theta);
  if (!out) throw IoError("failed writing snapshot to " + path);
}

Snapshot load_snapshot(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path + " for reading");
  std::array<char, 8> magic{};
  in.read(magic.data(), static_cast<std::streamsize>(magic.size()));
  if (!in || magic != kMagic) throw IoError("not a model snapshot: " + path);
  const std::uint32_t version = get_u32(in);
  if (version != kVersion) {
    throw IoError("unsupported snapshot version " + std::to_string(version) + " in " + path);
  }
  const auto k = static_cast<Eigen::Index>(get_u64(in));
  const auto w = static_cast<Eigen::Index>(get_u64(in));
  const auto d = static_cast<Eigen::Index>(get_u64(in));
  if (k < 1 || w < 1 || d < 0) throw IoError("snapshot header has invalid dimensions: " + path);
  const double alpha = get_f64(in);
  Eigen::VectorXd eta(w);
  for (Eigen::Index i = 0; i < w; ++i) eta[i] = get_f64(in);

  ModelStats stats;
  stats.n_phi.resize(w, k);
  stats.n_z.resize(k);
  stats.n_theta.resize(d, k);
  get_row_major(in, stats.n_phi);
  for (Eigen::Index i = 0; i < k; ++i) stats.n_z[i] = get_f64(in);
  get_row_major(in, stats.n_theta);

  char probe = 0;
  if (in.read(&probe, 1)) throw IoError("trailing bytes after snapshot payload: " + path);
  return Snapshot{std::move(stats), HyperParams(alpha, std::move(eta))};
}

void write_snapshot_sidecar(const std::string& snapshot_path, const std::string& json_text) {
  const std::string path = snapshot_path + ".json";
  std::ofstream out(path);
  if (!out) throw IoError("cannot open " + path + " for writing");
  out << json_text;
  if (!json_text.empty() && json_text.back() != '\n') out << '\n';
  if (!out) throw IoError("failed writing sidecar " + path);
}

}  // namespace topics
