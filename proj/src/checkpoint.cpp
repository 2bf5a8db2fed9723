// Checkpoint layout (version 1, all integers little-endian):
//
//   "GLFCKPT\0"            8 bytes magic
//   u32 version            = 1
//   u32 model tag          index into kAllModelTags
//   u64 n_iter, n_burnin, n_chains, thin, seed
//   u8  monitor mu, theta, phi, variances, eta
//   f64 init_overdispersion
//   u8  pin_local_variances
//   u64 panel fingerprint
//   u64 rng seed, rng stream id, rng block; u32 rng offset
//   u64 iteration
//   state block            see serialize_state
//   u64 kept; then mu, theta, phi, variances, eta as (u64 length, f64[length])
//
// Matrices are (u64 rows, u64 cols, f64[rows*cols]) and vectors (u64 n, f64[n]).

#include "glfuse/checkpoint.hpp"

#include <cstring>
#include <fstream>
#include <iterator>
#include <type_traits>

#include <fmt/core.h>

#include "glfuse/errors.hpp"
#include "glfuse/gibbs.hpp"

namespace glfuse {

namespace {

constexpr char kMagic[8] = {'G', 'L', 'F', 'C', 'K', 'P', 'T', '\0'};
constexpr std::uint32_t kVersion = 1;

class Writer {
 public:
  template <typename T>
  void put(T value) {
    static_assert(std::is_trivially_copyable_v<T>);
    const auto* p = reinterpret_cast<const char*>(&value);
    buf_.append(p, sizeof(T));
  }
  void put_vec(const std::vector<double>& v) {
    put<std::uint64_t>(v.size());
    buf_.append(reinterpret_cast<const char*>(v.data()), v.size() * sizeof(double));
  }
  void put_mat(const Matrix& m) {
    put<std::uint64_t>(m.rows());
    put<std::uint64_t>(m.cols());
    buf_.append(reinterpret_cast<const char*>(m.values().data()), m.size() * sizeof(double));
  }
  void raw(const char* p, std::size_t n) { buf_.append(p, n); }
  std::string& str() { return buf_; }

 private:
  std::string buf_;
};

class Reader {
 public:
  explicit Reader(std::string_view bytes) : bytes_(bytes) {}
  template <typename T>
  T get() {
    T value;
    need(sizeof(T));
    std::memcpy(&value, bytes_.data() + pos_, sizeof(T));
    pos_ += sizeof(T);
    return value;
  }
  std::vector<double> get_vec() {
    const auto n = get<std::uint64_t>();
    need(n * sizeof(double));
    std::vector<double> v(n);
    std::memcpy(v.data(), bytes_.data() + pos_, n * sizeof(double));
    pos_ += n * sizeof(double);
    return v;
  }
  Matrix get_mat() {
    const auto rows = get<std::uint64_t>();
    const auto cols = get<std::uint64_t>();
    need(rows * cols * sizeof(double));
    Matrix m(rows, cols);
    std::memcpy(m.values().data(), bytes_.data() + pos_, rows * cols * sizeof(double));
    pos_ += rows * cols * sizeof(double);
    return m;
  }
  void expect(const char* p, std::size_t n) {
    need(n);
    if (std::memcmp(bytes_.data() + pos_, p, n) != 0) throw FormatError("checkpoint: bad magic");
    pos_ += n;
  }
 private:
  void need(std::size_t n) const {
    if (pos_ + n > bytes_.size()) throw FormatError("checkpoint: truncated data");
  }
  std::string_view bytes_;
  std::size_t pos_ = 0;
};

void write_state(Writer& w, const ChainState& s) {
  w.put_mat(s.theta);
  w.put_vec(s.mu);
  w.put(s.eta);
  w.put_mat(s.lambda_ij);
  w.put_vec(s.lambda_i);
  w.put(s.tau1_sq);
  w.put(s.tau2_sq);
  w.put_mat(s.xi_ij);
  w.put_vec(s.xi_i);
  w.put(s.xi_tau1);
  w.put(s.xi_tau2);
}

ChainState read_state(Reader& r) {
  ChainState s;
  s.theta = r.get_mat();
  s.mu = r.get_vec();
  s.eta = r.get<double>();
  s.lambda_ij = r.get_mat();
  s.lambda_i = r.get_vec();
  s.tau1_sq = r.get<double>();
  s.tau2_sq = r.get<double>();
  s.xi_ij = r.get_mat();
  s.xi_i = r.get_vec();
  s.xi_tau1 = r.get<double>();
  s.xi_tau2 = r.get<double>();
  return s;
}

std::uint32_t tag_index(ModelTag tag) {
  for (std::uint32_t k = 0; k < kAllModelTags.size(); ++k) {
    if (kAllModelTags[k] == tag) return k;
  }
  return 0;
}

}  // namespace

std::string serialize_state(const ChainState& s) {
  Writer w;
  write_state(w, s);
  return std::move(w.str());
}

ChainState deserialize_state(std::string_view bytes) {
  Reader r(bytes);
  return read_state(r);
}

std::uint64_t panel_fingerprint(const SourcePanel& panel) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  auto mix = [&h](const Matrix& m) {
    const auto* p = reinterpret_cast<const unsigned char*>(m.values().data());
    for (std::size_t k = 0; k < m.size() * sizeof(double); ++k) {
      h ^= p[k];
      h *= 0x100000001b3ull;
    }
  };
  mix(panel.y);
  mix(panel.v);
  return h;
}

void ChainRunner::save_checkpoint(const std::filesystem::path& path) const {
  Writer w;
  w.raw(kMagic, sizeof kMagic);
  w.put(kVersion);
  w.put(tag_index(variant_.tag));
  w.put<std::uint64_t>(settings_.n_iter);
  w.put<std::uint64_t>(settings_.n_burnin);
  w.put<std::uint64_t>(settings_.n_chains);
  w.put<std::uint64_t>(settings_.thin);
  w.put<std::uint64_t>(settings_.seed);
  const auto& m = settings_.monitor;
  for (bool b : {m.mu, m.theta, m.phi, m.variances, m.eta}) w.put<std::uint8_t>(b ? 1 : 0);
  w.put(settings_.init_overdispersion);
  w.put<std::uint8_t>(settings_.pin_local_variances ? 1 : 0);
  w.put(panel_fingerprint(*panel_));
  const auto rs = rng_.state();
  w.put(rs.seed);
  w.put(rs.stream_id);
  w.put(rs.block);
  w.put(rs.offset);
  w.put<std::uint64_t>(iteration_);
  write_state(w, state_);
  w.put<std::uint64_t>(draws_.kept);
  w.put_vec(draws_.mu);
  w.put_vec(draws_.theta);
  w.put_vec(draws_.phi);
  w.put_vec(draws_.variances);
  w.put_vec(draws_.eta);

  const auto tmp = std::filesystem::path(path.string() + ".tmp");
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw ConfigError(fmt::format("cannot write checkpoint {}", tmp.string()));
    out.write(w.str().data(), static_cast<std::streamsize>(w.str().size()));
    if (!out) throw ConfigError(fmt::format("failed writing checkpoint {}", tmp.string()));
  }
  std::filesystem::rename(tmp, path);
}

ChainRunner ChainRunner::load_checkpoint(const std::filesystem::path& path, const SourcePanel& panel) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError(fmt::format("cannot open checkpoint {}", path.string()));
  const std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  Reader r(bytes);
  r.expect(kMagic, sizeof kMagic);
  if (r.get<std::uint32_t>() != kVersion) throw FormatError("checkpoint: unsupported version");
  const auto tag = r.get<std::uint32_t>();
  if (tag >= kAllModelTags.size()) throw FormatError("checkpoint: bad model tag");
  const ModelVariant variant = ModelVariant::from_tag(kAllModelTags[tag]);
  SamplerSettings settings;
  settings.n_iter = r.get<std::uint64_t>();
  settings.n_burnin = r.get<std::uint64_t>();
  settings.n_chains = r.get<std::uint64_t>();
  settings.thin = r.get<std::uint64_t>();
  settings.seed = r.get<std::uint64_t>();
  settings.monitor.mu = r.get<std::uint8_t>() != 0;
  settings.monitor.theta = r.get<std::uint8_t>() != 0;
  settings.monitor.phi = r.get<std::uint8_t>() != 0;
  settings.monitor.variances = r.get<std::uint8_t>() != 0;
  settings.monitor.eta = r.get<std::uint8_t>() != 0;
  settings.init_overdispersion = r.get<double>();
  settings.pin_local_variances = r.get<std::uint8_t>() != 0;
  if (r.get<std::uint64_t>() != panel_fingerprint(panel)) {
    throw ConfigError("checkpoint was written for a different panel");
  }
  RngStream::State rs;
  rs.seed = r.get<std::uint64_t>();
  rs.stream_id = r.get<std::uint64_t>();
  rs.block = r.get<std::uint64_t>();
  rs.offset = r.get<std::uint32_t>();
  const auto iteration = r.get<std::uint64_t>();
  ChainState state = read_state(r);
  ChainDraws draws;
  draws.kept = r.get<std::uint64_t>();
  draws.mu = r.get_vec();
  draws.theta = r.get_vec();
  draws.phi = r.get_vec();
  draws.variances = r.get_vec();
  draws.eta = r.get_vec();
  return ChainRunner(panel, variant, settings, RngStream(rs), std::move(state), iteration, std::move(draws));
}

}  // namespace glfuse
