#include "binyard/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "binyard/json_io.hpp"

namespace binyard {

namespace {

constexpr char kMagic[8] = {'B', 'Y', 'C', 'K', 'P', 'T', '\0', '\0'};

class Writer {
 public:
  void u32(std::uint32_t v) { put(v, 4); }
  void u64(std::uint64_t v) { put(v, 8); }
  void f64(double d) { u64(std::bit_cast<std::uint64_t>(d)); }
  void bytes(const char* p, std::size_t n) { out_.append(p, n); }
  void str(const std::string& s) {
    u32(static_cast<std::uint32_t>(s.size()));
    bytes(s.data(), s.size());
  }
  void spec(const MlpSpec& s) {
    u32(static_cast<std::uint32_t>(s.input_dim));
    u32(static_cast<std::uint32_t>(s.hidden_layers.size()));
    for (int h : s.hidden_layers) u32(static_cast<std::uint32_t>(h));
    u32(static_cast<std::uint32_t>(s.output_dim));
  }
  void array(const std::vector<double>& a) {
    u64(a.size());
    for (double d : a) f64(d);
  }
  std::string take() { return std::move(out_); }

 private:
  void put(std::uint64_t v, int n) {
    for (int i = 0; i < n; ++i) out_.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
  }
  std::string out_;
};

class Reader {
 public:
  explicit Reader(const std::string& in) : in_(in) {}
  std::uint64_t get(int n) {
    need(n);
    std::uint64_t v = 0;
    for (int i = 0; i < n; ++i) v |= static_cast<std::uint64_t>(static_cast<unsigned char>(in_[pos_ + i])) << (8 * i);
    pos_ += n;
    return v;
  }
  std::uint32_t u32() { return static_cast<std::uint32_t>(get(4)); }
  std::uint64_t u64() { return get(8); }
  double f64() { return std::bit_cast<double>(u64()); }
  std::string raw(std::size_t n) {
    need(n);
    std::string s = in_.substr(pos_, n);
    pos_ += n;
    return s;
  }
  std::string str() { return raw(u32()); }
  MlpSpec spec() {
    MlpSpec s;
    s.input_dim = static_cast<int>(u32());
    const std::uint32_t layers = u32();
    if (layers > 64) throw std::runtime_error("checkpoint: implausible layer count");
    s.hidden_layers.resize(layers);
    for (int& h : s.hidden_layers) h = static_cast<int>(u32());
    s.output_dim = static_cast<int>(u32());
    return s;
  }
  std::vector<double> array() {
    const std::uint64_t n = u64();
    if (n > (in_.size() - pos_) / 8) throw std::runtime_error("checkpoint: truncated parameter array");
    std::vector<double> a(n);
    for (double& d : a) d = f64();
    return a;
  }
  bool at_end() const { return pos_ == in_.size(); }

 private:
  void need(std::size_t n) const {
    if (pos_ + n > in_.size()) throw std::runtime_error("checkpoint: unexpected end of data");
  }
  const std::string& in_;
  std::size_t pos_ = 0;
};

}  // namespace

void PolicyCheckpoint::validate() const {
  policy_spec.validate();
  value_spec.validate();
  if (policy_params.size() != policy_spec.param_count())
    throw std::invalid_argument("checkpoint: policy parameter count does not match its spec");
  if (value_params.size() != value_spec.param_count())
    throw std::invalid_argument("checkpoint: value parameter count does not match its spec");
  if (policy_spec.input_dim != value_spec.input_dim)
    throw std::invalid_argument("checkpoint: policy and value nets disagree on input size");
  if (value_spec.output_dim != 1) throw std::invalid_argument("checkpoint: value net must have one output");
}

Network PolicyCheckpoint::policy_network() const {
  Network n(policy_spec);
  n.params.values = policy_params;
  return n;
}

Network PolicyCheckpoint::value_network() const {
  Network n(value_spec);
  n.params.values = value_params;
  return n;
}

std::string encode_checkpoint(const PolicyCheckpoint& c) {
  c.validate();
  Writer w;
  w.bytes(kMagic, sizeof kMagic);
  w.u32(kCheckpointVersion);
  w.spec(c.policy_spec);
  w.spec(c.value_spec);
  w.str(c.provenance);
  w.u64(c.seed);
  w.u64(c.timesteps);
  w.array(c.policy_params);
  w.array(c.value_params);
  return w.take();
}

PolicyCheckpoint decode_checkpoint(const std::string& bytes) {
  Reader r(bytes);
  if (r.raw(sizeof kMagic) != std::string(kMagic, sizeof kMagic)) throw std::runtime_error("checkpoint: bad magic");
  const std::uint32_t version = r.u32();
  if (version != kCheckpointVersion)
    throw std::runtime_error("checkpoint: unsupported version " + std::to_string(version));
  PolicyCheckpoint c;
  c.policy_spec = r.spec();
  c.value_spec = r.spec();
  c.provenance = r.str();
  c.seed = r.u64();
  c.timesteps = r.u64();
  c.policy_params = r.array();
  c.value_params = r.array();
  if (!r.at_end()) throw std::runtime_error("checkpoint: trailing bytes");
  c.validate();
  return c;
}

void save_checkpoint(const std::filesystem::path& path, const PolicyCheckpoint& c) {
  const std::string bytes = encode_checkpoint(c);
  {
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw std::runtime_error("cannot write checkpoint " + path.string());
    f.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!f) throw std::runtime_error("write failed for " + path.string());
  }
  nlohmann::ordered_json meta;
  meta["format"] = "binyard-checkpoint";
  meta["version"] = kCheckpointVersion;
  meta["policy_spec"] = to_json(c.policy_spec);
  meta["value_spec"] = to_json(c.value_spec);
  meta["provenance"] = c.provenance;
  meta["seed"] = c.seed;
  meta["timesteps"] = c.timesteps;
  meta["policy_checksum"] = checksum(c.policy_params);
  meta["value_checksum"] = checksum(c.value_params);
  write_json_file(path.string() + ".json", meta);
}

PolicyCheckpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot read checkpoint " + path.string());
  std::string bytes((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
  try {
    return decode_checkpoint(bytes);
  } catch (const std::exception& e) {
    throw std::runtime_error(path.string() + ": " + e.what());
  }
}

}  // namespace binyard
