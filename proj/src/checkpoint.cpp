#include "taco/checkpoint.hpp"

#include <cstdint>
#include <cstring>
#include <fstream>
#include <stdexcept>

namespace taco {
namespace {

constexpr char kMagic[8] = {'T', 'A', 'C', 'O', 'C', 'K', 'P', 'T'};
constexpr uint32_t kVersion = 1;

template <typename T>
void write_pod(std::ostream& out, const T& v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T read_pod(std::istream& in) {
  T v;
  in.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!in) throw std::runtime_error("checkpoint: truncated file");
  return v;
}

}  // namespace

void save_checkpoint(const std::string& path, const Checkpoint& ckpt) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("checkpoint: cannot write " + path);
  out.write(kMagic, sizeof(kMagic));
  write_pod(out, kVersion);
  write_pod(out, static_cast<uint32_t>(ckpt.layout.state_dim));
  write_pod(out, static_cast<uint32_t>(ckpt.layout.action_dim));
  write_pod(out, static_cast<uint32_t>(ckpt.layout.hidden.size()));
  for (int h : ckpt.layout.hidden) write_pod(out, static_cast<uint32_t>(h));
  write_pod(out, ckpt.layout.hash());
  write_pod(out, static_cast<uint64_t>(ckpt.phi.n()));
  write_pod(out, static_cast<uint64_t>(ckpt.phi.K()));
  write_pod(out, static_cast<uint64_t>(ckpt.W.columns.size()));
  // Phi column-major
  for (int k = 0; k < ckpt.phi.K(); ++k)
    for (int j = 0; j < ckpt.phi.n(); ++j) write_pod(out, ckpt.phi.data(j, k));
  for (const auto& col : ckpt.W.columns) {
    write_pod(out, static_cast<int32_t>(col.task_id));
    for (int i = 0; i < col.w.size(); ++i) write_pod(out, col.w[i]);
  }
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("checkpoint: cannot read " + path);
  char magic[8];
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0)
    throw std::runtime_error("checkpoint: bad magic in " + path);
  if (read_pod<uint32_t>(in) != kVersion) throw std::runtime_error("checkpoint: unknown version");
  const int state_dim = static_cast<int>(read_pod<uint32_t>(in));
  const int action_dim = static_cast<int>(read_pod<uint32_t>(in));
  const uint32_t nh = read_pod<uint32_t>(in);
  std::vector<int> hidden(nh);
  for (auto& h : hidden) h = static_cast<int>(read_pod<uint32_t>(in));
  const uint64_t stored_hash = read_pod<uint64_t>(in);

  Checkpoint ckpt;
  ckpt.layout = NetworkLayout::make(state_dim, action_dim, hidden);
  if (ckpt.layout.hash() != stored_hash)
    throw std::runtime_error("checkpoint: layout hash mismatch");
  const auto n = static_cast<int>(read_pod<uint64_t>(in));
  const auto K = static_cast<int>(read_pod<uint64_t>(in));
  const auto T = static_cast<int>(read_pod<uint64_t>(in));
  if (n != ckpt.layout.n) throw std::runtime_error("checkpoint: n does not match layout");
  Eigen::MatrixXd phi(n, K);
  for (int k = 0; k < K; ++k)
    for (int j = 0; j < n; ++j) phi(j, k) = read_pod<double>(in);
  ckpt.phi = ParameterSet(std::move(phi));
  for (int t = 0; t < T; ++t) {
    CompositionalVector col;
    col.task_id = read_pod<int32_t>(in);
    col.w = Eigen::VectorXd(K);
    for (int i = 0; i < K; ++i) col.w[i] = read_pod<double>(in);
    ckpt.W.columns.push_back(std::move(col));
  }
  return ckpt;
}

}  // namespace taco
