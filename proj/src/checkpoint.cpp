#include "grnn/checkpoint.hpp"

#include <cstring>
#include <fstream>
#include <stdexcept>

namespace grnn {

namespace {

constexpr char kMagic[8] = {'G', 'R', 'N', 'N', 'C', 'K', 'P', 'T'};
constexpr std::uint32_t kVersion = 1;

template <typename T>
void write_pod(std::vector<std::uint8_t>& out, T value) {
  const auto* bytes = reinterpret_cast<const std::uint8_t*>(&value);
  out.insert(out.end(), bytes, bytes + sizeof(T));
}

template <typename T>
T read_pod(const std::vector<std::uint8_t>& in, std::size_t& offset) {
  if (offset + sizeof(T) > in.size()) throw std::runtime_error("checkpoint: truncated file");
  T value;
  std::memcpy(&value, in.data() + offset, sizeof(T));
  offset += sizeof(T);
  return value;
}

}  // namespace

std::vector<std::uint8_t> checkpoint_bytes(const Checkpoint& ckpt) {
  std::vector<std::uint8_t> out;
  out.insert(out.end(), kMagic, kMagic + sizeof(kMagic));
  write_pod<std::uint32_t>(out, kVersion);
  write_pod<std::uint32_t>(out, static_cast<std::uint32_t>(ckpt.task));
  write_pod<std::uint32_t>(out, static_cast<std::uint32_t>(ckpt.cell.kind));
  write_pod<std::uint32_t>(out, static_cast<std::uint32_t>(ckpt.head.kind));
  write_pod<std::uint32_t>(out, static_cast<std::uint32_t>(ckpt.cell.d));
  write_pod<std::uint32_t>(out, static_cast<std::uint32_t>(ckpt.cell.p));
  write_pod<std::uint32_t>(out, static_cast<std::uint32_t>(ckpt.K));
  write_pod<std::uint32_t>(out, static_cast<std::uint32_t>(ckpt.head.t_out));
  write_pod<std::uint64_t>(out, static_cast<std::uint64_t>(ckpt.cell.num_params()));
  write_pod<std::uint64_t>(out, static_cast<std::uint64_t>(ckpt.head.num_params()));

  std::vector<double> flat(ckpt.cell.num_params());
  ckpt.cell.write_flat(flat);
  for (const double v : flat) write_pod<double>(out, v);
  flat.resize(ckpt.head.num_params());
  ckpt.head.write_flat(flat);
  for (const double v : flat) write_pod<double>(out, v);
  return out;
}

Checkpoint checkpoint_from_bytes(const std::vector<std::uint8_t>& bytes) {
  std::size_t offset = 0;
  if (bytes.size() < sizeof(kMagic) || std::memcmp(bytes.data(), kMagic, sizeof(kMagic)) != 0) {
    throw std::runtime_error("checkpoint: bad magic");
  }
  offset = sizeof(kMagic);
  const auto version = read_pod<std::uint32_t>(bytes, offset);
  if (version != kVersion) {
    throw std::runtime_error("checkpoint: unsupported version " + std::to_string(version));
  }

  Checkpoint ckpt;
  ckpt.task = static_cast<Task>(read_pod<std::uint32_t>(bytes, offset));
  const auto cell_kind = static_cast<CellKind>(read_pod<std::uint32_t>(bytes, offset));
  const auto head_kind = static_cast<HeadKind>(read_pod<std::uint32_t>(bytes, offset));
  const auto d = static_cast<int>(read_pod<std::uint32_t>(bytes, offset));
  const auto p = static_cast<int>(read_pod<std::uint32_t>(bytes, offset));
  ckpt.K = static_cast<int>(read_pod<std::uint32_t>(bytes, offset));
  const auto t_out = static_cast<int>(read_pod<std::uint32_t>(bytes, offset));

  ckpt.cell = CellParams::zeros(cell_kind, d, p);
  ckpt.head = HeadParams::zeros(head_kind, d, t_out);
  const auto n_cell = read_pod<std::uint64_t>(bytes, offset);
  const auto n_head = read_pod<std::uint64_t>(bytes, offset);
  if (n_cell != static_cast<std::uint64_t>(ckpt.cell.num_params()) ||
      n_head != static_cast<std::uint64_t>(ckpt.head.num_params())) {
    throw std::runtime_error("checkpoint: parameter counts do not match header shapes");
  }

  std::vector<double> flat(n_cell);
  for (auto& v : flat) v = read_pod<double>(bytes, offset);
  ckpt.cell.read_flat(flat);
  flat.resize(n_head);
  for (auto& v : flat) v = read_pod<double>(bytes, offset);
  ckpt.head.read_flat(flat);

  if (offset != bytes.size()) throw std::runtime_error("checkpoint: trailing bytes");
  return ckpt;
}

void save_checkpoint(const std::string& path, const Checkpoint& ckpt) {
  const std::vector<std::uint8_t> bytes = checkpoint_bytes(ckpt);
  std::ofstream file(path, std::ios::binary | std::ios::trunc);
  if (!file) throw std::runtime_error("cannot write checkpoint: " + path);
  file.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream file(path, std::ios::binary);
  if (!file) throw std::runtime_error("cannot open checkpoint: " + path);
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(file)),
                                  std::istreambuf_iterator<char>());
  return checkpoint_from_bytes(bytes);
}

}  // namespace grnn
