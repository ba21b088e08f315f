#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "grnn/cell.hpp"
#include "grnn/harness.hpp"
#include "grnn/heads.hpp"

namespace grnn {

/// Trained model plus the propagation depth and task it was trained for.
struct Checkpoint {
  Task task = Task::PagerankRegression;
  int K = 1;
  CellParams cell;
  HeadParams head;
};

/// Binary little-endian layout (see docs/formats.md): 8-byte magic
/// "GRNNCKPT", u32 fields (version, task, cell kind, head kind, d, p, K,
/// t_out), u64 parameter counts, then the flat parameter doubles, cell
/// before head.
std::vector<std::uint8_t> checkpoint_bytes(const Checkpoint& ckpt);
Checkpoint checkpoint_from_bytes(const std::vector<std::uint8_t>& bytes);

void save_checkpoint(const std::string& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::string& path);

}  // namespace grnn
