#ifndef MMIRL_CHECKPOINT_HPP_
#define MMIRL_CHECKPOINT_HPP_

#include <bit>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "mmirl/param_block.hpp"

namespace mmirl {

struct CheckpointError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Flat little-endian float64 payload plus the shape table it was carved
/// from. One per network (or optimizer-state vector).
struct NamedBlock {
  std::string name;
  std::vector<MatShape> shapes;
  std::vector<double> values;
};

struct Checkpoint {
  std::map<std::string, std::string> meta;
  std::vector<NamedBlock> blocks;

  const NamedBlock& block(const std::string& name) const {
    for (const auto& b : blocks)
      if (b.name == name) return b;
    throw CheckpointError("checkpoint: no block named '" + name + "'");
  }
  bool has_block(const std::string& name) const {
    for (const auto& b : blocks)
      if (b.name == name) return true;
    return false;
  }
  std::string meta_or(const std::string& key, const std::string& fallback) const {
    auto it = meta.find(key);
    return it == meta.end() ? fallback : it->second;
  }
};

namespace detail {

static_assert(std::endian::native == std::endian::little,
              "checkpoint payloads are little-endian; big-endian hosts unsupported");

inline void put_u32(std::string& out, std::uint32_t v) {
  char buf[4];
  std::memcpy(buf, &v, 4);
  out.append(buf, 4);
}

inline void put_u64(std::string& out, std::uint64_t v) {
  char buf[8];
  std::memcpy(buf, &v, 8);
  out.append(buf, 8);
}

struct Cursor {
  const char* p;
  const char* end;
  void need(std::size_t n) const {
    if (static_cast<std::size_t>(end - p) < n) throw CheckpointError("checkpoint: truncated file");
  }
  std::uint32_t u32() {
    need(4);
    std::uint32_t v;
    std::memcpy(&v, p, 4);
    p += 4;
    return v;
  }
  std::uint64_t u64() {
    need(8);
    std::uint64_t v;
    std::memcpy(&v, p, 8);
    p += 8;
    return v;
  }
  std::string bytes(std::size_t n) {
    need(n);
    std::string s(p, n);
    p += n;
    return s;
  }
};

inline std::string shape_table_str(const std::vector<MatShape>& shapes) {
  std::string s = "[";
  for (std::size_t i = 0; i < shapes.size(); ++i) {
    if (i) s += ", ";
    s += std::to_string(shapes[i].rows) + "x" + std::to_string(shapes[i].cols);
  }
  return s + "]";
}

}  // namespace detail

inline constexpr char kCheckpointMagic[] = "MMCKPT1\n";

inline void save_checkpoint(const std::string& path, const Checkpoint& ckpt) {
  std::string out(kCheckpointMagic, 8);
  const std::string meta = nlohmann::json(ckpt.meta).dump();
  detail::put_u32(out, static_cast<std::uint32_t>(meta.size()));
  out += meta;
  detail::put_u32(out, static_cast<std::uint32_t>(ckpt.blocks.size()));
  for (const auto& b : ckpt.blocks) {
    detail::put_u32(out, static_cast<std::uint32_t>(b.name.size()));
    out += b.name;
    detail::put_u32(out, static_cast<std::uint32_t>(b.shapes.size()));
    for (const auto& s : b.shapes) {
      detail::put_u32(out, static_cast<std::uint32_t>(s.rows));
      detail::put_u32(out, static_cast<std::uint32_t>(s.cols));
    }
    detail::put_u64(out, static_cast<std::uint64_t>(b.values.size()));
    const std::size_t bytes = b.values.size() * sizeof(double);
    const std::size_t off = out.size();
    out.resize(off + bytes);
    std::memcpy(out.data() + off, b.values.data(), bytes);
  }

  // atomic publish: write to a temp file, then rename over the target
  const std::string tmp = path + ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) throw CheckpointError("checkpoint: cannot open '" + tmp + "' for writing");
    f.write(out.data(), static_cast<std::streamsize>(out.size()));
    if (!f) throw CheckpointError("checkpoint: write failure on '" + tmp + "'");
  }
  std::filesystem::rename(tmp, path);
}

inline Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw CheckpointError("checkpoint: cannot open '" + path + "'");
  std::stringstream ss;
  ss << f.rdbuf();
  const std::string data = ss.str();
  detail::Cursor cur{data.data(), data.data() + data.size()};
  if (cur.bytes(8) != std::string(kCheckpointMagic, 8))
    throw CheckpointError("checkpoint: '" + path + "' is not a checkpoint file");
  Checkpoint ckpt;
  const std::uint32_t meta_len = cur.u32();
  const nlohmann::json meta = nlohmann::json::parse(cur.bytes(meta_len));
  for (auto it = meta.begin(); it != meta.end(); ++it) ckpt.meta[it.key()] = it.value().get<std::string>();
  const std::uint32_t n_blocks = cur.u32();
  for (std::uint32_t i = 0; i < n_blocks; ++i) {
    NamedBlock b;
    b.name = cur.bytes(cur.u32());
    const std::uint32_t n_shapes = cur.u32();
    for (std::uint32_t s = 0; s < n_shapes; ++s) {
      const std::size_t rows = cur.u32();
      const std::size_t cols = cur.u32();
      b.shapes.push_back({rows, cols});
    }
    const std::uint64_t n_values = cur.u64();
    cur.need(n_values * sizeof(double));
    b.values.resize(n_values);
    std::memcpy(b.values.data(), cur.p, n_values * sizeof(double));
    cur.p += n_values * sizeof(double);
    ckpt.blocks.push_back(std::move(b));
  }
  return ckpt;
}

/// Loads a named block into a ParamBlock, refusing on any shape-table
/// difference (both tables are printed in the failure).
inline void restore_param_block(const Checkpoint& ckpt, const std::string& name, ParamBlock& dst) {
  const NamedBlock& src = ckpt.block(name);
  if (src.shapes != dst.shape_table() || src.values.size() != dst.size()) {
    throw CheckpointError("checkpoint: shape table mismatch for block '" + name + "': stored " +
                          detail::shape_table_str(src.shapes) + ", current " +
                          detail::shape_table_str(dst.shape_table()));
  }
  dst.set_values(src.values);
}

inline NamedBlock snapshot_param_block(const std::string& name, const ParamBlock& src) {
  NamedBlock b;
  b.name = name;
  b.shapes = src.shape_table();
  b.values.assign(src.values().begin(), src.values().end());
  return b;
}

}  // namespace mmirl

#endif  // MMIRL_CHECKPOINT_HPP_
