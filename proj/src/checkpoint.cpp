#include "seads/checkpoint.hpp"

#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "seads/binary_io.hpp"

namespace seads {

namespace {

constexpr char kMagic[8] = {'S', 'E', 'A', 'D', 'S', 'C', 'K', 'P'};
constexpr std::uint32_t kEndMarker = 0x21444e45;  // "END!"

}  // namespace

std::string checkpoint_bytes(const RunConfig& config, const SeadsTrainer& trainer) {
  std::ostringstream buf(std::ios::binary);
  BinaryWriter out(buf);
  out.put_bytes(kMagic, sizeof kMagic);
  out.put<std::uint32_t>(kCheckpointVersion);
  out.put_string(config_to_json(config));
  trainer.write_state(out);
  out.put<std::uint32_t>(kEndMarker);
  return buf.str();
}

Checkpoint checkpoint_from_bytes(std::string_view bytes) {
  std::istringstream buf(std::string(bytes), std::ios::binary);
  BinaryReader in(buf);
  char magic[sizeof kMagic];
  try {
    in.get_bytes(magic, sizeof magic);
  } catch (const FormatError&) {
    throw FormatError("not a checkpoint (file too short)");
  }
  if (std::memcmp(magic, kMagic, sizeof magic) != 0) throw FormatError("not a checkpoint (bad magic)");
  const auto version = in.get<std::uint32_t>();
  if (version != kCheckpointVersion)
    throw FormatError("checkpoint format version " + std::to_string(version) + " is not supported (expected " +
                      std::to_string(kCheckpointVersion) + ")");
  Checkpoint ckpt;
  try {
    ckpt.config = parse_config(in.get_string(1 << 20));
  } catch (const ConfigError& e) {
    throw FormatError(std::string("checkpoint holds an invalid configuration: ") + e.what());
  }
  ckpt.trainer = std::make_unique<SeadsTrainer>(ckpt.config.seads());
  ckpt.trainer->read_state(in);
  if (in.get<std::uint32_t>() != kEndMarker) throw FormatError("checkpoint end marker missing");
  if (buf.peek() != std::char_traits<char>::eof()) throw FormatError("trailing bytes after checkpoint");
  return ckpt;
}

void save_checkpoint(const std::string& path, const RunConfig& config, const SeadsTrainer& trainer) {
  const auto bytes = checkpoint_bytes(config, trainer);
  const std::filesystem::path target(path);
  if (target.has_parent_path()) std::filesystem::create_directories(target.parent_path());
  const auto tmp = target.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw std::runtime_error("write failed: " + tmp);
  }
  std::filesystem::rename(tmp, target);
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open checkpoint " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  try {
    return checkpoint_from_bytes(buf.str());
  } catch (const FormatError& e) {
    throw FormatError(path + ": " + e.what());
  }
}

}  // namespace seads
