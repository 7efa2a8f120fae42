#include "pourl/chain_io.hpp"

#include <cstring>
#include <fstream>
#include <span>
#include <vector>

#include <nlohmann/json.hpp>

#include "pourl/sha256.hpp"

namespace pourl {
namespace {

constexpr char kMagic[4] = {'P', 'C', 'H', 'N'};

nlohmann::json grid_header(const GridWorldConfig& grid) {
  nlohmann::json j;
  j["oracle"] = "gridworld";
  j["width"] = grid.width;
  j["height"] = grid.height;
  j["start_x"] = grid.start_x;
  j["start_y"] = grid.start_y;
  j["goal_x"] = grid.goal_x;
  j["goal_y"] = grid.goal_y;
  j["step_reward"] = grid.step_reward;
  j["goal_reward"] = grid.goal_reward;
  j["walls"] = nlohmann::json::array();
  for (const auto& [x, y] : grid.walls) j["walls"].push_back({x, y});
  return j;
}

bool parse_grid_header(const nlohmann::json& j, GridWorldConfig& grid) {
  if (!j.is_object() || j.value("oracle", "") != "gridworld") return false;
  try {
    grid.width = j.at("width").get<std::uint32_t>();
    grid.height = j.at("height").get<std::uint32_t>();
    grid.start_x = j.at("start_x").get<std::uint32_t>();
    grid.start_y = j.at("start_y").get<std::uint32_t>();
    grid.goal_x = j.at("goal_x").get<std::uint32_t>();
    grid.goal_y = j.at("goal_y").get<std::uint32_t>();
    grid.step_reward = j.at("step_reward").get<double>();
    grid.goal_reward = j.at("goal_reward").get<double>();
    grid.walls.clear();
    for (const auto& wall : j.at("walls")) {
      if (!wall.is_array() || wall.size() != 2) return false;
      grid.walls.emplace_back(wall[0].get<std::uint32_t>(), wall[1].get<std::uint32_t>());
    }
  } catch (const nlohmann::json::exception&) {
    return false;
  }
  return true;
}

void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>(v >> (8 * i)));
}

struct Cursor {
  const std::uint8_t* data = nullptr;
  std::size_t size = 0;
  std::size_t pos = 0;

  bool take_u32(std::uint32_t& v) {
    if (size - pos < 4) return false;
    v = 0;
    for (int i = 3; i >= 0; --i) v = (v << 8) | data[pos + static_cast<std::size_t>(i)];
    pos += 4;
    return true;
  }
};

std::string payload_hex(const std::vector<std::uint8_t>& payload) {
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string out;
  out.reserve(payload.size() * 2);
  for (std::uint8_t b : payload) {
    out.push_back(kDigits[b >> 4]);
    out.push_back(kDigits[b & 0xF]);
  }
  return out;
}

}  // namespace

bool write_chain_file(const std::string& path, const Chain& chain, const GridWorld& oracle) {
  std::string body;
  body.append(kMagic, sizeof(kMagic));
  put_u32(body, kChainFileVersion);
  const std::string header = grid_header(oracle.config()).dump();
  put_u32(body, static_cast<std::uint32_t>(header.size()));
  body += header;
  for (const Block& block : chain.blocks) {
    const std::vector<std::uint8_t> record = canonical_bytes(block);
    put_u32(body, static_cast<std::uint32_t>(record.size()));
    body.append(reinterpret_cast<const char*>(record.data()), record.size());
  }

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) return false;
  out.write(body.data(), static_cast<std::streamsize>(body.size()));
  return static_cast<bool>(out);
}

std::variant<LoadedChain, ChainLoadError> load_chain_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return ChainLoadError::Unreadable;
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  if (in.bad()) return ChainLoadError::Unreadable;

  Cursor cursor{bytes.data(), bytes.size(), 0};
  if (bytes.size() < 4 || std::memcmp(bytes.data(), kMagic, 4) != 0) {
    return ChainLoadError::BadFormat;
  }
  cursor.pos = 4;
  std::uint32_t version = 0;
  std::uint32_t header_len = 0;
  if (!cursor.take_u32(version) || version != kChainFileVersion) return ChainLoadError::BadFormat;
  if (!cursor.take_u32(header_len) || bytes.size() - cursor.pos < header_len) {
    return ChainLoadError::BadFormat;
  }
  const auto header = nlohmann::json::parse(bytes.begin() + static_cast<std::ptrdiff_t>(cursor.pos),
                                            bytes.begin() +
                                                static_cast<std::ptrdiff_t>(cursor.pos + header_len),
                                            nullptr, false);
  cursor.pos += header_len;

  LoadedChain loaded;
  if (header.is_discarded() || !parse_grid_header(header, loaded.grid)) {
    return ChainLoadError::BadFormat;
  }

  while (cursor.pos < cursor.size) {
    std::uint32_t record_len = 0;
    if (!cursor.take_u32(record_len) || cursor.size - cursor.pos < record_len) {
      return ChainLoadError::BadFormat;
    }
    const std::span<const std::uint8_t> record(bytes.data() + cursor.pos, record_len);
    std::optional<Block> block = decode_canonical(record);
    if (!block) return ChainLoadError::BadFormat;
    loaded.chain.blocks.push_back(std::move(*block));
    cursor.pos += record_len;
  }
  return loaded;
}

std::string chain_json_lines(const Chain& chain) {
  std::string out;
  for (const Block& block : chain.blocks) {
    nlohmann::json j;
    j["height"] = block.height;
    j["state"] = block.state;
    j["action"] = block.action == kNoAction ? nlohmann::json() : nlohmann::json(block.action);
    j["reward"] = block.reward;
    j["payload_hex"] = payload_hex(block.payload);
    j["prev_hash"] = to_hex(block.prev_hash);
    j["author"] = block.author == kNoAuthor ? nlohmann::json() : nlohmann::json(block.author);
    j["hash"] = to_hex(hash_block(block));
    out += j.dump();
    out += '\n';
  }
  return out;
}

}  // namespace pourl
