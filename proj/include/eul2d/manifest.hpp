#pragma once

// Run manifests.
//
//   eul2d-manifest
//   format_version 1
//   command simulate|experiment
//   experiment <name>|none
//   master_seed <u64>
//   path <index> stream_base <u64>      (one line per path; or)
//   paths <count> stream_base_stride 1024
//   status complete|incomplete|pass|fail
//   wall_clock_seconds <real>
//   file <relative path> <fnv1a64 hex>
//   config
//   <effective config, verbatim to end of file>
//
// Checksums are 64-bit FNV-1a over the raw file bytes (offset basis
// 0xcbf29ce484222325, prime 0x100000001b3). wall_clock_seconds is the only
// entry that varies between identical runs.

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "eul2d/errors.hpp"
#include "eul2d/format.hpp"
#include "eul2d/rng.hpp"

namespace eul2d {

inline constexpr int manifest_format_version = 1;
inline constexpr std::size_t manifest_path_list_limit = 256;

inline std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline std::string read_bytes(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw IoError("cannot read " + p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_bytes(const std::filesystem::path& p, std::string_view data) {
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + p.string());
  out.write(data.data(), static_cast<std::streamsize>(data.size()));
  if (!out) throw IoError("write failed for " + p.string());
}

inline std::uint64_t file_checksum(const std::filesystem::path& p) { return fnv1a64(read_bytes(p)); }

// Checksums of every regular file under dir except the manifest, keyed by
// generic relative path.
inline std::map<std::string, std::uint64_t> inventory(const std::filesystem::path& dir) {
  std::map<std::string, std::uint64_t> files;
  std::error_code ec;
  for (std::filesystem::recursive_directory_iterator it(dir, ec), end; it != end; it.increment(ec)) {
    if (ec) throw IoError("cannot list " + dir.string() + ": " + ec.message());
    if (!it->is_regular_file()) continue;
    const std::string rel = std::filesystem::relative(it->path(), dir).generic_string();
    if (rel == "manifest") continue;
    files[rel] = file_checksum(it->path());
  }
  if (ec) throw IoError("cannot list " + dir.string() + ": " + ec.message());
  return files;
}

struct RunManifest {
  int format_version = manifest_format_version;
  std::string command;
  std::string experiment = "none";
  std::uint64_t master_seed = 0;
  std::uint64_t first_path = 0;
  std::size_t path_count = 0;
  std::string status;
  double wall_clock_seconds = 0.0;
  std::map<std::string, std::uint64_t> files;
  std::string config;

  std::string to_text() const {
    std::ostringstream o;
    o << "eul2d-manifest\n";
    o << "format_version " << format_version << "\n";
    o << "command " << command << "\n";
    o << "experiment " << experiment << "\n";
    o << "master_seed " << master_seed << "\n";
    if (path_count <= manifest_path_list_limit) {
      for (std::size_t m = 0; m < path_count; ++m) {
        o << "path " << first_path + m << " stream_base " << stream_id(first_path + m, 0) << "\n";
      }
    } else {
      o << "paths " << path_count << " first " << first_path << " stream_base_stride " << stream_id(1, 0) << "\n";
    }
    o << "status " << status << "\n";
    o << "wall_clock_seconds " << format_double(wall_clock_seconds) << "\n";
    for (const auto& [name, sum] : files) o << "file " << name << " " << hex64(sum) << "\n";
    o << "config\n" << config;
    return o.str();
  }

  static RunManifest parse(const std::string& text) {
    RunManifest m;
    std::istringstream in(text);
    std::string line;
    int line_no = 0;
    auto fail = [&](const std::string& what) { throw ConfigError("manifest: " + what, line_no, 1); };
    if (!std::getline(in, line) || line != "eul2d-manifest") {
      line_no = 1;
      fail("missing header");
    }
    line_no = 1;
    std::vector<std::uint64_t> listed;
    bool has_config = false;
    while (std::getline(in, line)) {
      ++line_no;
      if (line == "config") {
        has_config = true;
        break;
      }
      std::istringstream ls(line);
      std::string key;
      ls >> key;
      if (key == "format_version") {
        ls >> m.format_version;
      } else if (key == "command") {
        ls >> m.command;
      } else if (key == "experiment") {
        ls >> m.experiment;
      } else if (key == "master_seed") {
        ls >> m.master_seed;
      } else if (key == "path") {
        std::uint64_t idx = 0;
        ls >> idx;
        listed.push_back(idx);
      } else if (key == "paths") {
        std::string word;
        ls >> m.path_count >> word >> m.first_path;
      } else if (key == "status") {
        ls >> m.status;
      } else if (key == "wall_clock_seconds") {
        std::string v;
        ls >> v;
        m.wall_clock_seconds = parse_double(v).value_or(0.0);
      } else if (key == "file") {
        std::string name, sum;
        ls >> name >> sum;
        if (sum.size() != 16) fail("bad checksum for " + name);
        m.files[name] = std::stoull(sum, nullptr, 16);
      } else {
        fail("unknown entry '" + key + "'");
      }
      if (ls.fail()) fail("malformed entry '" + key + "'");
    }
    if (!has_config) fail("missing config section");
    if (!listed.empty()) {
      m.first_path = listed.front();
      m.path_count = listed.size();
    }
    if (m.format_version != manifest_format_version) fail("unsupported format version " + std::to_string(m.format_version));
    std::ostringstream rest;
    rest << in.rdbuf();
    m.config = rest.str();
    return m;
  }
};

}  // namespace eul2d
