#pragma once

#include <functional>
#include <map>
#include <string>
#include <vector>

#include "armlab/types.hpp"

namespace armlab {

/// One `key value...` line of a sectioned key/value config file.
struct KvEntry {
  std::string section;  // empty before the first [section] header
  std::string key;
  std::vector<std::string> tokens;
  int line = 0;
};

/// Parses `# comment`, `[section]` and `key v1 v2 ...` lines. Throws
/// std::runtime_error with line context on malformed input.
std::vector<KvEntry> parse_kv_file(const std::string& path);

double kv_double(const KvEntry& entry, size_t index = 0);
Vec kv_vec(const KvEntry& entry);

/// Runs fn(i) for i in [0, n) across a small thread pool. Work is
/// pre-partitioned by index, so writes to per-index slots are race-free and
/// results do not depend on the thread count.
void parallel_for(int n, const std::function<void(int)>& fn, int threads = 0);

}  // namespace armlab
