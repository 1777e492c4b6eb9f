#include "armlab/util.hpp"

#include <atomic>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace armlab {

std::vector<KvEntry> parse_kv_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file: " + path);
  std::vector<KvEntry> entries;
  std::string section;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const size_t hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    std::istringstream ss(line);
    std::vector<std::string> toks;
    for (std::string tok; ss >> tok;) toks.push_back(tok);
    if (toks.empty()) continue;
    if (toks[0].front() == '[') {
      if (toks.size() != 1 || toks[0].back() != ']')
        throw std::runtime_error(path + ":" + std::to_string(line_no) + ": malformed section header");
      section = toks[0].substr(1, toks[0].size() - 2);
      continue;
    }
    KvEntry entry;
    entry.section = section;
    entry.key = toks[0];
    entry.tokens.assign(toks.begin() + 1, toks.end());
    entry.line = line_no;
    entries.push_back(std::move(entry));
  }
  return entries;
}

double kv_double(const KvEntry& entry, size_t index) {
  if (index >= entry.tokens.size())
    throw std::runtime_error("line " + std::to_string(entry.line) + ": '" + entry.key +
                             "' is missing a value");
  try {
    size_t pos = 0;
    const double v = std::stod(entry.tokens[index], &pos);
    if (pos != entry.tokens[index].size()) throw std::invalid_argument("junk");
    return v;
  } catch (const std::exception&) {
    throw std::runtime_error("line " + std::to_string(entry.line) + ": '" + entry.key +
                             "': cannot parse number '" + entry.tokens[index] + "'");
  }
}

Vec kv_vec(const KvEntry& entry) {
  Vec v(entry.tokens.size());
  for (size_t i = 0; i < entry.tokens.size(); ++i) v[i] = kv_double(entry, i);
  return v;
}

void parallel_for(int n, const std::function<void(int)>& fn, int threads) {
  if (n <= 0) return;
  if (threads <= 0) threads = static_cast<int>(std::thread::hardware_concurrency());
  threads = std::max(1, std::min(threads, n));
  if (threads == 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::thread> pool;
  pool.reserve(threads);
  for (int t = 0; t < threads; ++t) {
    pool.emplace_back([&]() {
      for (int i = next.fetch_add(1); i < n; i = next.fetch_add(1)) fn(i);
    });
  }
  for (std::thread& th : pool) th.join();
}

}  // namespace armlab
