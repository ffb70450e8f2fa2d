#include "absorb/jsonio.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <system_error>

#include "absorb/error.hpp"

namespace absorb {

namespace fs = std::filesystem;

std::string canonical(const Json& j) { return j.dump(-1, ' ', false, Json::error_handler_t::strict); }

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw_io("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw_io("read failed: " + path.string());
  return ss.str();
}

std::vector<JsonLine> read_jsonl(const fs::path& path) {
  std::string content = read_file(path);
  std::vector<JsonLine> out;
  std::size_t pos = 0;
  std::size_t line_no = 0;
  while (pos < content.size()) {
    std::size_t nl = content.find('\n', pos);
    std::size_t end = nl == std::string::npos ? content.size() : nl;
    ++line_no;
    std::string_view line(content.data() + pos, end - pos);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    pos = end + 1;
    bool blank = line.find_first_not_of(" \t") == std::string_view::npos;
    if (blank) continue;
    try {
      out.push_back({line_no, Json::parse(line)});
    } catch (const Json::parse_error& e) {
      throw_data(path.string() + ":" + std::to_string(line_no) + ": malformed JSON: " + e.what());
    }
  }
  return out;
}

void write_file_atomic(const fs::path& path, std::string_view bytes) {
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw_io("cannot write " + tmp.string());
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    out.flush();
    if (!out) throw_io("write failed: " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw_io("cannot move output into place: " + path.string());
  }
}

void ensure_writable_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw_io("output directory not writable: " + dir.string());
  fs::path probe = dir / ".absorb_write_probe";
  {
    std::ofstream out(probe, std::ios::binary | std::ios::trunc);
    if (!out) throw_io("output directory not writable: " + dir.string());
  }
  fs::remove(probe, ec);
}

double round2(double x) { return std::round(x * 100.0) / 100.0; }

}  // namespace absorb
