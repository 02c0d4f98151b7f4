#include "incmart/cli/artifacts.hpp"

#include <fstream>
#include <system_error>
#include <vector>

namespace incmart::cli {

namespace fs = std::filesystem;

void ArtifactSet::add(const std::string& name, std::string content) {
  if (name.empty() || name.find('/') != std::string::npos || name.front() == '.') {
    throw std::invalid_argument("bad artifact name '" + name + "'");
  }
  files_[name] = std::move(content);
}

void ArtifactSet::commit(const fs::path& dir) const {
  std::error_code ec;
  // Remember which ancestors we create so a failure can remove them again.
  std::vector<fs::path> created;
  for (fs::path p = dir; !p.empty() && !fs::exists(p, ec); p = p.parent_path()) {
    created.push_back(p);
    if (p == p.parent_path()) break;
  }
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) {
    for (const auto& p : created) fs::remove(p, ec);
    throw IoError("cannot create output directory " + dir.string());
  }

  std::vector<fs::path> temps, finals;
  auto rollback = [&](const std::string& why) {
    std::error_code ignore;
    for (const auto& t : temps) fs::remove(t, ignore);
    for (const auto& f : finals) fs::remove(f, ignore);
    for (const auto& p : created) fs::remove(p, ignore);
    throw IoError(why);
  };

  for (const auto& [name, content] : files_) {
    const fs::path tmp = dir / ("." + name + ".partial");
    temps.push_back(tmp);
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) rollback("cannot write " + tmp.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.close();
    if (!out) rollback("write failed for " + tmp.string());
  }
  // Only renames past this point. Overwritten files from an earlier run are
  // not restored on failure.
  for (const auto& [name, content] : files_) {
    const fs::path tmp = dir / ("." + name + ".partial");
    fs::rename(tmp, dir / name, ec);
    if (ec) rollback("cannot rename " + tmp.string() + ": " + ec.message());
    finals.push_back(dir / name);
    std::erase(temps, tmp);
  }
}

}  // namespace incmart::cli
