#pragma once

// Output files are collected in memory and committed together: a failed
// commit removes whatever it managed to write.

#include <filesystem>
#include <map>
#include <string>

namespace incmart::cli {

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ArtifactSet {
 public:
  /// Later adds under the same name replace earlier ones.
  void add(const std::string& name, std::string content);
  bool contains(const std::string& name) const { return files_.count(name) > 0; }
  const std::map<std::string, std::string>& files() const { return files_; }

  /// Writes every file into `dir` (created if missing). Each file goes to a
  /// temporary name first and is renamed once all writes succeeded.
  /// IoError on failure, with no new files left behind.
  void commit(const std::filesystem::path& dir) const;

 private:
  std::map<std::string, std::string> files_;
};

}  // namespace incmart::cli
