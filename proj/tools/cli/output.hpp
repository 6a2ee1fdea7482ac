#pragma once

#include <filesystem>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

namespace eegx::cli {

/// Shortest decimal text that parses back to the same double; "nan" / "inf" / "-inf" otherwise.
std::string format_number(double v);

/// Writes `content` to a sibling temp file, flushes it and renames it over `path`.
void atomic_write(const std::filesystem::path& path, std::string_view content);

/// Artifacts staged in memory and only written once a command has finished, so a
/// failing command leaves no files behind.
class ArtifactSet {
 public:
  void add(std::filesystem::path path, std::string content);
  bool empty() const noexcept { return items_.empty(); }
  std::vector<std::filesystem::path> paths() const;

  /// Writes every artifact and prints one summary line per file.
  void commit(std::ostream& log);

 private:
  struct Item {
    std::filesystem::path path;
    std::string content;
  };
  std::vector<Item> items_;
};

/// Minimal CSV builder with a fixed column order.
class CsvWriter {
 public:
  explicit CsvWriter(const std::vector<std::string>& header);

  CsvWriter& cell(std::string_view text);
  CsvWriter& cell(double v);
  CsvWriter& cell(std::size_t v);
  void end_row();

  std::string str() const { return text_; }

 private:
  void separator();
  std::string text_;
  std::size_t columns_;
  std::size_t filled_ = 0;
};

}  // namespace eegx::cli
