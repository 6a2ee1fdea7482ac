#include "cli/output.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <system_error>

#include "eegx/error.hpp"

namespace eegx::cli {

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

void atomic_write(const std::filesystem::path& path, std::string_view content) {
  namespace fs = std::filesystem;
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot open " + tmp.string() + " for writing");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.flush();
    if (!out) {
      std::error_code ec;
      fs::remove(tmp, ec);
      throw Error("failed writing " + tmp.string());
    }
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw Error("cannot rename into " + path.string());
  }
}

void ArtifactSet::add(std::filesystem::path path, std::string content) {
  items_.push_back({std::move(path), std::move(content)});
}

std::vector<std::filesystem::path> ArtifactSet::paths() const {
  std::vector<std::filesystem::path> out;
  for (const auto& item : items_) out.push_back(item.path);
  return out;
}

void ArtifactSet::commit(std::ostream& log) {
  for (const auto& item : items_) {
    atomic_write(item.path, item.content);
    log << "wrote " << item.path.string() << " (" << item.content.size() << " bytes)\n";
  }
  items_.clear();
}

CsvWriter::CsvWriter(const std::vector<std::string>& header) : columns_(header.size()) {
  for (const auto& h : header) cell(h);
  end_row();
}

void CsvWriter::separator() {
  if (filled_ > 0) text_ += ',';
  ++filled_;
}

CsvWriter& CsvWriter::cell(std::string_view text) {
  separator();
  text_ += text;
  return *this;
}

CsvWriter& CsvWriter::cell(double v) { return cell(std::string_view(format_number(v))); }

CsvWriter& CsvWriter::cell(std::size_t v) { return cell(std::string_view(std::to_string(v))); }

void CsvWriter::end_row() {
  if (filled_ != columns_) throw Error("internal: CSV row has the wrong number of cells");
  text_ += '\n';
  filled_ = 0;
}

}  // namespace eegx::cli
