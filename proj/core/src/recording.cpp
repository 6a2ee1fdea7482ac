#include "eegx/recording.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "eegx/error.hpp"

namespace eegx {

std::vector<double> Matrix::column(std::size_t c) const {
  std::vector<double> out(rows_);
  for (std::size_t r = 0; r < rows_; ++r) out[r] = (*this)(r, c);
  return out;
}

void Matrix::set_column(std::size_t c, std::span<const double> v) {
  for (std::size_t r = 0; r < rows_; ++r) (*this)(r, c) = v[r];
}

std::size_t EegRecording::channel_index(const std::string& name) const {
  for (std::size_t i = 0; i < channels.size(); ++i)
    if (channels[i] == name) return i;
  std::string available;
  for (const auto& c : channels) available += (available.empty() ? "" : ", ") + c;
  throw LookupError("unknown channel '" + name + "'; available: " + available);
}

void validate(const EegRecording& rec) {
  if (rec.channels.empty()) throw ValidationError("recording has no channels");
  if (rec.channels.size() != rec.data.cols())
    throw ValidationError("channel list length does not match the data column count");
  std::set<std::string> seen;
  for (const auto& c : rec.channels) {
    if (c.empty()) throw ValidationError("empty channel name");
    if (!seen.insert(c).second) throw ValidationError("duplicate channel name '" + c + "'");
  }
  if (!(rec.fs > 0.0) || !std::isfinite(rec.fs)) throw ValidationError("sampling rate must be positive");
  if (rec.data.rows() < 2) throw ValidationError("recording needs at least 2 samples");
  if (rec.onset_index && (*rec.onset_index < 1 || *rec.onset_index > rec.data.rows() - 1))
    throw ValidationError("onset index " + std::to_string(*rec.onset_index) + " outside [1, " +
                          std::to_string(rec.data.rows() - 1) + "]");
  for (std::size_t r = 0; r < rec.data.rows(); ++r)
    for (std::size_t c = 0; c < rec.data.cols(); ++c)
      if (!std::isfinite(rec.data(r, c)))
        throw DataError("non-finite value at row " + std::to_string(r + 1) + ", column '" +
                        rec.channels[c] + "'");
}

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    fields.push_back(trim(line.substr(start, comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return fields;
}

}  // namespace

EegRecording parse_recording(std::string_view text, double fs, std::optional<std::size_t> onset_index) {
  if (text.size() >= 3 && text.substr(0, 3) == "\xEF\xBB\xBF") text.remove_prefix(3);

  std::size_t pos = 0;
  auto next_line = [&](std::string_view& line) {
    if (pos >= text.size()) return false;
    const std::size_t nl = text.find('\n', pos);
    line = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() : nl + 1;
    return true;
  };

  std::string_view line;
  if (!next_line(line) || trim(line).empty()) throw FormatError("missing CSV header");
  EegRecording rec;
  rec.fs = fs;
  rec.onset_index = onset_index;
  for (auto f : split_fields(line)) {
    if (f.empty()) throw FormatError("malformed header: empty channel name");
    rec.channels.emplace_back(f);
  }
  {
    std::set<std::string> seen;
    for (const auto& c : rec.channels)
      if (!seen.insert(c).second) throw ValidationError("duplicate channel name '" + c + "'");
  }

  const std::size_t cols = rec.channels.size();
  std::vector<double> values;
  std::size_t row = 0;
  while (next_line(line)) {
    if (trim(line).empty()) continue;
    ++row;
    const auto fields = split_fields(line);
    if (fields.size() != cols)
      throw DataError("row " + std::to_string(row) + " has " + std::to_string(fields.size()) +
                      " fields, expected " + std::to_string(cols));
    for (std::size_t c = 0; c < cols; ++c) {
      const auto f = fields[c];
      double v = 0.0;
      const auto* first = f.data();
      const auto* last = f.data() + f.size();
      if (!f.empty() && *first == '+') ++first;
      const auto [ptr, ec] = std::from_chars(first, last, v);
      if (f.empty() || ec != std::errc{} || ptr != last || !std::isfinite(v))
        throw DataError("invalid value '" + std::string(f) + "' at row " + std::to_string(row) +
                        ", column '" + rec.channels[c] + "'");
      values.push_back(v);
    }
  }

  rec.data = Matrix(row, cols);
  for (std::size_t r = 0; r < row; ++r)
    for (std::size_t c = 0; c < cols; ++c) rec.data(r, c) = values[r * cols + c];
  validate(rec);
  return rec;
}

EegRecording load_recording(const std::filesystem::path& path, double fs,
                            std::optional<std::size_t> onset_index) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open '" + path.string() + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_recording(buffer.str(), fs, onset_index);
}

std::string serialize_recording(const EegRecording& rec) {
  std::string out;
  for (std::size_t c = 0; c < rec.channels.size(); ++c) {
    if (c) out += ',';
    out += rec.channels[c];
  }
  out += '\n';
  char buf[32];
  for (std::size_t r = 0; r < rec.data.rows(); ++r) {
    for (std::size_t c = 0; c < rec.data.cols(); ++c) {
      if (c) out += ',';
      const auto res = std::to_chars(buf, buf + sizeof buf, rec.data(r, c));
      out.append(buf, res.ptr);
    }
    out += '\n';
  }
  return out;
}

std::filesystem::path sidecar_path(const std::filesystem::path& csv_path) {
  return std::filesystem::path(csv_path.string() + ".meta.json");
}

SidecarMeta read_sidecar(const std::filesystem::path& csv_path) {
  SidecarMeta meta;
  const auto path = sidecar_path(csv_path);
  std::ifstream in(path);
  if (!in) return meta;
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError("malformed sidecar '" + path.string() + "': " + e.what());
  }
  if (j.contains("fs") && !j["fs"].is_null()) {
    if (!j["fs"].is_number()) throw FormatError("sidecar fs must be a number");
    meta.fs = j["fs"].get<double>();
  }
  if (j.contains("onset_index") && !j["onset_index"].is_null()) {
    if (!j["onset_index"].is_number_unsigned()) throw FormatError("sidecar onset_index must be a nonnegative integer");
    meta.onset_index = j["onset_index"].get<std::size_t>();
  }
  return meta;
}

std::string sidecar_json(const EegRecording& rec) {
  nlohmann::ordered_json j;
  j["fs"] = rec.fs;
  j["onset_index"] = rec.onset_index ? nlohmann::ordered_json(*rec.onset_index) : nlohmann::ordered_json();
  return j.dump(2) + "\n";
}

std::size_t onset_from_seconds(double seconds, double fs) {
  if (!(seconds >= 0.0) || !std::isfinite(seconds)) throw UsageError("onset seconds must be nonnegative");
  return static_cast<std::size_t>(std::llround(seconds * fs));
}

EegRecording slice_rows(const EegRecording& rec, std::size_t begin, std::size_t end) {
  if (begin > end || end > rec.num_samples()) throw UsageError("row slice out of range");
  EegRecording out;
  out.channels = rec.channels;
  out.fs = rec.fs;
  out.data = Matrix(end - begin, rec.num_channels());
  for (std::size_t r = begin; r < end; ++r)
    for (std::size_t c = 0; c < rec.num_channels(); ++c) out.data(r - begin, c) = rec.data(r, c);
  if (rec.onset_index && *rec.onset_index > begin && *rec.onset_index < end)
    out.onset_index = *rec.onset_index - begin;
  return out;
}

EpochPair split_at_onset(const EegRecording& rec) {
  if (!rec.onset_index) throw UsageError("split_at_onset: recording has no onset index");
  const std::size_t onset = *rec.onset_index;
  if (onset < 1 || onset >= rec.num_samples())
    throw ValidationError("onset index outside the recording");
  EpochPair pair{slice_rows(rec, 0, onset), slice_rows(rec, onset, rec.num_samples())};
  pair.pre.onset_index.reset();
  pair.post.onset_index.reset();
  return pair;
}

EegRecording select_channels(const EegRecording& rec, std::span<const std::string> names) {
  if (names.empty()) throw UsageError("select_channels: no channels requested");
  std::vector<std::size_t> idx;
  for (const auto& n : names) idx.push_back(rec.channel_index(n));
  EegRecording out;
  out.channels.assign(names.begin(), names.end());
  out.fs = rec.fs;
  out.onset_index = rec.onset_index;
  out.data = Matrix(rec.num_samples(), idx.size());
  for (std::size_t r = 0; r < rec.num_samples(); ++r)
    for (std::size_t k = 0; k < idx.size(); ++k) out.data(r, k) = rec.data(r, idx[k]);
  {
    std::set<std::string> seen;
    for (const auto& c : out.channels)
      if (!seen.insert(c).second) throw ValidationError("duplicate channel name '" + c + "' in selection");
  }
  return out;
}

}  // namespace eegx
