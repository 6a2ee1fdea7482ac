#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace eegx {

/// Row-major T x C matrix of amplitudes.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), values_(rows * cols, fill) {}

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }

  double& operator()(std::size_t r, std::size_t c) noexcept { return values_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const noexcept { return values_[r * cols_ + c]; }

  std::span<const double> row(std::size_t r) const noexcept {
    return {values_.data() + r * cols_, cols_};
  }
  std::vector<double> column(std::size_t c) const;
  void set_column(std::size_t c, std::span<const double> v);

  std::span<const double> values() const noexcept { return values_; }

  bool operator==(const Matrix&) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> values_;
};

/// Multichannel recording. Sample indices are 0-based in storage; onset_index counts
/// samples, so the pre-onset epoch holds rows [0, onset_index).
struct EegRecording {
  std::vector<std::string> channels;
  double fs = 0.0;
  Matrix data;
  std::optional<std::size_t> onset_index;

  std::size_t num_samples() const noexcept { return data.rows(); }
  std::size_t num_channels() const noexcept { return data.cols(); }

  /// Column index of `name`; throws LookupError listing available channels.
  std::size_t channel_index(const std::string& name) const;
  std::vector<double> channel(const std::string& name) const { return data.column(channel_index(name)); }

  bool operator==(const EegRecording&) const = default;
};

struct EpochPair {
  EegRecording pre;
  EegRecording post;
};

/// Checks every recording invariant; throws ValidationError (or DataError for non-finite values).
void validate(const EegRecording& rec);

/// Parses a header-bearing CSV. Amplitudes are taken as-is.
EegRecording parse_recording(std::string_view text, double fs,
                             std::optional<std::size_t> onset_index = std::nullopt);

EegRecording load_recording(const std::filesystem::path& path, double fs,
                            std::optional<std::size_t> onset_index = std::nullopt);

/// CSV text with shortest round-trip decimal formatting, so parse(serialize(x)) == x exactly.
std::string serialize_recording(const EegRecording& rec);

struct SidecarMeta {
  std::optional<double> fs;
  std::optional<std::size_t> onset_index;
};

/// Path of the JSON sidecar for a recording: "<path>.meta.json".
std::filesystem::path sidecar_path(const std::filesystem::path& csv_path);

/// Reads the sidecar if present; missing file yields an empty SidecarMeta.
SidecarMeta read_sidecar(const std::filesystem::path& csv_path);
std::string sidecar_json(const EegRecording& rec);

/// Seconds to a sample index, rounding fs * seconds to the nearest integer.
std::size_t onset_from_seconds(double seconds, double fs);

EpochPair split_at_onset(const EegRecording& rec);

/// Columns reordered to match `names`.
EegRecording select_channels(const EegRecording& rec, std::span<const std::string> names);

/// Rows [begin, end) as a new recording; onset is kept only if it falls strictly inside.
EegRecording slice_rows(const EegRecording& rec, std::size_t begin, std::size_t end);

}  // namespace eegx
