#include <gtest/gtest.h>

#include <filesystem>
#include <cmath>
#include <fstream>

#include "eegx/error.hpp"
#include "eegx/recording.hpp"
#include "eegx/rng.hpp"

namespace eegx {
namespace {

EegRecording small_recording(std::size_t T, std::size_t C, std::uint64_t seed) {
  Rng rng(seed);
  EegRecording rec;
  for (std::size_t c = 0; c < C; ++c) rec.channels.push_back("ch" + std::to_string(c));
  rec.fs = 100.0;
  rec.data = Matrix(T, C);
  for (std::size_t t = 0; t < T; ++t)
    for (std::size_t c = 0; c < C; ++c) rec.data(t, c) = 200.0 * (rng.uniform() - 0.5) * std::pow(10.0, rng.below(7) - 3.0);
  return rec;
}

TEST(Recording, MinimalFileParses) {
  const auto rec = parse_recording("A,B\n0,0\n0,0", 1.0);
  EXPECT_EQ(rec.num_samples(), 2u);
  EXPECT_EQ(rec.num_channels(), 2u);
  for (double v : rec.data.values()) EXPECT_EQ(v, 0.0);
}

TEST(Recording, ValuesParsedAsIs) {
  const auto rec = parse_recording("Fp1,T3\r\n1.5,-2e3\r\n+4,0.125\r\n", 100.0, 1);
  EXPECT_DOUBLE_EQ(rec.data(0, 1), -2000.0);
  EXPECT_DOUBLE_EQ(rec.data(1, 0), 4.0);
  EXPECT_EQ(rec.channels[1], "T3");
  EXPECT_EQ(*rec.onset_index, 1u);
}

TEST(Recording, DuplicateChannelRejected) {
  EXPECT_THROW(parse_recording("A,A\n1,2\n3,4\n", 1.0), ValidationError);
}

TEST(Recording, MalformedHeaderRejected) {
  EXPECT_THROW(parse_recording("", 1.0), FormatError);
  EXPECT_THROW(parse_recording("A,,B\n1,2,3\n1,2,3\n", 1.0), FormatError);
}

TEST(Recording, BadCellsNameRowAndColumn) {
  try {
    parse_recording("A,B\n1,2\n3,x\n", 1.0);
    FAIL() << "expected DataError";
  } catch (const DataError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("row 2"), std::string::npos);
    EXPECT_NE(msg.find("'B'"), std::string::npos);
  }
  EXPECT_THROW(parse_recording("A,B\n1,nan\n3,4\n", 1.0), DataError);
  EXPECT_THROW(parse_recording("A,B\n1,inf\n3,4\n", 1.0), DataError);
  EXPECT_THROW(parse_recording("A,B\n1,2,3\n3,4\n", 1.0), DataError);
  EXPECT_THROW(parse_recording("A,B\n1,\n3,4\n", 1.0), DataError);
}

TEST(Recording, InvariantsChecked) {
  EXPECT_THROW(parse_recording("A\n1\n", 1.0), ValidationError);           // T < 2
  EXPECT_THROW(parse_recording("A\n1\n2\n", 0.0), ValidationError);        // fs
  EXPECT_THROW(parse_recording("A\n1\n2\n", 1.0, 2), ValidationError);     // onset == T
  EXPECT_THROW(parse_recording("A\n1\n2\n", 1.0, 0), ValidationError);     // onset == 0
  EXPECT_NO_THROW(parse_recording("A\n1\n2\n", 1.0, 1));
}

TEST(Recording, SerializeRoundTripIsExact) {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const auto rec = small_recording(50, 4, seed);
    const std::string text = serialize_recording(rec);
    const auto back = parse_recording(text, rec.fs);
    EXPECT_EQ(back, rec);
    EXPECT_EQ(serialize_recording(back), text);
  }
}

TEST(Recording, SplitAtOnset) {
  auto rec = small_recording(10, 3, 7);
  rec.onset_index = 5;
  const auto ep = split_at_onset(rec);
  EXPECT_EQ(ep.pre.num_samples(), 5u);
  EXPECT_EQ(ep.post.num_samples(), 5u);
  EXPECT_EQ(ep.pre.channels, rec.channels);
  EXPECT_EQ(ep.post.fs, rec.fs);

  rec.onset_index.reset();
  EXPECT_THROW(split_at_onset(rec), UsageError);
}

TEST(Recording, SplitThenConcatenateReproducesData) {
  for (std::size_t onset : {1u, 3u, 17u, 29u}) {
    auto rec = small_recording(30, 2, onset);
    rec.onset_index = onset;
    const auto ep = split_at_onset(rec);
    ASSERT_EQ(ep.pre.num_samples() + ep.post.num_samples(), rec.num_samples());
    for (std::size_t t = 0; t < rec.num_samples(); ++t)
      for (std::size_t c = 0; c < 2; ++c) {
        const double v = t < onset ? ep.pre.data(t, c) : ep.post.data(t - onset, c);
        EXPECT_EQ(v, rec.data(t, c));
      }
  }
}

TEST(Recording, SelectChannels) {
  auto rec = small_recording(20, 4, 3);
  rec.channels = {"Fp1", "T3", "O1", "O2"};
  const std::vector<std::string> t3{"T3"};
  const auto one = select_channels(rec, t3);
  EXPECT_EQ(one.num_channels(), 1u);
  EXPECT_EQ(one.num_samples(), rec.num_samples());
  EXPECT_EQ(one.data.column(0), rec.data.column(1));

  EXPECT_EQ(select_channels(rec, rec.channels), rec);

  const std::vector<std::string> rev{"O2", "O1", "T3", "Fp1"};
  const auto r = select_channels(rec, rev);
  EXPECT_EQ(r.data.column(0), rec.data.column(3));

  const std::vector<std::string> bad{"ZZ"};
  try {
    select_channels(rec, bad);
    FAIL() << "expected LookupError";
  } catch (const LookupError& e) {
    EXPECT_NE(std::string(e.what()).find("Fp1, T3, O1, O2"), std::string::npos);
  }
}

TEST(Recording, SelectIsIdempotentAndCommutesWithSplit) {
  auto rec = small_recording(40, 5, 11);
  rec.onset_index = 13;
  const std::vector<std::string> names{"ch3", "ch0"};
  const auto once = select_channels(rec, names);
  EXPECT_EQ(select_channels(once, names), once);

  const auto a = split_at_onset(select_channels(rec, names));
  const auto ep = split_at_onset(rec);
  EXPECT_EQ(a.pre, select_channels(ep.pre, names));
  EXPECT_EQ(a.post, select_channels(ep.post, names));
}

TEST(Recording, OnsetSecondsRoundToNearestSample) {
  EXPECT_EQ(onset_from_seconds(350.0, 100.0), 35000u);
  EXPECT_EQ(onset_from_seconds(1.004, 100.0), 100u);
  EXPECT_EQ(onset_from_seconds(1.006, 100.0), 101u);
  EXPECT_THROW(onset_from_seconds(-1.0, 100.0), UsageError);
}

TEST(Recording, FileAndSidecar) {
  const auto dir = std::filesystem::temp_directory_path() / "eegx_recording_test";
  std::filesystem::create_directories(dir);
  const auto csv = dir / "rec.csv";
  auto rec = small_recording(25, 3, 2);
  rec.onset_index = 10;
  {
    std::ofstream(csv) << serialize_recording(rec);
    std::ofstream(sidecar_path(csv)) << sidecar_json(rec);
  }
  const auto meta = read_sidecar(csv);
  ASSERT_TRUE(meta.fs && meta.onset_index);
  EXPECT_EQ(*meta.fs, 100.0);
  EXPECT_EQ(*meta.onset_index, 10u);
  EXPECT_EQ(load_recording(csv, *meta.fs, meta.onset_index), rec);

  EXPECT_FALSE(read_sidecar(dir / "absent.csv").fs.has_value());
  EXPECT_THROW(load_recording(dir / "absent.csv", 1.0), FormatError);
  std::filesystem::remove_all(dir);
}

}  // namespace
}  // namespace eegx
