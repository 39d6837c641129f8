/*
 * Copyright 2026 The FeatureBox Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include <gtest/gtest.h>

#include <fstream>
#include <random>

#include "featurebox/columnstore/fbxc.h"
#include "featurebox/common/error.h"
#include "test_util.h"

namespace featurebox::columnstore {
namespace {

using featurebox::testing::TempDir;

std::vector<std::string> names_of(const ViewSchema& s) {
  std::vector<std::string> out;
  for (const auto& c : s.columns) out.push_back(c.name);
  return out;
}

ColumnBatch three_by_four() {
  return ColumnBatch({Column::of_int64("id", {1, 2, 3, 4}, {false, false, true, false}),
                      Column::of_float32("score", {0.5f, 1.5f, -2.0f, 8.0f}),
                      Column::of_strings("tag", ColumnKind::kUtf8, {"x", "", "yy", "zzz"})},
                     {"id"});
}

void flip_byte(const std::filesystem::path& p, uint64_t offset) {
  std::fstream f(p, std::ios::in | std::ios::out | std::ios::binary);
  f.seekg(static_cast<std::streamoff>(offset));
  char ch;
  f.get(ch);
  ch = static_cast<char>(ch ^ 0x5A);
  f.seekp(static_cast<std::streamoff>(offset));
  f.put(ch);
}

TEST(FbxcTest, SchemaOfRoundTrips) {
  TempDir dir("fbxc");
  auto batch = three_by_four();
  write_view(batch, dir / "v.fbxc");
  EXPECT_EQ(schema_of(dir / "v.fbxc"), batch.schema());
}

TEST(FbxcTest, AllNullUtf8ColumnHasFilledBitmapAndEmptyPayload) {
  TempDir dir("fbxc");
  Column c = Column::of_strings("s", ColumnKind::kUtf8, {"", "", "", ""}, {true, true, true, true});
  auto vf = write_view(ColumnBatch({c}), dir / "n.fbxc");
  ASSERT_EQ(vf.segments.size(), 1u);
  EXPECT_EQ(vf.segments[0].nulls.length, 1u);  // ceil(4 / 8)
  EXPECT_EQ(vf.segments[0].values.length, 0u);
  EXPECT_EQ(vf.segments[0].offsets.length, 5u * 4);

  std::ifstream in(dir / "n.fbxc", std::ios::binary);
  in.seekg(static_cast<std::streamoff>(vf.segments[0].nulls.offset));
  unsigned char bitmap = static_cast<unsigned char>(in.get());
  EXPECT_EQ(bitmap, 0x0F);
}

TEST(FbxcTest, EmptyBatchRoundTrips) {
  TempDir dir("fbxc");
  ViewSchema schema{{{"id", ColumnKind::kInt64}, {"s", ColumnKind::kUtf8}}, {}, 0};
  auto batch = ColumnBatch::empty(schema);
  write_view(batch, dir / "e.fbxc");
  auto names = names_of(schema);
  auto r = read_columns(dir / "e.fbxc", names);
  EXPECT_EQ(r.batch.row_count(), 0u);
  EXPECT_EQ(r.batch, batch);
}

TEST(FbxcTest, ZeroColumnBatchIsRejected) {
  TempDir dir("fbxc");
  EXPECT_THROW(write_view(ColumnBatch{}, dir / "z.fbxc"), SchemaError);
}

TEST(FbxcTest, ReadAllColumnsIsIdentity) {
  TempDir dir("fbxc");
  auto batch = three_by_four();
  write_view(batch, dir / "v.fbxc");
  auto names = names_of(batch.schema());
  EXPECT_EQ(read_columns(dir / "v.fbxc", names).batch, batch);
}

TEST(FbxcTest, ProjectionReadsHeaderPlusOneColumnExactly) {
  TempDir dir("fbxc");
  std::vector<Column> cols;
  for (int c = 0; c < 10; ++c) {
    std::vector<int64_t> v(1000);
    for (int i = 0; i < 1000; ++i) v[i] = c * 1000 + i;
    cols.push_back(Column::of_int64("c" + std::to_string(c), v));
  }
  auto vf = write_view(ColumnBatch(cols), dir / "wide.fbxc");
  std::vector<std::string> want{"c7"};
  auto r = read_columns(dir / "wide.fbxc", want);
  // 125 bitmap bytes + 8000 value bytes, no offsets for Int64.
  EXPECT_EQ(r.bytes_read, uint64_t{vf.header_bytes} + 125 + 8000);
  EXPECT_EQ(r.bytes_read, uint64_t{vf.header_bytes} + vf.segments[7].total_bytes());
  EXPECT_LE(r.bytes_read, vf.header_bytes + vf.body_bytes() / 10 + 125);
  EXPECT_EQ(r.batch.column_count(), 1u);
  EXPECT_EQ(r.batch.column(0), cols[7]);
}

TEST(FbxcTest, UnknownColumnIsRejected) {
  TempDir dir("fbxc");
  write_view(three_by_four(), dir / "v.fbxc");
  std::vector<std::string> want{"no_such"};
  EXPECT_THROW(read_columns(dir / "v.fbxc", want), SchemaError);
}

TEST(FbxcTest, BadMagicIsRejected) {
  TempDir dir("fbxc");
  write_view(three_by_four(), dir / "v.fbxc");
  {
    std::fstream f(dir / "v.fbxc", std::ios::in | std::ios::out | std::ios::binary);
    f.write("XXXX", 4);
  }
  EXPECT_THROW(schema_of(dir / "v.fbxc"), BadMagicError);
}

TEST(FbxcTest, VersionTwoIsRejected) {
  TempDir dir("fbxc");
  write_view(three_by_four(), dir / "v.fbxc");
  {
    std::fstream f(dir / "v.fbxc", std::ios::in | std::ios::out | std::ios::binary);
    f.seekp(4);
    const char v2[2] = {2, 0};
    f.write(v2, 2);
  }
  EXPECT_THROW(schema_of(dir / "v.fbxc"), UnsupportedVersionError);
}

TEST(FbxcTest, TruncatedFileIsRejected) {
  TempDir dir("fbxc");
  auto vf = write_view(three_by_four(), dir / "v.fbxc");
  std::filesystem::resize_file(dir / "v.fbxc", vf.file_bytes - 7);
  EXPECT_THROW(schema_of(dir / "v.fbxc"), TruncatedFileError);
}

TEST(FbxcTest, SingleByteFlipInBodyIsDetected) {
  TempDir dir("fbxc");
  std::mt19937_64 rng(11);
  auto batch = featurebox::testing::random_batch(rng, 64);
  auto names = names_of(batch.schema());
  auto path = dir / "v.fbxc";
  auto vf = write_view(batch, path);
  for (uint64_t off = vf.header_bytes; off < vf.header_bytes + vf.body_bytes(); ++off) {
    write_view(batch, path);
    flip_byte(path, off);
    EXPECT_THROW(read_columns(path, names), ChecksumError) << "offset " << off;
    EXPECT_THROW(verify_view(path), ChecksumError) << "offset " << off;
  }
}

TEST(FbxcTest, HeaderByteFlipIsDetected) {
  TempDir dir("fbxc");
  auto path = dir / "v.fbxc";
  auto vf = write_view(three_by_four(), path);
  for (uint64_t off = 12; off < vf.header_bytes; ++off) {
    write_view(three_by_four(), path);
    flip_byte(path, off);
    EXPECT_THROW(schema_of(path), FormatError) << "offset " << off;
  }
}

TEST(FbxcPropertyTest, RoundTripOnRandomBatches) {
  TempDir dir("fbxc");
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 50; ++trial) {
    auto batch = featurebox::testing::random_batch(rng, rng() % 300);
    auto path = dir / ("r" + std::to_string(trial) + ".fbxc");
    write_view(batch, path);
    auto names = names_of(batch.schema());
    ASSERT_EQ(read_columns(path, names).batch, batch) << "trial " << trial;
  }
}

TEST(FbxcPropertyTest, RangedReadsEqualSlices) {
  TempDir dir("fbxc");
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 30; ++trial) {
    size_t rows = 1 + rng() % 200;
    auto batch = featurebox::testing::random_batch(rng, rows);
    auto path = dir / "r.fbxc";
    write_view(batch, path);
    auto names = names_of(batch.schema());
    uint64_t b = rng() % (rows + 1);
    uint64_t e = b + rng() % (rows - b + 1);
    auto r = read_columns(path, names, RowRange{b, e});
    ASSERT_EQ(r.batch, batch.slice(b, e)) << rows << " [" << b << "," << e << ")";
  }
}

TEST(FbxcPropertyTest, BytesReadStrictlyIncreaseWithProjection) {
  TempDir dir("fbxc");
  std::mt19937_64 rng(9);
  auto batch = featurebox::testing::random_batch(rng, 50);
  write_view(batch, dir / "v.fbxc");
  auto names = names_of(batch.schema());
  uint64_t prev = 0;
  for (size_t k = 0; k <= names.size(); ++k) {
    std::vector<std::string> want(names.begin(), names.begin() + static_cast<long>(k));
    auto r = read_columns(dir / "v.fbxc", want);
    EXPECT_GT(r.bytes_read, prev);
    prev = r.bytes_read;
  }
}

TEST(FbxcTest, ReaderAccumulatesRangedReads) {
  TempDir dir("fbxc");
  std::mt19937_64 rng(10);
  auto batch = featurebox::testing::random_batch(rng, 100);
  auto vf = write_view(batch, dir / "v.fbxc");
  ViewReader reader(dir / "v.fbxc", {"a"});
  std::vector<ColumnBatch> parts;
  for (uint64_t b = 0; b < 100; b += 30) parts.push_back(reader.read(RowRange{b, std::min<uint64_t>(b + 30, 100)}));
  std::vector<std::string> want{"a"};
  EXPECT_EQ(ColumnBatch::concat(parts), batch.select(want));
  // Bitmap bytes straddling range boundaries are fetched twice; values never are.
  EXPECT_GE(reader.bytes_read(), vf.header_bytes + vf.segments[0].total_bytes());
  EXPECT_LE(reader.bytes_read(), vf.header_bytes + vf.segments[0].total_bytes() + 4);
}

}  // namespace
}  // namespace featurebox::columnstore
