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

#include "featurebox/columnstore/fbxc.h"

#include <zlib.h>

#include <algorithm>
#include <bit>
#include <cstring>
#include <limits>

#include "featurebox/common/error.h"

namespace featurebox::columnstore {
namespace {

static_assert(std::endian::native == std::endian::little,
              "FBXC encoding assumes a little-endian host");

uint32_t crc32_of(std::span<const uint8_t> bytes, uint32_t seed = 0) {
  uLong crc = seed;
  // zlib takes uInt lengths; feed large spans in chunks.
  while (!bytes.empty()) {
    size_t chunk = std::min<size_t>(bytes.size(), std::numeric_limits<uInt>::max());
    crc = ::crc32(crc, bytes.data(), static_cast<uInt>(chunk));
    bytes = bytes.subspan(chunk);
  }
  return static_cast<uint32_t>(crc);
}

class ByteWriter {
 public:
  template <typename T>
  void put(T v) {
    static_assert(std::is_trivially_copyable_v<T>);
    const auto* p = reinterpret_cast<const uint8_t*>(&v);
    buf_.insert(buf_.end(), p, p + sizeof(T));
  }
  void put_bytes(std::string_view s) { buf_.insert(buf_.end(), s.begin(), s.end()); }
  void put_name(std::string_view s) {
    if (s.size() > std::numeric_limits<uint16_t>::max()) throw SchemaError("name too long");
    put<uint16_t>(static_cast<uint16_t>(s.size()));
    put_bytes(s);
  }
  std::vector<uint8_t>& bytes() { return buf_; }

 private:
  std::vector<uint8_t> buf_;
};

class ByteReader {
 public:
  explicit ByteReader(std::span<const uint8_t> bytes) : bytes_(bytes) {}

  template <typename T>
  T get() {
    need(sizeof(T));
    T v;
    std::memcpy(&v, bytes_.data() + pos_, sizeof(T));
    pos_ += sizeof(T);
    return v;
  }
  std::string get_name() {
    auto n = get<uint16_t>();
    need(n);
    std::string s(reinterpret_cast<const char*>(bytes_.data() + pos_), n);
    pos_ += n;
    return s;
  }
  size_t pos() const { return pos_; }

 private:
  void need(size_t n) const {
    if (pos_ + n > bytes_.size()) throw FormatError("FBXC header is malformed");
  }

  std::span<const uint8_t> bytes_;
  size_t pos_ = 0;
};

struct EncodedColumn {
  std::vector<uint8_t> nulls;
  std::vector<uint8_t> offsets;
  std::vector<uint8_t> values;
};

EncodedColumn encode(const Column& col) {
  EncodedColumn out;
  out.nulls = col.nulls().bytes();
  std::visit(
      [&](const auto& v) {
        using V = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<V, std::vector<std::string>>) {
          ByteWriter offs;
          ByteWriter vals;
          uint64_t pos = 0;
          offs.put<uint32_t>(0);
          for (size_t i = 0; i < v.size(); ++i) {
            if (!col.is_null(i)) {
              vals.put_bytes(v[i]);
              pos += v[i].size();
            }
            if (pos > std::numeric_limits<uint32_t>::max()) {
              throw SchemaError("column '" + col.name() + "' exceeds 4 GiB of payload");
            }
            offs.put<uint32_t>(static_cast<uint32_t>(pos));
          }
          out.offsets = std::move(offs.bytes());
          out.values = std::move(vals.bytes());
        } else {
          using T = typename V::value_type;
          out.values.resize(v.size() * sizeof(T));
          for (size_t i = 0; i < v.size(); ++i) {
            T value = col.is_null(i) ? T{} : v[i];
            std::memcpy(out.values.data() + i * sizeof(T), &value, sizeof(T));
          }
        }
      },
      col.storage());
  return out;
}

// Fixed header fields preceding the schema block.
constexpr size_t kPreambleBytes = 12;
constexpr size_t kSegmentEntryBytes = 8 + 8 + 4;

void read_exact(std::ifstream& in, uint64_t offset, std::span<uint8_t> dst) {
  if (dst.empty()) return;
  in.clear();
  in.seekg(static_cast<std::streamoff>(offset));
  in.read(reinterpret_cast<char*>(dst.data()), static_cast<std::streamsize>(dst.size()));
  if (static_cast<size_t>(in.gcount()) != dst.size()) {
    throw TruncatedFileError("FBXC file ended while reading " + std::to_string(dst.size()) +
                             " bytes at offset " + std::to_string(offset));
  }
}

ViewFile parse_header(std::ifstream& in, const std::filesystem::path& path, uint64_t file_bytes) {
  if (file_bytes < kPreambleBytes) {
    throw TruncatedFileError("FBXC file '" + path.string() + "' is shorter than its preamble");
  }
  std::vector<uint8_t> pre(kPreambleBytes);
  read_exact(in, 0, pre);
  if (std::memcmp(pre.data(), kFbxcMagic, 4) != 0) {
    throw BadMagicError("'" + path.string() + "' is not an FBXC file (bad magic)");
  }
  ByteReader pr(pre);
  pr.get<uint32_t>();
  auto version = pr.get<uint16_t>();
  if (version != kFbxcVersion) {
    throw UnsupportedVersionError("FBXC version " + std::to_string(version) +
                                  " is not supported (expected " +
                                  std::to_string(kFbxcVersion) + ")");
  }
  pr.get<uint16_t>();
  auto header_bytes = pr.get<uint32_t>();
  if (header_bytes < kPreambleBytes + 4 || header_bytes > file_bytes) {
    throw TruncatedFileError("FBXC header length exceeds file size");
  }
  std::vector<uint8_t> header(header_bytes);
  read_exact(in, 0, header);
  uint32_t stored_crc;
  std::memcpy(&stored_crc, header.data() + header_bytes - 4, 4);
  if (crc32_of(std::span(header).first(header_bytes - 4)) != stored_crc) {
    throw ChecksumError("FBXC header checksum mismatch in '" + path.string() + "'");
  }

  ViewFile vf;
  vf.path = path;
  vf.header_bytes = header_bytes;
  vf.file_bytes = file_bytes;
  ByteReader r{std::span<const uint8_t>(header).first(header_bytes - 4)};
  for (size_t i = 0; i < kPreambleBytes; ++i) r.get<uint8_t>();
  vf.schema.row_count = r.get<uint64_t>();
  auto ncols = r.get<uint32_t>();
  auto nkeys = r.get<uint32_t>();
  for (uint32_t c = 0; c < ncols; ++c) {
    ColumnDef d;
    d.name = r.get_name();
    auto k = r.get<uint8_t>();
    if (k < 1 || k > 4) throw FormatError("FBXC column '" + d.name + "' has unknown kind");
    d.kind = static_cast<ColumnKind>(k);
    vf.schema.columns.push_back(std::move(d));
  }
  for (uint32_t k = 0; k < nkeys; ++k) vf.schema.key_columns.push_back(r.get_name());
  try {
    vf.schema.validate();
  } catch (const SchemaError& e) {
    throw FormatError(std::string("FBXC schema invalid: ") + e.what());
  }
  uint64_t expect = header_bytes;
  auto read_segment = [&] {
    Segment s;
    s.offset = r.get<uint64_t>();
    s.length = r.get<uint64_t>();
    s.crc32 = r.get<uint32_t>();
    if (s.offset != expect) throw FormatError("FBXC segments are not contiguous");
    expect += s.length;
    return s;
  };
  for (uint32_t c = 0; c < ncols; ++c) {
    ColumnSegments cs;
    cs.nulls = read_segment();
    cs.offsets = read_segment();
    cs.values = read_segment();
    vf.segments.push_back(cs);
  }
  if (r.pos() != header_bytes - 4) throw FormatError("FBXC header has trailing bytes");
  if (expect + kFooterBytes > file_bytes) {
    throw TruncatedFileError("FBXC file '" + path.string() + "' is truncated");
  }
  if (expect + kFooterBytes < file_bytes) {
    throw FormatError("FBXC file '" + path.string() + "' has trailing bytes");
  }
  std::vector<uint8_t> footer(kFooterBytes);
  // The footer is not counted in bytes_read: ViewFile captures it here only
  // so verify_view can compare without reopening.
  read_exact(in, expect, footer);
  std::memcpy(&vf.body_crc32, footer.data(), 4);
  return vf;
}

std::ifstream open_stream(const std::filesystem::path& path, uint64_t& size) {
  std::error_code ec;
  size = std::filesystem::file_size(path, ec);
  if (ec) throw IoError("cannot stat '" + path.string() + "': " + ec.message());
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  return in;
}

std::vector<size_t> resolve(const ViewSchema& schema, std::span<const std::string> wanted) {
  std::vector<size_t> idx;
  for (const auto& w : wanted) {
    auto i = schema.index_of(w);
    if (!i) throw SchemaError("unknown column '" + w + "'");
    idx.push_back(*i);
  }
  std::sort(idx.begin(), idx.end());
  idx.erase(std::unique(idx.begin(), idx.end()), idx.end());
  return idx;
}

Column decode_column(std::ifstream& in, const ViewFile& vf, size_t c, std::optional<RowRange> rows,
                     uint64_t& bytes_read) {
  const ColumnDef& def = vf.schema.columns[c];
  const ColumnSegments& seg = vf.segments[c];
  const uint64_t total_rows = vf.schema.row_count;
  const bool full = !rows.has_value();
  const uint64_t begin = full ? 0 : rows->begin;
  const uint64_t end = full ? total_rows : rows->end;
  const size_t n = static_cast<size_t>(end - begin);

  auto fetch = [&](const Segment& s, uint64_t rel_off, uint64_t len) {
    if (rel_off + len > s.length) throw FormatError("FBXC segment read out of bounds");
    std::vector<uint8_t> buf(len);
    read_exact(in, s.offset + rel_off, buf);
    bytes_read += len;
    if (full && crc32_of(buf) != s.crc32) {
      throw ChecksumError("FBXC checksum mismatch in column '" + def.name + "' of '" +
                          vf.path.string() + "'");
    }
    return buf;
  };

  // Null bitmap: fetch covering bytes then realign to `begin`.
  NullBitmap nulls;
  {
    uint64_t first_byte = begin / 8;
    uint64_t last_byte = (end + 7) / 8;
    auto raw = fetch(seg.nulls, first_byte, full ? seg.nulls.length : last_byte - first_byte);
    if (full) {
      nulls = NullBitmap::from_bytes(raw, n);
    } else {
      nulls = NullBitmap(n);
      for (size_t i = 0; i < n; ++i) {
        uint64_t bit = begin + i - first_byte * 8;
        if ((raw[bit >> 3] >> (bit & 7)) & 1U) nulls.set(i, true);
      }
    }
  }

  Column::Storage values;
  switch (def.kind) {
    case ColumnKind::kInt64:
    case ColumnKind::kFloat32: {
      const size_t width = def.kind == ColumnKind::kInt64 ? 8 : 4;
      if (seg.values.length != total_rows * width || seg.offsets.length != 0) {
        throw FormatError("FBXC fixed-width segment size mismatch for '" + def.name + "'");
      }
      auto raw = fetch(seg.values, begin * width, n * width);
      if (def.kind == ColumnKind::kInt64) {
        std::vector<int64_t> v(n);
        std::memcpy(v.data(), raw.data(), raw.size());
        values = std::move(v);
      } else {
        std::vector<float> v(n);
        std::memcpy(v.data(), raw.data(), raw.size());
        values = std::move(v);
      }
      break;
    }
    case ColumnKind::kUtf8:
    case ColumnKind::kJson: {
      if (seg.offsets.length != (total_rows + 1) * 4) {
        throw FormatError("FBXC offsets segment size mismatch for '" + def.name + "'");
      }
      auto raw_offs = fetch(seg.offsets, begin * 4, (n + 1) * 4);
      std::vector<uint32_t> offs(n + 1);
      std::memcpy(offs.data(), raw_offs.data(), raw_offs.size());
      for (size_t i = 0; i < n; ++i) {
        if (offs[i] > offs[i + 1]) throw FormatError("FBXC offsets are not monotone");
      }
      if (full && (offs.front() != 0 || offs.back() != seg.values.length)) {
        throw FormatError("FBXC offsets do not cover the payload");
      }
      auto payload = fetch(seg.values, offs.front(), offs.back() - offs.front());
      std::vector<std::string> v;
      v.reserve(n);
      for (size_t i = 0; i < n; ++i) {
        v.emplace_back(reinterpret_cast<const char*>(payload.data()) + (offs[i] - offs.front()),
                       offs[i + 1] - offs[i]);
      }
      values = std::move(v);
      break;
    }
  }
  return Column::from_parts(def, std::move(values), std::move(nulls));
}

void check_range(const ViewFile& vf, const std::optional<RowRange>& rows) {
  if (rows && (rows->begin > rows->end || rows->end > vf.schema.row_count)) {
    throw SchemaError("row range [" + std::to_string(rows->begin) + ", " +
                      std::to_string(rows->end) + ") outside [0, " +
                      std::to_string(vf.schema.row_count) + ")");
  }
}

ColumnBatch assemble(const ViewFile& vf, std::vector<Column> cols) {
  std::vector<std::string> keys;
  for (const auto& k : vf.schema.key_columns) {
    for (const auto& c : cols) {
      if (c.name() == k) keys.push_back(k);
    }
  }
  return ColumnBatch(std::move(cols), std::move(keys));
}

}  // namespace

ViewFile write_view(const ColumnBatch& batch, const std::filesystem::path& destination) {
  const ViewSchema schema = batch.schema();
  if (schema.columns.empty()) throw SchemaError("cannot write a view with zero columns");
  schema.validate();

  std::vector<EncodedColumn> encoded;
  encoded.reserve(batch.column_count());
  for (const auto& c : batch.columns()) encoded.push_back(encode(c));

  ByteWriter head;
  head.put_bytes(std::string_view(kFbxcMagic, 4));
  head.put<uint16_t>(kFbxcVersion);
  head.put<uint16_t>(0);
  head.put<uint32_t>(0);  // header length, patched below
  head.put<uint64_t>(schema.row_count);
  head.put<uint32_t>(static_cast<uint32_t>(schema.columns.size()));
  head.put<uint32_t>(static_cast<uint32_t>(schema.key_columns.size()));
  for (const auto& d : schema.columns) {
    head.put_name(d.name);
    head.put<uint8_t>(static_cast<uint8_t>(d.kind));
  }
  for (const auto& k : schema.key_columns) head.put_name(k);

  const size_t header_bytes =
      head.bytes().size() + schema.columns.size() * 3 * kSegmentEntryBytes + 4;
  if (header_bytes > std::numeric_limits<uint32_t>::max()) throw SchemaError("header too large");

  ViewFile vf;
  vf.path = destination;
  vf.schema = schema;
  vf.header_bytes = static_cast<uint32_t>(header_bytes);
  uint64_t pos = header_bytes;
  uint32_t body_crc = 0;
  auto place = [&](const std::vector<uint8_t>& bytes) {
    Segment s{pos, bytes.size(), crc32_of(bytes)};
    head.put<uint64_t>(s.offset);
    head.put<uint64_t>(s.length);
    head.put<uint32_t>(s.crc32);
    body_crc = crc32_of(bytes, body_crc);
    pos += bytes.size();
    return s;
  };
  for (const auto& e : encoded) {
    ColumnSegments cs;
    cs.nulls = place(e.nulls);
    cs.offsets = place(e.offsets);
    cs.values = place(e.values);
    vf.segments.push_back(cs);
  }
  auto& hb = head.bytes();
  const uint32_t hlen = vf.header_bytes;
  std::memcpy(hb.data() + 8, &hlen, 4);
  head.put<uint32_t>(crc32_of(hb));
  vf.body_crc32 = body_crc;
  vf.file_bytes = pos + kFooterBytes;

  std::ofstream out(destination, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + destination.string() + "' for writing");
  auto write = [&](const std::vector<uint8_t>& b) {
    out.write(reinterpret_cast<const char*>(b.data()), static_cast<std::streamsize>(b.size()));
  };
  write(hb);
  for (const auto& e : encoded) {
    write(e.nulls);
    write(e.offsets);
    write(e.values);
  }
  out.write(reinterpret_cast<const char*>(&body_crc), 4);
  out.flush();
  if (!out) throw IoError("write to '" + destination.string() + "' failed");
  return vf;
}

ViewFile open_view(const std::filesystem::path& source) {
  uint64_t size = 0;
  auto in = open_stream(source, size);
  return parse_header(in, source, size);
}

ViewSchema schema_of(const std::filesystem::path& source) { return open_view(source).schema; }

ReadResult read_columns(const std::filesystem::path& source, std::span<const std::string> wanted,
                        std::optional<RowRange> rows) {
  uint64_t size = 0;
  auto in = open_stream(source, size);
  ViewFile vf = parse_header(in, source, size);
  auto idx = resolve(vf.schema, wanted);
  check_range(vf, rows);
  ReadResult result;
  result.bytes_read = vf.header_bytes;
  std::vector<Column> cols;
  for (size_t c : idx) cols.push_back(decode_column(in, vf, c, rows, result.bytes_read));
  result.batch = assemble(vf, std::move(cols));
  return result;
}

void verify_view(const std::filesystem::path& source) {
  uint64_t size = 0;
  auto in = open_stream(source, size);
  ViewFile vf = parse_header(in, source, size);
  std::vector<uint8_t> body(vf.body_bytes());
  read_exact(in, vf.header_bytes, body);
  if (crc32_of(body) != vf.body_crc32) {
    throw ChecksumError("FBXC body checksum mismatch in '" + source.string() + "'");
  }
}

ViewReader::ViewReader(const std::filesystem::path& source, std::vector<std::string> wanted)
    : wanted_(std::move(wanted)) {
  uint64_t size = 0;
  in_ = open_stream(source, size);
  file_ = parse_header(in_, source, size);
  indices_ = resolve(file_.schema, wanted_);
  bytes_read_ = file_.header_bytes;
}

ColumnBatch ViewReader::read(std::optional<RowRange> rows) {
  check_range(file_, rows);
  std::vector<Column> cols;
  for (size_t c : indices_) cols.push_back(decode_column(in_, file_, c, rows, bytes_read_));
  return assemble(file_, std::move(cols));
}

}  // namespace featurebox::columnstore
