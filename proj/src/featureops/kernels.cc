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

#include "featurebox/featureops/kernels.h"

#include <algorithm>
#include <charconv>
#include <cstring>
#include <memory>

#include "featurebox/common/error.h"

namespace featurebox::featureops {
namespace {

using Tokens = std::vector<std::vector<std::string>>;
using Signs = std::vector<std::vector<FeatureSign>>;

const std::string& param(const FunctionRef& ref, const std::string& key) {
  auto it = ref.params.find(key);
  if (it == ref.params.end()) {
    throw ConfigError("function '" + ref.function + "' requires parameter '" + key + "'");
  }
  return it->second;
}

template <typename T>
T parse_number(const FunctionRef& ref, const std::string& key, const std::string& text) {
  T v{};
  auto [p, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || p != text.data() + text.size()) {
    throw ConfigError("function '" + ref.function + "' parameter '" + key + "' = '" + text +
                      "' is not a valid number");
  }
  return v;
}

uint16_t slot_param(const FunctionRef& ref) {
  return parse_number<uint16_t>(ref, "slot", param(ref, "slot"));
}

void require_arity(const FunctionRef& ref, size_t min, size_t max) {
  if (ref.args.size() < min || ref.args.size() > max) {
    throw ConfigError("function '" + ref.function + "' takes " + std::to_string(min) +
                      (min == max ? "" : ".." + std::to_string(max)) + " argument(s), got " +
                      std::to_string(ref.args.size()));
  }
}

[[noreturn]] void bad_input(const char* fn, const FrameColumn& c) {
  throw SchemaError(std::string(fn) + ": unsupported input kind " +
                    std::string(frame_kind_name(c.kind())));
}

bool is_scalar(const FrameColumn& c) {
  return c.kind() == FrameKind::kInt64 || c.kind() == FrameKind::kFloat32 ||
         c.kind() == FrameKind::kText;
}

struct TokenRef {
  uint32_t offset;
  uint32_t length;
};

Kernel make_split(const FunctionRef& ref, const std::filesystem::path&) {
  require_arity(ref, 1, 1);
  std::string delim = ref.params.contains("delim") ? ref.params.at("delim") : ",";
  if (delim.size() != 1) throw ConfigError("split: delim must be exactly one byte");
  const char d = delim[0];
  return [d](KernelIO& io) {
    const FrameColumn& in = *io.inputs[0];
    if (in.kind() != FrameKind::kText) bad_input("split", in);
    const auto& text = std::get<std::vector<std::string>>(in.data);
    Tokens out(io.rows);
    if (io.device == nullptr) {
      for (size_t r = 0; r < io.rows; ++r) {
        if (!in.is_null(r)) out[r] = split_string(text[r], d);
      }
    } else {
      // Each lane allocates its token array from the pool, fills it, then
      // materializes the tokens into its own output slot.
      io.device->launch(
          io.rows,
          [&](size_t lane) -> uint64_t {
            return in.is_null(lane) ? 0 : count_tokens(text[lane], d) * sizeof(TokenRef);
          },
          [&](size_t lane, std::span<std::byte> mem) {
            if (in.is_null(lane)) return;
            const std::string& s = text[lane];
            auto* refs = reinterpret_cast<TokenRef*>(mem.data());
            size_t n = 0;
            uint32_t start = 0;
            for (uint32_t i = 0; i <= s.size(); ++i) {
              if (i == s.size() || s[i] == d) {
                TokenRef t{start, i - start};
                std::memcpy(refs + n++, &t, sizeof t);
                start = i + 1;
              }
            }
            auto& tokens = out[lane];
            tokens.reserve(n);
            for (size_t k = 0; k < n; ++k) {
              TokenRef t;
              std::memcpy(&t, refs + k, sizeof t);
              tokens.emplace_back(s, t.offset, t.length);
            }
          });
    }
    io.output->data = std::move(out);
    io.output->nulls.clear();
  };
}

Kernel make_hash_tokens(const FunctionRef& ref, const std::filesystem::path&) {
  require_arity(ref, 1, 1);
  const uint16_t slot = slot_param(ref);
  return [slot](KernelIO& io) {
    const FrameColumn& in = *io.inputs[0];
    Tokens single;
    const Tokens* tokens = nullptr;
    if (in.kind() == FrameKind::kTokens) {
      tokens = &std::get<Tokens>(in.data);
    } else if (in.kind() == FrameKind::kText) {
      single.resize(io.rows);
      for (size_t r = 0; r < io.rows; ++r) {
        if (!in.is_null(r)) single[r].push_back(std::get<std::vector<std::string>>(in.data)[r]);
      }
      tokens = &single;
    } else {
      bad_input("hash_tokens", in);
    }
    Signs out(io.rows);
    auto sign_of = [slot](const std::string& t) { return hash_combine({std::string_view(t)}, slot); };
    if (io.device == nullptr) {
      for (size_t r = 0; r < io.rows; ++r) {
        for (const auto& t : (*tokens)[r]) out[r].push_back(sign_of(t));
      }
    } else {
      io.device->launch(
          io.rows, [&](size_t lane) -> uint64_t { return (*tokens)[lane].size() * sizeof(uint64_t); },
          [&](size_t lane, std::span<std::byte> mem) {
            const auto& toks = (*tokens)[lane];
            for (size_t k = 0; k < toks.size(); ++k) {
              uint64_t s = sign_of(toks[k]).sign;
              std::memcpy(mem.data() + k * sizeof s, &s, sizeof s);
            }
            auto& dst = out[lane];
            dst.resize(toks.size());
            for (size_t k = 0; k < toks.size(); ++k) {
              dst[k].slot = slot;
              std::memcpy(&dst[k].sign, mem.data() + k * sizeof(uint64_t), sizeof(uint64_t));
            }
          });
    }
    io.output->data = std::move(out);
    io.output->nulls.clear();
  };
}

Kernel make_hash_combine(const FunctionRef& ref, const std::filesystem::path&) {
  require_arity(ref, 1, 16);
  const uint16_t slot = slot_param(ref);
  return [slot](KernelIO& io) {
    for (const auto* c : io.inputs) {
      if (!is_scalar(*c)) bad_input("hash_combine", *c);
    }
    Signs out(io.rows);
    auto row = [&](size_t r) {
      std::vector<std::string> texts;
      texts.reserve(io.inputs.size());
      for (const auto* c : io.inputs) {
        if (c->is_null(r)) return;
        texts.push_back(value_text(*c, r));
      }
      std::vector<std::string_view> views(texts.begin(), texts.end());
      out[r].push_back(hash_combine(views, slot));
    };
    if (io.device == nullptr) {
      for (size_t r = 0; r < io.rows; ++r) row(r);
    } else {
      io.device->launch(io.rows, row);
    }
    io.output->data = std::move(out);
    io.output->nulls.clear();
  };
}

Kernel make_cross(const FunctionRef& ref, const std::filesystem::path&) {
  require_arity(ref, 2, 2);
  const uint16_t slot = slot_param(ref);
  return [slot](KernelIO& io) {
    const FrameColumn& signs_in = *io.inputs[0];
    const FrameColumn& other = *io.inputs[1];
    if (signs_in.kind() != FrameKind::kSigns) bad_input("cross", signs_in);
    if (!is_scalar(other)) bad_input("cross", other);
    const auto& lists = std::get<Signs>(signs_in.data);
    Signs out(io.rows);
    auto crossed = [&](size_t r, const FeatureSign& s) {
      std::string left = std::to_string(s.slot) + ":" + std::to_string(s.sign);
      std::string right = value_text(other, r);
      return hash_combine({std::string_view(left), std::string_view(right)}, slot);
    };
    if (io.device == nullptr) {
      for (size_t r = 0; r < io.rows; ++r) {
        if (other.is_null(r)) continue;
        for (const auto& s : lists[r]) out[r].push_back(crossed(r, s));
      }
    } else {
      io.device->launch(
          io.rows,
          [&](size_t lane) -> uint64_t {
            return other.is_null(lane) ? 0 : lists[lane].size() * sizeof(uint64_t);
          },
          [&](size_t lane, std::span<std::byte> mem) {
            if (other.is_null(lane)) return;
            const auto& src = lists[lane];
            for (size_t k = 0; k < src.size(); ++k) {
              uint64_t v = crossed(lane, src[k]).sign;
              std::memcpy(mem.data() + k * sizeof v, &v, sizeof v);
            }
            auto& dst = out[lane];
            dst.resize(src.size());
            for (size_t k = 0; k < src.size(); ++k) {
              dst[k].slot = slot;
              std::memcpy(&dst[k].sign, mem.data() + k * sizeof(uint64_t), sizeof(uint64_t));
            }
          });
    }
    io.output->data = std::move(out);
    io.output->nulls.clear();
  };
}

Kernel make_dict_lookup(const FunctionRef& ref, const std::filesystem::path& base_dir) {
  require_arity(ref, 1, 1);
  std::filesystem::path path = param(ref, "table");
  if (path.is_relative()) path = base_dir / path;
  uint64_t def = ref.params.contains("default")
                     ? parse_number<uint64_t>(ref, "default", ref.params.at("default"))
                     : 0;
  auto table = std::make_shared<const DictTable>(DictTable::load(path, def));
  return [table](KernelIO& io) {
    const FrameColumn& in = *io.inputs[0];
    if (!is_scalar(in)) bad_input("dict_lookup", in);
    std::vector<int64_t> out(io.rows);
    std::vector<bool> nulls(in.nulls);
    auto row = [&](size_t r) {
      if (!in.is_null(r)) out[r] = static_cast<int64_t>(table->lookup(value_text(in, r)));
    };
    if (io.device == nullptr) {
      for (size_t r = 0; r < io.rows; ++r) row(r);
    } else {
      io.device->launch(io.rows, row);
    }
    io.output->data = std::move(out);
    io.output->nulls = std::move(nulls);
  };
}

Kernel make_bucketize(const FunctionRef& ref, const std::filesystem::path&) {
  require_arity(ref, 1, 1);
  std::vector<double> bounds;
  const std::string& text = param(ref, "boundaries");
  size_t start = 0;
  while (start <= text.size()) {
    size_t comma = text.find(',', start);
    if (comma == std::string::npos) comma = text.size();
    bounds.push_back(parse_number<double>(ref, "boundaries", text.substr(start, comma - start)));
    start = comma + 1;
  }
  if (!std::is_sorted(bounds.begin(), bounds.end())) {
    throw ConfigError("bucketize: boundaries must be ascending");
  }
  return [bounds](KernelIO& io) {
    const FrameColumn& in = *io.inputs[0];
    if (in.kind() != FrameKind::kInt64 && in.kind() != FrameKind::kFloat32) bad_input("bucketize", in);
    std::vector<int64_t> out(io.rows);
    auto row = [&](size_t r) {
      if (in.is_null(r)) return;
      double v = in.kind() == FrameKind::kInt64
                     ? static_cast<double>(std::get<std::vector<int64_t>>(in.data)[r])
                     : static_cast<double>(std::get<std::vector<float>>(in.data)[r]);
      out[r] = std::upper_bound(bounds.begin(), bounds.end(), v) - bounds.begin();
    };
    if (io.device == nullptr) {
      for (size_t r = 0; r < io.rows; ++r) row(r);
    } else {
      io.device->launch(io.rows, row);
    }
    io.output->data = std::move(out);
    io.output->nulls = in.nulls;
  };
}

FunctionLibrary make_builtin() {
  FunctionLibrary lib;
  lib.add("split", make_split);
  lib.add("hash_tokens", make_hash_tokens);
  lib.add("hash_combine", make_hash_combine);
  lib.add("cross", make_cross);
  lib.add("dict_lookup", make_dict_lookup);
  lib.add("bucketize", make_bucketize);
  return lib;
}

}  // namespace

const FunctionLibrary& FunctionLibrary::builtin() {
  static const FunctionLibrary lib = make_builtin();
  return lib;
}

void FunctionLibrary::add(const std::string& name, Factory factory) {
  factories_[name] = std::move(factory);
}

Kernel FunctionLibrary::bind(const FunctionRef& ref, const std::filesystem::path& base_dir) const {
  auto it = factories_.find(ref.function);
  if (it == factories_.end()) throw ConfigError("unknown function '" + ref.function + "'");
  return it->second(ref, base_dir);
}

std::optional<uint64_t> intrinsic_footprint(const FunctionRef& ref,
                                            const std::filesystem::path& base_dir) {
  if (ref.function != "dict_lookup") return std::nullopt;
  std::filesystem::path path = param(ref, "table");
  if (path.is_relative()) path = base_dir / path;
  std::error_code ec;
  auto size = std::filesystem::file_size(path, ec);
  if (ec) throw IoError("cannot read dictionary table '" + path.string() + "'");
  return std::max<uint64_t>(size, 1);
}

}  // namespace featurebox::featureops
