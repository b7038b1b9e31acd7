// Copyright 2026 The xsep Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
#pragma once

// File formats:
//
// PGM: binary P5, 8-bit (maxval < 256) or 16-bit big-endian samples.
// Intensities map linearly to [0, 1] (value / maxval). Writers emit the
// canonical header "P5\n<width> <height>\n<maxval>\n".
//
// Dictionary file, all integers little-endian:
//   "CDL1"                 4 bytes
//   scale count L          uint32
//   per scale:
//     rows, cols of psi_c  uint32, uint32
//     rows, cols of phi_c  uint32, uint32
//     rows, cols of phi    uint32, uint32
//     psi_c, phi_c, phi    row-major IEEE-754 binary64, little-endian
//
// Every writer goes through a temporary file and a rename, so a failed run
// never leaves a partial output behind.

#include <algorithm>
#include <bit>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "xsep/dictlearn.hpp"
#include "xsep/image.hpp"
#include "xsep/numerics.hpp"

namespace xsep {

class IoError : public Error {
 public:
  using Error::Error;
};

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

/// Writes `bytes` to path via a sibling temporary file and rename.
inline void write_file_atomic(const std::filesystem::path& path, const std::string& bytes) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + tmp.string());
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    out.flush();
    if (!out) {
      out.close();
      std::error_code ec;
      std::filesystem::remove(tmp, ec);
      throw IoError("write failed for " + path.string());
    }
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw IoError("cannot move output into place at " + path.string());
  }
}

// ---------------------------------------------------------------------------
// PGM

struct PgmImage {
  Image image;
  unsigned maxval = 65535;
};

inline PgmImage decode_pgm(const std::string& bytes, const std::string& name = "<pgm>") {
  std::size_t pos = 0;
  auto fail = [&](const std::string& why) -> IoError { return IoError(name + ": " + why); };
  auto skip_space = [&] {
    while (pos < bytes.size()) {
      if (bytes[pos] == '#') {
        while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
      } else if (std::isspace(static_cast<unsigned char>(bytes[pos]))) {
        ++pos;
      } else {
        break;
      }
    }
  };
  auto read_uint = [&]() -> unsigned long {
    skip_space();
    if (pos >= bytes.size() || !std::isdigit(static_cast<unsigned char>(bytes[pos])))
      throw fail("malformed header");
    unsigned long v = 0;
    while (pos < bytes.size() && std::isdigit(static_cast<unsigned char>(bytes[pos]))) {
      v = v * 10 + static_cast<unsigned long>(bytes[pos++] - '0');
      if (v > 1u << 30) throw fail("header value too large");
    }
    return v;
  };
  if (bytes.size() < 2 || bytes[0] != 'P' || bytes[1] != '5') throw fail("not a binary PGM (P5)");
  pos = 2;
  const unsigned long w = read_uint();
  const unsigned long h = read_uint();
  const unsigned long maxval = read_uint();
  if (w == 0 || h == 0) throw fail("empty image");
  if (maxval == 0 || maxval > 65535) throw fail("maxval must be in 1..65535");
  if (pos >= bytes.size() || !std::isspace(static_cast<unsigned char>(bytes[pos])))
    throw fail("missing whitespace after maxval");
  ++pos;
  const std::size_t bps = maxval < 256 ? 1 : 2;
  if (bytes.size() - pos < w * h * bps) throw fail("truncated pixel data");
  PgmImage out{Image(h, w), static_cast<unsigned>(maxval)};
  const auto* data = reinterpret_cast<const unsigned char*>(bytes.data() + pos);
  const double scale = 1.0 / static_cast<double>(maxval);
  for (std::size_t i = 0; i < w * h; ++i) {
    const unsigned v = bps == 1 ? data[i] : (static_cast<unsigned>(data[2 * i]) << 8) | data[2 * i + 1];
    if (v > maxval) throw fail("sample exceeds maxval");
    out.image.pixels()[i] = static_cast<double>(v) * scale;
  }
  return out;
}

/// Quantizes to maxval levels; values outside [0, 1] are clamped.
inline std::string encode_pgm(const Image& img, unsigned maxval = 65535) {
  require(maxval >= 1 && maxval <= 65535, "encode_pgm: maxval must be in 1..65535");
  require(!img.empty(), "encode_pgm: empty image");
  std::string out = "P5\n" + std::to_string(img.width()) + " " + std::to_string(img.height()) +
                    "\n" + std::to_string(maxval) + "\n";
  const bool wide = maxval >= 256;
  out.reserve(out.size() + img.size() * (wide ? 2 : 1));
  for (double v : img.pixels()) {
    const double c = std::clamp(std::isfinite(v) ? v : 0.0, 0.0, 1.0);
    const auto q = static_cast<unsigned>(std::lround(c * maxval));
    if (wide) out.push_back(static_cast<char>(q >> 8));
    out.push_back(static_cast<char>(q & 0xff));
  }
  return out;
}

inline PgmImage read_pgm(const std::filesystem::path& path) {
  return decode_pgm(read_file(path), path.string());
}

inline void write_pgm(const std::filesystem::path& path, const Image& img, unsigned maxval = 65535) {
  write_file_atomic(path, encode_pgm(img, maxval));
}

// ---------------------------------------------------------------------------
// Dictionary file

namespace detail {

inline void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

inline void put_f64(std::string& out, double d) {
  const auto bits = std::bit_cast<std::uint64_t>(d);
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((bits >> (8 * i)) & 0xff));
}

class ByteReader {
 public:
  ByteReader(const std::string& bytes, std::string name) : bytes_(bytes), name_(std::move(name)) {}

  std::uint64_t uint(int width) {
    need(static_cast<std::size_t>(width));
    std::uint64_t v = 0;
    for (int i = 0; i < width; ++i)
      v |= static_cast<std::uint64_t>(static_cast<unsigned char>(bytes_[pos_++])) << (8 * i);
    return v;
  }
  double f64() { return std::bit_cast<double>(uint(8)); }
  std::string raw(std::size_t n) {
    need(n);
    std::string s = bytes_.substr(pos_, n);
    pos_ += n;
    return s;
  }
  std::size_t remaining() const { return bytes_.size() - pos_; }
  IoError error(const std::string& why) const { return IoError(name_ + ": " + why); }

 private:
  void need(std::size_t n) const {
    if (bytes_.size() - pos_ < n) throw error("truncated dictionary file");
  }
  const std::string& bytes_;
  std::string name_;
  std::size_t pos_ = 0;
};

}  // namespace detail

inline std::string encode_dict_file(const std::vector<CoupledDictionaryTriple>& scales) {
  std::string out = "CDL1";
  detail::put_u32(out, static_cast<std::uint32_t>(scales.size()));
  for (const auto& t : scales) {
    for (const Mat* m : {&t.psi_c, &t.phi_c, &t.phi}) {
      detail::put_u32(out, static_cast<std::uint32_t>(m->rows()));
      detail::put_u32(out, static_cast<std::uint32_t>(m->cols()));
    }
    for (const Mat* m : {&t.psi_c, &t.phi_c, &t.phi})
      for (Eigen::Index r = 0; r < m->rows(); ++r)
        for (Eigen::Index c = 0; c < m->cols(); ++c) detail::put_f64(out, (*m)(r, c));
  }
  return out;
}

/// Parses a dictionary file; sizes must match the payload exactly and every
/// column must be unit-norm within 1e-8.
inline std::vector<CoupledDictionaryTriple> decode_dict_file(const std::string& bytes,
                                                             const std::string& name = "<dict>") {
  detail::ByteReader rd(bytes, name);
  if (rd.raw(4) != "CDL1") throw rd.error("bad magic, expected CDL1");
  const auto count = rd.uint(4);
  if (count == 0) throw rd.error("no scales");
  std::vector<CoupledDictionaryTriple> out;
  for (std::uint64_t l = 0; l < count; ++l) {
    std::uint64_t dims[3][2];
    std::uint64_t payload = 0;
    for (auto& d : dims) {
      d[0] = rd.uint(4);
      d[1] = rd.uint(4);
      payload += d[0] * d[1] * 8;
    }
    if (payload > rd.remaining()) throw rd.error("declared sizes exceed payload");
    CoupledDictionaryTriple t;
    t.scale = static_cast<std::size_t>(l + 1);
    Mat* mats[3] = {&t.psi_c, &t.phi_c, &t.phi};
    for (int k = 0; k < 3; ++k) {
      mats[k]->resize(static_cast<Eigen::Index>(dims[k][0]), static_cast<Eigen::Index>(dims[k][1]));
      for (Eigen::Index r = 0; r < mats[k]->rows(); ++r)
        for (Eigen::Index c = 0; c < mats[k]->cols(); ++c) (*mats[k])(r, c) = rd.f64();
    }
    try {
      t.validate(1e-8);
    } catch (const ContractViolation& e) {
      throw rd.error("scale " + std::to_string(l + 1) + ": " + e.what());
    }
    out.push_back(std::move(t));
  }
  if (rd.remaining() != 0) throw rd.error("trailing bytes after payload");
  return out;
}

inline std::vector<CoupledDictionaryTriple> read_dict_file(const std::filesystem::path& path) {
  return decode_dict_file(read_file(path), path.string());
}

inline void write_dict_file(const std::filesystem::path& path,
                            const std::vector<CoupledDictionaryTriple>& scales) {
  write_file_atomic(path, encode_dict_file(scales));
}

}  // namespace xsep
