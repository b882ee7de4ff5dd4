#pragma once

// Shared primitives for the binary checkpoint containers. Fixed-width fields,
// little-endian as written by the host; checkpoints are an on-disk cache, not
// an interchange format.

#include <cstdint>
#include <istream>
#include <ostream>
#include <string>
#include <vector>

#include "dacdr/errors.hpp"
#include "dacdr/tensor.hpp"

namespace dacdr {
namespace bin {

inline void put_u32(std::ostream& f, std::uint32_t v) {
  f.write(reinterpret_cast<const char*>(&v), sizeof v);
}

inline std::uint32_t get_u32(std::istream& f) {
  std::uint32_t v = 0;
  f.read(reinterpret_cast<char*>(&v), sizeof v);
  if (!f) throw IngestError("checkpoint: truncated file");
  return v;
}

inline void put_string(std::ostream& f, const std::string& s) {
  put_u32(f, static_cast<std::uint32_t>(s.size()));
  f.write(s.data(), static_cast<std::streamsize>(s.size()));
}

inline std::string get_string(std::istream& f) {
  const std::uint32_t n = get_u32(f);
  if (n > (1u << 20)) throw IngestError("checkpoint: implausible string length");
  std::string s(n, '\0');
  f.read(s.data(), n);
  if (!f) throw IngestError("checkpoint: truncated string");
  return s;
}

inline void put_widths(std::ostream& f, const std::vector<int>& w) {
  put_u32(f, static_cast<std::uint32_t>(w.size()));
  for (int x : w) put_u32(f, static_cast<std::uint32_t>(x));
}

inline std::vector<int> get_widths(std::istream& f) {
  const std::uint32_t n = get_u32(f);
  if (n > 64) throw IngestError("checkpoint: implausible layer count");
  std::vector<int> w(n);
  for (auto& x : w) x = static_cast<int>(get_u32(f));
  return w;
}

inline void put_tensor(std::ostream& f, const Tensor& t) {
  put_u32(f, static_cast<std::uint32_t>(t.rows()));
  put_u32(f, static_cast<std::uint32_t>(t.cols()));
  f.write(reinterpret_cast<const char*>(t.data()),
          static_cast<std::streamsize>(t.size() * sizeof(double)));
}

inline Tensor get_tensor(std::istream& f) {
  const int rows = static_cast<int>(get_u32(f));
  const int cols = static_cast<int>(get_u32(f));
  if (rows < 0 || cols < 0 ||
      static_cast<long long>(rows) * cols > (1ll << 28))
    throw IngestError("checkpoint: implausible tensor shape");
  Tensor t(rows, cols);
  f.read(reinterpret_cast<char*>(t.data()),
         static_cast<std::streamsize>(t.size() * sizeof(double)));
  if (!f) throw IngestError("checkpoint: truncated tensor payload");
  return t;
}

}  // namespace bin
}  // namespace dacdr
