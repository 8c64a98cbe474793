#pragma once

// Tensor file formats.
//
// Binary (TNSR): the 4 magic bytes "TNSR", u32 order d, d x u64 dims, then
// N x f64 values in column-major order. Everything little-endian.
//
// CSV: first line "d,n_1,...,n_d", then one value per line in column-major order.

#include <array>
#include <bit>
#include <charconv>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iterator>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "stotiht/tensor.hpp"

namespace stotiht {

/// Could not open, read or write a file.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed tensor file; offset() is the byte position of the problem.
class TensorFormatError : public std::runtime_error {
 public:
  TensorFormatError(const std::string& what, std::size_t offset)
      : std::runtime_error(what + " at byte offset " + std::to_string(offset)), offset_(offset) {}
  std::size_t offset() const noexcept { return offset_; }

 private:
  std::size_t offset_;
};

/// Shortest text that reads back to the same double (17 significant digits).
inline std::string format_double(double v) {
  std::array<char, 32> buf{};
  std::snprintf(buf.data(), buf.size(), "%.17g", v);
  return buf.data();
}

namespace detail {

template <typename UInt>
void put_le(std::string& out, UInt v) {
  for (std::size_t i = 0; i < sizeof(UInt); ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xffu));
}

template <typename UInt>
UInt get_le(std::string_view bytes, std::size_t& pos, const char* what) {
  if (bytes.size() - pos < sizeof(UInt))
    throw TensorFormatError(std::string("truncated TNSR file while reading ") + what, pos);
  UInt v = 0;
  for (std::size_t i = 0; i < sizeof(UInt); ++i)
    v |= static_cast<UInt>(static_cast<unsigned char>(bytes[pos + i])) << (8 * i);
  pos += sizeof(UInt);
  return v;
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "' for reading");
  std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (in.bad()) throw IoError("error while reading '" + path + "'");
  return bytes;
}

inline void write_file(const std::string& path, std::string_view bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("error while writing '" + path + "'");
}

}  // namespace detail

inline constexpr std::string_view kTnsrMagic = "TNSR";

inline std::string encode_tnsr(const DenseTensor& x) {
  std::string out(kTnsrMagic);
  out.reserve(4 + 4 + 8 * x.order() + 8 * x.numel());
  detail::put_le<std::uint32_t>(out, static_cast<std::uint32_t>(x.order()));
  for (std::size_t n : x.shape().dims()) detail::put_le<std::uint64_t>(out, n);
  for (Index i = 0; i < x.data().size(); ++i) detail::put_le(out, std::bit_cast<std::uint64_t>(x.data()[i]));
  return out;
}

inline DenseTensor decode_tnsr(std::string_view bytes) {
  if (bytes.substr(0, 4) != kTnsrMagic) throw TensorFormatError("missing TNSR magic", 0);
  std::size_t pos = 4;
  const auto d = detail::get_le<std::uint32_t>(bytes, pos, "order");
  if (d == 0) throw TensorFormatError("tensor order must be >= 1", 4);
  std::vector<std::size_t> dims(d);
  for (auto& n : dims) {
    const std::size_t at = pos;
    n = detail::get_le<std::uint64_t>(bytes, pos, "dimension");
    if (n == 0) throw TensorFormatError("zero dimension", at);
  }
  const Shape shape = [&] {
    try {
      return Shape(dims);
    } catch (const std::invalid_argument& e) {
      throw TensorFormatError(e.what(), 8);
    }
  }();
  const std::size_t need = 8 * shape.numel();
  if (bytes.size() - pos < need)
    throw TensorFormatError("truncated TNSR file: expected " + std::to_string(shape.numel()) + " values",
                            bytes.size());
  Vector data(static_cast<Index>(shape.numel()));
  for (Index i = 0; i < data.size(); ++i) {
    const std::size_t at = pos;
    data[i] = std::bit_cast<double>(detail::get_le<std::uint64_t>(bytes, pos, "value"));
    if (!std::isfinite(data[i])) throw TensorFormatError("non-finite value", at);
  }
  if (pos != bytes.size()) throw TensorFormatError("trailing bytes after tensor data", pos);
  return DenseTensor(shape, std::move(data));
}

inline std::string encode_tensor_csv(const DenseTensor& x) {
  std::string out = std::to_string(x.order());
  for (std::size_t n : x.shape().dims()) out += "," + std::to_string(n);
  out += '\n';
  for (Index i = 0; i < x.data().size(); ++i) {
    out += format_double(x.data()[i]);
    out += '\n';
  }
  return out;
}

inline DenseTensor decode_tensor_csv(std::string_view text) {
  std::size_t pos = 0;
  auto next_line = [&]() -> std::pair<std::string_view, std::size_t> {
    const std::size_t start = pos;
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    pos = end < text.size() ? end + 1 : end;
    std::string_view line = text.substr(start, end - start);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    return {line, start};
  };
  auto parse_size = [](std::string_view field, std::size_t at) {
    std::size_t v = 0;
    auto [p, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
    if (ec != std::errc() || p != field.data() + field.size() || field.empty())
      throw TensorFormatError("invalid integer '" + std::string(field) + "' in header", at);
    return v;
  };

  auto [header, header_at] = next_line();
  std::vector<std::size_t> fields;
  for (std::size_t start = 0;;) {
    const std::size_t comma = header.find(',', start);
    const auto field = header.substr(start, comma == std::string_view::npos ? header.size() - start : comma - start);
    fields.push_back(parse_size(field, header_at + start));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  if (fields[0] == 0 || fields.size() != fields[0] + 1)
    throw TensorFormatError("header must be 'd,n_1,...,n_d'", header_at);
  const Shape shape = [&] {
    try {
      return Shape(std::vector<std::size_t>(fields.begin() + 1, fields.end()));
    } catch (const std::invalid_argument& e) {
      throw TensorFormatError(e.what(), header_at);
    }
  }();

  Vector data(static_cast<Index>(shape.numel()));
  for (Index i = 0; i < data.size(); ++i) {
    if (pos >= text.size())
      throw TensorFormatError("expected " + std::to_string(shape.numel()) + " values, found " + std::to_string(i),
                              text.size());
    auto [line, at] = next_line();
    double v = 0.0;
    auto [p, ec] = std::from_chars(line.data(), line.data() + line.size(), v);
    if (ec != std::errc() || p != line.data() + line.size() || line.empty() || !std::isfinite(v))
      throw TensorFormatError("invalid value '" + std::string(line) + "'", at);
    data[i] = v;
  }
  while (pos < text.size()) {
    auto [line, at] = next_line();
    if (!line.empty()) throw TensorFormatError("trailing content after tensor values", at);
  }
  return DenseTensor(shape, std::move(data));
}

inline void write_tnsr(const std::string& path, const DenseTensor& x) { detail::write_file(path, encode_tnsr(x)); }
inline void write_tensor_csv(const std::string& path, const DenseTensor& x) {
  detail::write_file(path, encode_tensor_csv(x));
}

/// Reads either format; TNSR is recognised by its magic bytes.
inline DenseTensor load_tensor(const std::string& path) {
  const std::string bytes = detail::read_file(path);
  if (std::string_view(bytes).substr(0, 4) == kTnsrMagic) return decode_tnsr(bytes);
  return decode_tensor_csv(bytes);
}

/// Writes CSV when the path ends in ".csv", TNSR otherwise.
inline void save_tensor(const std::string& path, const DenseTensor& x) {
  if (path.size() >= 4 && path.compare(path.size() - 4, 4, ".csv") == 0)
    write_tensor_csv(path, x);
  else
    write_tnsr(path, x);
}

}  // namespace stotiht
