#pragma once

// Field snapshot files.
//
//   EUL2D v1 scalar|vector N=<N> h=<h>\n
//   <payload>
//
// The payload is row-major float64 (y slow, x fast), u1 before u2 for vector
// fields, either raw little-endian binary or CSV with one grid row per line.
// Numbers are written in shortest round-trip form, so both encodings
// reproduce the values bit for bit. Readers tell the encodings apart by size
// and character set. Scalars come back with zero Dirichlet extension and
// vectors as tangent fields.

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>
#include <sstream>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "eul2d/errors.hpp"
#include "eul2d/field.hpp"
#include "eul2d/format.hpp"

namespace eul2d {

enum class FieldEncoding { binary, csv };

class FieldFormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace detail {

inline std::string field_header(const char* kind, const Grid& g) {
  return std::string("EUL2D v1 ") + kind + " N=" + std::to_string(g.n()) + " h=" + format_double(g.h()) + "\n";
}

inline void append_binary(std::string& out, std::span<const double> values) {
  for (double v : values) {
    std::uint64_t bits = std::bit_cast<std::uint64_t>(v);
    if constexpr (std::endian::native == std::endian::big) bits = __builtin_bswap64(bits);
    char bytes[8];
    std::memcpy(bytes, &bits, 8);
    out.append(bytes, 8);
  }
}

inline void append_csv(std::string& out, const Grid& g, std::span<const double> values) {
  const int n = g.n();
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      if (i > 0) out.push_back(',');
      out += format_double(values[g.index(i, j)]);
    }
    out.push_back('\n');
  }
}

inline std::string encode_arrays(const char* kind, const Grid& g, std::initializer_list<std::span<const double>> arrays,
                                 FieldEncoding enc) {
  std::string out = field_header(kind, g);
  for (auto a : arrays) {
    if (enc == FieldEncoding::binary) {
      append_binary(out, a);
    } else {
      append_csv(out, g, a);
    }
  }
  return out;
}

struct DecodedArrays {
  bool vector = false;
  int n = 0;
  std::vector<double> values;
};

inline DecodedArrays decode_arrays(const std::string& text) {
  const auto eol = text.find('\n');
  if (eol == std::string::npos) throw FieldFormatError("field file: missing header line");
  std::istringstream header(text.substr(0, eol));
  std::string magic, version, kind, n_tok, h_tok;
  header >> magic >> version >> kind >> n_tok >> h_tok;
  if (magic != "EUL2D" || version != "v1") throw FieldFormatError("field file: bad magic or version");
  if (kind != "scalar" && kind != "vector") throw FieldFormatError("field file: unknown kind '" + kind + "'");
  if (n_tok.rfind("N=", 0) != 0 || h_tok.rfind("h=", 0) != 0) throw FieldFormatError("field file: bad header");
  const auto n = parse_integer<int>(std::string_view(n_tok).substr(2));
  const auto h = parse_double(std::string_view(h_tok).substr(2));
  if (!n || !h) throw FieldFormatError("field file: unparsable N or h");
  const Grid g(*n);
  if (g.h() != *h) throw FieldFormatError("field file: h does not match 1/(N+1)");

  DecodedArrays out;
  out.vector = kind == "vector";
  out.n = *n;
  const std::size_t count = g.size() * (out.vector ? 2 : 1);
  const std::string_view payload(text.data() + eol + 1, text.size() - eol - 1);

  const bool textual = payload.find_first_not_of("0123456789+-.eEinfa,\n\r") == std::string_view::npos;
  if (payload.size() == count * 8 && !textual) {
    out.values.resize(count);
    for (std::size_t k = 0; k < count; ++k) {
      std::uint64_t bits = 0;
      std::memcpy(&bits, payload.data() + 8 * k, 8);
      if constexpr (std::endian::native == std::endian::big) bits = __builtin_bswap64(bits);
      out.values[k] = std::bit_cast<double>(bits);
    }
    return out;
  }
  out.values.reserve(count);
  std::size_t pos = 0;
  while (pos < payload.size()) {
    const auto stop = payload.find_first_of(",\n", pos);
    const auto tok = trim(payload.substr(pos, stop == std::string_view::npos ? std::string_view::npos : stop - pos));
    if (!tok.empty()) {
      const auto v = parse_double(tok);
      if (!v) throw FieldFormatError("field file: bad number '" + std::string(tok) + "'");
      out.values.push_back(*v);
    }
    if (stop == std::string_view::npos) break;
    pos = stop + 1;
  }
  if (out.values.size() != count) {
    throw FieldFormatError("field file: expected " + std::to_string(count) + " values, found " +
                           std::to_string(out.values.size()));
  }
  return out;
}

inline void write_text_file(const std::string& path, const std::string& data) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot open '" + path + "' for writing");
  os.write(data.data(), static_cast<std::streamsize>(data.size()));
  if (!os) throw IoError("write failed for '" + path + "'");
}

inline std::string read_text_file(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open '" + path + "'");
  return std::string(std::istreambuf_iterator<char>(is), std::istreambuf_iterator<char>());
}

}  // namespace detail

inline std::string encode_field(const ScalarField& f, FieldEncoding enc) {
  return detail::encode_arrays("scalar", f.grid(), {f.values()}, enc);
}

inline std::string encode_field(const VectorField& u, FieldEncoding enc) {
  return detail::encode_arrays("vector", u.grid(), {u.u1().values(), u.u2().values()}, enc);
}

using AnyField = std::variant<ScalarField, VectorField>;

inline AnyField decode_field(const std::string& text) {
  auto d = detail::decode_arrays(text);
  const Grid g(d.n);
  if (!d.vector) return ScalarField(g, std::move(d.values));
  const auto half = static_cast<std::ptrdiff_t>(g.size());
  std::vector<double> a(d.values.begin(), d.values.begin() + half);
  std::vector<double> b(d.values.begin() + half, d.values.end());
  return VectorField(ScalarField(g, std::move(a)), ScalarField(g, std::move(b)), true);
}

template <typename Field>
void write_field(const std::string& path, const Field& f, FieldEncoding enc) {
  detail::write_text_file(path, encode_field(f, enc));
}

inline AnyField read_field(const std::string& path) { return decode_field(detail::read_text_file(path)); }

inline ScalarField read_scalar_field(const std::string& path) {
  auto any = read_field(path);
  if (!std::holds_alternative<ScalarField>(any)) throw FieldFormatError("'" + path + "' holds a vector field");
  return std::get<ScalarField>(std::move(any));
}

}  // namespace eul2d
