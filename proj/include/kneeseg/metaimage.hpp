#ifndef KNEESEG_METAIMAGE_HPP
#define KNEESEG_METAIMAGE_HPP

// MetaImage-style reader/writer: text header, raw little-endian payload,
// x-fastest voxel order. Only 3D FLOAT32 and UINT8 payloads are supported.

#include <algorithm>
#include <bit>
#include <charconv>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <system_error>
#include <variant>

#include "kneeseg/grid.hpp"

namespace kneeseg {

static_assert(std::endian::native == std::endian::little, "payloads are little-endian");

enum class ElementType { Float32, UInt8 };

struct ImageHeader {
  Geometry geometry;
  ElementType element_type = ElementType::Float32;
  std::string data_file;  // "LOCAL" or a path relative to the header
};

namespace detail {

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

template <class T>
std::vector<T> parse_numbers(const std::string& key, const std::string& value) {
  std::vector<T> out;
  std::istringstream in(value);
  std::string tok;
  while (in >> tok) {
    T v{};
    auto [p, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (ec != std::errc() || p != tok.data() + tok.size())
      throw Error("metaimage: malformed header value for " + key + ": '" + tok + "'");
    out.push_back(v);
  }
  return out;
}

inline std::string format_double(double v) {
  char buf[64];
  auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, p);
}

inline std::size_t element_size(ElementType t) { return t == ElementType::Float32 ? 4 : 1; }

}  // namespace detail

/// Parses the header and leaves `in` positioned at the first payload byte.
inline ImageHeader parse_header(std::istream& in) {
  ImageHeader h;
  std::map<std::string, std::string> kv;
  std::string line;
  bool have_data_file = false;
  while (std::getline(in, line)) {
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      if (detail::trim(line).empty()) continue;
      throw Error("metaimage: malformed header line '" + line + "'");
    }
    const std::string key = detail::trim(line.substr(0, eq));
    const std::string value = detail::trim(line.substr(eq + 1));
    kv[key] = value;
    if (key == "ElementDataFile") {
      have_data_file = true;
      break;
    }
  }
  if (!have_data_file) throw Error("metaimage: malformed header, missing ElementDataFile");

  auto need = [&](const char* key) -> const std::string& {
    auto it = kv.find(key);
    if (it == kv.end()) throw Error(std::string("metaimage: malformed header, missing ") + key);
    return it->second;
  };

  if (need("NDims") != "3") throw Error("metaimage: only NDims = 3 is supported");
  const auto dims = detail::parse_numbers<std::size_t>("DimSize", need("DimSize"));
  if (dims.size() != 3) throw Error("metaimage: malformed header, DimSize needs 3 values");
  h.geometry.dims = {dims[2], dims[1], dims[0]};

  for (const char* key : {"ElementSpacing", "ElementSize"}) {
    if (auto it = kv.find(key); it != kv.end()) {
      const auto s = detail::parse_numbers<double>(key, it->second);
      if (s.size() != 3) throw Error(std::string("metaimage: ") + key + " needs 3 values");
      h.geometry.spacing = {s[2], s[1], s[0]};
      break;
    }
  }
  for (const char* key : {"Offset", "Origin", "Position"}) {
    if (auto it = kv.find(key); it != kv.end()) {
      const auto o = detail::parse_numbers<double>(key, it->second);
      if (o.size() != 3) throw Error(std::string("metaimage: ") + key + " needs 3 values");
      h.geometry.origin = {o[2], o[1], o[0]};
      break;
    }
  }
  for (const char* key : {"BinaryDataByteOrderMSB", "ElementByteOrderMSB"})
    if (auto it = kv.find(key); it != kv.end() && (it->second == "True" || it->second == "true"))
      throw Error("metaimage: big-endian payloads are not supported");
  if (auto it = kv.find("CompressedData"); it != kv.end() && (it->second == "True" || it->second == "true"))
    throw Error("metaimage: compressed payloads are not supported");
  if (auto it = kv.find("ElementNumberOfChannels"); it != kv.end() && it->second != "1")
    throw Error("metaimage: multi-channel payloads are not supported");

  const std::string& et = need("ElementType");
  if (et == "FLOAT32" || et == "MET_FLOAT")
    h.element_type = ElementType::Float32;
  else if (et == "UINT8" || et == "MET_UCHAR")
    h.element_type = ElementType::UInt8;
  else
    throw Error("metaimage: unsupported element type " + et);

  h.data_file = kv["ElementDataFile"];
  h.geometry.validate();
  return h;
}

using AnyImage = std::variant<Volume, Grid<std::uint8_t>>;

inline AnyImage read_image(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("metaimage: cannot open " + path.string());
  const ImageHeader h = parse_header(in);

  std::ifstream raw_file;
  std::istream* payload = &in;
  if (h.data_file != "LOCAL") {
    const auto raw_path = path.parent_path() / h.data_file;
    raw_file.open(raw_path, std::ios::binary);
    if (!raw_file) throw Error("metaimage: cannot open payload " + raw_path.string());
    payload = &raw_file;
  }

  const std::size_t n = h.geometry.voxel_count();
  const std::size_t bytes = n * detail::element_size(h.element_type);
  std::vector<char> buf(bytes);
  payload->read(buf.data(), static_cast<std::streamsize>(bytes));
  const auto got = static_cast<std::size_t>(payload->gcount());
  const bool trailing = payload->peek() != std::char_traits<char>::eof();
  if (got != bytes || trailing)
    throw Error("metaimage: payload size mismatch in " + path.string() + " (expected " +
                std::to_string(bytes) + " bytes)");

  if (h.element_type == ElementType::Float32) {
    std::vector<float> v(n);
    std::memcpy(v.data(), buf.data(), bytes);
    Volume vol(h.geometry, std::move(v));
    require_finite(vol, "metaimage");
    return vol;
  }
  std::vector<std::uint8_t> v(n);
  std::memcpy(v.data(), buf.data(), bytes);
  return Grid<std::uint8_t>(h.geometry, std::move(v));
}

/// Intensity image; UINT8 payloads are widened to float.
inline Volume read_volume(const std::filesystem::path& path) {
  AnyImage img = read_image(path);
  if (auto* v = std::get_if<Volume>(&img)) return std::move(*v);
  const auto& g = std::get<Grid<std::uint8_t>>(img);
  Volume out(g.geometry());
  for (std::size_t i = 0; i < g.size(); ++i) out[i] = g[i];
  return out;
}

inline Grid<std::uint8_t> read_uint8(const std::filesystem::path& path) {
  AnyImage img = read_image(path);
  if (auto* g = std::get_if<Grid<std::uint8_t>>(&img)) return std::move(*g);
  throw Error("metaimage: expected UINT8 payload in " + path.string());
}

inline LabelMap read_labels(const std::filesystem::path& path, int num_classes) {
  return LabelMap(read_uint8(path), num_classes);
}

inline BinaryMask read_mask(const std::filesystem::path& path) {
  auto g = read_uint8(path);
  for (auto& v : g.values()) v = v != 0;
  return g;
}

namespace detail {

inline void write_payload(const std::filesystem::path& path, const Geometry& g, ElementType type,
                          const void* data) {
  const bool local = path.extension() == ".mha";
  const auto raw_path = std::filesystem::path(path).replace_extension(".raw");
  const auto& d = g.dims;
  const auto& s = g.spacing;
  const auto& o = g.origin;

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("metaimage: cannot write " + path.string());
  out << "ObjectType = Image\n"
      << "NDims = 3\n"
      << "BinaryData = True\n"
      << "BinaryDataByteOrderMSB = False\n"
      << "DimSize = " << d[2] << ' ' << d[1] << ' ' << d[0] << '\n'
      << "ElementSpacing = " << format_double(s[2]) << ' ' << format_double(s[1]) << ' '
      << format_double(s[0]) << '\n'
      << "Offset = " << format_double(o[2]) << ' ' << format_double(o[1]) << ' '
      << format_double(o[0]) << '\n'
      << "ElementType = " << (type == ElementType::Float32 ? "FLOAT32" : "UINT8") << '\n'
      << "ElementDataFile = " << (local ? std::string("LOCAL") : raw_path.filename().string())
      << '\n';
  const auto bytes = static_cast<std::streamsize>(g.voxel_count() * element_size(type));
  if (local) {
    out.write(static_cast<const char*>(data), bytes);
  } else {
    std::ofstream raw(raw_path, std::ios::binary | std::ios::trunc);
    if (!raw) throw Error("metaimage: cannot write " + raw_path.string());
    raw.write(static_cast<const char*>(data), bytes);
    if (!raw) throw Error("metaimage: write failed for " + raw_path.string());
  }
  if (!out) throw Error("metaimage: write failed for " + path.string());
}

}  // namespace detail

/// `.mha` embeds the payload; any other extension writes a sibling `.raw`.
inline void write_volume(const Volume& v, const std::filesystem::path& path) {
  require_finite(v, "write_volume");
  detail::write_payload(path, v.geometry(), ElementType::Float32, v.values().data());
}

inline void write_volume(const Grid<std::uint8_t>& v, const std::filesystem::path& path) {
  detail::write_payload(path, v.geometry(), ElementType::UInt8, v.values().data());
}

inline void write_volume(const LabelMap& m, const std::filesystem::path& path) {
  write_volume(m.grid(), path);
}

}  // namespace kneeseg

#endif  // KNEESEG_METAIMAGE_HPP
