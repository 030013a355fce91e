// Copyright 2026 The Spectra Authors
// SPDX-License-Identifier: Apache-2.0

#include "spectra/io.hpp"

#include <png.h>

#include <algorithm>
#include <bit>
#include <cctype>
#include <charconv>
#include <cmath>
#include <csetjmp>
#include <cstring>
#include <fstream>
#include <iterator>
#include <map>
#include <sstream>

#include <json.hpp>

#include "spectra/error.hpp"

namespace spectra {

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;

// ---------------------------------------------------------------------------
// Plain files

std::vector<std::uint8_t> readFileBytes(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::kIo, "input not found: " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void writeFileBytes(const fs::path& path, std::span<const std::uint8_t> bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorCode::kIo, "cannot open for writing: " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) fail(ErrorCode::kIo, "write failed: " + path.string());
}

namespace {

std::string readText(const fs::path& path) {
  const auto bytes = readFileBytes(path);
  return {bytes.begin(), bytes.end()};
}

// ---------------------------------------------------------------------------
// Cube header

std::string trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return std::string(s);
}

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

long parseInteger(const std::string& key, const std::string& value) {
  long out = 0;
  const auto* end = value.data() + value.size();
  const auto [ptr, ec] = std::from_chars(value.data(), end, out);
  if (ec != std::errc() || ptr != end) {
    fail(ErrorCode::kFormat, "cube header: '" + key + "' is not an integer: " + value);
  }
  return out;
}

std::vector<double> parseList(const std::string& value) {
  std::string body = value;
  std::erase(body, '{');
  std::erase(body, '}');
  std::replace(body.begin(), body.end(), ',', ' ');
  std::istringstream in(body);
  std::vector<double> out;
  double v = 0.0;
  while (in >> v) out.push_back(v);
  if (!in.eof()) fail(ErrorCode::kFormat, "cube header: malformed numeric list");
  return out;
}

}  // namespace

CubeHeader parseCubeHeader(std::string_view text) {
  std::map<std::string, std::string> entries;
  std::istringstream in{std::string(text)};
  std::string line;
  while (std::getline(in, line)) {
    const auto eq = line.find('=');
    if (eq == std::string::npos) continue;
    std::string key = lower(trim(std::string_view(line).substr(0, eq)));
    std::string value = trim(std::string_view(line).substr(eq + 1));
    // Brace lists may continue over several lines.
    if (value.find('{') != std::string::npos) {
      while (value.find('}') == std::string::npos && std::getline(in, line)) {
        value += " " + trim(line);
      }
      if (value.find('}') == std::string::npos) {
        fail(ErrorCode::kFormat, "cube header: unterminated list for '" + key + "'");
      }
    }
    entries[key] = value;
  }

  auto require = [&](const std::string& key) -> const std::string& {
    const auto it = entries.find(key);
    if (it == entries.end()) fail(ErrorCode::kFormat, "cube header: missing '" + key + "'");
    return it->second;
  };
  auto dimension = [&](const std::string& key) {
    const long v = parseInteger(key, require(key));
    if (v <= 0 || v > (1L << 30)) {
      fail(ErrorCode::kFormat, "cube header: '" + key + "' must be positive, got " +
                                   std::to_string(v));
    }
    return static_cast<int>(v);
  };

  CubeHeader h;
  h.samples = dimension("samples");
  h.lines = dimension("lines");
  h.bands = dimension("bands");

  if (const auto it = entries.find("interleave"); it != entries.end()) {
    const std::string v = lower(it->second);
    if (v == "bsq") h.interleave = Interleave::kBsq;
    else if (v == "bil") h.interleave = Interleave::kBil;
    else if (v == "bip") h.interleave = Interleave::kBip;
    else fail(ErrorCode::kFormat, "cube header: unknown interleave '" + it->second + "'");
  }

  switch (parseInteger("data type", require("data type"))) {
    case 1: h.dataType = DataType::kUInt8; break;
    case 2: h.dataType = DataType::kUInt16; break;
    case 4: h.dataType = DataType::kFloat32; break;
    default:
      fail(ErrorCode::kFormat, "cube header: unsupported data type " + entries["data type"]);
  }

  if (const auto it = entries.find("byte order"); it != entries.end()) {
    const long order = parseInteger("byte order", it->second);
    if (order != 0 && order != 1) fail(ErrorCode::kFormat, "cube header: byte order must be 0 or 1");
    h.byteOrder = order == 0 ? ByteOrder::kLittle : ByteOrder::kBig;
  }
  if (const auto it = entries.find("wavelength"); it != entries.end()) {
    h.wavelengths = parseList(it->second);
  }
  if (const auto it = entries.find("header offset"); it != entries.end()) {
    const long offset = parseInteger("header offset", it->second);
    if (offset < 0) fail(ErrorCode::kFormat, "cube header: header offset must be >= 0");
    h.headerOffset = static_cast<std::size_t>(offset);
  }
  if (const auto it = entries.find("data file"); it != entries.end()) {
    h.dataFile = it->second;
  }
  return h;
}

std::string formatCubeHeader(const CubeHeader& h) {
  std::ostringstream out;
  out << "ENVI\n"
      << "samples = " << h.samples << "\n"
      << "lines = " << h.lines << "\n"
      << "bands = " << h.bands << "\n"
      << "header offset = " << h.headerOffset << "\n"
      << "data type = " << static_cast<int>(h.dataType) << "\n"
      << "interleave = "
      << (h.interleave == Interleave::kBsq ? "bsq" : h.interleave == Interleave::kBil ? "bil" : "bip")
      << "\n"
      << "byte order = " << static_cast<int>(h.byteOrder) << "\n";
  if (!h.dataFile.empty()) out << "data file = " << h.dataFile << "\n";
  if (!h.wavelengths.empty()) {
    out.precision(17);
    out << "wavelength = {";
    for (std::size_t i = 0; i < h.wavelengths.size(); ++i) {
      out << (i ? ", " : "") << h.wavelengths[i];
    }
    out << "}\n";
  }
  return out.str();
}

namespace {

bool hostIsLittle() { return std::endian::native == std::endian::little; }

double readSample(const std::uint8_t* p, DataType type, bool swap) {
  switch (type) {
    case DataType::kUInt8:
      return p[0];
    case DataType::kUInt16: {
      std::uint16_t v;
      std::memcpy(&v, p, 2);
      if (swap) v = static_cast<std::uint16_t>((v >> 8) | (v << 8));
      return v;
    }
    case DataType::kFloat32: {
      std::uint32_t bits;
      std::memcpy(&bits, p, 4);
      if (swap) bits = __builtin_bswap32(bits);
      float f;
      std::memcpy(&f, &bits, 4);
      return f;
    }
  }
  return 0.0;
}

}  // namespace

SpectralCube decodeCube(const CubeHeader& h, std::span<const std::uint8_t> raw) {
  const std::size_t expected = h.expectedBytes() + h.headerOffset;
  if (raw.size() < expected) {
    fail(ErrorCode::kIo, "short data file: expected " + std::to_string(expected) +
                             " bytes, found " + std::to_string(raw.size()));
  }
  if (raw.size() > expected) {
    fail(ErrorCode::kFormat, "data file size mismatch: expected " + std::to_string(expected) +
                                 " bytes, found " + std::to_string(raw.size()));
  }
  if (!h.wavelengths.empty() && h.wavelengths.size() != static_cast<std::size_t>(h.bands)) {
    fail(ErrorCode::kFormat, "cube header: wavelength count differs from band count");
  }
  raw = raw.subspan(h.headerOffset);
  const bool swap = (h.byteOrder == ByteOrder::kLittle) != hostIsLittle();
  const std::size_t W = h.samples, H = h.lines, B = h.bands, es = h.elementSize();
  std::vector<double> values(W * H * B);
  for (std::size_t y = 0; y < H; ++y) {
    for (std::size_t x = 0; x < W; ++x) {
      for (std::size_t b = 0; b < B; ++b) {
        std::size_t index = 0;
        switch (h.interleave) {
          case Interleave::kBsq: index = (b * H + y) * W + x; break;
          case Interleave::kBil: index = (y * B + b) * W + x; break;
          case Interleave::kBip: index = (y * W + x) * B + b; break;
        }
        values[(y * W + x) * B + b] = readSample(raw.data() + index * es, h.dataType, swap);
      }
    }
  }
  return SpectralCube(h.samples, h.lines, h.bands, std::move(values), h.wavelengths);
}

SpectralCube readCube(const fs::path& headerPath) {
  if (!fs::exists(headerPath)) fail(ErrorCode::kIo, "input not found: " + headerPath.string());
  const CubeHeader header = parseCubeHeader(readText(headerPath));

  std::vector<fs::path> candidates;
  if (!header.dataFile.empty()) {
    candidates.push_back(headerPath.parent_path() / header.dataFile);
  } else {
    fs::path stem = headerPath;
    if (lower(stem.extension().string()) == ".hdr") stem.replace_extension();
    candidates.push_back(stem);
    for (const char* ext : {".raw", ".img", ".dat", ".bsq"}) {
      fs::path p = stem;
      p += ext;
      candidates.push_back(p);
    }
  }
  for (const auto& c : candidates) {
    if (c != headerPath && fs::is_regular_file(c)) {
      return decodeCube(header, readFileBytes(c));
    }
  }
  fail(ErrorCode::kIo, "missing data file for header " + headerPath.string());
}

void writeCube(const SpectralCube& cube, const fs::path& headerPath, DataType type,
               ByteOrder order) {
  CubeHeader h;
  h.samples = cube.width();
  h.lines = cube.height();
  h.bands = cube.bands();
  h.interleave = Interleave::kBsq;
  h.dataType = type;
  h.byteOrder = order;
  h.wavelengths = cube.wavelengths();

  fs::path rawPath = headerPath;
  rawPath.replace_extension(".raw");
  h.dataFile = rawPath.filename().string();

  const bool swap = (order == ByteOrder::kLittle) != hostIsLittle();
  const std::size_t es = h.elementSize();
  std::vector<std::uint8_t> raw(h.expectedBytes());
  std::size_t i = 0;
  for (int b = 0; b < cube.bands(); ++b) {
    for (int y = 0; y < cube.height(); ++y) {
      for (int x = 0; x < cube.width(); ++x, ++i) {
        const double v = cube.at(x, y, b);
        std::uint8_t* dst = raw.data() + i * es;
        if (type == DataType::kFloat32) {
          const float f = static_cast<float>(v);
          std::uint32_t bits;
          std::memcpy(&bits, &f, 4);
          if (swap) bits = __builtin_bswap32(bits);
          std::memcpy(dst, &bits, 4);
          continue;
        }
        const double limit = type == DataType::kUInt8 ? 255.0 : 65535.0;
        if (v != std::floor(v) || v > limit) {
          fail(ErrorCode::kInvalid, "cube value not representable in the integer data type");
        }
        if (type == DataType::kUInt8) {
          dst[0] = static_cast<std::uint8_t>(v);
        } else {
          auto s = static_cast<std::uint16_t>(v);
          if (swap) s = static_cast<std::uint16_t>((s >> 8) | (s << 8));
          std::memcpy(dst, &s, 2);
        }
      }
    }
  }
  const std::string text = formatCubeHeader(h);
  writeFileBytes(headerPath, std::span(reinterpret_cast<const std::uint8_t*>(text.data()),
                                       text.size()));
  writeFileBytes(rawPath, raw);
}

// ---------------------------------------------------------------------------
// PNG

namespace {

struct PngInput {
  const std::uint8_t* data;
  std::size_t size;
  std::size_t pos;
};

struct PngDecoded {
  std::uint32_t width = 0;
  std::uint32_t height = 0;
  bool hadAlpha = false;
  bool had16Bit = false;
  std::vector<std::uint8_t> pixels;
  std::vector<png_bytep> rows;
  char message[256] = {};
};

void pngReadCallback(png_structp png, png_bytep out, png_size_t length) {
  auto* in = static_cast<PngInput*>(png_get_io_ptr(png));
  if (in->pos + length > in->size) png_error(png, "truncated PNG stream");
  std::memcpy(out, in->data + in->pos, length);
  in->pos += length;
}

void pngErrorCallback(png_structp png, png_const_charp msg) {
  auto* decoded = static_cast<PngDecoded*>(png_get_error_ptr(png));
  std::snprintf(decoded->message, sizeof(decoded->message), "%s", msg);
  png_longjmp(png, 1);
}

void pngWarningCallback(png_structp, png_const_charp) {}

// Only trivially destructible locals live in this frame; the vectors are
// owned by `out`, so unwinding via longjmp leaks nothing.
bool decodePngRaw(PngInput* input, PngDecoded* out) {
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, out, pngErrorCallback,
                                           pngWarningCallback);
  if (png == nullptr) return false;
  png_infop info = png_create_info_struct(png);
  if (info == nullptr) {
    png_destroy_read_struct(&png, nullptr, nullptr);
    return false;
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    return false;
  }
  png_set_read_fn(png, input, pngReadCallback);
  png_read_info(png, info);

  const png_byte colorType = png_get_color_type(png, info);
  const png_byte depth = png_get_bit_depth(png, info);
  out->hadAlpha = (colorType & PNG_COLOR_MASK_ALPHA) != 0 ||
                  png_get_valid(png, info, PNG_INFO_tRNS) != 0;
  out->had16Bit = depth == 16;

  if (colorType == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
  if (colorType == PNG_COLOR_TYPE_GRAY && depth < 8) png_set_expand_gray_1_2_4_to_8(png);
  if (depth == 16) png_set_strip_16(png);
  if ((colorType & PNG_COLOR_MASK_ALPHA) != 0) png_set_strip_alpha(png);
  if (colorType == PNG_COLOR_TYPE_GRAY || colorType == PNG_COLOR_TYPE_GRAY_ALPHA) {
    png_set_gray_to_rgb(png);
  }
  png_read_update_info(png, info);

  out->width = png_get_image_width(png, info);
  out->height = png_get_image_height(png, info);
  const png_size_t rowBytes = png_get_rowbytes(png, info);
  if (rowBytes != static_cast<png_size_t>(out->width) * 3) {
    png_error(png, "unexpected channel layout after conversion");
  }
  out->pixels.resize(rowBytes * out->height);
  out->rows.resize(out->height);
  for (std::uint32_t y = 0; y < out->height; ++y) out->rows[y] = out->pixels.data() + y * rowBytes;
  png_read_image(png, out->rows.data());
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);
  return true;
}

void pngWriteCallback(png_structp png, png_bytep data, png_size_t length) {
  auto* out = static_cast<std::vector<std::uint8_t>*>(png_get_io_ptr(png));
  out->insert(out->end(), data, data + length);
}

void pngFlushCallback(png_structp) {}

struct PngEncodeState {
  std::vector<std::uint8_t> bytes;
  std::vector<png_bytep> rows;
  char message[256] = {};
};

void pngEncodeErrorCallback(png_structp png, png_const_charp msg) {
  auto* state = static_cast<PngEncodeState*>(png_get_error_ptr(png));
  std::snprintf(state->message, sizeof(state->message), "%s", msg);
  png_longjmp(png, 1);
}

bool encodePngRaw(const RgbImage* image, PngEncodeState* state) {
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, state,
                                            pngEncodeErrorCallback, pngWarningCallback);
  if (png == nullptr) return false;
  png_infop info = png_create_info_struct(png);
  if (info == nullptr) {
    png_destroy_write_struct(&png, nullptr);
    return false;
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    return false;
  }
  png_set_write_fn(png, &state->bytes, pngWriteCallback, pngFlushCallback);
  png_set_compression_level(png, 6);
  png_set_IHDR(png, info, static_cast<png_uint_32>(image->width()),
               static_cast<png_uint_32>(image->height()), 8, PNG_COLOR_TYPE_RGB,
               PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  png_write_image(png, state->rows.data());
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
  return true;
}

}  // namespace

RgbReadResult decodePng(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 8 || png_sig_cmp(bytes.data(), 0, 8) != 0) {
    fail(ErrorCode::kFormat, "decode error: not a PNG image");
  }
  PngInput input{bytes.data(), bytes.size(), 0};
  PngDecoded decoded;
  if (!decodePngRaw(&input, &decoded)) {
    fail(ErrorCode::kFormat, std::string("decode error: ") +
                                 (decoded.message[0] ? decoded.message : "libpng failure"));
  }
  RgbReadResult result{RgbImage(static_cast<int>(decoded.width),
                                static_cast<int>(decoded.height), std::move(decoded.pixels)),
                       {}};
  if (decoded.hadAlpha) result.warnings.emplace_back("alpha channel dropped");
  if (decoded.had16Bit) result.warnings.emplace_back("16-bit channels reduced to 8 bits");
  return result;
}

std::vector<std::uint8_t> encodePng(const RgbImage& image) {
  PngEncodeState state;
  auto* base = const_cast<std::uint8_t*>(image.values().data());
  state.rows.resize(image.height());
  for (int y = 0; y < image.height(); ++y) {
    state.rows[y] = base + static_cast<std::size_t>(y) * image.width() * 3;
  }
  if (!encodePngRaw(&image, &state)) {
    fail(ErrorCode::kInternal, std::string("png encode failed: ") + state.message);
  }
  return std::move(state.bytes);
}

RgbReadResult readRgb(const fs::path& path) { return decodePng(readFileBytes(path)); }

void writeRgb(const RgbImage& image, const fs::path& path) {
  writeFileBytes(path, encodePng(image));
}

// ---------------------------------------------------------------------------
// Control points

namespace {

ordered_json pairToJson(const ControlPair& p) {
  ordered_json j;
  j["u"] = p.u;
  j["v"] = {p.v[0], p.v[1], p.v[2]};
  if (p.hsi) j["hsi"] = {p.hsi->x, p.hsi->y};
  if (p.rgb) j["rgb"] = {p.rgb->x, p.rgb->y};
  return j;
}

PixelCoord coordFromJson(const ordered_json& j, const char* name) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_number_integer() || !j[1].is_number_integer()) {
    fail(ErrorCode::kFormat, std::string("control points: '") + name +
                                 "' must be an [x, y] integer pair");
  }
  return {j[0].get<int>(), j[1].get<int>()};
}

}  // namespace

std::string formatControlPairs(int bands, const std::string& sensor,
                               const std::vector<ControlPair>& pairs) {
  ordered_json doc;
  doc["version"] = 1;
  doc["bands"] = bands;
  doc["sensor"] = sensor;
  doc["pairs"] = ordered_json::array();
  for (const auto& p : pairs) doc["pairs"].push_back(pairToJson(p));
  return doc.dump(2) + "\n";
}

std::string formatControlPoints(const ControlPointSet& set) {
  return formatControlPairs(set.bands(), set.sensorTag(), set.pairs());
}

ControlPointSet parseControlPoints(std::string_view text) {
  ordered_json doc;
  try {
    doc = ordered_json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    fail(ErrorCode::kFormat, std::string("control points: ") + e.what());
  }
  if (!doc.is_object()) fail(ErrorCode::kFormat, "control points: document must be an object");
  if (!doc.contains("version") || doc["version"] != 1) {
    fail(ErrorCode::kFormat, "control points: unsupported or missing version");
  }
  if (!doc.contains("bands") || !doc["bands"].is_number_integer() || doc["bands"].get<int>() <= 0) {
    fail(ErrorCode::kFormat, "control points: 'bands' must be a positive integer");
  }
  const int bands = doc["bands"].get<int>();
  std::string sensor;
  if (doc.contains("sensor")) {
    if (!doc["sensor"].is_string()) fail(ErrorCode::kFormat, "control points: 'sensor' must be a string");
    sensor = doc["sensor"].get<std::string>();
  }
  if (!doc.contains("pairs") || !doc["pairs"].is_array()) {
    fail(ErrorCode::kFormat, "control points: 'pairs' must be an array");
  }

  std::vector<ControlPair> pairs;
  for (const auto& jp : doc["pairs"]) {
    if (!jp.is_object() || !jp.contains("u") || !jp.contains("v")) {
      fail(ErrorCode::kFormat, "control points: each pair needs 'u' and 'v'");
    }
    ControlPair p;
    if (!jp["u"].is_array()) fail(ErrorCode::kFormat, "control points: 'u' must be an array");
    for (const auto& x : jp["u"]) {
      if (!x.is_number()) fail(ErrorCode::kFormat, "control points: 'u' entries must be numbers");
      p.u.push_back(x.get<double>());
    }
    const auto& jv = jp["v"];
    if (!jv.is_array() || jv.size() != 3) {
      fail(ErrorCode::kFormat, "control points: 'v' must have 3 entries");
    }
    for (int c = 0; c < 3; ++c) {
      if (!jv[c].is_number_integer() || jv[c].get<long>() < 0 || jv[c].get<long>() > 255) {
        fail(ErrorCode::kFormat, "control points: 'v' entries must be integers in [0, 255]");
      }
      p.v[c] = static_cast<std::uint8_t>(jv[c].get<int>());
    }
    if (jp.contains("hsi")) p.hsi = coordFromJson(jp["hsi"], "hsi");
    if (jp.contains("rgb")) p.rgb = coordFromJson(jp["rgb"], "rgb");
    validatePair(p, bands);
    pairs.push_back(std::move(p));
  }
  return ControlPointSet(bands, std::move(pairs), std::move(sensor));
}

ControlPointSet readControlPoints(const fs::path& path) {
  return parseControlPoints(readText(path));
}

void writeControlPoints(const ControlPointSet& set, const fs::path& path) {
  const std::string text = formatControlPoints(set);
  writeFileBytes(path, std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

}  // namespace spectra
