#include "firescan/tiff.hpp"

#include <zlib.h>

#include <algorithm>
#include <array>
#include <cstring>
#include <fstream>
#include <iterator>
#include <map>
#include <stdexcept>
#include <string>

namespace firescan::tiff {
namespace {

enum Tag : std::uint16_t {
  kImageWidth = 256,
  kImageLength = 257,
  kBitsPerSample = 258,
  kCompression = 259,
  kPhotometric = 262,
  kStripOffsets = 273,
  kSamplesPerPixel = 277,
  kRowsPerStrip = 278,
  kStripByteCounts = 279,
  kPlanarConfig = 284,
  kPredictor = 317,
  kTileWidth = 322,
  kTileLength = 323,
  kTileOffsets = 324,
  kTileByteCounts = 325,
  kExtraSamples = 338,
  kSampleFormat = 339,
};

enum Compression : std::uint16_t {
  kNone = 1,
  kLzw = 5,
  kAdobeDeflate = 8,
  kPackBits = 32773,
  kDeflate = 32946,
};

struct Reader {
  std::span<const std::uint8_t> bytes;
  bool big_endian = false;

  void need(std::size_t off, std::size_t n) const {
    if (off > bytes.size() || n > bytes.size() - off) {
      throw std::runtime_error("truncated TIFF (offset " + std::to_string(off) + ")");
    }
  }
  std::uint16_t u16(std::size_t off) const {
    need(off, 2);
    const auto* p = bytes.data() + off;
    return big_endian ? static_cast<std::uint16_t>(p[0] << 8 | p[1])
                      : static_cast<std::uint16_t>(p[1] << 8 | p[0]);
  }
  std::uint32_t u32(std::size_t off) const {
    need(off, 4);
    const auto* p = bytes.data() + off;
    if (big_endian) {
      return std::uint32_t{p[0]} << 24 | std::uint32_t{p[1]} << 16 | std::uint32_t{p[2]} << 8 | p[3];
    }
    return std::uint32_t{p[3]} << 24 | std::uint32_t{p[2]} << 16 | std::uint32_t{p[1]} << 8 | p[0];
  }
};

using TagMap = std::map<std::uint16_t, std::vector<std::uint64_t>>;

TagMap read_ifd(const Reader& rd, std::uint32_t ifd_offset) {
  TagMap tags;
  const std::uint16_t n = rd.u16(ifd_offset);
  for (std::uint16_t i = 0; i < n; ++i) {
    const std::size_t e = ifd_offset + 2 + std::size_t{12} * i;
    const std::uint16_t tag = rd.u16(e);
    const std::uint16_t type = rd.u16(e + 2);
    const std::uint32_t count = rd.u32(e + 4);
    std::size_t size = 0;
    switch (type) {
      case 1: case 2: case 6: case 7: size = 1; break;  // BYTE ASCII SBYTE UNDEFINED
      case 3: case 8: size = 2; break;                  // SHORT SSHORT
      case 4: case 9: case 11: size = 4; break;         // LONG SLONG FLOAT
      case 5: case 10: case 12: size = 8; break;        // RATIONAL SRATIONAL DOUBLE
      default: continue;                                // unknown types are skipped
    }
    // Only integer-valued tags matter for decoding.
    if (type != 1 && type != 3 && type != 4) continue;
    const std::size_t total = size * count;
    const std::size_t data_off = total <= 4 ? e + 8 : rd.u32(e + 8);
    rd.need(data_off, total);
    std::vector<std::uint64_t> values(count);
    for (std::uint32_t k = 0; k < count; ++k) {
      const std::size_t o = data_off + k * size;
      values[k] = type == 1 ? rd.bytes[o] : type == 3 ? rd.u16(o) : rd.u32(o);
    }
    tags.emplace(tag, std::move(values));
  }
  return tags;
}

std::uint64_t scalar_tag(const TagMap& tags, std::uint16_t tag, std::uint64_t fallback) {
  auto it = tags.find(tag);
  if (it == tags.end() || it->second.empty()) return fallback;
  return it->second.front();
}

const std::vector<std::uint64_t>& required_tag(const TagMap& tags, std::uint16_t tag,
                                               const char* name) {
  auto it = tags.find(tag);
  if (it == tags.end() || it->second.empty()) {
    throw std::runtime_error(std::string("TIFF is missing required tag ") + name);
  }
  return it->second;
}

// TIFF-flavoured LZW: MSB-first codes, 9..12 bits, early code-width change.
std::vector<std::uint8_t> lzw_decode(std::span<const std::uint8_t> in, std::size_t expected) {
  constexpr int kClear = 256;
  constexpr int kEoi = 257;
  constexpr int kMaxCodes = 4096;

  std::array<std::int32_t, kMaxCodes> prefix{};
  std::array<std::uint8_t, kMaxCodes> suffix{};
  std::array<std::uint8_t, kMaxCodes> first{};
  std::array<std::uint32_t, kMaxCodes> length{};
  for (int i = 0; i < 256; ++i) {
    prefix[i] = -1;
    suffix[i] = static_cast<std::uint8_t>(i);
    first[i] = static_cast<std::uint8_t>(i);
    length[i] = 1;
  }

  std::vector<std::uint8_t> out;
  out.reserve(expected);
  std::size_t bitpos = 0;
  int width = 9;
  int next = 258;
  int prev = -1;

  auto read_code = [&]() -> int {
    if (bitpos + width > in.size() * 8) return kEoi;
    int code = 0;
    for (int b = 0; b < width; ++b, ++bitpos) {
      code = (code << 1) | ((in[bitpos >> 3] >> (7 - (bitpos & 7))) & 1);
    }
    return code;
  };
  auto emit = [&](int code) {
    const std::size_t start = out.size();
    out.resize(start + length[code]);
    for (std::size_t k = length[code]; k-- > 0;) {
      out[start + k] = suffix[code];
      code = prefix[code];
    }
  };
  auto add = [&](int pre, std::uint8_t ch) {
    if (next >= kMaxCodes) return;
    prefix[next] = pre;
    suffix[next] = ch;
    first[next] = first[pre];
    length[next] = length[pre] + 1;
    ++next;
    if (next + 1 >= (1 << width) && width < 12) ++width;
  };

  while (out.size() < expected) {
    int code = read_code();
    if (code == kEoi) break;
    if (code == kClear) {
      width = 9;
      next = 258;
      code = read_code();
      if (code == kEoi) break;
      if (code > 255) throw std::runtime_error("corrupt LZW stream");
      emit(code);
      prev = code;
      continue;
    }
    if (prev < 0) throw std::runtime_error("corrupt LZW stream (missing clear code)");
    if (code < next) {
      emit(code);
      add(prev, first[code]);
    } else if (code == next) {
      add(prev, first[prev]);
      emit(code);
    } else {
      throw std::runtime_error("corrupt LZW stream (code out of range)");
    }
    prev = code;
  }
  return out;
}

std::vector<std::uint8_t> inflate_chunk(std::span<const std::uint8_t> in, std::size_t expected) {
  std::vector<std::uint8_t> out(expected);
  z_stream zs{};
  if (inflateInit(&zs) != Z_OK) throw std::runtime_error("zlib init failed");
  zs.next_in = const_cast<Bytef*>(in.data());
  zs.avail_in = static_cast<uInt>(in.size());
  zs.next_out = out.data();
  zs.avail_out = static_cast<uInt>(out.size());
  const int rc = inflate(&zs, Z_FINISH);
  const std::size_t produced = zs.total_out;
  inflateEnd(&zs);
  if (rc != Z_STREAM_END && rc != Z_BUF_ERROR && rc != Z_OK) {
    throw std::runtime_error("corrupt Deflate stream");
  }
  out.resize(produced);
  return out;
}

std::vector<std::uint8_t> unpackbits(std::span<const std::uint8_t> in, std::size_t expected) {
  std::vector<std::uint8_t> out;
  out.reserve(expected);
  std::size_t i = 0;
  while (i < in.size() && out.size() < expected) {
    const auto n = static_cast<std::int8_t>(in[i++]);
    if (n >= 0) {
      const std::size_t len = static_cast<std::size_t>(n) + 1;
      if (i + len > in.size()) throw std::runtime_error("corrupt PackBits stream");
      out.insert(out.end(), in.begin() + i, in.begin() + i + len);
      i += len;
    } else if (n != -128) {
      if (i >= in.size()) throw std::runtime_error("corrupt PackBits stream");
      out.insert(out.end(), static_cast<std::size_t>(1 - n), in[i++]);
    }
  }
  return out;
}

std::vector<std::uint8_t> decompress(std::uint16_t compression, std::span<const std::uint8_t> in,
                                     std::size_t expected) {
  switch (compression) {
    case kNone: return {in.begin(), in.end()};
    case kLzw: return lzw_decode(in, expected);
    case kAdobeDeflate:
    case kDeflate: return inflate_chunk(in, expected);
    case kPackBits: return unpackbits(in, expected);
    default:
      throw std::runtime_error("unsupported TIFF compression " + std::to_string(compression));
  }
}

void put16(std::vector<std::uint8_t>& b, std::size_t off, std::uint16_t v) {
  b[off] = static_cast<std::uint8_t>(v & 0xFF);
  b[off + 1] = static_cast<std::uint8_t>(v >> 8);
}

void put32(std::vector<std::uint8_t>& b, std::size_t off, std::uint32_t v) {
  for (int k = 0; k < 4; ++k) b[off + k] = static_cast<std::uint8_t>(v >> (8 * k));
}

struct OutEntry {
  std::uint16_t tag;
  std::uint16_t type;  // 3 SHORT, 4 LONG
  std::vector<std::uint32_t> values;
};

// Lays out: header | strip data | IFD | out-of-line tag arrays.
std::vector<std::uint8_t> assemble(int width, int height, int spp, int bits,
                                   const std::vector<std::uint8_t>& pixels) {
  const std::size_t row_bytes = static_cast<std::size_t>(width) * spp * (bits / 8);
  const std::size_t rows_per_strip =
      std::max<std::size_t>(1, std::min<std::size_t>(height, (256 * 1024) / std::max<std::size_t>(1, row_bytes)));
  const std::size_t strips = (height + rows_per_strip - 1) / rows_per_strip;

  std::vector<std::uint32_t> offsets(strips);
  std::vector<std::uint32_t> counts(strips);
  for (std::size_t s = 0; s < strips; ++s) {
    const std::size_t rows = std::min(rows_per_strip, height - s * rows_per_strip);
    offsets[s] = static_cast<std::uint32_t>(8 + s * rows_per_strip * row_bytes);
    counts[s] = static_cast<std::uint32_t>(rows * row_bytes);
  }

  std::vector<OutEntry> entries{
      {kImageWidth, 4, {static_cast<std::uint32_t>(width)}},
      {kImageLength, 4, {static_cast<std::uint32_t>(height)}},
      {kBitsPerSample, 3, std::vector<std::uint32_t>(spp, static_cast<std::uint32_t>(bits))},
      {kCompression, 3, {kNone}},
      {kPhotometric, 3, {1}},
      {kStripOffsets, 4, offsets},
      {kSamplesPerPixel, 3, {static_cast<std::uint32_t>(spp)}},
      {kRowsPerStrip, 4, {static_cast<std::uint32_t>(rows_per_strip)}},
      {kStripByteCounts, 4, counts},
      {kPlanarConfig, 3, {1}},
  };
  if (spp > 1) entries.push_back({kExtraSamples, 3, std::vector<std::uint32_t>(spp - 1, 0)});
  entries.push_back({kSampleFormat, 3, std::vector<std::uint32_t>(spp, 1)});

  std::size_t ifd_off = 8 + pixels.size();
  ifd_off += ifd_off & 1;
  const std::size_t ifd_size = 2 + entries.size() * 12 + 4;
  std::size_t extra_off = ifd_off + ifd_size;

  std::size_t total = extra_off;
  for (const auto& e : entries) {
    const std::size_t sz = e.values.size() * (e.type == 3 ? 2 : 4);
    if (sz > 4) total += sz + (sz & 1);
  }
  if (total > 0xFFFFFFFFull) throw std::runtime_error("image too large for classic TIFF");

  std::vector<std::uint8_t> out(total, 0);
  out[0] = 'I';
  out[1] = 'I';
  put16(out, 2, 42);
  put32(out, 4, static_cast<std::uint32_t>(ifd_off));
  std::copy(pixels.begin(), pixels.end(), out.begin() + 8);

  put16(out, ifd_off, static_cast<std::uint16_t>(entries.size()));
  std::size_t e_off = ifd_off + 2;
  for (const auto& e : entries) {
    const std::size_t unit = e.type == 3 ? 2 : 4;
    const std::size_t sz = e.values.size() * unit;
    put16(out, e_off, e.tag);
    put16(out, e_off + 2, e.type);
    put32(out, e_off + 4, static_cast<std::uint32_t>(e.values.size()));
    std::size_t dst = e_off + 8;
    if (sz > 4) {
      put32(out, e_off + 8, static_cast<std::uint32_t>(extra_off));
      dst = extra_off;
      extra_off += sz + (sz & 1);
    }
    for (std::size_t k = 0; k < e.values.size(); ++k) {
      if (unit == 2) {
        put16(out, dst + 2 * k, static_cast<std::uint16_t>(e.values[k]));
      } else {
        put32(out, dst + 4 * k, e.values[k]);
      }
    }
    e_off += 12;
  }
  put32(out, e_off, 0);
  return out;
}

void write_file(const std::filesystem::path& path, const std::vector<std::uint8_t>& bytes) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw std::runtime_error("cannot open " + path.string() + " for writing");
  os.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!os) throw std::runtime_error("failed writing " + path.string());
}

}  // namespace

Raster decode(std::span<const std::uint8_t> bytes) {
  Reader rd{bytes};
  rd.need(0, 8);
  if (bytes[0] == 'I' && bytes[1] == 'I') {
    rd.big_endian = false;
  } else if (bytes[0] == 'M' && bytes[1] == 'M') {
    rd.big_endian = true;
  } else {
    throw std::runtime_error("not a TIFF file (bad byte-order mark)");
  }
  const std::uint16_t magic = rd.u16(2);
  if (magic == 43) throw std::runtime_error("BigTIFF is not supported");
  if (magic != 42) throw std::runtime_error("not a TIFF file (bad magic)");

  const TagMap tags = read_ifd(rd, rd.u32(4));

  Raster img;
  img.width = static_cast<int>(required_tag(tags, kImageWidth, "ImageWidth").front());
  img.height = static_cast<int>(required_tag(tags, kImageLength, "ImageLength").front());
  img.samples_per_pixel = static_cast<int>(scalar_tag(tags, kSamplesPerPixel, 1));
  img.bits_per_sample = static_cast<int>(scalar_tag(tags, kBitsPerSample, 1));
  const auto compression = static_cast<std::uint16_t>(scalar_tag(tags, kCompression, kNone));
  const auto planar = scalar_tag(tags, kPlanarConfig, 1);
  const auto predictor = scalar_tag(tags, kPredictor, 1);
  const auto sample_format = scalar_tag(tags, kSampleFormat, 1);

  if (img.width <= 0 || img.height <= 0 || img.samples_per_pixel <= 0) {
    throw std::runtime_error("TIFF has empty dimensions");
  }
  if (img.bits_per_sample != 8 && img.bits_per_sample != 16) {
    throw std::runtime_error("unsupported TIFF bit depth " + std::to_string(img.bits_per_sample));
  }
  if (sample_format != 1) throw std::runtime_error("TIFF samples are not unsigned integers");
  if (planar != 1 && planar != 2) throw std::runtime_error("bad TIFF PlanarConfiguration");
  if (predictor != 1 && predictor != 2) {
    throw std::runtime_error("unsupported TIFF predictor " + std::to_string(predictor));
  }

  const bool tiled = tags.contains(kTileWidth);
  const int chunk_w = tiled ? static_cast<int>(required_tag(tags, kTileWidth, "TileWidth").front())
                            : img.width;
  const int chunk_h =
      tiled ? static_cast<int>(required_tag(tags, kTileLength, "TileLength").front())
            : static_cast<int>(std::min<std::uint64_t>(scalar_tag(tags, kRowsPerStrip, img.height),
                                                       static_cast<std::uint64_t>(img.height)));
  if (chunk_w <= 0 || chunk_h <= 0) throw std::runtime_error("bad TIFF chunk geometry");
  const auto& offsets = tiled ? required_tag(tags, kTileOffsets, "TileOffsets")
                              : required_tag(tags, kStripOffsets, "StripOffsets");
  const auto& counts = tiled ? required_tag(tags, kTileByteCounts, "TileByteCounts")
                             : required_tag(tags, kStripByteCounts, "StripByteCounts");

  const int chunks_across = (img.width + chunk_w - 1) / chunk_w;
  const int chunks_down = (img.height + chunk_h - 1) / chunk_h;
  const int planes = planar == 2 ? img.samples_per_pixel : 1;
  const int spp_in_chunk = planar == 2 ? 1 : img.samples_per_pixel;
  const std::size_t per_plane = static_cast<std::size_t>(chunks_across) * chunks_down;
  if (offsets.size() < per_plane * planes || counts.size() < per_plane * planes) {
    throw std::runtime_error("TIFF chunk table is too short");
  }

  const int bps = img.bits_per_sample / 8;
  img.data.assign(static_cast<std::size_t>(img.width) * img.height * img.samples_per_pixel, 0);

  for (int plane = 0; plane < planes; ++plane) {
    for (int cy = 0; cy < chunks_down; ++cy) {
      for (int cx = 0; cx < chunks_across; ++cx) {
        const std::size_t idx = plane * per_plane + static_cast<std::size_t>(cy) * chunks_across + cx;
        const int rows = tiled ? chunk_h : std::min(chunk_h, img.height - cy * chunk_h);
        const std::size_t row_samples = static_cast<std::size_t>(chunk_w) * spp_in_chunk;
        const std::size_t expected = row_samples * rows * bps;
        rd.need(offsets[idx], counts[idx]);
        auto raw = decompress(compression, bytes.subspan(offsets[idx], counts[idx]), expected);
        if (raw.size() < expected) {
          throw std::runtime_error("TIFF chunk " + std::to_string(idx) + " decodes short");
        }

        std::vector<std::uint16_t> samples(row_samples * rows);
        for (std::size_t k = 0; k < samples.size(); ++k) {
          if (bps == 1) {
            samples[k] = raw[k];
          } else {
            const std::uint8_t a = raw[2 * k];
            const std::uint8_t b = raw[2 * k + 1];
            samples[k] = rd.big_endian ? static_cast<std::uint16_t>(a << 8 | b)
                                       : static_cast<std::uint16_t>(b << 8 | a);
          }
        }
        if (predictor == 2) {
          const std::uint16_t mask = bps == 1 ? 0xFF : 0xFFFF;
          for (int r = 0; r < rows; ++r) {
            auto* row = samples.data() + r * row_samples;
            for (std::size_t k = spp_in_chunk; k < row_samples; ++k) {
              row[k] = static_cast<std::uint16_t>((row[k] + row[k - spp_in_chunk]) & mask);
            }
          }
        }

        for (int r = 0; r < rows; ++r) {
          const int y = cy * chunk_h + r;
          if (y >= img.height) break;
          for (int c = 0; c < chunk_w; ++c) {
            const int x = cx * chunk_w + c;
            if (x >= img.width) break;
            const std::size_t dst =
                (static_cast<std::size_t>(y) * img.width + x) * img.samples_per_pixel;
            const std::size_t src = r * row_samples + static_cast<std::size_t>(c) * spp_in_chunk;
            if (planar == 2) {
              img.data[dst + plane] = samples[src];
            } else {
              std::copy_n(samples.begin() + src, spp_in_chunk, img.data.begin() + dst);
            }
          }
        }
      }
    }
  }
  return img;
}

Raster read(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(is)), std::istreambuf_iterator<char>());
  try {
    return decode(bytes);
  } catch (const std::exception& e) {
    throw std::runtime_error(path.string() + ": " + e.what());
  }
}

DnGrid read_u16_band(const std::filesystem::path& path) {
  const Raster img = read(path);
  if (img.samples_per_pixel != 1) {
    throw std::runtime_error(path.string() + ": expected a single-band TIFF, found " +
                             std::to_string(img.samples_per_pixel) + " samples per pixel");
  }
  if (img.bits_per_sample != 16) {
    throw std::runtime_error(path.string() + ": expected 16-bit samples, found " +
                             std::to_string(img.bits_per_sample));
  }
  DnGrid out(img.height, img.width);
  std::copy(img.data.begin(), img.data.end(), out.data());
  return out;
}

BoolGrid read_mask(const std::filesystem::path& path) {
  const Raster img = read(path);
  if (img.samples_per_pixel != 1) {
    throw std::runtime_error(path.string() + ": mask must have one sample per pixel");
  }
  BoolGrid out(img.height, img.width);
  for (std::size_t k = 0; k < img.data.size(); ++k) out.data()[k] = img.data[k] != 0;
  return out;
}

std::vector<std::uint8_t> encode_u16(std::span<const DnGrid> planes) {
  if (planes.empty()) throw std::invalid_argument("encode_u16: no planes");
  const auto h = planes[0].rows();
  const auto w = planes[0].cols();
  for (const auto& p : planes) require_same_shape(planes[0], p, "encode_u16");
  const std::size_t spp = planes.size();
  std::vector<std::uint8_t> pixels(static_cast<std::size_t>(w) * h * spp * 2);
  std::size_t o = 0;
  for (Eigen::Index r = 0; r < h; ++r) {
    for (Eigen::Index c = 0; c < w; ++c) {
      for (std::size_t s = 0; s < spp; ++s) {
        const std::uint16_t v = planes[s](r, c);
        pixels[o++] = static_cast<std::uint8_t>(v & 0xFF);
        pixels[o++] = static_cast<std::uint8_t>(v >> 8);
      }
    }
  }
  return assemble(static_cast<int>(w), static_cast<int>(h), static_cast<int>(spp), 16, pixels);
}

std::vector<std::uint8_t> encode_u8(const Grid<std::uint8_t>& plane) {
  std::vector<std::uint8_t> pixels(plane.data(), plane.data() + plane.size());
  return assemble(static_cast<int>(plane.cols()), static_cast<int>(plane.rows()), 1, 8, pixels);
}

void write_u16(const std::filesystem::path& path, std::span<const DnGrid> planes) {
  write_file(path, encode_u16(planes));
}

void write_u16(const std::filesystem::path& path, const DnGrid& band) {
  write_u16(path, std::span<const DnGrid>(&band, 1));
}

void write_mask(const std::filesystem::path& path, const BoolGrid& mask) {
  write_file(path, encode_u8(mask.cast<std::uint8_t>()));
}

}  // namespace firescan::tiff
