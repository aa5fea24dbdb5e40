#include "touchsplat/image_io.hpp"

#include "touchsplat/errors.hpp"

#include <zlib.h>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <vector>

namespace touchsplat {

namespace {

void put_u32(std::vector<unsigned char>& out, std::uint32_t v) {
  out.push_back((v >> 24) & 0xff);
  out.push_back((v >> 16) & 0xff);
  out.push_back((v >> 8) & 0xff);
  out.push_back(v & 0xff);
}

void put_chunk(std::vector<unsigned char>& out, const char type[4],
               const std::vector<unsigned char>& payload) {
  put_u32(out, std::uint32_t(payload.size()));
  const std::size_t crc_start = out.size();
  out.insert(out.end(), type, type + 4);
  out.insert(out.end(), payload.begin(), payload.end());
  const uLong crc =
      crc32(0, out.data() + crc_start, uInt(out.size() - crc_start));
  put_u32(out, std::uint32_t(crc));
}

unsigned char to_byte(double v) {
  return static_cast<unsigned char>(
      std::lround(255.0 * std::clamp(v, 0.0, 1.0)));
}

}  // namespace

void write_png(const std::string& path, const RgbImage& img) {
  if (img.width <= 0 || img.height <= 0)
    throw Error("write_png: empty image for " + path);

  // Raw scanlines, filter byte 0 per row.
  std::vector<unsigned char> raw;
  raw.reserve(std::size_t(img.height) * (1 + std::size_t(img.width) * 3));
  for (int v = 0; v < img.height; ++v) {
    raw.push_back(0);
    for (int u = 0; u < img.width; ++u) {
      const Vec3& c = img.at(u, v);
      raw.push_back(to_byte(c.x()));
      raw.push_back(to_byte(c.y()));
      raw.push_back(to_byte(c.z()));
    }
  }

  uLongf comp_size = compressBound(uLong(raw.size()));
  std::vector<unsigned char> compressed(comp_size);
  if (compress2(compressed.data(), &comp_size, raw.data(), uLong(raw.size()),
                Z_BEST_COMPRESSION) != Z_OK)
    throw Error("write_png: deflate failed");
  compressed.resize(comp_size);

  std::vector<unsigned char> file = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1a, '\n'};

  std::vector<unsigned char> ihdr;
  put_u32(ihdr, std::uint32_t(img.width));
  put_u32(ihdr, std::uint32_t(img.height));
  ihdr.push_back(8);  // bit depth
  ihdr.push_back(2);  // color type: truecolor
  ihdr.push_back(0);  // compression
  ihdr.push_back(0);  // filter method
  ihdr.push_back(0);  // no interlace
  put_chunk(file, "IHDR", ihdr);
  put_chunk(file, "IDAT", compressed);
  put_chunk(file, "IEND", {});

  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("write_png: cannot open " + path);
  out.write(reinterpret_cast<const char*>(file.data()),
            std::streamsize(file.size()));
  if (!out) throw Error("write_png: write failed on " + path);
}

}  // namespace touchsplat
