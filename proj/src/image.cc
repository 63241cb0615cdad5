// Copyright 2026 The cofscan Authors.
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

#include "cofscan/image.h"

#include <png.h>

#include <csetjmp>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <iterator>

#include "cofscan/error.h"

namespace cofscan {

std::string ToString(const Rgb& c) {
  return "(" + std::to_string(c.r) + "," + std::to_string(c.g) + "," +
         std::to_string(c.b) + ")";
}

Json RgbToJson(Rgb c) { return Json::array({c.r, c.g, c.b}); }

Rgb RgbFromJson(const Json& j) {
  if (!j.is_array() || j.size() != 3) {
    throw Error(ErrorCode::kConfigError, "colour must be [r, g, b]");
  }
  Rgb c;
  uint8_t* parts[] = {&c.r, &c.g, &c.b};
  for (int i = 0; i < 3; ++i) {
    if (!j[i].is_number_integer() || j[i].get<int>() < 0 || j[i].get<int>() > 255) {
      throw Error(ErrorCode::kConfigError, "colour components must be 0..255");
    }
    *parts[i] = static_cast<uint8_t>(j[i].get<int>());
  }
  return c;
}

RasterImage::RasterImage(int width, int height, Rgb fill)
    : width_(width), height_(height) {
  if (width < 1 || height < 1) {
    throw Error(ErrorCode::kInvalidArgument, "image dimensions must be >= 1");
  }
  pixels_.resize(pixel_count() * kChannels);
  for (std::size_t i = 0; i < pixel_count(); ++i) set(i, fill);
}

RasterImage::RasterImage(int width, int height, std::vector<uint8_t> pixels)
    : width_(width), height_(height), pixels_(std::move(pixels)) {
  if (width < 1 || height < 1) {
    throw Error(ErrorCode::kInvalidArgument, "image dimensions must be >= 1");
  }
  if (pixels_.size() != pixel_count() * kChannels) {
    throw Error(ErrorCode::kDimensionMismatch,
                "pixel buffer length does not match width*height*3");
  }
}

namespace {

struct MemoryReader {
  std::span<const uint8_t> data;
  std::size_t offset = 0;
};

void ReadFromMemory(png_structp png, png_bytep out, png_size_t length) {
  auto* reader = static_cast<MemoryReader*>(png_get_io_ptr(png));
  if (reader->offset + length > reader->data.size()) {
    png_error(png, "truncated PNG stream");
  }
  std::memcpy(out, reader->data.data() + reader->offset, length);
  reader->offset += length;
}

void WriteToVector(png_structp png, png_bytep data, png_size_t length) {
  auto* out = static_cast<std::vector<uint8_t>*>(png_get_io_ptr(png));
  out->insert(out->end(), data, data + length);
}

void FlushNothing(png_structp) {}

struct DecodedPng {
  int width = 0;
  int height = 0;
  int channels = 0;
  bool was_gray = false;
  std::vector<uint8_t> pixels;
};

// libpng reports errors by longjmp; keep C++ objects with nontrivial
// destructors outside the setjmp frame.
bool DecodeInto(std::span<const uint8_t> data, bool keep_gray, DecodedPng* out,
                char* message, std::size_t message_size) {
  png_structp png =
      png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (png == nullptr) {
    std::snprintf(message, message_size, "png_create_read_struct failed");
    return false;
  }
  png_infop info = png_create_info_struct(png);
  MemoryReader reader{data, 0};
  png_bytep* rows = nullptr;
  if (setjmp(png_jmpbuf(png))) {
    std::snprintf(message, message_size, "corrupt or unsupported PNG");
    delete[] rows;
    png_destroy_read_struct(&png, &info, nullptr);
    return false;
  }
  png_set_read_fn(png, &reader, ReadFromMemory);
  png_read_info(png, info);

  const png_byte color_type = png_get_color_type(png, info);
  const png_byte bit_depth = png_get_bit_depth(png, info);
  out->was_gray = (color_type == PNG_COLOR_TYPE_GRAY);
  if (bit_depth == 16) png_set_strip_16(png);
  if (color_type == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
  if (color_type == PNG_COLOR_TYPE_GRAY && bit_depth < 8) {
    png_set_expand_gray_1_2_4_to_8(png);
  }
  if (png_get_valid(png, info, PNG_INFO_tRNS)) png_set_strip_alpha(png);
  if (color_type & PNG_COLOR_MASK_ALPHA) png_set_strip_alpha(png);
  const bool gray = (color_type == PNG_COLOR_TYPE_GRAY ||
                     color_type == PNG_COLOR_TYPE_GRAY_ALPHA);
  if (gray && !keep_gray) png_set_gray_to_rgb(png);
  png_read_update_info(png, info);

  out->width = static_cast<int>(png_get_image_width(png, info));
  out->height = static_cast<int>(png_get_image_height(png, info));
  out->channels = png_get_channels(png, info);
  const std::size_t row_bytes = png_get_rowbytes(png, info);
  out->pixels.resize(row_bytes * static_cast<std::size_t>(out->height));
  rows = new png_bytep[out->height];
  for (int y = 0; y < out->height; ++y) {
    rows[y] = out->pixels.data() + row_bytes * static_cast<std::size_t>(y);
  }
  png_read_image(png, rows);
  png_read_end(png, nullptr);
  delete[] rows;
  png_destroy_read_struct(&png, &info, nullptr);
  return true;
}

bool EncodeInto(int width, int height, int color_type,
                std::span<const uint8_t> pixels, std::size_t row_bytes,
                std::vector<uint8_t>* out) {
  png_structp png =
      png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (png == nullptr) return false;
  png_infop info = png_create_info_struct(png);
  png_bytep* rows = nullptr;
  if (setjmp(png_jmpbuf(png))) {
    delete[] rows;
    png_destroy_write_struct(&png, &info);
    return false;
  }
  png_set_write_fn(png, out, WriteToVector, FlushNothing);
  png_set_IHDR(png, info, width, height, 8, color_type, PNG_INTERLACE_NONE,
               PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_set_compression_level(png, 6);
  png_write_info(png, info);
  rows = new png_bytep[height];
  for (int y = 0; y < height; ++y) {
    rows[y] = const_cast<png_bytep>(pixels.data()) +
              row_bytes * static_cast<std::size_t>(y);
  }
  png_write_image(png, rows);
  png_write_end(png, nullptr);
  delete[] rows;
  png_destroy_write_struct(&png, &info);
  return true;
}

}  // namespace

RasterImage DecodePng(std::span<const uint8_t> data) {
  DecodedPng decoded;
  char message[128] = {0};
  if (!DecodeInto(data, false, &decoded, message, sizeof(message))) {
    throw Error(ErrorCode::kIoError, message);
  }
  if (decoded.channels != 3) {
    throw Error(ErrorCode::kIoError, "unexpected channel count after decode");
  }
  return RasterImage(decoded.width, decoded.height, std::move(decoded.pixels));
}

std::vector<uint8_t> EncodePng(const RasterImage& image) {
  std::vector<uint8_t> out;
  if (!EncodeInto(image.width(), image.height(), PNG_COLOR_TYPE_RGB,
                  image.bytes(),
                  static_cast<std::size_t>(image.width()) * 3, &out)) {
    throw Error(ErrorCode::kIoError, "PNG encoding failed");
  }
  return out;
}

std::vector<uint8_t> ReadFileBytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw Error(ErrorCode::kIoError, "cannot open " + path.string());
  }
  return std::vector<uint8_t>(std::istreambuf_iterator<char>(in),
                              std::istreambuf_iterator<char>());
}

void WriteFileBytes(const std::filesystem::path& path,
                    std::span<const uint8_t> data) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw Error(ErrorCode::kIoError, "cannot write " + path.string());
  }
  out.write(reinterpret_cast<const char*>(data.data()),
            static_cast<std::streamsize>(data.size()));
  if (!out) throw Error(ErrorCode::kIoError, "short write to " + path.string());
}

RasterImage LoadPng(const std::filesystem::path& path) {
  const std::vector<uint8_t> bytes = ReadFileBytes(path);
  try {
    return DecodePng(bytes);
  } catch (const Error& e) {
    throw Error(ErrorCode::kIoError, path.string() + ": " + e.what());
  }
}

void SavePng(const std::filesystem::path& path, const RasterImage& image) {
  WriteFileBytes(path, EncodePng(image));
}

GrayImage LoadGrayPng(const std::filesystem::path& path) {
  const std::vector<uint8_t> bytes = ReadFileBytes(path);
  DecodedPng decoded;
  char message[128] = {0};
  if (!DecodeInto(bytes, true, &decoded, message, sizeof(message))) {
    throw Error(ErrorCode::kIoError, path.string() + ": " + message);
  }
  if (!decoded.was_gray || decoded.channels != 1) {
    throw Error(ErrorCode::kInvalidArgument,
                path.string() + " is not a single-channel image");
  }
  return {decoded.width, decoded.height, std::move(decoded.pixels)};
}

void SaveGrayPng(const std::filesystem::path& path, const GrayImage& image) {
  std::vector<uint8_t> out;
  if (!EncodeInto(image.width, image.height, PNG_COLOR_TYPE_GRAY,
                  image.pixels, static_cast<std::size_t>(image.width), &out)) {
    throw Error(ErrorCode::kIoError, "PNG encoding failed");
  }
  WriteFileBytes(path, out);
}

}  // namespace cofscan
