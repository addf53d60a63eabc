#include "mfract/image.hpp"

#include <png.h>

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <memory>
#include <sstream>
#include <string>

namespace mfract {

ImageTensor::ImageTensor(std::size_t height, std::size_t width,
                         std::size_t channels, double fill)
    : height_(height), width_(width), channels_(channels),
      data_(height * width * channels, fill) {}

ImageTensor::ImageTensor(std::size_t height, std::size_t width,
                         std::size_t channels, std::vector<double> data)
    : height_(height), width_(width), channels_(channels), data_(std::move(data)) {
  if (data_.size() != height_ * width_ * channels_) {
    throw Error("image data size does not match its shape");
  }
}

RealGrid ImageTensor::channel(std::size_t ch) const {
  if (ch >= channels_) throw Error("channel index out of range");
  RealGrid out(height_, width_);
  for (std::size_t i = 0; i < height_ * width_; ++i) {
    out.values()[i] = data_[i * channels_ + ch];
  }
  return out;
}

void ImageTensor::set_channel(std::size_t ch, const RealGrid& plane) {
  if (ch >= channels_ || plane.height() != height_ || plane.width() != width_) {
    throw Error("channel plane does not match image shape");
  }
  for (std::size_t i = 0; i < height_ * width_; ++i) {
    data_[i * channels_ + ch] = plane.values()[i];
  }
}

GrayImage::GrayImage(RealGrid pixels) : pixels_(std::move(pixels)) {
  for (double v : pixels_.values()) {
    if (!std::isfinite(v) || v < 0.0 || v > 1.0) {
      throw Error("gray image values must be finite and within [0, 1]");
    }
  }
}

ImageTensor GrayImage::as_tensor() const {
  return ImageTensor(height(), width(), 1,
                     std::vector<double>(pixels_.values().begin(),
                                         pixels_.values().end()));
}

// ---------------------------------------------------------------------------
// File formats

namespace {

std::string lower_extension(const std::filesystem::path& path) {
  std::string ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return ext;
}

// Skips whitespace and '#' comments between PNM header tokens.
void skip_pnm_space(std::istream& in) {
  while (true) {
    const int c = in.peek();
    if (c == '#') {
      std::string line;
      std::getline(in, line);
    } else if (std::isspace(c)) {
      in.get();
    } else {
      return;
    }
  }
}

long read_pnm_int(std::istream& in) {
  skip_pnm_space(in);
  long v = -1;
  in >> v;
  if (!in || v < 0) throw Error("malformed PNM header");
  return v;
}

ImageTensor decode_pnm(std::istream& in, const std::string& magic) {
  const std::size_t channels = magic == "P5" ? 1 : 3;
  const long width = read_pnm_int(in);
  const long height = read_pnm_int(in);
  const long maxval = read_pnm_int(in);
  if (width <= 0 || height <= 0) throw Error("PNM image has zero size");
  if (maxval <= 0 || maxval > 65535) {
    throw Error("unsupported PNM bit depth (maxval " + std::to_string(maxval) +
                "); at most 16 bits are accepted");
  }
  in.get();  // single whitespace before the raster
  const std::size_t count =
      static_cast<std::size_t>(width) * static_cast<std::size_t>(height) * channels;
  const std::size_t bytes_per = maxval > 255 ? 2 : 1;
  std::vector<unsigned char> raw(count * bytes_per);
  in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
  if (static_cast<std::size_t>(in.gcount()) != raw.size()) {
    throw Error("PNM raster is truncated");
  }
  std::vector<double> data(count);
  const auto full = static_cast<double>(maxval);
  for (std::size_t i = 0; i < count; ++i) {
    const unsigned v = bytes_per == 2 ? (unsigned{raw[2 * i]} << 8) | raw[2 * i + 1]
                                      : unsigned{raw[i]};
    data[i] = std::min(1.0, v / full);
  }
  return ImageTensor(static_cast<std::size_t>(height), static_cast<std::size_t>(width),
                     channels, std::move(data));
}

struct PngReadGuard {
  png_structp png = nullptr;
  png_infop info = nullptr;
  ~PngReadGuard() { png_destroy_read_struct(&png, info ? &info : nullptr, nullptr); }
};

struct PngWriteGuard {
  png_structp png = nullptr;
  png_infop info = nullptr;
  ~PngWriteGuard() { png_destroy_write_struct(&png, info ? &info : nullptr); }
};

struct FileCloser {
  void operator()(std::FILE* f) const { std::fclose(f); }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

ImageTensor decode_png(const std::filesystem::path& path) {
  FilePtr file(std::fopen(path.string().c_str(), "rb"));
  if (!file) throw Error("cannot open " + path.string());
  PngReadGuard g;
  g.png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!g.png) throw Error("libpng initialization failed");
  g.info = png_create_info_struct(g.png);
  if (!g.info) throw Error("libpng initialization failed");
  if (setjmp(png_jmpbuf(g.png))) throw Error("corrupt PNG file " + path.string());
  png_init_io(g.png, file.get());
  png_read_png(g.png, g.info,
               PNG_TRANSFORM_EXPAND | PNG_TRANSFORM_STRIP_ALPHA, nullptr);
  const std::size_t width = png_get_image_width(g.png, g.info);
  const std::size_t height = png_get_image_height(g.png, g.info);
  const int depth = png_get_bit_depth(g.png, g.info);
  const int color = png_get_color_type(g.png, g.info);
  const std::size_t channels = (color & PNG_COLOR_MASK_COLOR) ? 3 : 1;
  if (depth != 8 && depth != 16) throw Error("unsupported PNG bit depth");
  png_bytepp rows = png_get_rows(g.png, g.info);
  const double full = depth == 16 ? 65535.0 : 255.0;
  std::vector<double> data(width * height * channels);
  for (std::size_t r = 0; r < height; ++r) {
    const png_bytep row = rows[r];
    for (std::size_t i = 0; i < width * channels; ++i) {
      const unsigned v = depth == 16 ? (unsigned{row[2 * i]} << 8) | row[2 * i + 1]
                                     : unsigned{row[i]};
      data[r * width * channels + i] = v / full;
    }
  }
  return ImageTensor(height, width, channels, std::move(data));
}

unsigned quantize(double v, unsigned maxval) {
  const double c = std::clamp(v, 0.0, 1.0);
  return static_cast<unsigned>(std::lround(c * maxval));
}

void encode_pnm(std::ostream& out, const ImageTensor& img, int bit_depth) {
  const unsigned maxval = bit_depth == 16 ? 65535u : 255u;
  out << (img.channels() == 1 ? "P5" : "P6") << '\n'
      << img.width() << ' ' << img.height() << '\n'
      << maxval << '\n';
  std::vector<unsigned char> raw;
  raw.reserve(img.values().size() * (bit_depth == 16 ? 2 : 1));
  for (double v : img.values()) {
    const unsigned q = quantize(v, maxval);
    if (bit_depth == 16) raw.push_back(static_cast<unsigned char>(q >> 8));
    raw.push_back(static_cast<unsigned char>(q & 0xFF));
  }
  out.write(reinterpret_cast<const char*>(raw.data()),
            static_cast<std::streamsize>(raw.size()));
}

void encode_png(const std::filesystem::path& path, const ImageTensor& img,
                int bit_depth) {
  FilePtr file(std::fopen(path.string().c_str(), "wb"));
  if (!file) throw Error("cannot write " + path.string());
  PngWriteGuard g;
  g.png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!g.png) throw Error("libpng initialization failed");
  g.info = png_create_info_struct(g.png);
  if (!g.info) throw Error("libpng initialization failed");
  if (setjmp(png_jmpbuf(g.png))) throw Error("failed writing PNG " + path.string());
  png_init_io(g.png, file.get());
  png_set_IHDR(g.png, g.info, static_cast<png_uint_32>(img.width()),
               static_cast<png_uint_32>(img.height()), bit_depth,
               img.channels() == 1 ? PNG_COLOR_TYPE_GRAY : PNG_COLOR_TYPE_RGB,
               PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
               PNG_FILTER_TYPE_DEFAULT);
  png_write_info(g.png, g.info);
  const unsigned maxval = bit_depth == 16 ? 65535u : 255u;
  const std::size_t row_values = img.width() * img.channels();
  std::vector<png_byte> row(row_values * (bit_depth == 16 ? 2 : 1));
  for (std::size_t r = 0; r < img.height(); ++r) {
    for (std::size_t i = 0; i < row_values; ++i) {
      const unsigned q = quantize(img.values()[r * row_values + i], maxval);
      if (bit_depth == 16) {
        row[2 * i] = static_cast<png_byte>(q >> 8);
        row[2 * i + 1] = static_cast<png_byte>(q & 0xFF);
      } else {
        row[i] = static_cast<png_byte>(q);
      }
    }
    png_write_row(g.png, row.data());
  }
  png_write_end(g.png, nullptr);
}

void write_le_float(std::ostream& out, float v) {
  auto bits = std::bit_cast<std::uint32_t>(v);
  unsigned char b[4];
  for (int i = 0; i < 4; ++i) b[i] = static_cast<unsigned char>((bits >> (8 * i)) & 0xFF);
  out.write(reinterpret_cast<const char*>(b), 4);
}

void write_pfm_planes(const std::filesystem::path& path,
                      const std::vector<const RealGrid*>& planes) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  const RealGrid& first = *planes.front();
  out << (planes.size() == 1 ? "Pf" : "PF") << '\n'
      << first.width() << ' ' << first.height() << '\n'
      << "-1.0\n";
  for (std::size_t r = first.height(); r-- > 0;) {
    for (std::size_t c = 0; c < first.width(); ++c) {
      for (const RealGrid* p : planes) write_le_float(out, static_cast<float>((*p)(r, c)));
    }
  }
  if (!out) throw Error("failed writing " + path.string());
}

}  // namespace

ImageTensor decode(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  char magic[8] = {};
  in.read(magic, 8);
  if (in.gcount() >= 8 && png_sig_cmp(reinterpret_cast<png_const_bytep>(magic), 0, 8) == 0) {
    in.close();
    return decode_png(path);
  }
  if (in.gcount() >= 2 && magic[0] == 'P' && (magic[1] == '5' || magic[1] == '6')) {
    in.clear();
    in.seekg(2);
    return decode_pnm(in, std::string(magic, 2));
  }
  throw Error("unsupported image format: " + path.string() +
              " (expected PNG, binary PGM or binary PPM)");
}

void encode(const std::filesystem::path& path, const ImageTensor& img, int bit_depth) {
  if (bit_depth != 8 && bit_depth != 16) throw Error("bit depth must be 8 or 16");
  if (img.channels() != 1 && img.channels() != 3) {
    throw Error("only 1- or 3-channel images can be encoded");
  }
  const std::string ext = lower_extension(path);
  if (ext == ".png") {
    encode_png(path, img, bit_depth);
    return;
  }
  if (ext == ".pgm" || ext == ".ppm" || ext == ".pnm") {
    if ((ext == ".pgm" && img.channels() != 1) || (ext == ".ppm" && img.channels() != 3)) {
      throw Error("channel count does not match " + ext);
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write " + path.string());
    encode_pnm(out, img, bit_depth);
    return;
  }
  throw Error("unsupported output extension: " + ext);
}

void encode(const std::filesystem::path& path, const GrayImage& img, int bit_depth) {
  encode(path, img.as_tensor(), bit_depth);
}

void write_pgm_pages(const std::filesystem::path& path,
                     const std::vector<RealGrid>& pages) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  for (const auto& page : pages) {
    ImageTensor t(page.height(), page.width(), 1,
                  std::vector<double>(page.values().begin(), page.values().end()));
    encode_pnm(out, t, 8);
  }
}

void write_pfm(const std::filesystem::path& path, const RealGrid& plane) {
  write_pfm_planes(path, {&plane});
}

void write_pfm(const std::filesystem::path& path, const FeatureStack& planes) {
  if (planes.channels() != 1 && planes.channels() != 3) {
    throw Error("PFM holds 1 or 3 channels, got " + std::to_string(planes.channels()));
  }
  std::vector<const RealGrid*> ptrs;
  for (const auto& p : planes) ptrs.push_back(&p);
  write_pfm_planes(path, ptrs);
}

FeatureStack read_pfm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  std::string magic;
  in >> magic;
  if (magic != "Pf" && magic != "PF") throw Error("not a PFM file: " + path.string());
  const std::size_t channels = magic == "Pf" ? 1 : 3;
  long width = 0, height = 0;
  double scale = 0.0;
  in >> width >> height >> scale;
  if (!in || width <= 0 || height <= 0 || scale == 0.0) throw Error("malformed PFM header");
  in.get();
  const bool little = scale < 0.0;
  FeatureStack out(channels, static_cast<std::size_t>(height), static_cast<std::size_t>(width));
  std::vector<unsigned char> raw(static_cast<std::size_t>(width) * height * channels * 4);
  in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
  if (static_cast<std::size_t>(in.gcount()) != raw.size()) throw Error("PFM raster is truncated");
  std::size_t i = 0;
  for (std::size_t r = static_cast<std::size_t>(height); r-- > 0;) {
    for (std::size_t c = 0; c < static_cast<std::size_t>(width); ++c) {
      for (std::size_t ch = 0; ch < channels; ++ch, i += 4) {
        std::uint32_t bits = 0;
        for (int b = 0; b < 4; ++b) {
          const int shift = little ? 8 * b : 8 * (3 - b);
          bits |= std::uint32_t{raw[i + b]} << shift;
        }
        out[ch](r, c) = std::bit_cast<float>(bits);
      }
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Conversions

GrayImage to_gray(const ImageTensor& img) {
  if (img.channels() == 1) return GrayImage(img.channel(0));
  if (img.channels() != 3) throw Error("to_gray expects 1 or 3 channels");
  RealGrid out(img.height(), img.width());
  for (std::size_t r = 0; r < img.height(); ++r) {
    for (std::size_t c = 0; c < img.width(); ++c) {
      const double y = 0.299 * img.at(r, c, 0) + 0.587 * img.at(r, c, 1) +
                       0.114 * img.at(r, c, 2);
      out(r, c) = std::clamp(y, 0.0, 1.0);
    }
  }
  return GrayImage(std::move(out));
}

namespace {

double catmull_rom(double x) {
  constexpr double a = -0.5;
  x = std::abs(x);
  if (x <= 1.0) return ((a + 2.0) * x - (a + 3.0)) * x * x + 1.0;
  if (x < 2.0) return ((a * x - 5.0 * a) * x + 8.0 * a) * x - 4.0 * a;
  return 0.0;
}

struct Taps {
  std::size_t first = 0;
  std::vector<double> weights;
  std::vector<std::size_t> index;
};

// One set of normalized taps per output sample along an axis.
std::vector<Taps> axis_taps(std::size_t in_size, std::size_t out_size, double scale) {
  const double stretch = scale < 1.0 ? scale : 1.0;
  const double support = 2.0 / stretch;
  std::vector<Taps> taps(out_size);
  for (std::size_t o = 0; o < out_size; ++o) {
    const double center = (static_cast<double>(o) + 0.5) / scale - 0.5;
    const auto lo = static_cast<long>(std::floor(center - support));
    const auto hi = static_cast<long>(std::ceil(center + support));
    double total = 0.0;
    for (long i = lo; i <= hi; ++i) {
      const double w = stretch * catmull_rom(stretch * (center - static_cast<double>(i)));
      if (w == 0.0) continue;
      const long clamped = std::clamp<long>(i, 0, static_cast<long>(in_size) - 1);
      taps[o].weights.push_back(w);
      taps[o].index.push_back(static_cast<std::size_t>(clamped));
      total += w;
    }
    for (double& w : taps[o].weights) w /= total;
  }
  return taps;
}

RealGrid resample_plane(const RealGrid& src, std::size_t out_h, std::size_t out_w,
                        double scale) {
  const auto col_taps = axis_taps(src.width(), out_w, scale);
  const auto row_taps = axis_taps(src.height(), out_h, scale);
  RealGrid horizontal(src.height(), out_w);
  for (std::size_t r = 0; r < src.height(); ++r) {
    for (std::size_t c = 0; c < out_w; ++c) {
      double acc = 0.0;
      const Taps& t = col_taps[c];
      for (std::size_t k = 0; k < t.weights.size(); ++k) acc += t.weights[k] * src(r, t.index[k]);
      horizontal(r, c) = acc;
    }
  }
  RealGrid out(out_h, out_w);
  for (std::size_t r = 0; r < out_h; ++r) {
    const Taps& t = row_taps[r];
    for (std::size_t c = 0; c < out_w; ++c) {
      double acc = 0.0;
      for (std::size_t k = 0; k < t.weights.size(); ++k) acc += t.weights[k] * horizontal(t.index[k], c);
      out(r, c) = std::clamp(acc, 0.0, 1.0);
    }
  }
  return out;
}

std::size_t scaled_side(std::size_t side, Scale scale) {
  const auto n = static_cast<long long>(side) * scale.num;
  return static_cast<std::size_t>((2 * n + scale.den) / (2LL * scale.den));
}

}  // namespace

ImageTensor resize_bicubic(const ImageTensor& img, Scale scale) {
  if (scale.num <= 0 || scale.den <= 0) throw Error("resize scale must be positive");
  const std::size_t out_h = scaled_side(img.height(), scale);
  const std::size_t out_w = scaled_side(img.width(), scale);
  if (out_h == 0 || out_w == 0) throw Error("resize produces a degenerate output size");
  ImageTensor out(out_h, out_w, img.channels());
  for (std::size_t ch = 0; ch < img.channels(); ++ch) {
    out.set_channel(ch, resample_plane(img.channel(ch), out_h, out_w, scale.value()));
  }
  return out;
}

GrayImage resize_bicubic(const GrayImage& img, Scale scale) {
  return GrayImage(resize_bicubic(img.as_tensor(), scale).channel(0));
}

double psnr(const ImageTensor& a, const ImageTensor& b) {
  if (!a.same_shape(b)) throw Error("psnr requires images of identical shape");
  if (a.values().empty()) throw Error("psnr of empty images");
  double sum = 0.0;
  for (std::size_t i = 0; i < a.values().size(); ++i) {
    const double d = a.values()[i] - b.values()[i];
    sum += d * d;
  }
  const double mse = sum / static_cast<double>(a.values().size());
  if (mse == 0.0) return kPsnrIdentical;
  return 10.0 * std::log10(1.0 / mse);
}

double psnr(const GrayImage& a, const GrayImage& b) {
  return psnr(a.as_tensor(), b.as_tensor());
}

}  // namespace mfract
