#include "ezgreedy/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <stdexcept>

namespace ezg {

std::string format_double(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

void write_text_file(const std::string& path, const std::string& contents) {
  write_binary_file(path, contents);
}

void write_binary_file(const std::string& path, const std::string& contents) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
  if (!out) throw std::runtime_error("write failed: " + path);
}

std::string csv_matrix(int rows, int cols, const std::vector<double>& values) {
  if (values.size() != static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols))
    throw std::invalid_argument("csv_matrix: size mismatch");
  std::string out;
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      if (c) out += ',';
      out += format_double(values[static_cast<std::size_t>(r) * cols + c]);
    }
    out += '\n';
  }
  return out;
}

std::string pgm_image(int rows, int cols, const std::vector<double>& values, bool log_scale) {
  if (values.size() != static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols))
    throw std::invalid_argument("pgm_image: size mismatch");
  std::vector<double> scaled(values.size());
  for (std::size_t i = 0; i < values.size(); ++i)
    scaled[i] = log_scale ? std::log1p(values[i]) : values[i];
  const double max = scaled.empty() ? 0.0 : *std::max_element(scaled.begin(), scaled.end());
  std::string out = "P5\n" + std::to_string(cols) + " " + std::to_string(rows) + "\n255\n";
  out.reserve(out.size() + values.size());
  for (double s : scaled) {
    const double v = max > 0.0 ? 255.0 * s / max : 0.0;
    out += static_cast<char>(static_cast<unsigned char>(std::lround(v)));
  }
  return out;
}

}  // namespace ezg
