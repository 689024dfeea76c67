#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace ezg {

// Shortest decimal form that round-trips the exact double ('.' decimal point,
// locale-independent), so emitted artifacts are byte-stable across runs.
std::string format_double(double v);

void write_text_file(const std::string& path, const std::string& contents);
void write_binary_file(const std::string& path, const std::string& contents);

// Matrix of doubles as bare CSV rows (no header; metadata travels in a
// sidecar), '\n' line endings.
std::string csv_matrix(int rows, int cols, const std::vector<double>& values);

// 8-bit binary PGM (P5, maxval 255).  Values are scaled to v (linear) or
// log(v+1) (log_scale) and mapped to round(255 * scaled / scaled_max); an
// all-zero matrix renders black.
std::string pgm_image(int rows, int cols, const std::vector<double>& values, bool log_scale);

}  // namespace ezg
