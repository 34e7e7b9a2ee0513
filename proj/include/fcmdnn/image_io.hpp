#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

namespace fcmdnn {

struct GrayImage {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> pixels; // row-major
};

// Readers throw Error{ingestion} naming the file on any malformed input.
GrayImage read_pgm(const std::filesystem::path& path);
GrayImage read_png(const std::filesystem::path& path);

/// Dispatches on the file signature, not the extension.
GrayImage read_image(const std::filesystem::path& path);

/// Binary P5, maxval 255.
void write_pgm(const std::filesystem::path& path, const GrayImage& image);

} // namespace fcmdnn
