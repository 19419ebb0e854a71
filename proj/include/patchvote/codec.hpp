#pragma once

#include <string>

#include "patchvote/raster.hpp"

namespace patchvote {

// Decode an 8-bit PNG or JPEG file (detected by signature, not extension)
// into an RGB raster; grayscale is expanded to three identical channels.
// Throws std::runtime_error naming the path for missing files, undecodable
// data, 16-bit PNGs, and alpha-channel images.
Raster decode_image(const std::string& path);

// Lossless 8-bit RGB PNG; encoding settings are fixed so identical rasters
// produce byte-identical files.
void write_png(const std::string& path, const Raster& raster);

// Baseline JPEG at the given quality (1..100).
void write_jpeg(const std::string& path, const Raster& raster, int quality);

}  // namespace patchvote
