#pragma once

#include "touchsplat/camera.hpp"

#include <string>

namespace touchsplat {

/// 8-bit RGB PNG. Values are clamped to [0,1] and mapped naively
/// (round(255 v), no gamma). Throws Error on I/O failure.
void write_png(const std::string& path, const RgbImage& img);

}  // namespace touchsplat
