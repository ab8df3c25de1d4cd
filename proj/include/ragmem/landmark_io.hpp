#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>

#include "ragmem/landmark.hpp"

namespace ragmem {

enum class MaskFormat { Png, Pbm };

/// PNG of any colour type is decoded to 8-bit gray and thresholded at 128.
LandmarkMask decode_png(std::span<const std::uint8_t> bytes);
/// 8-bit grayscale PNG, foreground 255.
std::string encode_png(const LandmarkMask& mask);
/// 8-bit grayscale PNG of arbitrary intensities (soft masks).
std::string encode_gray_png(std::size_t width, std::size_t height,
                            std::span<const std::uint8_t> gray);

/// Plain (P1) or raw (P4) PBM; 1 = foreground.
LandmarkMask decode_pbm(std::string_view text);
/// Plain P1 PBM.
std::string encode_pbm(const LandmarkMask& mask);

/// Sniffs the magic bytes; throws Io on unreadable or unrecognized data.
LandmarkMask decode_mask(std::span<const std::uint8_t> bytes);
LandmarkMask read_mask(const std::filesystem::path& path);
void write_mask(const LandmarkMask& mask, const std::filesystem::path& path,
                MaskFormat format);
/// Format picked from the extension (.pbm -> Pbm, otherwise Png).
void write_mask(const LandmarkMask& mask, const std::filesystem::path& path);

}  // namespace ragmem
