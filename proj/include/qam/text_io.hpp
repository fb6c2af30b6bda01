#pragma once

/**
 * Plain-text companions to the binary container.
 *
 * Bipolar matrix: one fundamental memory per line, n entries of +1/-1
 * separated by spaces or commas; '#' starts a comment.
 *
 * Vector text: a single line holding either n real entries (read as real
 * quaternions) or 4n entries (q0 q1 q2 q3 per component).
 *
 * Image manifest: one image per line, either a PPM path or
 * "path.bin@index" for a CIFAR-10 record. Relative paths resolve against
 * the manifest's directory.
 */

#include <filesystem>
#include <string>
#include <vector>

#include "qam/codec.hpp"
#include "qam/memories.hpp"

namespace qam {

MemorySet read_bipolar_matrix(const std::filesystem::path& path);
void write_bipolar_matrix(const MemorySet& memories, const std::filesystem::path& path);

std::vector<double> parse_number_list(const std::string& line);

/// Reads the first non-comment line. `n` (when non-zero) selects how many
/// components are expected; 0 accepts either layout and prefers 4-tuples
/// only when some entry has a non-zero vector part.
QVector read_vector_text(const std::filesystem::path& path, std::size_t n = 0);
/// Bipolar vectors are written as n reals, everything else as 4n reals.
void write_vector_text(std::span<const Quaternion> x, const std::filesystem::path& path);

std::vector<RgbImage> read_image_manifest(const std::filesystem::path& path);

/// True when the file's first meaningful line contains only numbers.
bool looks_numeric(const std::filesystem::path& path);

}  // namespace qam
