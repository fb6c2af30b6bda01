#pragma once

/**
 * RGB image <-> unit quaternion vector codec based on the phase-angle
 * representation q = e^{i phi} e^{k psi} e^{j theta}, plus PPM (P6) and
 * CIFAR-10 binary I/O and Gaussian channel noise.
 *
 * Channel mapping: red -> phi, green -> psi, blue -> theta.
 */

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "qam/quaternion.hpp"
#include "qam/random.hpp"

namespace qam {

struct Rgb {
    double r = 0.0;
    double g = 0.0;
    double b = 0.0;
    bool operator==(const Rgb&) const = default;
};

/// Row-major RGB image with intensities in [0, 1].
struct RgbImage {
    std::size_t width = 0;
    std::size_t height = 0;
    std::vector<Rgb> pixels;

    RgbImage() = default;
    RgbImage(std::size_t w, std::size_t h, Rgb fill = {}) : width(w), height(h), pixels(w * h, fill) {}

    std::size_t size() const noexcept { return pixels.size(); }
    bool operator==(const RgbImage&) const = default;
};

struct PhaseAngles {
    double phi = 0.0;    // [-pi, pi)
    double psi = 0.0;    // [-pi/4, pi/4]
    double theta = 0.0;  // [-pi/2, pi/2)
};

inline constexpr double kDefaultCodecEpsilon = 1e-4;

PhaseAngles angles_from_intensities(const Rgb& px, double eps = kDefaultCodecEpsilon);
/// Inverse affine maps, clamped to [0, 1].
Rgb intensities_from_angles(const PhaseAngles& a, double eps = kDefaultCodecEpsilon);

/// Phase angles of a unit quaternion. Where |psi| reaches pi/4 the pair
/// (phi, theta) is not unique; there theta = 0 and phi takes the rotation.
PhaseAngles extract_angles(const Quaternion& q);

/// Throws IntensityOutOfRange for intensities outside [0, 1].
QVector encode_image(const RgbImage& img, double eps = kDefaultCodecEpsilon);
/// Total on unit vectors; throws DimensionMismatch when x.size() != width * height.
RgbImage decode_vector(std::span<const Quaternion> x, std::size_t width, std::size_t height,
                       double eps = kDefaultCodecEpsilon);

/// Adds N(0, sigma^2) to every channel independently, then clamps to [0, 1].
RgbImage gaussian_corrupt(const RgbImage& img, double sigma, RandomStream& rng);

/// Binary PPM (P6) with maxval 255.
RgbImage load_ppm(const std::filesystem::path& path);
void save_ppm(const RgbImage& img, const std::filesystem::path& path);

inline constexpr std::size_t kCifarSide = 32;
inline constexpr std::size_t kCifarRecordBytes = 1 + 3 * kCifarSide * kCifarSide;

/// Number of complete 3073-byte records; throws MalformedFile on a partial trailing record.
std::size_t cifar10_record_count(const std::filesystem::path& path);
RgbImage load_cifar10(const std::filesystem::path& path, std::size_t index);
std::vector<RgbImage> load_cifar10_batch(const std::filesystem::path& path);

/// Encodes one record: label byte, then the R, G and B planes (intensity * 255, rounded).
std::vector<std::uint8_t> cifar10_record(const RgbImage& img, std::uint8_t label = 0);
void write_cifar10(const std::vector<RgbImage>& images, const std::filesystem::path& path);

}  // namespace qam
