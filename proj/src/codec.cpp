#include "qam/codec.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <iterator>
#include <numbers>
#include <string>

#include "qam/error.hpp"

namespace qam {

namespace {

constexpr double kPi = std::numbers::pi;

// Below this cos^2(2 psi) the half-angle formulas for phi and theta lose all
// precision and the gimbal-lock convention takes over.
constexpr double kGimbalLock = 1e-12;

double wrap_to_half_open(double a) {
    // [-pi, pi)
    if (a >= kPi) a -= 2.0 * kPi;
    if (a < -kPi) a += 2.0 * kPi;
    return a;
}

std::uint8_t to_byte(double v) {
    return static_cast<std::uint8_t>(std::lround(std::clamp(v, 0.0, 1.0) * 255.0));
}

std::vector<char> read_all(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace

PhaseAngles angles_from_intensities(const Rgb& px, double eps) {
    return {(-kPi + eps) + 2.0 * (kPi - eps) * px.r,
            (-kPi / 4.0 + eps) + (kPi / 2.0 - 2.0 * eps) * px.g,
            (-kPi / 2.0 + eps) + (kPi - 2.0 * eps) * px.b};
}

Rgb intensities_from_angles(const PhaseAngles& a, double eps) {
    return {std::clamp((a.phi + kPi - eps) / (2.0 * (kPi - eps)), 0.0, 1.0),
            std::clamp((a.psi + kPi / 4.0 - eps) / (kPi / 2.0 - 2.0 * eps), 0.0, 1.0),
            std::clamp((a.theta + kPi / 2.0 - eps) / (kPi - 2.0 * eps), 0.0, 1.0)};
}

PhaseAngles extract_angles(const Quaternion& q) {
    const double a = q.q0, b = q.q1, c = q.q2, d = q.q3;
    PhaseAngles out;
    out.psi = 0.5 * std::asin(std::clamp(2.0 * (a * d - b * c), -1.0, 1.0));

    const double cos2psi_sq = a * a + b * b + c * c + d * d - 4.0 * (a * d - b * c) * (a * d - b * c);
    if (cos2psi_sq < kGimbalLock) {
        // q = e^{i phi} e^{k psi} with theta = 0, so (q0, q1) = cos(psi) (cos phi, sin phi).
        out.theta = 0.0;
        out.phi = wrap_to_half_open(std::atan2(b, a));
        return out;
    }

    out.phi = 0.5 * std::atan2(2.0 * (a * b + c * d), a * a - b * b + c * c - d * d);
    out.theta = 0.5 * std::atan2(2.0 * (a * c + b * d), a * a + b * b - c * c - d * d);
    if (out.theta >= kPi / 2.0) out.theta -= kPi;

    // The half angles determine q only up to sign; flip phi by pi when the
    // reconstruction lands on -q.
    const Quaternion rebuilt = unit_quaternion_from_angles(out.phi, out.psi, out.theta);
    if (real_of_conj_product(q, rebuilt) <= -0.5) {
        out.phi += out.phi < 0.0 ? kPi : -kPi;
    }
    out.phi = wrap_to_half_open(out.phi);
    return out;
}

QVector encode_image(const RgbImage& img, double eps) {
    if (img.pixels.size() != img.width * img.height) throw DimensionMismatch("image pixel count");
    QVector x(img.pixels.size());
    for (std::size_t i = 0; i < img.pixels.size(); ++i) {
        const Rgb& px = img.pixels[i];
        for (double v : {px.r, px.g, px.b}) {
            if (!(v >= 0.0 && v <= 1.0)) throw IntensityOutOfRange("intensity outside [0, 1]");
        }
        const PhaseAngles a = angles_from_intensities(px, eps);
        x[i] = unit_quaternion_from_angles(a.phi, a.psi, a.theta);
    }
    return x;
}

RgbImage decode_vector(std::span<const Quaternion> x, std::size_t width, std::size_t height, double eps) {
    if (x.size() != width * height) throw DimensionMismatch("vector length is not width * height");
    RgbImage img(width, height);
    for (std::size_t i = 0; i < x.size(); ++i) img.pixels[i] = intensities_from_angles(extract_angles(x[i]), eps);
    return img;
}

RgbImage gaussian_corrupt(const RgbImage& img, double sigma, RandomStream& rng) {
    if (!(sigma >= 0.0)) throw InvalidArgument("noise standard deviation must be non-negative");
    RgbImage out = img;
    if (sigma == 0.0) return out;
    for (auto& px : out.pixels) {
        for (double* ch : {&px.r, &px.g, &px.b}) *ch = std::clamp(*ch + rng.normal(0.0, sigma), 0.0, 1.0);
    }
    return out;
}

RgbImage load_ppm(const std::filesystem::path& path) {
    const std::vector<char> bytes = read_all(path);
    std::size_t pos = 0;
    auto skip_space_and_comments = [&] {
        while (pos < bytes.size()) {
            if (bytes[pos] == '#') {
                while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
            } else if (std::isspace(static_cast<unsigned char>(bytes[pos]))) {
                ++pos;
            } else {
                break;
            }
        }
    };
    auto read_uint = [&] {
        skip_space_and_comments();
        std::size_t v = 0;
        std::size_t digits = 0;
        while (pos < bytes.size() && std::isdigit(static_cast<unsigned char>(bytes[pos]))) {
            v = v * 10 + static_cast<std::size_t>(bytes[pos] - '0');
            ++pos;
            ++digits;
        }
        if (digits == 0) throw MalformedFile("PPM header: expected a number in " + path.string());
        return v;
    };

    if (bytes.size() < 2 || bytes[0] != 'P' || bytes[1] != '6') throw MalformedFile("not a P6 PPM: " + path.string());
    pos = 2;
    const std::size_t width = read_uint();
    const std::size_t height = read_uint();
    const std::size_t maxval = read_uint();
    if (maxval != 255) throw MalformedFile("PPM maxval must be 255");
    if (pos >= bytes.size() || !std::isspace(static_cast<unsigned char>(bytes[pos]))) {
        throw MalformedFile("PPM header not terminated");
    }
    ++pos;
    if (bytes.size() - pos < width * height * 3) throw MalformedFile("PPM pixel data truncated");

    RgbImage img(width, height);
    for (std::size_t i = 0; i < width * height; ++i) {
        const auto* px = reinterpret_cast<const unsigned char*>(bytes.data() + pos + 3 * i);
        img.pixels[i] = {px[0] / 255.0, px[1] / 255.0, px[2] / 255.0};
    }
    return img;
}

void save_ppm(const RgbImage& img, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path.string());
    const std::string header = "P6\n" + std::to_string(img.width) + " " + std::to_string(img.height) + "\n255\n";
    out.write(header.data(), static_cast<std::streamsize>(header.size()));
    std::vector<char> data(img.pixels.size() * 3);
    for (std::size_t i = 0; i < img.pixels.size(); ++i) {
        data[3 * i] = static_cast<char>(to_byte(img.pixels[i].r));
        data[3 * i + 1] = static_cast<char>(to_byte(img.pixels[i].g));
        data[3 * i + 2] = static_cast<char>(to_byte(img.pixels[i].b));
    }
    out.write(data.data(), static_cast<std::streamsize>(data.size()));
    if (!out) throw IoError("write failed: " + path.string());
}

std::size_t cifar10_record_count(const std::filesystem::path& path) {
    std::error_code ec;
    const auto size = std::filesystem::file_size(path, ec);
    if (ec) throw IoError("cannot stat " + path.string());
    if (size % kCifarRecordBytes != 0) throw MalformedFile("CIFAR-10 file has a truncated record");
    return size / kCifarRecordBytes;
}

namespace {

RgbImage decode_cifar_record(const unsigned char* rec) {
    constexpr std::size_t plane = kCifarSide * kCifarSide;
    RgbImage img(kCifarSide, kCifarSide);
    for (std::size_t i = 0; i < plane; ++i) {
        img.pixels[i] = {rec[1 + i] / 255.0, rec[1 + plane + i] / 255.0, rec[1 + 2 * plane + i] / 255.0};
    }
    return img;
}

}  // namespace

RgbImage load_cifar10(const std::filesystem::path& path, std::size_t index) {
    const std::size_t count = cifar10_record_count(path);
    if (index >= count) throw IndexOutOfRange("CIFAR-10 record index out of range");
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    std::vector<unsigned char> rec(kCifarRecordBytes);
    in.seekg(static_cast<std::streamoff>(index * kCifarRecordBytes));
    in.read(reinterpret_cast<char*>(rec.data()), static_cast<std::streamsize>(rec.size()));
    if (!in) throw MalformedFile("CIFAR-10 record truncated");
    return decode_cifar_record(rec.data());
}

std::vector<RgbImage> load_cifar10_batch(const std::filesystem::path& path) {
    const std::size_t count = cifar10_record_count(path);
    const std::vector<char> bytes = read_all(path);
    std::vector<RgbImage> images;
    images.reserve(count);
    for (std::size_t r = 0; r < count; ++r) {
        images.push_back(decode_cifar_record(reinterpret_cast<const unsigned char*>(bytes.data()) + r * kCifarRecordBytes));
    }
    return images;
}

std::vector<std::uint8_t> cifar10_record(const RgbImage& img, std::uint8_t label) {
    constexpr std::size_t plane = kCifarSide * kCifarSide;
    if (img.width != kCifarSide || img.height != kCifarSide) throw DimensionMismatch("CIFAR-10 images are 32x32");
    std::vector<std::uint8_t> rec(kCifarRecordBytes);
    rec[0] = label;
    for (std::size_t i = 0; i < plane; ++i) {
        rec[1 + i] = to_byte(img.pixels[i].r);
        rec[1 + plane + i] = to_byte(img.pixels[i].g);
        rec[1 + 2 * plane + i] = to_byte(img.pixels[i].b);
    }
    return rec;
}

void write_cifar10(const std::vector<RgbImage>& images, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path.string());
    for (const auto& img : images) {
        const auto rec = cifar10_record(img);
        out.write(reinterpret_cast<const char*>(rec.data()), static_cast<std::streamsize>(rec.size()));
    }
    if (!out) throw IoError("write failed: " + path.string());
}

}  // namespace qam
