#pragma once

/**
 * Binary model container, little-endian throughout:
 *
 *   "HQAM"          4 bytes magic
 *   version         u32 (currently 1)
 *   kind            u8  (ModelKind)
 *   n, p            u64, u64
 *   excitation      u8 kind, f64 lambda, f64 eps_p
 *   rho             f64, RKAM only
 *   U               n x p quaternions, row-major, (q0, q1, q2, q3) as f64
 *   V               n x p quaternions, QRPNN only
 *   W               n x n quaternions, QHNN only
 *   beta            n x p f64, RKAM only
 */

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "qam/memories.hpp"
#include "qam/rkam.hpp"

namespace qam {

inline constexpr std::uint32_t kContainerVersion = 1;

enum class ModelKind : std::uint8_t {
    qhnn_correlation = 0,
    qhnn_projection = 1,
    qrcnn = 2,
    qrpnn = 3,
    rkam = 4,
    memory_set = 5,
};

/// qhnn-corr, qhnn-proj, qrcnn, qrpnn, rkam, memories
std::string to_string(ModelKind kind);
ModelKind parse_model_kind(const std::string& name);

using StoredModel = std::variant<QhnnModel, QrcnnModel, QrpnnModel, RkamModel, MemorySet>;

ModelKind kind_of(const StoredModel& model);
const MemorySet& memories_of(const StoredModel& model);

std::vector<std::uint8_t> serialize(const StoredModel& model);
/// Throws MalformedFile for bad magic, unknown version or kind, or truncation.
StoredModel deserialize(std::span<const std::uint8_t> bytes);

void save_model(const StoredModel& model, const std::filesystem::path& path);
StoredModel load_model(const std::filesystem::path& path);

/// True when the file starts with the container magic.
bool is_container_file(const std::filesystem::path& path);

}  // namespace qam
