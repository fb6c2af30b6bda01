#pragma once

/**
 * Seeded Monte Carlo recall experiments.
 *
 * Randomness is drawn from counter-derived streams: the memory set of a
 * trial depends on (seed, trial), and the probe on (seed, noise level,
 * trial). Every model therefore sees the same memories and the same probes,
 * and the outcome does not depend on how trials are scheduled across workers.
 */

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "qam/codec.hpp"
#include "qam/excitation.hpp"
#include "qam/memories.hpp"
#include "qam/model_io.hpp"

namespace qam {

enum class NoiseKind : std::uint8_t { bipolar_flip, quaternion_replace, image_gaussian };

std::string to_string(NoiseKind kind);
NoiseKind parse_noise_kind(const std::string& name);

struct NoiseSpec {
    NoiseKind kind = NoiseKind::bipolar_flip;
    /// Flip/replace probability, or the Gaussian standard deviation for images.
    double level = 0.0;
    std::size_t width = kCifarSide;
    std::size_t height = kCifarSide;
    double codec_eps = kDefaultCodecEpsilon;
};

/**
 * bipolar_flip negates each entry with probability `level`;
 * quaternion_replace swaps each entry for a fresh angle-uniform unit
 * quaternion with probability `level`; image_gaussian decodes to RGB, adds
 * clamped Gaussian noise and re-encodes. Throws KindMismatch when
 * bipolar_flip meets a non-bipolar vector.
 */
QVector corrupt(std::span<const Quaternion> u, const NoiseSpec& spec, RandomStream& rng);

enum class DataKind : std::uint8_t { bipolar, quaternion, images };

std::string to_string(DataKind kind);

/// Excitation parameters used when a model spec omits lambda or rho.
struct ExcitationDefaults {
    double high_order = 1.0;
    double potential = 1.0;
    double exponential = 1.0;
    double rho = 1000.0;

    double lambda(ExcitationKind kind) const;
    /// bipolar q=5, L=3, alpha=4; quaternion q=20, L=3, alpha=15; images q=70, L=5, alpha=40.
    static ExcitationDefaults for_data(DataKind data);
};

/// One entry of an experiment roster.
struct ModelSpec {
    ModelKind kind = ModelKind::qrpnn;
    Excitation f = Excitation::identity();
    double rho = 1000.0;  // RKAM only

    /// e.g. "qrpnn-exp"
    std::string id() const;
    /// "qrpnn:exp:15", "qhnn-proj", "rkam:exp:3:1000"
    std::string to_text() const;
    static ModelSpec parse(const std::string& text, const ExcitationDefaults& defaults = {});
};

/// Both QHNNs, then QRCNN and QRPNN with each of the four excitations.
std::vector<ModelSpec> default_roster(DataKind data);

StoredModel build_model(const ModelSpec& spec, const MemorySet& memories, unsigned workers = 1);
/// Dispatches to the matching recall; throws KindMismatch for a bare memory set.
RecallOutcome recall_any(const StoredModel& model, std::span<const Quaternion> x0, const RecallConfig& cfg);

MemorySet random_bipolar_memories(std::size_t n, std::size_t p, RandomStream& rng);
MemorySet random_quaternion_memories(std::size_t n, std::size_t p, RandomStream& rng);

struct ImageMemories {
    MemorySet memories;
    /// Pool index of each stored image; the first one is the recall target.
    std::vector<std::size_t> pool_indices;
};

/// Draws p distinct images from the pool and encodes them.
ImageMemories sample_image_memories(const std::vector<RgbImage>& pool, std::size_t p, RandomStream& rng,
                                    double eps = kDefaultCodecEpsilon);

/**
 * Smooth random 32x32 test images (per-channel base colour, a few
 * low-frequency waves and soft blobs, quantized to 8 bits). A stand-in
 * pool when no CIFAR-10 batch is available.
 */
std::vector<RgbImage> synthetic_image_pool(std::size_t count, std::uint64_t seed);

struct ExperimentPlan {
    DataKind data = DataKind::bipolar;
    std::size_t n = 100;
    std::size_t p = 36;
    std::size_t trials = 100;
    std::vector<ModelSpec> roster;
    NoiseKind noise_kind = NoiseKind::bipolar_flip;
    std::vector<double> noise_levels{0.0};
    RecallConfig recall;
    std::uint64_t base_seed = 0;
    /// 0 selects the hardware thread count.
    unsigned workers = 1;
    /// Required for DataKind::images.
    std::shared_ptr<const std::vector<RgbImage>> image_pool;
    double codec_eps = kDefaultCodecEpsilon;

    /// Throws InvalidArgument on an inconsistent plan.
    void validate() const;
};

struct TrialResult {
    std::size_t model = 0;
    std::size_t noise_index = 0;
    std::size_t trial = 0;
    bool success = false;
    bool converged = false;
    std::size_t iterations = 0;
    /// ||u^1 - y||_2; NaN when the model could not be built or run.
    double error = 0.0;
    std::string reason;
};

struct SummaryRow {
    std::string model;
    std::string excitation;
    double lambda = 0.0;
    std::string noise_kind;
    double noise_level = 0.0;
    std::size_t trials = 0;
    double recall_probability = 0.0;
    double mean_error = 0.0;
    double mean_iterations = 0.0;
    std::uint64_t seed = 0;

    bool operator==(const SummaryRow&) const = default;
};

struct ExperimentResult {
    /// Ordered by (roster entry, noise level).
    std::vector<SummaryRow> rows;
    /// Ordered by (roster entry, noise level, trial).
    std::vector<TrialResult> trials;
    std::size_t levels_per_model = 0;

    const SummaryRow& row(std::size_t model, std::size_t noise_index) const;
};

/// A trial succeeds when ||u^1 - y||_2 <= tau.
ExperimentResult run_recall_experiment(const ExperimentPlan& plan);

/// Header, then one row per (model, level); 17 significant digits; "\n" line ends.
std::string format_csv(const std::vector<SummaryRow>& rows);
void write_csv(const std::vector<SummaryRow>& rows, const std::filesystem::path& path);
std::vector<SummaryRow> parse_csv(const std::string& text);
std::vector<SummaryRow> read_csv(const std::filesystem::path& path);

/// Per-trial log including the failure reason column.
void write_trials_csv(const ExperimentPlan& plan, const ExperimentResult& result, const std::filesystem::path& path);
/// key=value sidecar describing the run conventions.
void write_metadata(const ExperimentPlan& plan, const std::filesystem::path& path);

/**
 * Flat key=value plan file. Keys: n, p, trials, seed, models, noise_kind,
 * noise_levels, t_max, tau, update_mode, and optionally workers, images
 * (CIFAR-10 batch path), synthetic_images (pool size). '#' starts a comment.
 */
ExperimentPlan parse_plan(std::istream& in);
ExperimentPlan parse_plan_file(const std::filesystem::path& path);

struct ProbeSet {
    double noise_level = 0.0;
    std::vector<QVector> probes;
};

struct SaturationRow {
    double lambda = 0.0;
    double noise_level = 0.0;
    std::size_t probes = 0;
    double one_step_gap = 0.0;
    double recall_gap = 0.0;
    double qrpnn_error = 0.0;
    double qrcnn_error = 0.0;
    /// Recall sessions (of either model) that hit t_max.
    std::size_t unconverged = 0;
    bool failed = false;
    std::string reason;
};

/**
 * For every lambda on the ladder builds the QRCNN and QRPNN of the given
 * family and reports, per probe set, the mean one-step and full-recall gaps
 * between the two and each model's mean distance to memory `target`.
 * Overflow or a singular C marks the rung as failed instead of throwing.
 */
std::vector<SaturationRow> run_saturation_curve(const MemorySet& memories, ExcitationKind family,
                                                std::span<const double> ladder, std::span<const ProbeSet> probe_sets,
                                                const RecallConfig& cfg = {}, std::size_t target = 0);

std::string format_saturation_csv(const std::vector<SaturationRow>& rows);

/// Shortest round-trip decimal with 17 significant digits, locale independent.
std::string format_double(double v);

}  // namespace qam
