#include "qam/harness.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>
#include <sstream>

#include "qam/error.hpp"
#include "qam/parallel.hpp"

namespace qam {

namespace {

// Stream tags keep memory, probe and pool streams disjoint for one base seed.
constexpr std::uint64_t kTagMemories = 0x6d656d;
constexpr std::uint64_t kTagProbe = 0x70726f;
constexpr std::uint64_t kTagPool = 0x706f6f;

std::string trim(const std::string& s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> parts;
    std::string part;
    std::istringstream in(s);
    while (std::getline(in, part, sep)) parts.push_back(trim(part));
    if (!s.empty() && s.back() == sep) parts.emplace_back();
    return parts;
}

double parse_double(const std::string& s, const std::string& what) {
    double v = 0.0;
    const auto* end = s.data() + s.size();
    const auto [ptr, ec] = std::from_chars(s.data(), end, v);
    if (ec != std::errc() || ptr != end) throw InvalidArgument("cannot parse " + what + " '" + s + "'");
    return v;
}

std::uint64_t parse_uint(const std::string& s, const std::string& what) {
    std::uint64_t v = 0;
    const auto* end = s.data() + s.size();
    const auto [ptr, ec] = std::from_chars(s.data(), end, v);
    if (ec != std::errc() || ptr != end) throw InvalidArgument("cannot parse " + what + " '" + s + "'");
    return v;
}

bool is_bipolar_entry(const Quaternion& q) {
    return q.q1 == 0.0 && q.q2 == 0.0 && q.q3 == 0.0 && (q.q0 == 1.0 || q.q0 == -1.0);
}

bool is_qhnn(ModelKind kind) { return kind == ModelKind::qhnn_correlation || kind == ModelKind::qhnn_projection; }

}  // namespace

std::string format_double(double v) {
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
    if (ec != std::errc()) throw InvalidArgument("cannot format number");
    return {buf, ptr};
}

std::string to_string(NoiseKind kind) {
    switch (kind) {
        case NoiseKind::bipolar_flip: return "bipolar_flip";
        case NoiseKind::quaternion_replace: return "quaternion_replace";
        case NoiseKind::image_gaussian: return "image_gaussian";
    }
    return "unknown";
}

NoiseKind parse_noise_kind(const std::string& name) {
    for (auto k : {NoiseKind::bipolar_flip, NoiseKind::quaternion_replace, NoiseKind::image_gaussian}) {
        if (to_string(k) == name) return k;
    }
    throw InvalidArgument("unknown noise kind '" + name + "'");
}

std::string to_string(DataKind kind) {
    switch (kind) {
        case DataKind::bipolar: return "bipolar";
        case DataKind::quaternion: return "quaternion";
        case DataKind::images: return "images";
    }
    return "unknown";
}

QVector corrupt(std::span<const Quaternion> u, const NoiseSpec& spec, RandomStream& rng) {
    switch (spec.kind) {
        case NoiseKind::bipolar_flip: {
            if (!(spec.level >= 0.0 && spec.level <= 1.0)) throw InvalidArgument("flip probability outside [0, 1]");
            QVector x(u.begin(), u.end());
            for (auto& q : x) {
                if (!is_bipolar_entry(q)) throw KindMismatch("bipolar_flip noise needs a bipolar vector");
                if (rng.bernoulli(spec.level)) q = -q;
            }
            return x;
        }
        case NoiseKind::quaternion_replace: {
            if (!(spec.level >= 0.0 && spec.level <= 1.0)) {
                throw InvalidArgument("replacement probability outside [0, 1]");
            }
            QVector x(u.begin(), u.end());
            for (auto& q : x) {
                if (rng.bernoulli(spec.level)) q = rand_unit_quaternion(rng);
            }
            return x;
        }
        case NoiseKind::image_gaussian: {
            if (!(spec.level >= 0.0)) throw InvalidArgument("noise standard deviation must be non-negative");
            const RgbImage img = decode_vector(u, spec.width, spec.height, spec.codec_eps);
            return encode_image(gaussian_corrupt(img, spec.level, rng), spec.codec_eps);
        }
    }
    throw InvalidArgument("unknown noise kind");
}

std::string ModelSpec::id() const {
    if (is_qhnn(kind)) return to_string(kind);
    return to_string(kind) + "-" + to_string(f.kind);
}

std::string ModelSpec::to_text() const {
    if (is_qhnn(kind)) return to_string(kind);
    std::string out = to_string(kind) + ":" + to_string(f.kind);
    if (f.kind != ExcitationKind::identity || kind == ModelKind::rkam) out += ":" + format_double(f.lambda);
    if (kind == ModelKind::rkam) out += ":" + format_double(rho);
    return out;
}

ModelSpec ModelSpec::parse(const std::string& text, const ExcitationDefaults& defaults) {
    const auto parts = split(text, ':');
    if (parts.empty() || parts.size() > 4) throw InvalidArgument("bad model spec '" + text + "'");
    ModelSpec spec;
    spec.kind = parse_model_kind(parts[0]);
    spec.rho = defaults.rho;
    if (spec.kind == ModelKind::memory_set) throw InvalidArgument("'memories' is not a model");
    if (is_qhnn(spec.kind)) {
        if (parts.size() > 1) throw InvalidArgument("QHNN models take no excitation: '" + text + "'");
        return spec;
    }
    if (parts.size() == 1) {
        if (spec.kind == ModelKind::rkam) throw InvalidArgument("RKAM needs an excitation: '" + text + "'");
        return spec;
    }
    const ExcitationKind fk = parse_excitation_kind(parts[1]);
    const double lambda = parts.size() > 2 ? parse_double(parts[2], "lambda") : defaults.lambda(fk);
    spec.f = fk == ExcitationKind::identity ? Excitation::identity() : Excitation{fk, lambda, kPotentialEpsilon};
    if (parts.size() > 3) {
        if (spec.kind != ModelKind::rkam) throw InvalidArgument("only RKAM takes rho: '" + text + "'");
        spec.rho = parse_double(parts[3], "rho");
    }
    return spec;
}

double ExcitationDefaults::lambda(ExcitationKind kind) const {
    switch (kind) {
        case ExcitationKind::identity: return 1.0;
        case ExcitationKind::high_order: return high_order;
        case ExcitationKind::potential: return potential;
        case ExcitationKind::exponential: return exponential;
    }
    return 1.0;
}

ExcitationDefaults ExcitationDefaults::for_data(DataKind data) {
    switch (data) {
        case DataKind::bipolar: return {5.0, 3.0, 4.0, 1000.0};
        case DataKind::quaternion: return {20.0, 3.0, 15.0, 1000.0};
        case DataKind::images: return {70.0, 5.0, 40.0, 1000.0};
    }
    return {};
}

std::vector<ModelSpec> default_roster(DataKind data) {
    const ExcitationDefaults d = ExcitationDefaults::for_data(data);
    std::vector<ModelSpec> roster;
    roster.push_back({ModelKind::qhnn_correlation, Excitation::identity(), d.rho});
    roster.push_back({ModelKind::qhnn_projection, Excitation::identity(), d.rho});
    for (auto kind : {ModelKind::qrcnn, ModelKind::qrpnn}) {
        roster.push_back({kind, Excitation::identity(), d.rho});
        roster.push_back({kind, Excitation::high_order(d.high_order), d.rho});
        roster.push_back({kind, Excitation::potential(d.potential), d.rho});
        roster.push_back({kind, Excitation::exponential(d.exponential), d.rho});
    }
    return roster;
}

StoredModel build_model(const ModelSpec& spec, const MemorySet& memories, unsigned workers) {
    switch (spec.kind) {
        case ModelKind::qhnn_correlation: return build_correlation_qhnn(memories);
        case ModelKind::qhnn_projection: return build_projection_qhnn(memories);
        case ModelKind::qrcnn: return QrcnnModel(memories, spec.f);
        case ModelKind::qrpnn: return build_qrpnn(memories, spec.f);
        case ModelKind::rkam: {
            if (!memories.is_bipolar()) throw KindMismatch("RKAM needs bipolar memories");
            return build_rkam(memories, spec.f, spec.rho, workers);
        }
        case ModelKind::memory_set: break;
    }
    throw InvalidArgument("cannot build a model of kind " + to_string(spec.kind));
}

namespace {

struct RecallVisitor {
    std::span<const Quaternion> x0;
    const RecallConfig& cfg;
    RecallOutcome operator()(const MemorySet&) const {
        throw KindMismatch("a memory set container holds no model to recall with");
    }
    RecallOutcome operator()(const auto& m) const { return recall(m, x0, cfg); }
};

}  // namespace

RecallOutcome recall_any(const StoredModel& model, std::span<const Quaternion> x0, const RecallConfig& cfg) {
    return std::visit(RecallVisitor{x0, cfg}, model);
}

MemorySet random_bipolar_memories(std::size_t n, std::size_t p, RandomStream& rng) {
    if (n == 0 || p == 0) throw InvalidArgument("memory set dimensions must be positive");
    QMatrix u(n, p);
    // Column by column so memory xi depends only on the stream prefix.
    for (std::size_t xi = 0; xi < p; ++xi) {
        for (std::size_t i = 0; i < n; ++i) u(i, xi) = Quaternion{rng.bernoulli(0.5) ? 1.0 : -1.0, 0.0, 0.0, 0.0};
    }
    return MemorySet(std::move(u));
}

MemorySet random_quaternion_memories(std::size_t n, std::size_t p, RandomStream& rng) {
    if (n == 0 || p == 0) throw InvalidArgument("memory set dimensions must be positive");
    QMatrix u(n, p);
    for (std::size_t xi = 0; xi < p; ++xi) {
        for (std::size_t i = 0; i < n; ++i) u(i, xi) = rand_unit_quaternion(rng);
    }
    return MemorySet(std::move(u));
}

ImageMemories sample_image_memories(const std::vector<RgbImage>& pool, std::size_t p, RandomStream& rng,
                                    double eps) {
    if (p == 0 || p > pool.size()) throw InvalidArgument("cannot draw p distinct images from the pool");
    // Partial Fisher-Yates over pool indices.
    std::vector<std::size_t> idx(pool.size());
    for (std::size_t k = 0; k < idx.size(); ++k) idx[k] = k;
    for (std::size_t k = 0; k < p; ++k) {
        const std::size_t j = k + static_cast<std::size_t>(rng.below(idx.size() - k));
        std::swap(idx[k], idx[j]);
    }
    idx.resize(p);
    std::vector<QVector> columns;
    columns.reserve(p);
    for (std::size_t k : idx) columns.push_back(encode_image(pool[k], eps));
    return {MemorySet::from_vectors(columns), std::move(idx)};
}

std::vector<RgbImage> synthetic_image_pool(std::size_t count, std::uint64_t seed) {
    constexpr std::size_t side = kCifarSide;
    constexpr double two_pi = 2.0 * std::numbers::pi;
    std::vector<RgbImage> pool;
    pool.reserve(count);
    for (std::size_t k = 0; k < count; ++k) {
        RandomStream rng = RandomStream::derive(seed, {kTagPool, k});
        std::vector<double> planes[3];
        for (auto& plane : planes) {
            plane.assign(side * side, rng.uniform(0.15, 0.85));
            for (int wave = 0; wave < 3; ++wave) {
                const double fx = static_cast<double>(rng.below(4)) / side;
                const double fy = static_cast<double>(rng.below(4)) / side;
                const double phase = rng.uniform(0.0, two_pi);
                const double amp = rng.uniform(0.0, 0.15);
                for (std::size_t y = 0; y < side; ++y) {
                    for (std::size_t x = 0; x < side; ++x) {
                        plane[y * side + x] += amp * std::cos(two_pi * (fx * x + fy * y) + phase);
                    }
                }
            }
        }
        for (int blob = 0; blob < 2; ++blob) {
            const double cx = rng.uniform(0.0, side), cy = rng.uniform(0.0, side);
            const double radius = rng.uniform(3.0, 10.0);
            double tint[3];
            for (double& t : tint) t = rng.uniform(-0.3, 0.3);
            for (std::size_t y = 0; y < side; ++y) {
                for (std::size_t x = 0; x < side; ++x) {
                    const double d2 = (x - cx) * (x - cx) + (y - cy) * (y - cy);
                    const double w = std::exp(-d2 / (2.0 * radius * radius));
                    for (int c = 0; c < 3; ++c) planes[c][y * side + x] += tint[c] * w;
                }
            }
        }
        RgbImage img(side, side);
        auto quantize = [](double v) { return std::round(std::clamp(v, 0.0, 1.0) * 255.0) / 255.0; };
        for (std::size_t i = 0; i < side * side; ++i) {
            img.pixels[i] = {quantize(planes[0][i]), quantize(planes[1][i]), quantize(planes[2][i])};
        }
        pool.push_back(std::move(img));
    }
    return pool;
}

void ExperimentPlan::validate() const {
    if (trials == 0) throw InvalidArgument("plan needs at least one trial");
    if (p == 0) throw InvalidArgument("plan needs p >= 1");
    if (roster.empty()) throw InvalidArgument("plan has an empty model roster");
    if (noise_levels.empty()) throw InvalidArgument("plan has no noise levels");
    if (!std::is_sorted(noise_levels.begin(), noise_levels.end())) {
        throw InvalidArgument("noise levels must be sorted ascending");
    }
    for (double level : noise_levels) {
        if (!(level >= 0.0)) throw InvalidArgument("noise levels must be non-negative");
        if (noise_kind != NoiseKind::image_gaussian && level > 1.0) {
            throw InvalidArgument("noise probabilities must lie in [0, 1]");
        }
    }
    if (!(recall.tau > 0.0)) throw InvalidArgument("tau must be positive");
    switch (data) {
        case DataKind::bipolar:
            if (n == 0) throw InvalidArgument("plan needs n >= 1");
            if (noise_kind == NoiseKind::image_gaussian) throw KindMismatch("image noise needs image data");
            break;
        case DataKind::quaternion:
            if (n == 0) throw InvalidArgument("plan needs n >= 1");
            if (noise_kind != NoiseKind::quaternion_replace) {
                throw KindMismatch("quaternion data takes quaternion_replace noise");
            }
            break;
        case DataKind::images:
            if (!image_pool || image_pool->empty()) throw InvalidArgument("image experiments need an image pool");
            if (noise_kind != NoiseKind::image_gaussian) throw KindMismatch("image data takes image_gaussian noise");
            if (p > image_pool->size()) throw InvalidArgument("p exceeds the image pool size");
            break;
    }
}

const SummaryRow& ExperimentResult::row(std::size_t model, std::size_t noise_index) const {
    return rows.at(model * levels_per_model + noise_index);
}

ExperimentResult run_recall_experiment(const ExperimentPlan& plan) {
    plan.validate();
    const std::size_t models = plan.roster.size();
    const std::size_t levels = plan.noise_levels.size();
    const std::size_t trials = plan.trials;

    ExperimentResult result;
    result.levels_per_model = levels;
    result.trials.resize(models * levels * trials);
    auto slot = [&](std::size_t m, std::size_t k, std::size_t t) -> TrialResult& {
        return result.trials[(m * levels + k) * trials + t];
    };

    parallel_for(trials, plan.workers, [&](std::size_t t) {
        RandomStream mem_rng = RandomStream::derive(plan.base_seed, {kTagMemories, t});
        MemorySet memories;
        std::size_t width = 0, height = 0;
        switch (plan.data) {
            case DataKind::bipolar: memories = random_bipolar_memories(plan.n, plan.p, mem_rng); break;
            case DataKind::quaternion: memories = random_quaternion_memories(plan.n, plan.p, mem_rng); break;
            case DataKind::images: {
                ImageMemories im = sample_image_memories(*plan.image_pool, plan.p, mem_rng, plan.codec_eps);
                memories = std::move(im.memories);
                width = plan.image_pool->at(im.pool_indices[0]).width;
                height = plan.image_pool->at(im.pool_indices[0]).height;
                break;
            }
        }
        const QVector target = memories.memory(0);

        std::vector<QVector> probes(levels);
        for (std::size_t k = 0; k < levels; ++k) {
            RandomStream probe_rng = RandomStream::derive(plan.base_seed, {kTagProbe, k, t});
            NoiseSpec spec{plan.noise_kind, plan.noise_levels[k], width, height, plan.codec_eps};
            probes[k] = corrupt(target, spec, probe_rng);
        }

        for (std::size_t m = 0; m < models; ++m) {
            std::optional<StoredModel> model;
            std::string build_error;
            try {
                model.emplace(build_model(plan.roster[m], memories));
            } catch (const NumericalError& e) {
                build_error = std::string("build: ") + e.what();
            }
            for (std::size_t k = 0; k < levels; ++k) {
                TrialResult& r = slot(m, k, t);
                r.model = m;
                r.noise_index = k;
                r.trial = t;
                r.error = std::numeric_limits<double>::quiet_NaN();
                if (!model) {
                    r.reason = build_error;
                    continue;
                }
                try {
                    const RecallOutcome out = recall_any(*model, probes[k], plan.recall);
                    r.iterations = out.iterations;
                    r.converged = out.converged;
                    r.error = distance(target, out.y);
                    r.success = r.error <= plan.recall.tau;
                    if (!r.converged) r.reason = "no convergence within t_max";
                } catch (const NumericalError& e) {
                    r.reason = std::string("recall: ") + e.what();
                }
            }
        }
    });

    for (std::size_t m = 0; m < models; ++m) {
        const ModelSpec& spec = plan.roster[m];
        for (std::size_t k = 0; k < levels; ++k) {
            SummaryRow row;
            row.model = to_string(spec.kind);
            row.excitation = is_qhnn(spec.kind) ? "none" : to_string(spec.f.kind);
            row.lambda = is_qhnn(spec.kind) ? 0.0 : spec.f.lambda;
            row.noise_kind = to_string(plan.noise_kind);
            row.noise_level = plan.noise_levels[k];
            row.trials = trials;
            row.seed = plan.base_seed;
            std::size_t successes = 0, finite = 0;
            double error_sum = 0.0, iteration_sum = 0.0;
            for (std::size_t t = 0; t < trials; ++t) {
                const TrialResult& r = slot(m, k, t);
                successes += r.success ? 1 : 0;
                iteration_sum += static_cast<double>(r.iterations);
                if (std::isfinite(r.error)) {
                    error_sum += r.error;
                    ++finite;
                }
            }
            row.recall_probability = static_cast<double>(successes) / static_cast<double>(trials);
            row.mean_error = finite ? error_sum / static_cast<double>(finite) : std::numeric_limits<double>::quiet_NaN();
            row.mean_iterations = iteration_sum / static_cast<double>(trials);
            result.rows.push_back(std::move(row));
        }
    }
    return result;
}

namespace {

constexpr const char* kCsvHeader =
    "model,excitation,lambda,noise_kind,noise_level,trials,recall_probability,mean_error,mean_iterations,seed";

void write_text(const std::string& text, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path.string());
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    if (!out) throw IoError("write failed: " + path.string());
}

}  // namespace

std::string format_csv(const std::vector<SummaryRow>& rows) {
    std::string out = kCsvHeader;
    out += '\n';
    for (const auto& r : rows) {
        out += r.model + ',' + r.excitation + ',' + format_double(r.lambda) + ',' + r.noise_kind + ',' +
               format_double(r.noise_level) + ',' + std::to_string(r.trials) + ',' +
               format_double(r.recall_probability) + ',' + format_double(r.mean_error) + ',' +
               format_double(r.mean_iterations) + ',' + std::to_string(r.seed) + '\n';
    }
    return out;
}

void write_csv(const std::vector<SummaryRow>& rows, const std::filesystem::path& path) {
    write_text(format_csv(rows), path);
}

std::vector<SummaryRow> parse_csv(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line) || line != kCsvHeader) throw MalformedFile("CSV header mismatch");
    std::vector<SummaryRow> rows;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto f = split(line, ',');
        if (f.size() != 10) throw MalformedFile("CSV row needs 10 fields: " + line);
        try {
            SummaryRow r;
            r.model = f[0];
            r.excitation = f[1];
            r.lambda = parse_double(f[2], "lambda");
            r.noise_kind = f[3];
            r.noise_level = parse_double(f[4], "noise_level");
            r.trials = parse_uint(f[5], "trials");
            r.recall_probability = parse_double(f[6], "recall_probability");
            r.mean_error = parse_double(f[7], "mean_error");
            r.mean_iterations = parse_double(f[8], "mean_iterations");
            r.seed = parse_uint(f[9], "seed");
            rows.push_back(std::move(r));
        } catch (const InvalidArgument& e) {
            throw MalformedFile(e.what());
        }
    }
    return rows;
}

std::vector<SummaryRow> read_csv(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_csv(buf.str());
}

void write_trials_csv(const ExperimentPlan& plan, const ExperimentResult& result, const std::filesystem::path& path) {
    std::string out = "model,noise_level,trial,success,converged,iterations,error,reason\n";
    for (const auto& r : result.trials) {
        std::string reason = r.reason;
        std::replace(reason.begin(), reason.end(), ',', ';');
        std::replace(reason.begin(), reason.end(), '\n', ' ');
        out += plan.roster.at(r.model).id() + ',' + format_double(plan.noise_levels.at(r.noise_index)) + ',' +
               std::to_string(r.trial) + ',' + (r.success ? "1" : "0") + ',' + (r.converged ? "1" : "0") + ',' +
               std::to_string(r.iterations) + ',' + format_double(r.error) + ',' + reason + '\n';
    }
    write_text(out, path);
}

void write_metadata(const ExperimentPlan& plan, const std::filesystem::path& path) {
    std::string out;
    auto kv = [&](const std::string& k, const std::string& v) { out += k + '=' + v + '\n'; };
    kv("data", to_string(plan.data));
    kv("n", std::to_string(plan.n));
    kv("p", std::to_string(plan.p));
    kv("trials", std::to_string(plan.trials));
    kv("seed", std::to_string(plan.base_seed));
    std::string models;
    for (const auto& m : plan.roster) models += (models.empty() ? "" : ",") + m.to_text();
    kv("models", models);
    kv("noise_kind", to_string(plan.noise_kind));
    std::string levels;
    for (double l : plan.noise_levels) levels += (levels.empty() ? "" : ",") + format_double(l);
    kv("noise_levels", levels);
    kv("t_max", std::to_string(plan.recall.t_max));
    kv("tau", format_double(plan.recall.tau));
    kv("update_mode", !plan.recall.update_mode                                     ? "default"
                      : *plan.recall.update_mode == UpdateMode::synchronous ? "synchronous"
                                                                            : "asynchronous_cyclic");
    kv("success_criterion", "euclidean error to u^1 <= tau");
    kv("streams", "memories(seed,trial) probes(seed,noise_index,trial) shared by all models");
    if (plan.data == DataKind::images) {
        kv("codec_eps", format_double(plan.codec_eps));
        kv("noise_clamp", "intensities clamped to [0,1] after Gaussian noise");
        kv("channel_map", "R->phi G->psi B->theta");
    }
    write_text(out, path);
}

ExperimentPlan parse_plan(std::istream& in) {
    ExperimentPlan plan;
    bool have_noise_kind = false;
    std::optional<std::string> models_text;
    std::optional<std::string> images_path;
    std::size_t synthetic = 0;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw MalformedFile("plan line " + std::to_string(line_no) + ": expected key=value");
        }
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        try {
            if (key == "data") {
                if (value == "bipolar") plan.data = DataKind::bipolar;
                else if (value == "quaternion") plan.data = DataKind::quaternion;
                else if (value == "images") plan.data = DataKind::images;
                else throw InvalidArgument("unknown data kind '" + value + "'");
            } else if (key == "n") {
                plan.n = parse_uint(value, key);
            } else if (key == "p") {
                plan.p = parse_uint(value, key);
            } else if (key == "trials") {
                plan.trials = parse_uint(value, key);
            } else if (key == "seed") {
                plan.base_seed = parse_uint(value, key);
            } else if (key == "workers") {
                plan.workers = static_cast<unsigned>(parse_uint(value, key));
            } else if (key == "models") {
                models_text = value;
            } else if (key == "noise_kind") {
                plan.noise_kind = parse_noise_kind(value);
                have_noise_kind = true;
            } else if (key == "noise_levels") {
                plan.noise_levels.clear();
                for (const auto& v : split(value, ',')) plan.noise_levels.push_back(parse_double(v, key));
            } else if (key == "t_max") {
                plan.recall.t_max = parse_uint(value, key);
            } else if (key == "tau") {
                plan.recall.tau = parse_double(value, key);
            } else if (key == "update_mode") {
                if (value == "synchronous") plan.recall.update_mode = UpdateMode::synchronous;
                else if (value == "asynchronous_cyclic") plan.recall.update_mode = UpdateMode::asynchronous_cyclic;
                else if (value == "default") plan.recall.update_mode.reset();
                else throw InvalidArgument("unknown update mode '" + value + "'");
            } else if (key == "images") {
                images_path = value;
            } else if (key == "synthetic_images") {
                synthetic = parse_uint(value, key);
            } else {
                throw InvalidArgument("unknown plan key '" + key + "'");
            }
        } catch (const InvalidArgument& e) {
            throw MalformedFile("plan line " + std::to_string(line_no) + ": " + e.what());
        }
    }

    if (!have_noise_kind) {
        plan.noise_kind = plan.data == DataKind::bipolar      ? NoiseKind::bipolar_flip
                          : plan.data == DataKind::quaternion ? NoiseKind::quaternion_replace
                                                              : NoiseKind::image_gaussian;
    }
    const ExcitationDefaults defaults = ExcitationDefaults::for_data(plan.data);
    if (models_text) {
        for (const auto& m : split(*models_text, ',')) plan.roster.push_back(ModelSpec::parse(m, defaults));
    } else {
        plan.roster = default_roster(plan.data);
    }
    if (plan.data == DataKind::images) {
        if (images_path) {
            plan.image_pool = std::make_shared<const std::vector<RgbImage>>(load_cifar10_batch(*images_path));
        } else if (synthetic > 0) {
            plan.image_pool = std::make_shared<const std::vector<RgbImage>>(synthetic_image_pool(synthetic, plan.base_seed));
        }
        if (plan.image_pool && !plan.image_pool->empty()) plan.n = plan.image_pool->front().size();
    }
    return plan;
}

ExperimentPlan parse_plan_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path.string());
    return parse_plan(in);
}

std::vector<SaturationRow> run_saturation_curve(const MemorySet& memories, ExcitationKind family,
                                                std::span<const double> ladder, std::span<const ProbeSet> probe_sets,
                                                const RecallConfig& cfg, std::size_t target) {
    if (family == ExcitationKind::identity) throw InvalidArgument("saturation curves need a parametric family");
    if (target >= memories.p()) throw IndexOutOfRange("target memory index out of range");
    const QVector u = memories.memory(target);
    RecallConfig sync_cfg = cfg;
    sync_cfg.update_mode = UpdateMode::synchronous;

    std::vector<SaturationRow> rows;
    for (double lambda : ladder) {
        const Excitation f{family, lambda, kPotentialEpsilon};
        std::optional<QrpnnModel> rpnn;
        std::string failure;
        try {
            rpnn.emplace(build_qrpnn(memories, f));
        } catch (const NumericalError& e) {
            failure = e.what();
        }
        const QrcnnModel rcnn(memories, f);
        for (const auto& set : probe_sets) {
            SaturationRow row;
            row.lambda = lambda;
            row.noise_level = set.noise_level;
            row.probes = set.probes.size();
            if (!rpnn) {
                row.failed = true;
                row.reason = failure;
                row.one_step_gap = row.recall_gap = row.qrpnn_error = row.qrcnn_error =
                    std::numeric_limits<double>::quiet_NaN();
                rows.push_back(std::move(row));
                continue;
            }
            try {
                for (const auto& x : set.probes) {
                    row.one_step_gap += distance(rpnn->step(x), rcnn.step(x));
                    const RecallOutcome yp = recall(*rpnn, x, sync_cfg);
                    const RecallOutcome yc = recall(rcnn, x, sync_cfg);
                    row.recall_gap += distance(yp.y, yc.y);
                    row.unconverged += (yp.converged ? 0 : 1) + (yc.converged ? 0 : 1);
                    row.qrpnn_error += distance(u, yp.y);
                    row.qrcnn_error += distance(u, yc.y);
                }
                if (!set.probes.empty()) {
                    const double count = static_cast<double>(set.probes.size());
                    row.one_step_gap /= count;
                    row.recall_gap /= count;
                    row.qrpnn_error /= count;
                    row.qrcnn_error /= count;
                }
            } catch (const NumericalError& e) {
                row.failed = true;
                row.reason = e.what();
                row.one_step_gap = row.recall_gap = row.qrpnn_error = row.qrcnn_error =
                    std::numeric_limits<double>::quiet_NaN();
            }
            rows.push_back(std::move(row));
        }
    }
    return rows;
}

std::string format_saturation_csv(const std::vector<SaturationRow>& rows) {
    std::string out = "lambda,noise_level,probes,one_step_gap,recall_gap,qrpnn_error,qrcnn_error,unconverged,failed,reason\n";
    for (const auto& r : rows) {
        std::string reason = r.reason;
        std::replace(reason.begin(), reason.end(), ',', ';');
        out += format_double(r.lambda) + ',' + format_double(r.noise_level) + ',' + std::to_string(r.probes) + ',' +
               format_double(r.one_step_gap) + ',' + format_double(r.recall_gap) + ',' +
               format_double(r.qrpnn_error) + ',' + format_double(r.qrcnn_error) + ',' + std::to_string(r.unconverged) +
               ',' + (r.failed ? "1" : "0") +
               ',' + reason + '\n';
    }
    return out;
}

}  // namespace qam
