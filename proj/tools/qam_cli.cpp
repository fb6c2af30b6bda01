// qam: build, run and benchmark quaternion-valued associative memories.
//
// Exit codes: 0 success, 1 I/O or file-format error, 2 numerical or
// precondition error.

#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "qam/codec.hpp"
#include "qam/error.hpp"
#include "qam/harness.hpp"
#include "qam/model_io.hpp"
#include "qam/rkam.hpp"
#include "qam/text_io.hpp"

namespace {

using namespace qam;

void write_output(const std::string& text, const std::string& path) {
    if (path.empty() || path == "-") {
        std::cout << text;
        std::cout.flush();
        return;
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path);
    out << text;
    if (!out) throw IoError("write failed: " + path);
}

std::optional<UpdateMode> parse_mode(const std::string& s) {
    if (s == "default") return std::nullopt;
    if (s == "synchronous" || s == "sync") return UpdateMode::synchronous;
    if (s == "asynchronous_cyclic" || s == "async") return UpdateMode::asynchronous_cyclic;
    throw InvalidArgument("unknown update mode '" + s + "'");
}

std::vector<double> parse_levels(const std::string& text) { return parse_number_list(text); }

// ---- build -----------------------------------------------------------------

struct MemoryInput {
    MemorySet memories;
    bool images = false;
};

MemoryInput load_memories(const std::string& path) {
    if (!std::filesystem::exists(path)) throw IoError("no such file: " + path);
    if (is_container_file(path)) return {memories_of(load_model(path)), false};
    if (looks_numeric(path)) return {read_bipolar_matrix(path), false};
    const auto images = read_image_manifest(path);
    std::vector<QVector> columns;
    for (const auto& img : images) columns.push_back(encode_image(img));
    return {MemorySet::from_vectors(columns), true};
}

struct BuildArgs {
    std::string model;
    std::string excitation = "identity";
    double lambda = 1.0;
    double rho = 1000.0;
    std::string memories;
    std::string out;
    unsigned workers = 1;
};

int cmd_build(const BuildArgs& a) {
    const MemoryInput in = load_memories(a.memories);
    ModelSpec spec;
    spec.kind = parse_model_kind(a.model);
    if (spec.kind == ModelKind::memory_set) {
        save_model(in.memories, a.out);
        std::cout << "n=" << in.memories.n() << " p=" << in.memories.p() << " kind=memories\n";
        return 0;
    }
    const ExcitationKind fk = parse_excitation_kind(a.excitation);
    spec.f = fk == ExcitationKind::identity ? Excitation::identity() : Excitation{fk, a.lambda, kPotentialEpsilon};
    spec.rho = a.rho;

    const StoredModel model = build_model(spec, in.memories, a.workers);
    save_model(model, a.out);

    std::cout << "n=" << in.memories.n() << " p=" << in.memories.p() << " kind=" << to_string(spec.kind);
    if (spec.kind != ModelKind::qhnn_correlation && spec.kind != ModelKind::qhnn_projection) {
        std::cout << " excitation=" << to_string(spec.f.kind) << " lambda=" << format_double(spec.f.lambda);
    }
    std::cout << '\n';
    if (const auto* rp = std::get_if<QrpnnModel>(&model)) {
        std::cout << "condition_estimate=" << format_double(rp->condition_estimate()) << '\n';
    }
    if (const auto* rk = std::get_if<RkamModel>(&model)) {
        std::size_t lower = 0, upper = 0;
        for (double b : rk->beta().data()) {
            lower += b <= 0.0 ? 1 : 0;
            upper += b >= rk->rho() ? 1 : 0;
        }
        std::cout << "rho=" << format_double(rk->rho()) << " kkt_residual=" << format_double(rk->kkt_residual())
                  << '\n';
        std::cout << "clipped_multipliers=" << lower + upper << " (lower=" << lower << " upper=" << upper << ")\n";
        if (lower + upper > 0) std::cout << "warning: some multipliers sit on the box bounds\n";
    }
    return 0;
}

// ---- recall ----------------------------------------------------------------

struct RecallArgs {
    std::string model;
    std::string input;
    std::optional<std::size_t> memory_index;
    std::string target;
    std::optional<std::size_t> target_index;
    std::size_t tmax = 1000;
    double tau = 1e-4;
    std::string mode = "default";
    double noise = 0.0;
    std::uint64_t seed = 0;
    std::string out;
};

bool is_ppm(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    char magic[2] = {};
    in.read(magic, 2);
    return in && magic[0] == 'P' && magic[1] == '6';
}

int cmd_recall(const RecallArgs& a) {
    const StoredModel model = load_model(a.model);
    const MemorySet& mem = memories_of(model);
    const std::size_t n = mem.n();

    QVector x;
    std::optional<std::pair<std::size_t, std::size_t>> image_shape;
    if (a.memory_index) {
        if (*a.memory_index >= mem.p()) throw IndexOutOfRange("memory index out of range");
        x = mem.memory(*a.memory_index);
    } else if (a.input.empty()) {
        throw InvalidArgument("recall needs --input or --memory-index");
    } else if (!std::filesystem::exists(a.input)) {
        throw IoError("no such file: " + a.input);
    } else if (is_ppm(a.input)) {
        const RgbImage img = load_ppm(a.input);
        image_shape = {img.width, img.height};
        x = encode_image(img);
    } else {
        x = read_vector_text(a.input, n);
    }
    if (x.size() != n) {
        throw DimensionMismatch("input has " + std::to_string(x.size()) + " components, model expects " +
                                std::to_string(n));
    }

    if (a.noise > 0.0) {
        RandomStream rng = RandomStream::derive(a.seed, {0x7265ULL});
        NoiseSpec spec;
        spec.level = a.noise;
        if (image_shape) {
            spec.kind = NoiseKind::image_gaussian;
            spec.width = image_shape->first;
            spec.height = image_shape->second;
        } else if (mem.is_bipolar()) {
            spec.kind = NoiseKind::bipolar_flip;
        } else {
            spec.kind = NoiseKind::quaternion_replace;
        }
        x = corrupt(x, spec, rng);
    }

    RecallConfig cfg;
    cfg.t_max = a.tmax;
    cfg.tau = a.tau;
    cfg.update_mode = parse_mode(a.mode);
    const RecallOutcome out = recall_any(model, x, cfg);

    std::optional<QVector> target;
    if (a.target_index) {
        if (*a.target_index >= mem.p()) throw IndexOutOfRange("target index out of range");
        target = mem.memory(*a.target_index);
    } else if (!a.target.empty()) {
        if (!std::filesystem::exists(a.target)) throw IoError("no such file: " + a.target);
        target = is_ppm(a.target) ? encode_image(load_ppm(a.target)) : read_vector_text(a.target, n);
        if (target->size() != n) throw DimensionMismatch("target length differs from the model");
    } else if (a.memory_index) {
        target = mem.memory(*a.memory_index);
    }

    if (!a.out.empty()) {
        if (image_shape) {
            save_ppm(decode_vector(out.y, image_shape->first, image_shape->second), a.out);
        } else {
            write_vector_text(out.y, a.out);
        }
    }
    std::cout << "iterations=" << out.iterations << " converged=" << (out.converged ? "true" : "false");
    if (target) std::cout << " error=" << format_double(distance(*target, out.y));
    std::cout << '\n';
    return 0;
}

// ---- bench -----------------------------------------------------------------

struct BenchArgs {
    std::string plan;
    std::size_t n = 100;
    std::size_t p = 36;
    std::size_t trials = 100;
    std::string models;
    std::string noise_levels;
    std::size_t tmax = 1000;
    double tau = 1e-4;
    std::string mode = "default";
    std::uint64_t seed = 0;
    unsigned workers = 1;
    std::string out;
    std::string trials_out;
    std::string meta;
    std::string cifar;
    std::size_t synthetic = 1000;
};

std::string default_levels(DataKind data) {
    switch (data) {
        case DataKind::bipolar: return "0,0.05,0.1,0.15,0.2,0.25,0.3,0.35,0.4,0.45,0.5";
        case DataKind::quaternion: return "0,0.1,0.2,0.3,0.4,0.5,0.6,0.7,0.8,0.9,1";
        case DataKind::images: return "0,0.05,0.1,0.15,0.2,0.25,0.3";
    }
    return "0";
}

int cmd_bench(DataKind data, const BenchArgs& a, const CLI::App& sub) {
    ExperimentPlan plan;
    if (!a.plan.empty()) {
        std::ifstream in(a.plan);
        if (!in) throw IoError("cannot open " + a.plan);
        std::stringstream text;
        text << "data=" << to_string(data) << '\n' << in.rdbuf();
        plan = parse_plan(text);
    } else {
        plan.data = data;
        plan.noise_kind = data == DataKind::bipolar      ? NoiseKind::bipolar_flip
                          : data == DataKind::quaternion ? NoiseKind::quaternion_replace
                                                         : NoiseKind::image_gaussian;
        plan.roster = default_roster(data);
        plan.noise_levels = parse_levels(default_levels(data));
        if (data == DataKind::images) plan.p = 200;
    }
    auto given = [&](const char* flag) { return sub.count(flag) > 0; };
    if (given("--n")) plan.n = a.n;
    if (given("--p")) plan.p = a.p;
    if (given("--trials")) plan.trials = a.trials;
    if (given("--seed") || a.plan.empty()) plan.base_seed = a.seed;
    if (given("--workers") || a.plan.empty()) plan.workers = a.workers;
    if (given("--tmax")) plan.recall.t_max = a.tmax;
    if (given("--tau")) plan.recall.tau = a.tau;
    if (given("--update-mode")) plan.recall.update_mode = parse_mode(a.mode);
    if (given("--noise-levels")) plan.noise_levels = parse_levels(a.noise_levels);
    if (given("--models")) {
        plan.roster.clear();
        const ExcitationDefaults defaults = ExcitationDefaults::for_data(data);
        for (const auto& m : CLI::detail::split(a.models, ',')) plan.roster.push_back(ModelSpec::parse(m, defaults));
    }
    if (data == DataKind::images && (given("--cifar") || given("--synthetic") || !plan.image_pool)) {
        std::string cifar = a.cifar;
        if (cifar.empty()) {
            if (const char* env = std::getenv("QAM_CIFAR_BIN")) cifar = env;
        }
        if (!cifar.empty()) {
            plan.image_pool = std::make_shared<const std::vector<RgbImage>>(load_cifar10_batch(cifar));
        } else {
            plan.image_pool = std::make_shared<const std::vector<RgbImage>>(synthetic_image_pool(a.synthetic, plan.base_seed));
        }
    }
    if (data == DataKind::images) plan.n = plan.image_pool->front().size();

    const ExperimentResult result = run_recall_experiment(plan);
    write_output(format_csv(result.rows), a.out);
    if (!a.trials_out.empty()) write_trials_csv(plan, result, a.trials_out);
    std::string meta = a.meta;
    if (meta.empty() && !a.out.empty() && a.out != "-") meta = a.out + ".meta";
    if (!meta.empty()) write_metadata(plan, meta);
    return 0;
}

// ---- rkam-hist -------------------------------------------------------------

struct HistArgs {
    std::vector<double> alphas{1.0, 2.0, 3.0};
    double rho = 1000.0;
    std::size_t n = 100;
    std::size_t p = 36;
    std::size_t bins = 0;
    std::uint64_t seed = 0;
    unsigned workers = 1;
    std::string out;
    std::string meta;
};

int cmd_rkam_hist(const HistArgs& a) {
    RandomStream rng = RandomStream::derive(a.seed, {0x68697374ULL});
    const MemorySet mem = random_bipolar_memories(a.n, a.p, rng);
    std::vector<RkamModel> models;
    for (double alpha : a.alphas) models.push_back(build_rkam(mem, Excitation::exponential(alpha), a.rho, a.workers));
    const PooledHistogram pooled = pooled_multiplier_histogram(models, a.bins);

    std::string csv = "alpha,bin_lo,bin_hi,count\n";
    std::string meta;
    meta += "n=" + std::to_string(a.n) + "\np=" + std::to_string(a.p) + "\nrho=" + format_double(a.rho) +
            "\nseed=" + std::to_string(a.seed) + "\nbins=" + std::to_string(pooled.per_model.front().counts.size()) +
            "\nrange=pooled [0, max multiplier]\n";
    for (std::size_t m = 0; m < models.size(); ++m) {
        const Histogram& h = pooled.per_model[m];
        for (std::size_t b = 0; b < h.counts.size(); ++b) {
            csv += format_double(a.alphas[m]) + ',' + format_double(h.edges[b]) + ',' + format_double(h.edges[b + 1]) +
                   ',' + std::to_string(h.counts[b]) + '\n';
        }
        const std::size_t ref_bin = h.bin_of(h.reference);
        const double frac =
            ref_bin < h.counts.size() ? static_cast<double>(h.counts[ref_bin]) / static_cast<double>(h.total()) : 0.0;
        const auto tag = format_double(a.alphas[m]);
        std::size_t clipped = 0;
        for (double b : models[m].beta().data()) clipped += (b <= 0.0 || b >= a.rho) ? 1 : 0;
        meta += "reference_alpha" + tag + "=" + format_double(h.reference) + '\n';
        meta += "reference_bin_fraction_alpha" + tag + "=" + format_double(frac) + '\n';
        meta += "clipped_alpha" + tag + "=" + std::to_string(clipped) + '\n';
    }
    write_output(csv, a.out);
    std::string meta_path = a.meta;
    if (meta_path.empty() && !a.out.empty() && a.out != "-") meta_path = a.out + ".meta";
    if (!meta_path.empty()) {
        write_output(meta, meta_path);
    } else {
        std::cerr << meta;
    }
    return 0;
}

// ---- saturation ------------------------------------------------------------

struct SatArgs {
    std::string data = "quaternion";
    std::string family = "exp";
    std::string ladder = "1,2,5,10,20,40,80,160";
    std::string noise_levels;
    std::size_t probes = 10;
    std::size_t n = 100;
    std::size_t p = 0;
    std::uint64_t seed = 0;
    std::string cifar;
    std::size_t synthetic = 1000;
    std::string out;
};

int cmd_saturation(const SatArgs& a) {
    RandomStream mem_rng = RandomStream::derive(a.seed, {0x736174ULL, 0});
    MemorySet mem;
    NoiseSpec noise;
    if (a.data == "bipolar") {
        mem = random_bipolar_memories(a.n, a.p ? a.p : 36, mem_rng);
        noise.kind = NoiseKind::bipolar_flip;
    } else if (a.data == "quaternion") {
        mem = random_quaternion_memories(a.n, a.p ? a.p : 36, mem_rng);
        noise.kind = NoiseKind::quaternion_replace;
    } else if (a.data == "images") {
        std::string cifar = a.cifar;
        if (cifar.empty()) {
            if (const char* env = std::getenv("QAM_CIFAR_BIN")) cifar = env;
        }
        const auto pool = cifar.empty() ? synthetic_image_pool(a.synthetic, a.seed) : load_cifar10_batch(cifar);
        mem = sample_image_memories(pool, a.p ? a.p : 200, mem_rng).memories;
        noise.kind = NoiseKind::image_gaussian;
    } else {
        throw InvalidArgument("unknown data kind '" + a.data + "'");
    }
    const std::string levels_text = a.noise_levels.empty() ? "0,0.1,0.2,0.3" : a.noise_levels;
    std::vector<ProbeSet> sets;
    const auto levels = parse_levels(levels_text);
    for (std::size_t k = 0; k < levels.size(); ++k) {
        ProbeSet set;
        set.noise_level = levels[k];
        noise.level = levels[k];
        for (std::size_t t = 0; t < a.probes; ++t) {
            RandomStream rng = RandomStream::derive(a.seed, {0x736174ULL, 1, k, t});
            set.probes.push_back(corrupt(mem.memory(0), noise, rng));
        }
        sets.push_back(std::move(set));
    }
    const auto ladder = parse_levels(a.ladder);
    const auto rows = run_saturation_curve(mem, parse_excitation_kind(a.family), ladder, sets);
    write_output(format_saturation_csv(rows), a.out);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Quaternion-valued recurrent associative memories"};
    app.require_subcommand(1, 1);

    BuildArgs build;
    auto* sub_build = app.add_subcommand("build", "Build a model from memories and write the binary container");
    sub_build->add_option("--model", build.model, "qhnn-corr|qhnn-proj|qrcnn|qrpnn|rkam|memories")->required();
    sub_build->add_option("--excitation", build.excitation, "identity|high|potential|exp");
    sub_build->add_option("--lambda", build.lambda, "Excitation parameter (q, L or alpha)");
    sub_build->add_option("--rho", build.rho, "RKAM box bound");
    sub_build->add_option("--memories", build.memories, "Bipolar text matrix, container or image manifest")
        ->required();
    sub_build->add_option("--out", build.out, "Output container path")->required();
    sub_build->add_option("--workers", build.workers, "Threads for the RKAM solve (0 = all)");

    RecallArgs rec;
    auto* sub_recall = app.add_subcommand("recall", "Run one recall session with a stored model");
    sub_recall->add_option("--model", rec.model, "Model container")->required();
    sub_recall->add_option("--input", rec.input, "PPM image or vector text file");
    sub_recall->add_option("--memory-index", rec.memory_index, "Use stored memory k as the input");
    sub_recall->add_option("--target", rec.target, "Target (PPM or vector text) for the error report");
    sub_recall->add_option("--target-index", rec.target_index, "Use stored memory k as the target");
    sub_recall->add_option("--tmax", rec.tmax, "Iteration cap");
    sub_recall->add_option("--tau", rec.tau, "Convergence tolerance");
    sub_recall->add_option("--update-mode", rec.mode, "default|synchronous|asynchronous_cyclic");
    sub_recall->add_option("--noise", rec.noise, "Corrupt the input first (flip/replace probability or sigma)");
    sub_recall->add_option("--seed", rec.seed, "Seed for --noise");
    sub_recall->add_option("--out", rec.out, "Write the retrieved vector (PPM for image input)");

    BenchArgs bench;
    auto add_bench = [&](const char* name, const char* help) {
        auto* s = app.add_subcommand(name, help);
        s->add_option("--plan", bench.plan, "key=value plan file");
        s->add_option("--n", bench.n, "Vector length");
        s->add_option("--p", bench.p, "Number of stored memories");
        s->add_option("--trials", bench.trials, "Monte Carlo trials");
        s->add_option("--models", bench.models, "Comma list of kind[:excitation[:lambda[:rho]]]");
        s->add_option("--noise-levels", bench.noise_levels, "Comma list, ascending");
        s->add_option("--tmax", bench.tmax, "Iteration cap");
        s->add_option("--tau", bench.tau, "Convergence and success tolerance");
        s->add_option("--update-mode", bench.mode, "default|synchronous|asynchronous_cyclic");
        s->add_option("--seed", bench.seed, "Base seed");
        s->add_option("--workers", bench.workers, "Concurrent trials (0 = all cores)");
        s->add_option("--out", bench.out, "CSV path (stdout when omitted)");
        s->add_option("--trials-out", bench.trials_out, "Per-trial CSV with failure reasons");
        s->add_option("--meta", bench.meta, "Metadata path (default <out>.meta)");
        return s;
    };
    auto* sub_bb = add_bench("bench-bipolar", "Recall probability sweep on random bipolar memories");
    auto* sub_bq = add_bench("bench-quaternion", "Recall probability sweep on random unit quaternion memories");
    auto* sub_bi = add_bench("bench-images", "Recall probability sweep on encoded color images");
    sub_bi->add_option("--cifar", bench.cifar, "CIFAR-10 binary batch (else $QAM_CIFAR_BIN, else synthetic)");
    sub_bi->add_option("--synthetic", bench.synthetic, "Synthetic pool size when no CIFAR batch is given");

    HistArgs hist;
    auto* sub_hist = app.add_subcommand("rkam-hist", "Histogram of RKAM multipliers for exponential kernels");
    sub_hist->add_option("--alpha", hist.alphas, "Exponential parameters")->delimiter(',');
    sub_hist->add_option("--rho", hist.rho, "Box bound");
    sub_hist->add_option("--n", hist.n, "Vector length");
    sub_hist->add_option("--p", hist.p, "Number of memories");
    sub_hist->add_option("--bins", hist.bins, "Bin count (0 = Freedman-Diaconis on pooled multipliers)");
    sub_hist->add_option("--seed", hist.seed, "Seed");
    sub_hist->add_option("--workers", hist.workers, "Threads for the QP solves");
    sub_hist->add_option("--out", hist.out, "CSV path (stdout when omitted)");
    sub_hist->add_option("--meta", hist.meta, "Metadata path (default <out>.meta)");

    SatArgs sat;
    auto* sub_sat = app.add_subcommand("saturation", "QRPNN vs QRCNN gaps along an excitation parameter ladder");
    sub_sat->add_option("--data", sat.data, "bipolar|quaternion|images");
    sub_sat->add_option("--family", sat.family, "high|potential|exp");
    sub_sat->add_option("--ladder", sat.ladder, "Comma list of lambda values");
    sub_sat->add_option("--noise-levels", sat.noise_levels, "Comma list");
    sub_sat->add_option("--probes", sat.probes, "Probes per noise level");
    sub_sat->add_option("--n", sat.n, "Vector length (random data)");
    sub_sat->add_option("--p", sat.p, "Number of memories (default 36, or 200 for images)");
    sub_sat->add_option("--seed", sat.seed, "Seed");
    sub_sat->add_option("--cifar", sat.cifar, "CIFAR-10 batch for --data images");
    sub_sat->add_option("--synthetic", sat.synthetic, "Synthetic pool size");
    sub_sat->add_option("--out", sat.out, "CSV path (stdout when omitted)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    try {
        if (sub_build->parsed()) return cmd_build(build);
        if (sub_recall->parsed()) return cmd_recall(rec);
        if (sub_bb->parsed()) return cmd_bench(DataKind::bipolar, bench, *sub_bb);
        if (sub_bq->parsed()) return cmd_bench(DataKind::quaternion, bench, *sub_bq);
        if (sub_bi->parsed()) return cmd_bench(DataKind::images, bench, *sub_bi);
        if (sub_hist->parsed()) return cmd_rkam_hist(hist);
        if (sub_sat->parsed()) return cmd_saturation(sat);
    } catch (const IoError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    } catch (const NumericalError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::filesystem::filesystem_error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
