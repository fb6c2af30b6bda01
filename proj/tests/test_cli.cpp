#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "qam/codec.hpp"
#include "qam/harness.hpp"
#include "qam/text_io.hpp"
#include "test_support.hpp"

using namespace qam;
namespace fs = std::filesystem;

namespace {

const fs::path& workdir() {
    static const fs::path dir = [] {
        const fs::path d = fs::temp_directory_path() / "qam_cli_tests";
        fs::remove_all(d);
        fs::create_directories(d);
        return d;
    }();
    return dir;
}

std::string slurp(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

struct RunResult {
    int code = -1;
    std::string out;
};

RunResult run(const std::string& args) {
    const fs::path out = workdir() / "stdout.txt";
    const std::string cmd = std::string(QAM_CLI_PATH) + " " + args + " > " + out.string() + " 2> " +
                            (workdir() / "stderr.txt").string();
    const int status = std::system(cmd.c_str());
    RunResult r;
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    r.out = slurp(out);
    return r;
}

std::string path(const std::string& name) { return (workdir() / name).string(); }

void write_memories(const MemorySet& mem, const std::string& name) { write_bipolar_matrix(mem, path(name)); }

}  // namespace

TEST_CASE("orthogonal memories with identity excitation store V equal to U") {
    write_memories(test::orthogonal_memories(16, 5, false), "orth.txt");
    const auto r = run("build --model qrpnn --excitation identity --memories " + path("orth.txt") + " --out " +
                       path("orth.hqam"));
    REQUIRE(r.code == 0);
    CHECK(r.out.find("kind=qrpnn") != std::string::npos);
    CHECK(r.out.find("condition_estimate=1") != std::string::npos);
    const std::string bytes = slurp(path("orth.hqam"));
    const std::size_t header = 4 + 4 + 1 + 8 + 8 + 1 + 8 + 8;
    const std::size_t block = 16 * 5 * 4 * 8;
    REQUIRE(bytes.size() == header + 2 * block);
    CHECK(bytes.substr(header, block) == bytes.substr(header + block, block));
}

TEST_CASE("RKAM build with a tight box reports clipped multipliers") {
    write_memories(test::random_sign_memories(12, 1, 700), "one.txt");
    // 1/f(1) = e^-3 ~ 0.0498 exceeds rho = 0.01.
    const auto r = run("build --model rkam --excitation exp --lambda 3 --rho 0.01 --memories " + path("one.txt") +
                       " --out " + path("one.hqam"));
    CHECK(r.code == 0);
    CHECK(r.out.find("clipped_multipliers=12 (lower=0 upper=12)") != std::string::npos);
    CHECK(r.out.find("warning") != std::string::npos);
}

TEST_CASE("recall sessions from the command line") {
    write_memories(test::random_sign_memories(100, 10, 710), "bip.txt");
    REQUIRE(run("build --model qrpnn --excitation exp --lambda 4 --memories " + path("bip.txt") + " --out " +
                path("bip.hqam"))
                .code == 0);

    SUBCASE("a stored memory converges in one iteration") {
        const auto r = run("recall --model " + path("bip.hqam") + " --memory-index 2");
        CHECK(r.code == 0);
        CHECK(r.out.find("iterations=1 converged=true error=0") != std::string::npos);
    }
    SUBCASE("t_max = 0 leaves the input unchanged") {
        const auto mem = read_bipolar_matrix(path("bip.txt"));
        write_vector_text(mem.memory(4), path("in.txt"));
        const auto r = run("recall --model " + path("bip.hqam") + " --input " + path("in.txt") +
                           " --noise 0.3 --seed 9 --tmax 0 --out " + path("out.txt"));
        CHECK(r.code == 0);
        CHECK(r.out.find("iterations=0 converged=false") != std::string::npos);
        // The noisy input is written back untouched.
        RandomStream rng = RandomStream::derive(9, {0x7265ULL});
        const QVector noisy = corrupt(mem.memory(4), {NoiseKind::bipolar_flip, 0.3}, rng);
        CHECK(read_vector_text(path("out.txt"), 100) == noisy);
    }
    SUBCASE("noisy probe is recalled") {
        const auto mem = read_bipolar_matrix(path("bip.txt"));
        write_vector_text(mem.memory(0), path("u0.txt"));
        const auto r = run("recall --model " + path("bip.hqam") + " --input " + path("u0.txt") +
                           " --noise 0.1 --seed 3 --target-index 0");
        CHECK(r.code == 0);
        CHECK(r.out.find("converged=true error=0") != std::string::npos);
    }
    SUBCASE("length mismatch exits with the numerical error code") {
        write_vector_text(QVector(7, Quaternion{1.0}), path("short.txt"));
        CHECK(run("recall --model " + path("bip.hqam") + " --input " + path("short.txt")).code == 2);
    }
}

TEST_CASE("image recall through a CIFAR-format batch") {
    const auto pool = synthetic_image_pool(200, 21);
    write_cifar10(pool, path("pool.bin"));
    {
        std::ofstream manifest(path("images.txt"));
        for (std::size_t k = 0; k < 200; ++k) manifest << "pool.bin@" << k << '\n';
    }
    REQUIRE(run("build --model qrpnn --excitation exp --lambda 40 --memories " + path("images.txt") + " --out " +
                path("img.hqam"))
                .code == 0);
    save_ppm(load_cifar10(path("pool.bin"), 0), path("img0.ppm"));
    const auto r = run("recall --model " + path("img.hqam") + " --input " + path("img0.ppm") +
                       " --noise 0.1 --seed 4 --target " + path("img0.ppm") + " --out " + path("rec.ppm"));
    REQUIRE(r.code == 0);
    const auto pos = r.out.find("error=");
    REQUIRE(pos != std::string::npos);
    CHECK(std::stod(r.out.substr(pos + 6)) <= 1e-4);
    CHECK(load_ppm(path("rec.ppm")) == load_ppm(path("img0.ppm")));
}

TEST_CASE("bench output is reproducible for a fixed seed") {
    const std::string args = "bench-bipolar --n 30 --p 5 --trials 6 --noise-levels 0,0.2 --seed 11 --out ";
    REQUIRE(run(args + path("a.csv")).code == 0);
    REQUIRE(run(args + path("b.csv") + " --workers 2").code == 0);
    CHECK(slurp(path("a.csv")) == slurp(path("b.csv")));
    CHECK(fs::exists(path("a.csv.meta")));
    const auto rows = read_csv(path("a.csv"));
    CHECK(rows.size() == 20);
}

TEST_CASE("quaternion bench: QRPNN recalls undistorted probes") {
    REQUIRE(run("bench-quaternion --n 40 --p 6 --trials 5 --noise-levels 0 --models qrpnn:identity,qrpnn:exp "
                "--seed 2 --out " + path("q.csv") + " --trials-out " + path("q_trials.csv"))
                .code == 0);
    for (const auto& row : read_csv(path("q.csv"))) CHECK(row.recall_probability == 1.0);
    CHECK(slurp(path("q_trials.csv")).rfind("model,noise_level,trial,", 0) == 0);
}

TEST_CASE("plan files drive the benches") {
    {
        std::ofstream plan(path("plan.txt"));
        plan << "data = bipolar\nn = 20\np = 3\ntrials = 4\nmodels = qrcnn:exp\nnoise_levels = 0\nseed = 5\n";
    }
    REQUIRE(run("bench-bipolar --plan " + path("plan.txt") + " --out " + path("plan.csv")).code == 0);
    const auto rows = read_csv(path("plan.csv"));
    REQUIRE(rows.size() == 1);
    CHECK(rows[0].trials == 4);
    CHECK(rows[0].lambda == 4.0);
}

TEST_CASE("RKAM histogram metadata") {
    REQUIRE(run("rkam-hist --alpha 3 --n 40 --p 8 --out " + path("hist.csv")).code == 0);
    const std::string meta = slurp(path("hist.csv.meta"));
    const auto pos = meta.find("reference_alpha3=");
    REQUIRE(pos != std::string::npos);
    CHECK(std::stod(meta.substr(pos + 17)) == doctest::Approx(std::exp(-3.0)));
    CHECK(slurp(path("hist.csv")).rfind("alpha,bin_lo,bin_hi,count", 0) == 0);
}

TEST_CASE("saturation command") {
    const auto r = run("saturation --data bipolar --n 40 --p 5 --ladder 1,40 --noise-levels 0 --probes 2");
    CHECK(r.code == 0);
    CHECK(r.out.rfind("lambda,noise_level,probes,", 0) == 0);
}

TEST_CASE("error exit codes") {
    CHECK(run("recall --model " + path("does_not_exist.hqam") + " --memory-index 0").code == 1);
    CHECK(run("build --model qrpnn --memories " + path("missing.txt") + " --out " + path("x.hqam")).code == 1);
    CHECK(run("bench-bipolar --no-such-flag").code != 0);
    CHECK(run("").code != 0);
    write_memories(test::random_sign_memories(8, 2, 720), "dup_src.txt");
    {
        const std::string line = slurp(path("dup_src.txt")).substr(0, slurp(path("dup_src.txt")).find('\n') + 1);
        std::ofstream(path("dup.txt")) << line << line;
    }
    CHECK(run("build --model qrpnn --excitation exp --lambda 2 --memories " + path("dup.txt") + " --out " +
              path("dup.hqam"))
              .code == 2);
}
