#include "qam/model_io.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

#include "qam/error.hpp"

namespace qam {

namespace {

constexpr char kMagic[4] = {'H', 'Q', 'A', 'M'};

class Writer {
public:
    void bytes(const void* data, std::size_t size) {
        const auto* p = static_cast<const std::uint8_t*>(data);
        out_.insert(out_.end(), p, p + size);
    }
    void u8(std::uint8_t v) { out_.push_back(v); }
    void u32(std::uint32_t v) {
        for (int b = 0; b < 4; ++b) out_.push_back(static_cast<std::uint8_t>(v >> (8 * b)));
    }
    void u64(std::uint64_t v) {
        for (int b = 0; b < 8; ++b) out_.push_back(static_cast<std::uint8_t>(v >> (8 * b)));
    }
    void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }
    void quaternions(const QMatrix& m) {
        for (const auto& q : m.data()) {
            f64(q.q0);
            f64(q.q1);
            f64(q.q2);
            f64(q.q3);
        }
    }
    void reals(const RealMatrix& m) {
        for (double v : m.data()) f64(v);
    }
    std::vector<std::uint8_t> take() { return std::move(out_); }

private:
    std::vector<std::uint8_t> out_;
};

class Reader {
public:
    explicit Reader(std::span<const std::uint8_t> in) : in_(in) {}

    void need(std::size_t size) const {
        if (in_.size() - pos_ < size) throw MalformedFile("model container truncated");
    }
    std::uint8_t u8() {
        need(1);
        return in_[pos_++];
    }
    std::uint32_t u32() {
        need(4);
        std::uint32_t v = 0;
        for (int b = 0; b < 4; ++b) v |= static_cast<std::uint32_t>(in_[pos_++]) << (8 * b);
        return v;
    }
    std::uint64_t u64() {
        need(8);
        std::uint64_t v = 0;
        for (int b = 0; b < 8; ++b) v |= static_cast<std::uint64_t>(in_[pos_++]) << (8 * b);
        return v;
    }
    double f64() { return std::bit_cast<double>(u64()); }
    QMatrix quaternions(std::size_t rows, std::size_t cols) {
        need(rows * cols * 32);
        QMatrix m(rows, cols);
        for (auto& q : m.data()) {
            q.q0 = f64();
            q.q1 = f64();
            q.q2 = f64();
            q.q3 = f64();
        }
        return m;
    }
    RealMatrix reals(std::size_t rows, std::size_t cols) {
        need(rows * cols * 8);
        RealMatrix m(rows, cols);
        for (auto& v : m.data()) v = f64();
        return m;
    }
    bool at_end() const { return pos_ == in_.size(); }

private:
    std::span<const std::uint8_t> in_;
    std::size_t pos_ = 0;
};

struct Header {
    ModelKind kind;
    std::size_t n;
    std::size_t p;
    Excitation f;
};

Excitation excitation_of(const StoredModel& model) {
    if (const auto* m = std::get_if<QrcnnModel>(&model)) return m->excitation();
    if (const auto* m = std::get_if<QrpnnModel>(&model)) return m->excitation();
    if (const auto* m = std::get_if<RkamModel>(&model)) return m->excitation();
    return Excitation::identity();
}

}  // namespace

std::string to_string(ModelKind kind) {
    switch (kind) {
        case ModelKind::qhnn_correlation: return "qhnn-corr";
        case ModelKind::qhnn_projection: return "qhnn-proj";
        case ModelKind::qrcnn: return "qrcnn";
        case ModelKind::qrpnn: return "qrpnn";
        case ModelKind::rkam: return "rkam";
        case ModelKind::memory_set: return "memories";
    }
    return "unknown";
}

ModelKind parse_model_kind(const std::string& name) {
    for (auto k : {ModelKind::qhnn_correlation, ModelKind::qhnn_projection, ModelKind::qrcnn, ModelKind::qrpnn,
                   ModelKind::rkam, ModelKind::memory_set}) {
        if (to_string(k) == name) return k;
    }
    throw InvalidArgument("unknown model kind '" + name + "'");
}

ModelKind kind_of(const StoredModel& model) {
    struct Visitor {
        ModelKind operator()(const QhnnModel& m) const {
            return m.rule() == LearningRule::correlation ? ModelKind::qhnn_correlation : ModelKind::qhnn_projection;
        }
        ModelKind operator()(const QrcnnModel&) const { return ModelKind::qrcnn; }
        ModelKind operator()(const QrpnnModel&) const { return ModelKind::qrpnn; }
        ModelKind operator()(const RkamModel&) const { return ModelKind::rkam; }
        ModelKind operator()(const MemorySet&) const { return ModelKind::memory_set; }
    };
    return std::visit(Visitor{}, model);
}

namespace {

struct MemoriesVisitor {
    const MemorySet& operator()(const MemorySet& m) const { return m; }
    const MemorySet& operator()(const auto& m) const { return m.memories(); }
};

}  // namespace

const MemorySet& memories_of(const StoredModel& model) { return std::visit(MemoriesVisitor{}, model); }

std::vector<std::uint8_t> serialize(const StoredModel& model) {
    const MemorySet& mem = memories_of(model);
    const Excitation f = excitation_of(model);
    const ModelKind kind = kind_of(model);

    Writer w;
    w.bytes(kMagic, sizeof kMagic);
    w.u32(kContainerVersion);
    w.u8(static_cast<std::uint8_t>(kind));
    w.u64(mem.n());
    w.u64(mem.p());
    w.u8(static_cast<std::uint8_t>(f.kind));
    w.f64(f.lambda);
    w.f64(f.eps_p);
    if (const auto* rkam = std::get_if<RkamModel>(&model)) w.f64(rkam->rho());
    w.quaternions(mem.matrix());
    if (const auto* m = std::get_if<QrpnnModel>(&model)) w.quaternions(m->v());
    if (const auto* m = std::get_if<QhnnModel>(&model)) w.quaternions(m->weights());
    if (const auto* m = std::get_if<RkamModel>(&model)) w.reals(m->beta());
    return w.take();
}

StoredModel deserialize(std::span<const std::uint8_t> bytes) {
    Reader r(bytes);
    r.need(4);
    if (std::memcmp(bytes.data(), kMagic, 4) != 0) throw MalformedFile("bad magic: not a model container");
    for (int b = 0; b < 4; ++b) r.u8();
    if (r.u32() != kContainerVersion) throw MalformedFile("unsupported container version");

    const std::uint8_t raw_kind = r.u8();
    if (raw_kind > static_cast<std::uint8_t>(ModelKind::memory_set)) throw MalformedFile("unknown model kind");
    const auto kind = static_cast<ModelKind>(raw_kind);
    const std::uint64_t n = r.u64();
    const std::uint64_t p = r.u64();
    if (n == 0 || p == 0 || n > (1u << 24) || p > (1u << 24)) throw MalformedFile("implausible dimensions");
    const std::uint8_t raw_f = r.u8();
    if (raw_f > static_cast<std::uint8_t>(ExcitationKind::exponential)) throw MalformedFile("unknown excitation");
    Excitation f{static_cast<ExcitationKind>(raw_f), 0.0, 0.0};
    f.lambda = r.f64();
    f.eps_p = r.f64();
    const double rho = kind == ModelKind::rkam ? r.f64() : 0.0;

    MemorySet mem(r.quaternions(n, p));
    auto finish = [&](StoredModel m) {
        if (!r.at_end()) throw MalformedFile("trailing bytes after model container");
        return m;
    };
    switch (kind) {
        case ModelKind::qhnn_correlation:
        case ModelKind::qhnn_projection: {
            QMatrix w = r.quaternions(n, n);
            const auto rule =
                kind == ModelKind::qhnn_correlation ? LearningRule::correlation : LearningRule::projection;
            return finish(QhnnModel(rule, std::move(mem), std::move(w)));
        }
        case ModelKind::qrcnn: return finish(QrcnnModel(std::move(mem), f));
        case ModelKind::qrpnn: {
            QMatrix v = r.quaternions(n, p);
            return finish(QrpnnModel(std::move(mem), std::move(v), f));
        }
        case ModelKind::rkam: {
            RealMatrix beta = r.reals(n, p);
            return finish(RkamModel(std::move(mem), std::move(beta), rho, f));
        }
        case ModelKind::memory_set: return finish(std::move(mem));
    }
    throw MalformedFile("unknown model kind");
}

void save_model(const StoredModel& model, const std::filesystem::path& path) {
    const auto bytes = serialize(model);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path.string());
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw IoError("write failed: " + path.string());
}

StoredModel load_model(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    const std::vector<std::uint8_t> bytes{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
    return deserialize(bytes);
}

bool is_container_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    char magic[4] = {};
    in.read(magic, 4);
    return in && std::memcmp(magic, kMagic, 4) == 0;
}

}  // namespace qam
