#include "qam/text_io.hpp"

#include <charconv>
#include <fstream>
#include <optional>

#include "qam/error.hpp"
#include "qam/harness.hpp"

namespace qam {

namespace {

std::string strip(std::string line) {
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos) return {};
    const auto last = line.find_last_not_of(" \t\r");
    return line.substr(first, last - first + 1);
}

std::vector<std::string> meaningful_lines(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path.string());
    std::vector<std::string> lines;
    std::string line;
    while (std::getline(in, line)) {
        line = strip(line);
        if (!line.empty()) lines.push_back(std::move(line));
    }
    return lines;
}

void write_text(const std::string& text, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path.string());
    out << text;
    if (!out) throw IoError("write failed: " + path.string());
}

}  // namespace

std::vector<double> parse_number_list(const std::string& line) {
    std::vector<double> values;
    std::size_t pos = 0;
    auto is_sep = [](char c) { return c == ' ' || c == '\t' || c == ',' || c == '\r'; };
    while (pos < line.size()) {
        while (pos < line.size() && is_sep(line[pos])) ++pos;
        if (pos >= line.size()) break;
        std::size_t end = pos;
        while (end < line.size() && !is_sep(line[end])) ++end;
        // from_chars rejects a leading '+'.
        std::size_t start = line[pos] == '+' ? pos + 1 : pos;
        double v = 0.0;
        const auto [ptr, ec] = std::from_chars(line.data() + start, line.data() + end, v);
        if (ec != std::errc() || ptr != line.data() + end) {
            throw MalformedFile("not a number: '" + line.substr(pos, end - pos) + "'");
        }
        values.push_back(v);
        pos = end;
    }
    return values;
}

MemorySet read_bipolar_matrix(const std::filesystem::path& path) {
    const auto lines = meaningful_lines(path);
    if (lines.empty()) throw MalformedFile("empty memory file " + path.string());
    std::vector<QVector> columns;
    for (const auto& line : lines) {
        const auto values = parse_number_list(line);
        if (!columns.empty() && values.size() != columns.front().size()) {
            throw MalformedFile("memory rows differ in length in " + path.string());
        }
        QVector u;
        u.reserve(values.size());
        for (double v : values) {
            if (v != 1.0 && v != -1.0) throw MalformedFile("bipolar memory entries must be +1 or -1");
            u.push_back(Quaternion{v, 0.0, 0.0, 0.0});
        }
        columns.push_back(std::move(u));
    }
    return MemorySet::from_vectors(columns);
}

void write_bipolar_matrix(const MemorySet& memories, const std::filesystem::path& path) {
    if (!memories.is_bipolar()) throw KindMismatch("only bipolar memories have a text form");
    std::string out;
    for (std::size_t xi = 0; xi < memories.p(); ++xi) {
        for (std::size_t i = 0; i < memories.n(); ++i) {
            if (i) out += ' ';
            out += memories.matrix()(i, xi).q0 > 0 ? "1" : "-1";
        }
        out += '\n';
    }
    write_text(out, path);
}

QVector read_vector_text(const std::filesystem::path& path, std::size_t n) {
    const auto lines = meaningful_lines(path);
    if (lines.empty()) throw MalformedFile("empty vector file " + path.string());
    const auto values = parse_number_list(lines.front());
    if (values.empty()) throw MalformedFile("empty vector in " + path.string());
    bool quadruples;
    if (n != 0 && values.size() == n) {
        quadruples = false;
    } else if (n != 0 && values.size() == 4 * n) {
        quadruples = true;
    } else if (n != 0) {
        throw DimensionMismatch("vector has " + std::to_string(values.size()) + " entries, model expects " +
                                std::to_string(n) + " components");
    } else {
        quadruples = values.size() % 4 == 0 && [&] {
            for (std::size_t k = 0; k < values.size(); k += 4) {
                if (values[k + 1] != 0.0 || values[k + 2] != 0.0 || values[k + 3] != 0.0) return true;
            }
            return false;
        }();
    }
    QVector x;
    if (quadruples) {
        for (std::size_t k = 0; k < values.size(); k += 4) {
            x.push_back(Quaternion{values[k], values[k + 1], values[k + 2], values[k + 3]});
        }
    } else {
        for (double v : values) x.push_back(Quaternion{v, 0.0, 0.0, 0.0});
    }
    return x;
}

void write_vector_text(std::span<const Quaternion> x, const std::filesystem::path& path) {
    bool real = true;
    for (const auto& q : x) real = real && q.q1 == 0.0 && q.q2 == 0.0 && q.q3 == 0.0;
    std::string out;
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (i) out += ' ';
        if (real) {
            out += format_double(x[i].q0);
        } else {
            out += format_double(x[i].q0) + ' ' + format_double(x[i].q1) + ' ' + format_double(x[i].q2) + ' ' +
                   format_double(x[i].q3);
        }
    }
    out += '\n';
    write_text(out, path);
}

std::vector<RgbImage> read_image_manifest(const std::filesystem::path& path) {
    const auto lines = meaningful_lines(path);
    if (lines.empty()) throw MalformedFile("empty image manifest " + path.string());
    const auto base = path.parent_path();
    std::vector<RgbImage> images;
    for (const auto& line : lines) {
        std::string file = line;
        std::optional<std::size_t> record;
        if (const auto at = line.rfind('@'); at != std::string::npos) {
            file = line.substr(0, at);
            std::size_t idx = 0;
            const std::string digits = line.substr(at + 1);
            const auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), idx);
            if (ec != std::errc() || ptr != digits.data() + digits.size()) {
                throw MalformedFile("bad CIFAR record index in manifest line '" + line + "'");
            }
            record = idx;
        }
        std::filesystem::path p = file;
        if (p.is_relative()) p = base / p;
        images.push_back(record ? load_cifar10(p, *record) : load_ppm(p));
    }
    for (const auto& img : images) {
        if (img.width != images.front().width || img.height != images.front().height) {
            throw DimensionMismatch("manifest images differ in size");
        }
    }
    return images;
}

bool looks_numeric(const std::filesystem::path& path) {
    const auto lines = meaningful_lines(path);
    if (lines.empty()) return false;
    try {
        return !parse_number_list(lines.front()).empty();
    } catch (const MalformedFile&) {
        return false;
    }
}

}  // namespace qam
