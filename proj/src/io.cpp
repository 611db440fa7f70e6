#include "xferscore/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <set>
#include <sstream>
#include <unordered_map>

namespace xfer {

namespace {

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

double parse_double(std::string_view tok, const char* what) {
    // std::from_chars rejects "nan"/"inf" spellings only by value; it parses
    // them fine, so finiteness is checked by the caller.
    double v{};
    const char* first = tok.data();
    const char* last = tok.data() + tok.size();
    auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc() || ptr != last)
        throw ParseError(std::string("malformed ") + what + ": '" + std::string(tok) + "'");
    return v;
}

long long parse_int(std::string_view tok, const char* what) {
    long long v{};
    auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (ec != std::errc() || ptr != tok.data() + tok.size())
        throw ParseError(std::string("malformed ") + what + ": '" + std::string(tok) + "'");
    return v;
}

std::vector<std::string_view> split(std::string_view line, char sep) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const std::size_t pos = line.find(sep, start);
        if (pos == std::string_view::npos) {
            out.push_back(line.substr(start));
            break;
        }
        out.push_back(line.substr(start, pos - start));
        start = pos + 1;
    }
    return out;
}

// iterate non-empty lines, tolerating a trailing newline and CRLF
template <typename Fn>
void for_each_line(std::string_view text, Fn&& fn) {
    std::size_t start = 0;
    while (start < text.size()) {
        std::size_t end = text.find('\n', start);
        if (end == std::string_view::npos) end = text.size();
        std::string_view line = text.substr(start, end - start);
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        if (!line.empty()) fn(line);
        start = end + 1;
    }
}

void validate_finite(const Matrix& m) {
    if (!m.allFinite()) throw ValidationError("matrix contains NaN/Inf");
    if (m.rows() < 1 || m.cols() < 1) throw ValidationError("matrix is empty");
}

Matrix load_matrix_csv(const std::filesystem::path& path) {
    const std::string text = read_file(path);
    std::vector<double> values;
    Eigen::Index cols = -1, rows = 0;
    for_each_line(text, [&](std::string_view line) {
        const auto toks = split(line, ',');
        if (cols < 0)
            cols = static_cast<Eigen::Index>(toks.size());
        else if (static_cast<Eigen::Index>(toks.size()) != cols)
            throw ValidationError("ragged CSV row " + std::to_string(rows + 1) + " in " +
                                  path.string());
        for (auto tok : toks) values.push_back(parse_double(tok, "CSV value"));
        ++rows;
    });
    if (rows == 0) throw ValidationError("empty CSV file " + path.string());
    Matrix m(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i)
        for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = values[i * cols + j];
    validate_finite(m);
    return m;
}

constexpr char kFmbMagic[4] = {'F', 'M', 'B', '1'};
constexpr char kFlbMagic[4] = {'F', 'L', 'B', '1'};

std::uint64_t read_u64(const char* p) {
    std::uint64_t v;
    std::memcpy(&v, p, 8);
    return v;  // little-endian host assumed (x86/aarch64)
}

Matrix load_matrix_fmb(const std::filesystem::path& path) {
    const std::string buf = read_file(path);
    if (buf.size() < 21 || std::memcmp(buf.data(), kFmbMagic, 4) != 0)
        throw ParseError("not an FMB file: " + path.string());
    const auto dtype = static_cast<unsigned char>(buf[4]);
    if (dtype != 1 && dtype != 2) throw ParseError("unknown FMB dtype");
    const std::uint64_t rows = read_u64(buf.data() + 5);
    const std::uint64_t cols = read_u64(buf.data() + 13);
    const std::size_t elem = dtype == 1 ? 4 : 8;
    const std::size_t need = 21 + rows * cols * elem;
    if (rows == 0 || cols == 0) throw ValidationError("empty FMB matrix");
    if (buf.size() != need) throw ParseError("FMB payload size mismatch");
    Matrix m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    const char* p = buf.data() + 21;
    for (std::uint64_t i = 0; i < rows; ++i)
        for (std::uint64_t j = 0; j < cols; ++j) {
            double v;
            if (dtype == 1) {
                float f;
                std::memcpy(&f, p, 4);
                v = f;
                p += 4;
            } else {
                std::memcpy(&v, p, 8);
                p += 8;
            }
            m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = v;
        }
    validate_finite(m);
    return m;
}

}  // namespace

FeatureMatrix load_feature_matrix(const std::filesystem::path& path, MatrixFormat format) {
    return format == MatrixFormat::csv ? load_matrix_csv(path) : load_matrix_fmb(path);
}

FeatureMatrix load_feature_matrix_auto(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("cannot open " + path.string());
    char magic[4] = {};
    in.read(magic, 4);
    const bool fmb = in.gcount() == 4 && std::memcmp(magic, kFmbMagic, 4) == 0;
    return load_feature_matrix(path, fmb ? MatrixFormat::fmb : MatrixFormat::csv);
}

std::pair<std::uint64_t, std::uint64_t> peek_matrix_shape(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("cannot open " + path.string());
    char head[21] = {};
    in.read(head, 21);
    if (in.gcount() >= 21 && std::memcmp(head, kFmbMagic, 4) == 0)
        return {read_u64(head + 5), read_u64(head + 13)};

    in.clear();
    in.seekg(0);
    std::uint64_t rows = 0, cols = 0;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (rows == 0) cols = 1 + std::count(line.begin(), line.end(), ',');
        ++rows;
    }
    if (rows == 0) throw ValidationError("empty matrix file " + path.string());
    return {rows, cols};
}

void save_matrix_csv(const Eigen::Ref<const Matrix>& m, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ParseError("cannot write " + path.string());
    char buf[64];
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        for (Eigen::Index j = 0; j < m.cols(); ++j) {
            const int len = std::snprintf(buf, sizeof buf, "%.17g", m(i, j));
            if (j) out.put(',');
            out.write(buf, len);
        }
        out.put('\n');
    }
}

void save_matrix_fmb(const Eigen::Ref<const Matrix>& m, const std::filesystem::path& path,
                     FmbDtype dtype) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ParseError("cannot write " + path.string());
    out.write(kFmbMagic, 4);
    const unsigned char d = static_cast<unsigned char>(dtype);
    out.write(reinterpret_cast<const char*>(&d), 1);
    const std::uint64_t rows = m.rows(), cols = m.cols();
    out.write(reinterpret_cast<const char*>(&rows), 8);
    out.write(reinterpret_cast<const char*>(&cols), 8);
    for (Eigen::Index i = 0; i < m.rows(); ++i)
        for (Eigen::Index j = 0; j < m.cols(); ++j) {
            if (dtype == FmbDtype::f32) {
                const float f = static_cast<float>(m(i, j));
                out.write(reinterpret_cast<const char*>(&f), 4);
            } else {
                const double v = m(i, j);
                out.write(reinterpret_cast<const char*>(&v), 8);
            }
        }
}

LabelVector remap_labels(const std::vector<long long>& raw) {
    if (raw.empty()) throw ValidationError("empty label vector");
    std::unordered_map<long long, int> to_new;
    LabelVector out;
    out.labels.resize(static_cast<Eigen::Index>(raw.size()));
    for (std::size_t i = 0; i < raw.size(); ++i) {
        auto [it, inserted] = to_new.try_emplace(raw[i], static_cast<int>(to_new.size()));
        if (inserted) out.original_ids.push_back(raw[i]);
        out.labels(static_cast<Eigen::Index>(i)) = it->second;
    }
    out.num_classes = static_cast<int>(to_new.size());
    return out;
}

LabelVector load_labels(const std::filesystem::path& path) {
    const std::string buf = read_file(path);
    std::vector<long long> raw;
    if (buf.size() >= 4 && std::memcmp(buf.data(), kFlbMagic, 4) == 0) {
        if (buf.size() < 12) throw ParseError("truncated FLB file");
        const std::uint64_t n = read_u64(buf.data() + 4);
        if (n == 0) throw ValidationError("empty FLB label file");
        if (buf.size() != 12 + 4 * n) throw ParseError("FLB payload size mismatch");
        raw.reserve(n);
        for (std::uint64_t i = 0; i < n; ++i) {
            std::uint32_t v;
            std::memcpy(&v, buf.data() + 12 + 4 * i, 4);
            raw.push_back(v);
        }
    } else {
        for_each_line(buf, [&](std::string_view line) {
            raw.push_back(parse_int(line, "label"));
        });
        if (raw.empty()) throw ValidationError("empty label file " + path.string());
    }
    return remap_labels(raw);
}

void save_labels_text(const LabelVector& y, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ParseError("cannot write " + path.string());
    for (Eigen::Index i = 0; i < y.labels.size(); ++i) out << y.labels(i) << '\n';
}

void save_labels_flb(const LabelVector& y, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ParseError("cannot write " + path.string());
    out.write(kFlbMagic, 4);
    const std::uint64_t n = y.labels.size();
    out.write(reinterpret_cast<const char*>(&n), 8);
    for (Eigen::Index i = 0; i < y.labels.size(); ++i) {
        const std::uint32_t v = static_cast<std::uint32_t>(y.labels(i));
        out.write(reinterpret_cast<const char*>(&v), 4);
    }
}

SoftPredictionMatrix load_soft_predictions(const std::filesystem::path& path) {
    Matrix m = load_feature_matrix_auto(path);
    if ((m.array() < -1e-9).any() || (m.array() > 1.0 + 1e-9).any())
        throw ValidationError("soft predictions outside [0,1]");
    m = m.cwiseMax(0.0).cwiseMin(1.0);
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        const double s = m.row(i).sum();
        if (std::abs(s - 1.0) > 1e-6)
            throw ValidationError("soft-prediction row " + std::to_string(i) +
                                  " sums to " + std::to_string(s));
        m.row(i) /= s;
    }
    return m;
}

const FeatureMatrix& TaskRecord::get_features() {
    if (!features) features = load_feature_matrix_auto(features_path);
    return *features;
}

const LabelVector& TaskRecord::get_labels() {
    if (!labels) labels = load_labels(labels_path);
    return *labels;
}

const SoftPredictionMatrix& TaskRecord::get_softpred() {
    if (!softpred) {
        if (softpred_path.empty()) throw MissingFieldError("task has no soft predictions");
        softpred = load_soft_predictions(softpred_path);
    }
    return *softpred;
}

std::vector<TaskRecord> load_task_bundle(const std::filesystem::path& manifest) {
    const std::string text = read_file(manifest);
    const std::filesystem::path base = manifest.parent_path();

    std::vector<TaskRecord> records;
    std::set<std::string> ids;
    bool header_seen = false;
    for_each_line(text, [&](std::string_view line) {
        const auto toks = split(line, '\t');
        if (!header_seen) {
            if (toks.size() != 6 || toks[0] != "id" || toks[1] != "features" ||
                toks[2] != "labels" || toks[3] != "softpred" || toks[4] != "accuracy" ||
                toks[5] != "num_classes")
                throw ParseError("bad manifest header in " + manifest.string());
            header_seen = true;
            return;
        }
        if (toks.size() < 6) throw MissingFieldError("manifest row has only " +
                                                     std::to_string(toks.size()) + " fields");
        if (toks.size() > 6) throw ParseError("manifest row has extra fields");
        for (int k = 0; k < 6; ++k)
            if (toks[k].empty())
                throw MissingFieldError("empty manifest field " + std::to_string(k));

        TaskRecord rec;
        rec.id = std::string(toks[0]);
        if (!ids.insert(rec.id).second)
            throw ValidationError("duplicate task id '" + rec.id + "'");
        rec.features_path = base / std::string(toks[1]);
        rec.labels_path = base / std::string(toks[2]);
        if (toks[3] != "-") rec.softpred_path = base / std::string(toks[3]);
        rec.accuracy = parse_double(toks[4], "accuracy");
        rec.num_classes = static_cast<int>(parse_int(toks[5], "num_classes"));
        if (rec.accuracy < 0.0 || rec.accuracy > 1.0)
            throw ValidationError("accuracy outside [0,1] for task " + rec.id);
        if (rec.num_classes < 2) throw ValidationError("num_classes < 2 for task " + rec.id);
        records.push_back(std::move(rec));
    });
    if (!header_seen) throw ParseError("empty manifest " + manifest.string());
    return records;
}

void append_manifest_row(const std::filesystem::path& manifest, const TaskRecord& rec) {
    const bool fresh = !std::filesystem::exists(manifest) ||
                       std::filesystem::file_size(manifest) == 0;
    std::ofstream out(manifest, std::ios::binary | std::ios::app);
    if (!out) throw ParseError("cannot write " + manifest.string());
    if (fresh) out << "id\tfeatures\tlabels\tsoftpred\taccuracy\tnum_classes\n";
    char acc[64];
    std::snprintf(acc, sizeof acc, "%.17g", rec.accuracy);
    out << rec.id << '\t' << rec.features_path.string() << '\t' << rec.labels_path.string()
        << '\t' << (rec.softpred_path.empty() ? "-" : rec.softpred_path.string()) << '\t' << acc
        << '\t' << rec.num_classes << '\n';
}

}  // namespace xfer
