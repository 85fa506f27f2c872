#pragma once

#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "fbnll/dataset.hpp"
#include "fbnll/errors.hpp"

namespace fbnll {

namespace detail {

inline std::vector<char> read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path);
    in.seekg(0, std::ios::end);
    const auto size = in.tellg();
    in.seekg(0, std::ios::beg);
    std::vector<char> buf(static_cast<std::size_t>(size));
    if (size > 0 && !in.read(buf.data(), size)) throw IoError("cannot read " + path);
    return buf;
}

inline void write_file(const std::string& path, const std::vector<char>& buf) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + path + " for writing");
    if (!buf.empty()) out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
    if (!out) throw IoError("write failed for " + path);
}

// Little-endian scalar append/read. The build targets LE hosts; a compile-time
// check keeps the byte-level formats honest elsewhere.
template <typename T>
void append_le(std::vector<char>& buf, T v) {
    static_assert(std::endian::native == std::endian::little, "little-endian host required");
    const char* p = reinterpret_cast<const char*>(&v);
    buf.insert(buf.end(), p, p + sizeof(T));
}

template <typename T>
T read_le(const std::vector<char>& buf, std::size_t& off) {
    static_assert(std::endian::native == std::endian::little, "little-endian host required");
    T v;
    std::memcpy(&v, buf.data() + off, sizeof(T));
    off += sizeof(T);
    return v;
}

}  // namespace detail

constexpr std::size_t kCifarRecordBytes = 3073;  // 1 label byte + 3 x 1024 pixel planes
constexpr int kCifarPixels = 3072;
constexpr int kCifarClasses = 10;

/// Load a CIFAR-10 binary batch: records of one label byte followed by 3072
/// pixel bytes (R, G, B planes, each 32x32 row-major). Pixel values are kept
/// in [0, 255]. Sample ids are `id_offset + record index` so multiple batches
/// can be concatenated without collisions.
inline LabeledDataset load_cifar10_binary(const std::string& path, std::uint32_t id_offset = 0) {
    const std::vector<char> buf = detail::read_file(path);
    if (buf.size() % kCifarRecordBytes != 0)
        throw IoError(path + ": size " + std::to_string(buf.size()) + " is not a multiple of " +
                      std::to_string(kCifarRecordBytes));
    const std::size_t n = buf.size() / kCifarRecordBytes;

    LabeledDataset ds;
    ds.features.resize(static_cast<Eigen::Index>(n), kCifarPixels);
    ds.observed_labels.resize(n);
    ds.true_labels.resize(n);
    ds.sample_ids.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        const unsigned char* rec =
            reinterpret_cast<const unsigned char*>(buf.data()) + i * kCifarRecordBytes;
        const int label = rec[0];
        if (label >= kCifarClasses)
            throw IoError(path + ": record " + std::to_string(i) + " has label byte " +
                          std::to_string(label));
        ds.observed_labels[i] = label;
        ds.true_labels[i] = label;
        ds.sample_ids[i] = id_offset + static_cast<std::uint32_t>(i);
        float* row = ds.features.row(static_cast<Eigen::Index>(i)).data();
        for (int p = 0; p < kCifarPixels; ++p) row[p] = static_cast<float>(rec[1 + p]);
    }
    return ds;
}

// ---------------------------------------------------------------------------
// FBNL embedding file: "FBNL", u32 version=1, u32 n, u32 d, n*d f32 features
// row-major, n u32 sample ids, n u8 labels. All little-endian.
// ---------------------------------------------------------------------------

struct EmbeddingFile {
    Eigen::Index n = 0;
    Eigen::Index dim = 0;
    FeatureMatrix features;
    std::vector<std::uint32_t> sample_ids;
    std::vector<int> labels;
};

inline EmbeddingFile load_embedding_file(const std::string& path) {
    const std::vector<char> buf = detail::read_file(path);
    if (buf.size() < 16 || std::memcmp(buf.data(), "FBNL", 4) != 0)
        throw IoError(path + ": missing FBNL magic");
    std::size_t off = 4;
    const auto version = detail::read_le<std::uint32_t>(buf, off);
    if (version != 1)
        throw IoError(path + ": unsupported FBNL version " + std::to_string(version));
    const auto n = detail::read_le<std::uint32_t>(buf, off);
    const auto d = detail::read_le<std::uint32_t>(buf, off);
    const std::size_t expect = 16 + std::size_t{4} * n * d + std::size_t{4} * n + n;
    if (buf.size() != expect)
        throw IoError(path + ": size " + std::to_string(buf.size()) + ", expected " +
                      std::to_string(expect) + " for n=" + std::to_string(n) +
                      " d=" + std::to_string(d));

    EmbeddingFile out;
    out.n = n;
    out.dim = d;
    out.features.resize(n, d);
    if (n > 0 && d > 0)
        std::memcpy(out.features.data(), buf.data() + off, std::size_t{4} * n * d);
    off += std::size_t{4} * n * d;
    out.sample_ids.resize(n);
    if (n > 0) std::memcpy(out.sample_ids.data(), buf.data() + off, std::size_t{4} * n);
    off += std::size_t{4} * n;
    out.labels.resize(n);
    for (std::uint32_t i = 0; i < n; ++i)
        out.labels[i] = static_cast<unsigned char>(buf[off + i]);
    return out;
}

inline void save_embedding_file(const std::string& path, const FeatureMatrix& features,
                                const std::vector<std::uint32_t>& sample_ids,
                                const std::vector<int>& labels) {
    const auto n = static_cast<std::uint32_t>(features.rows());
    const auto d = static_cast<std::uint32_t>(features.cols());
    if (sample_ids.size() != n || labels.size() != n)
        throw ShapeError("embedding writer: ids/labels do not match feature rows");
    std::vector<char> buf;
    buf.reserve(16 + std::size_t{4} * n * d + std::size_t{5} * n);
    buf.insert(buf.end(), {'F', 'B', 'N', 'L'});
    detail::append_le<std::uint32_t>(buf, 1);
    detail::append_le<std::uint32_t>(buf, n);
    detail::append_le<std::uint32_t>(buf, d);
    const char* feat = reinterpret_cast<const char*>(features.data());
    buf.insert(buf.end(), feat, feat + std::size_t{4} * n * d);
    const char* ids = reinterpret_cast<const char*>(sample_ids.data());
    buf.insert(buf.end(), ids, ids + std::size_t{4} * n);
    for (std::uint32_t i = 0; i < n; ++i) {
        if (labels[i] < 0 || labels[i] > 255)
            throw ConfigError("embedding writer: label " + std::to_string(labels[i]) +
                              " does not fit in a byte");
        buf.push_back(static_cast<char>(static_cast<unsigned char>(labels[i])));
    }
    detail::write_file(path, buf);
}

// ---------------------------------------------------------------------------
// FBDS stage file: a LabeledDataset as passed between CLI stages. Layout
// mirrors FBNL with a second label array: "FBDS", u32 version=1, u32 n, u32 d,
// n*d f32 features row-major, n u32 sample ids, n u8 observed, n u8 true.
// ---------------------------------------------------------------------------

inline LabeledDataset load_stage_dataset(const std::string& path) {
    const std::vector<char> buf = detail::read_file(path);
    if (buf.size() < 16 || std::memcmp(buf.data(), "FBDS", 4) != 0)
        throw IoError(path + ": missing FBDS magic");
    std::size_t off = 4;
    const auto version = detail::read_le<std::uint32_t>(buf, off);
    if (version != 1)
        throw IoError(path + ": unsupported FBDS version " + std::to_string(version));
    const auto n = detail::read_le<std::uint32_t>(buf, off);
    const auto d = detail::read_le<std::uint32_t>(buf, off);
    const std::size_t expect = 16 + std::size_t{4} * n * d + std::size_t{4} * n + 2 * std::size_t{n};
    if (buf.size() != expect)
        throw IoError(path + ": size " + std::to_string(buf.size()) + ", expected " +
                      std::to_string(expect));

    LabeledDataset ds;
    ds.features.resize(n, d);
    if (n > 0 && d > 0) std::memcpy(ds.features.data(), buf.data() + off, std::size_t{4} * n * d);
    off += std::size_t{4} * n * d;
    ds.sample_ids.resize(n);
    if (n > 0) std::memcpy(ds.sample_ids.data(), buf.data() + off, std::size_t{4} * n);
    off += std::size_t{4} * n;
    ds.observed_labels.resize(n);
    for (std::uint32_t i = 0; i < n; ++i)
        ds.observed_labels[i] = static_cast<unsigned char>(buf[off + i]);
    off += n;
    ds.true_labels.resize(n);
    for (std::uint32_t i = 0; i < n; ++i)
        ds.true_labels[i] = static_cast<unsigned char>(buf[off + i]);
    return ds;
}

inline void save_stage_dataset(const std::string& path, const LabeledDataset& ds) {
    ds.validate();
    const auto n = static_cast<std::uint32_t>(ds.size());
    const auto d = static_cast<std::uint32_t>(ds.dim());
    std::vector<char> buf;
    buf.reserve(16 + std::size_t{4} * n * d + std::size_t{6} * n);
    buf.insert(buf.end(), {'F', 'B', 'D', 'S'});
    detail::append_le<std::uint32_t>(buf, 1);
    detail::append_le<std::uint32_t>(buf, n);
    detail::append_le<std::uint32_t>(buf, d);
    const char* feat = reinterpret_cast<const char*>(ds.features.data());
    buf.insert(buf.end(), feat, feat + std::size_t{4} * n * d);
    const char* ids = reinterpret_cast<const char*>(ds.sample_ids.data());
    buf.insert(buf.end(), ids, ids + std::size_t{4} * n);
    auto append_labels = [&](const std::vector<int>& labels) {
        for (std::uint32_t i = 0; i < n; ++i) {
            if (labels[i] < 0 || labels[i] > 255)
                throw ConfigError("stage writer: label " + std::to_string(labels[i]) +
                                  " does not fit in a byte");
            buf.push_back(static_cast<char>(static_cast<unsigned char>(labels[i])));
        }
    };
    append_labels(ds.observed_labels);
    append_labels(ds.true_labels);
    detail::write_file(path, buf);
}

// ---------------------------------------------------------------------------
// FBMP model file: "FBMP", u32 version=1, u32 model count, u32 dim, then
// count*dim f64 parameters.
// ---------------------------------------------------------------------------

inline std::vector<Eigen::VectorXd> load_models(const std::string& path) {
    const std::vector<char> buf = detail::read_file(path);
    if (buf.size() < 16 || std::memcmp(buf.data(), "FBMP", 4) != 0)
        throw IoError(path + ": missing FBMP magic");
    std::size_t off = 4;
    const auto version = detail::read_le<std::uint32_t>(buf, off);
    if (version != 1)
        throw IoError(path + ": unsupported FBMP version " + std::to_string(version));
    const auto count = detail::read_le<std::uint32_t>(buf, off);
    const auto dim = detail::read_le<std::uint32_t>(buf, off);
    if (buf.size() != 16 + std::size_t{8} * count * dim)
        throw IoError(path + ": truncated model payload");
    std::vector<Eigen::VectorXd> models(count);
    for (std::uint32_t m = 0; m < count; ++m) {
        models[m].resize(dim);
        std::memcpy(models[m].data(), buf.data() + off, std::size_t{8} * dim);
        off += std::size_t{8} * dim;
    }
    return models;
}

inline void save_models(const std::string& path, const std::vector<Eigen::VectorXd>& models) {
    std::vector<char> buf;
    const auto count = static_cast<std::uint32_t>(models.size());
    const auto dim = count > 0 ? static_cast<std::uint32_t>(models[0].size()) : 0u;
    for (const auto& m : models)
        if (static_cast<std::uint32_t>(m.size()) != dim)
            throw ShapeError("model writer: inconsistent parameter dimensions");
    buf.insert(buf.end(), {'F', 'B', 'M', 'P'});
    detail::append_le<std::uint32_t>(buf, 1);
    detail::append_le<std::uint32_t>(buf, count);
    detail::append_le<std::uint32_t>(buf, dim);
    for (const auto& m : models) {
        const char* p = reinterpret_cast<const char*>(m.data());
        buf.insert(buf.end(), p, p + std::size_t{8} * dim);
    }
    detail::write_file(path, buf);
}

}  // namespace fbnll
