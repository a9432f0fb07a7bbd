#include "pgds/embedding.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>

#include "pgds/common.hpp"
#include "pgds/curation.hpp"
#include "pgds/simd.hpp"

namespace pgds {

namespace {

static_assert(std::endian::native == std::endian::little, "EMB1/PGDS writers assume a little-endian host");

// Splits UTF-8 into code point byte ranges; malformed bytes become single units.
std::vector<std::string_view> codepoints(std::string_view text) {
    std::vector<std::string_view> out;
    std::size_t i = 0;
    while (i < text.size()) {
        const auto lead = static_cast<unsigned char>(text[i]);
        std::size_t len = 1;
        if (lead >= 0xF0) len = 4;
        else if (lead >= 0xE0) len = 3;
        else if (lead >= 0xC0) len = 2;
        len = std::min(len, text.size() - i);
        out.push_back(text.substr(i, len));
        i += len;
    }
    return out;
}

void normalize_into(const EmbeddingVector& src, EmbeddingVector& dst, JointMode mode) {
    double norm = 0.0;
    if (mode == JointMode::Normalized) norm = std::sqrt(simd::dot(src.data(), src.data(), src.size()));
    for (double v : src) dst.push_back(mode == JointMode::Normalized && norm > 0.0 ? v / norm : v);
}

template <class T>
void write_pod(std::ostream& out, const T& v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <class T>
T read_pod(std::istream& in, const std::string& what) {
    T v{};
    in.read(reinterpret_cast<char*>(&v), sizeof(T));
    if (in.gcount() != sizeof(T)) throw ValidationError("truncated store file while reading " + what);
    return v;
}

}  // namespace

HashingProvider::HashingProvider(std::size_t text_dim, std::uint64_t seed, std::filesystem::path image_root)
    : text_dim_(text_dim), seed_(seed), image_root_(std::move(image_root)) {
    if (text_dim_ == 0) throw ValidationError("hashing provider needs a positive text dimension");
}

EmbeddingVector HashingProvider::embed_text(std::string_view text) const {
    EmbeddingVector v(text_dim_, 0.0);
    const auto cps = codepoints(text);
    for (std::size_t n = 1; n <= 3; ++n) {
        for (std::size_t i = 0; i + n <= cps.size(); ++i) {
            const char* begin = cps[i].data();
            const char* end = cps[i + n - 1].data() + cps[i + n - 1].size();
            const std::uint64_t h = hash_bytes(std::string_view(begin, static_cast<std::size_t>(end - begin)),
                                               seed_ * 4 + n);
            v[h % text_dim_] += (h >> 63) ? -1.0 : 1.0;
        }
    }
    return v;
}

std::optional<EmbeddingVector> HashingProvider::sample_image(const Sample& sample) const {
    if (!sample.image_path) return std::nullopt;
    const PerceptualHash hash = compute_phash(read_image(image_root_ / *sample.image_path));
    EmbeddingVector v(64);
    for (std::size_t i = 0; i < 64; ++i) v[i] = (hash.bits >> i) & 1 ? 1.0 : -1.0;
    return v;
}

ImportedProvider ImportedProvider::load(const std::filesystem::path& path) {
    ImportedProvider p;
    const auto records = read_records(path);
    std::size_t line = 0;
    for (const Json& r : records) {
        ++line;
        const std::string where = path.string() + " record " + std::to_string(line);
        if (!r.is_object() || !r.contains("id") || !r["id"].is_string()) throw ValidationError(where + ": missing id");
        Entry e;
        if (!r.contains("text") || !r["text"].is_array()) throw ValidationError(where + ": missing text vector");
        e.text = r["text"].get<EmbeddingVector>();
        if (r.contains("image") && !r["image"].is_null()) e.image = r["image"].get<EmbeddingVector>();
        if (p.entries_.empty()) {
            p.text_dim_ = e.text.size();
            p.image_dim_ = e.image ? e.image->size() : 0;
        }
        if (p.image_dim_ == 0 && e.image) p.image_dim_ = e.image->size();
        if (e.text.size() != p.text_dim_ || (e.image && e.image->size() != p.image_dim_)) {
            throw ValidationError(where + ": inconsistent vector dimension");
        }
        if (!p.entries_.emplace(r["id"].get<std::string>(), std::move(e)).second) {
            throw ValidationError(where + ": duplicate id");
        }
    }
    return p;
}

EmbeddingVector ImportedProvider::embed_text(std::string_view) const {
    throw ValidationError("imported embeddings cover dataset samples only, not free text");
}

EmbeddingVector ImportedProvider::sample_text(const Sample& sample) const {
    auto it = entries_.find(sample.id);
    if (it == entries_.end()) throw ValidationError("no imported vector for sample '" + sample.id + "'");
    return it->second.text;
}

std::optional<EmbeddingVector> ImportedProvider::sample_image(const Sample& sample) const {
    auto it = entries_.find(sample.id);
    if (it == entries_.end()) throw ValidationError("no imported vector for sample '" + sample.id + "'");
    return it->second.image;
}

EmbeddingVector joint_embed(const EmbeddingProvider& provider, const Sample& sample, JointMode mode) {
    EmbeddingVector text, image;
    try {
        text = provider.sample_text(sample);
        image = provider.sample_image(sample).value_or(EmbeddingVector(provider.image_dim(), 0.0));
    } catch (const std::exception& e) {
        throw RuntimeFailure("embedding sample '" + sample.id + "': " + e.what());
    }
    if (text.size() != provider.text_dim() || image.size() != provider.image_dim()) {
        throw RuntimeFailure("embedding sample '" + sample.id + "': provider returned wrong dimension");
    }
    EmbeddingVector h;
    h.reserve(text.size() + image.size());
    normalize_into(text, h, mode);
    normalize_into(image, h, mode);
    return h;
}

double cosine_similarity(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) throw ValidationError("cosine_similarity: dimension mismatch");
    const double ab = simd::dot(a.data(), b.data(), a.size());
    const double na = std::sqrt(simd::dot(a.data(), a.data(), a.size()));
    const double nb = std::sqrt(simd::dot(b.data(), b.data(), b.size()));
    if (na == 0.0 || nb == 0.0) return 0.0;
    return ab / (na * nb);
}

void EmbeddingStore::add(std::string id, std::span<const float> values) {
    if (ids_.empty() && dim_ == 0) dim_ = values.size();
    if (values.size() != dim_) throw ValidationError("store: vector for '" + id + "' has wrong dimension");
    for (float v : values) {
        if (!std::isfinite(v)) throw ValidationError("store: non-finite entry for '" + id + "'");
    }
    if (index_.contains(id)) throw ValidationError("store: duplicate id '" + id + "'");
    index_.emplace(id, ids_.size());
    matrix_.insert(matrix_.end(), values.begin(), values.end());
    const float* row_ptr = matrix_.data() + (matrix_.size() - dim_);
    norms_.push_back(std::sqrt(simd::dot(row_ptr, row_ptr, dim_)));
    ids_.push_back(std::move(id));
}

void EmbeddingStore::add(std::string id, std::span<const double> values) {
    std::vector<float> f(values.begin(), values.end());
    add(std::move(id), std::span<const float>(f));
}

std::optional<std::size_t> EmbeddingStore::find(const std::string& id) const {
    auto it = index_.find(id);
    if (it == index_.end()) return std::nullopt;
    return it->second;
}

std::span<const float> EmbeddingStore::row(const std::string& id) const {
    auto i = find(id);
    if (!i) throw ValidationError("store has no embedding for '" + id + "'");
    return row(*i);
}

bool EmbeddingStore::operator==(const EmbeddingStore& other) const {
    return dim_ == other.dim_ && ids_ == other.ids_ &&
           std::memcmp(matrix_.data(), other.matrix_.data(), matrix_.size() * sizeof(float)) == 0 &&
           matrix_.size() == other.matrix_.size();
}

std::vector<Candidate> retrieve_candidates(std::span<const float> query, const EmbeddingStore& store, std::size_t m,
                                           const std::unordered_set<std::string>& exclude) {
    if (query.size() != store.dim()) throw ValidationError("retrieve_candidates: query dimension mismatch");
    const double qnorm = std::sqrt(simd::dot(query.data(), query.data(), query.size()));
    std::vector<Candidate> pool;
    pool.reserve(store.size());
    for (std::size_t i = 0; i < store.size(); ++i) {
        if (exclude.contains(store.ids()[i])) continue;
        const double denom = qnorm * store.row_norm(i);
        const double sim = denom == 0.0 ? 0.0 : simd::dot(query.data(), store.row(i).data(), store.dim()) / denom;
        pool.push_back({store.ids()[i], i, sim});
    }
    if (pool.empty()) throw ValidationError("retrieve_candidates: empty pool after exclusion");
    const auto better = [](const Candidate& a, const Candidate& b) {
        if (a.similarity != b.similarity) return a.similarity > b.similarity;
        return a.id < b.id;
    };
    const std::size_t take = std::min(m, pool.size());
    std::partial_sort(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(take), pool.end(), better);
    pool.resize(take);
    return pool;
}

void store_save(const EmbeddingStore& store, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw RuntimeFailure("cannot write '" + path.string() + "'");
    out.write("EMB1", 4);
    write_pod(out, static_cast<std::uint32_t>(store.size()));
    write_pod(out, static_cast<std::uint32_t>(store.dim()));
    out.write(reinterpret_cast<const char*>(store.matrix().data()),
              static_cast<std::streamsize>(store.matrix().size() * sizeof(float)));
    for (const auto& id : store.ids()) {
        write_pod(out, static_cast<std::uint32_t>(id.size()));
        out.write(id.data(), static_cast<std::streamsize>(id.size()));
    }
    if (!out) throw RuntimeFailure("write failed for '" + path.string() + "'");
}

EmbeddingStore store_load(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ValidationError("cannot open store '" + path.string() + "'");
    char magic[4] = {};
    in.read(magic, 4);
    if (in.gcount() != 4 || std::memcmp(magic, "EMB1", 4) != 0) {
        throw ValidationError("'" + path.string() + "' is not an EMB1 store");
    }
    const auto count = read_pod<std::uint32_t>(in, "count");
    const auto dim = read_pod<std::uint32_t>(in, "dim");
    if (count > 0 && dim == 0) throw ValidationError("store has rows but zero dimension");
    std::vector<float> matrix(static_cast<std::size_t>(count) * dim);
    in.read(reinterpret_cast<char*>(matrix.data()), static_cast<std::streamsize>(matrix.size() * sizeof(float)));
    if (static_cast<std::size_t>(in.gcount()) != matrix.size() * sizeof(float)) {
        throw ValidationError("truncated store file while reading matrix");
    }
    EmbeddingStore store(dim);
    for (std::uint32_t i = 0; i < count; ++i) {
        const auto len = read_pod<std::uint32_t>(in, "id length");
        std::string id(len, '\0');
        in.read(id.data(), len);
        if (static_cast<std::uint32_t>(in.gcount()) != len) throw ValidationError("truncated store file while reading ids");
        store.add(std::move(id), std::span<const float>(matrix.data() + static_cast<std::size_t>(i) * dim, dim));
    }
    return store;
}

EmbeddingStore build_store(const EmbeddingProvider& provider, const DatasetSplit& split, JointMode mode) {
    EmbeddingStore store(provider.text_dim() + provider.image_dim());
    for (const Sample& s : split.samples) {
        const EmbeddingVector h = joint_embed(provider, s, mode);
        store.add(s.id, std::span<const double>(h));
    }
    return store;
}

}  // namespace pgds
