#include "film/checkpoint.hpp"

#include <cstdint>
#include <fstream>

#include "film/errors.hpp"

namespace film::checkpoint {

namespace {

constexpr char kMagic[8] = {'F', 'I', 'L', 'M', 'C', 'K', 'P', '1'};

void put_bytes(std::ostream& out, const void* p, std::size_t n) {
    out.write(static_cast<const char*>(p), static_cast<std::streamsize>(n));
}

void get_bytes(std::istream& in, void* p, std::size_t n) {
    in.read(static_cast<char*>(p), static_cast<std::streamsize>(n));
    if (!in) throw DataError("checkpoint: truncated file");
}

void put_i64(std::ostream& out, std::int64_t v) { put_bytes(out, &v, sizeof(v)); }
void put_u64(std::ostream& out, std::uint64_t v) { put_bytes(out, &v, sizeof(v)); }
void put_u8(std::ostream& out, std::uint8_t v) { put_bytes(out, &v, sizeof(v)); }
void put_f64(std::ostream& out, double v) { put_bytes(out, &v, sizeof(v)); }

std::int64_t get_i64(std::istream& in) {
    std::int64_t v;
    get_bytes(in, &v, sizeof(v));
    return v;
}
std::uint64_t get_u64(std::istream& in) {
    std::uint64_t v;
    get_bytes(in, &v, sizeof(v));
    return v;
}
std::uint8_t get_u8(std::istream& in) {
    std::uint8_t v;
    get_bytes(in, &v, sizeof(v));
    return v;
}
double get_f64(std::istream& in) {
    double v;
    get_bytes(in, &v, sizeof(v));
    return v;
}

void put_vector(std::ostream& out, const Eigen::VectorXd& v) {
    put_i64(out, v.size());
    put_bytes(out, v.data(), sizeof(double) * static_cast<std::size_t>(v.size()));
}

Eigen::VectorXd get_vector(std::istream& in) {
    const std::int64_t n = get_i64(in);
    if (n < 0) throw DataError("checkpoint: negative vector size");
    Eigen::VectorXd v(n);
    get_bytes(in, v.data(), sizeof(double) * static_cast<std::size_t>(n));
    return v;
}

void put_cmatrix(std::ostream& out, const Eigen::MatrixXcd& m) {
    put_i64(out, m.rows());
    put_i64(out, m.cols());
    put_bytes(out, m.data(), 2 * sizeof(double) * static_cast<std::size_t>(m.size()));
}

Eigen::MatrixXcd get_cmatrix(std::istream& in) {
    const std::int64_t r = get_i64(in);
    const std::int64_t c = get_i64(in);
    if (r < 0 || c < 0) throw DataError("checkpoint: negative matrix size");
    Eigen::MatrixXcd m(r, c);
    get_bytes(in, m.data(), 2 * sizeof(double) * static_cast<std::size_t>(m.size()));
    return m;
}

void put_weights(std::ostream& out, const spectral::SpectralWeights& w) {
    const bool full = w.variant == spectral::SpectralWeights::Variant::full;
    put_u8(out, full ? 0 : 1);
    if (full) {
        put_i64(out, static_cast<std::int64_t>(w.full_w.size()));
        for (const auto& m : w.full_w) put_cmatrix(out, m);
    } else {
        put_i64(out, w.rank);
        put_cmatrix(out, w.w0);
        put_i64(out, static_cast<std::int64_t>(w.w1.size()));
        for (const auto& m : w.w1) put_cmatrix(out, m);
        put_cmatrix(out, w.w2);
    }
}

spectral::SpectralWeights get_weights(std::istream& in) {
    spectral::SpectralWeights w;
    const std::uint8_t tag = get_u8(in);
    if (tag == 0) {
        w.variant = spectral::SpectralWeights::Variant::full;
        const std::int64_t m = get_i64(in);
        for (std::int64_t i = 0; i < m; ++i) w.full_w.push_back(get_cmatrix(in));
    } else if (tag == 1) {
        w.variant = spectral::SpectralWeights::Variant::low_rank;
        w.rank = get_i64(in);
        w.w0 = get_cmatrix(in);
        const std::int64_t m = get_i64(in);
        for (std::int64_t i = 0; i < m; ++i) w.w1.push_back(get_cmatrix(in));
        w.w2 = get_cmatrix(in);
    } else {
        throw DataError("checkpoint: unknown weight variant tag");
    }
    return w;
}

} // namespace

void save(const std::string& path, const Checkpoint& ckpt) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("checkpoint: cannot write " + path);
    put_bytes(out, kMagic, sizeof(kMagic));

    const model::FiLMConfig& c = ckpt.config;
    put_i64(out, c.horizon);
    put_i64(out, static_cast<std::int64_t>(c.multiscale_factors.size()));
    for (Eigen::Index f : c.multiscale_factors) put_i64(out, f);
    put_i64(out, c.legendre_order);
    put_i64(out, c.mode_count);
    put_u8(out, static_cast<std::uint8_t>(c.mode_policy));
    put_i64(out, c.rank);
    put_u8(out, c.revin_enabled ? 1 : 0);
    put_f64(out, c.epsilon_norm);
    put_i64(out, c.channels);
    put_u64(out, ckpt.seed);

    put_i64(out, static_cast<std::int64_t>(ckpt.mode_indices.size()));
    for (const auto& modes : ckpt.mode_indices) {
        put_i64(out, static_cast<std::int64_t>(modes.size()));
        for (Eigen::Index k : modes) put_i64(out, k);
    }

    put_i64(out, static_cast<std::int64_t>(ckpt.params.expert_weights.size()));
    for (const auto& w : ckpt.params.expert_weights) put_weights(out, w);
    put_vector(out, ckpt.params.merge_weights);
    put_vector(out, ckpt.params.revin.gamma);
    put_vector(out, ckpt.params.revin.beta);

    put_u8(out, ckpt.scaler.has_value() ? 1 : 0);
    if (ckpt.scaler.has_value()) {
        put_vector(out, ckpt.scaler->mean);
        put_vector(out, ckpt.scaler->std);
    }
    if (!out) throw DataError("checkpoint: write failed for " + path);
}

Checkpoint load(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("checkpoint: cannot open " + path);
    char magic[8];
    get_bytes(in, magic, sizeof(magic));
    for (std::size_t i = 0; i < sizeof(magic); ++i) {
        if (magic[i] != kMagic[i]) throw DataError("checkpoint: bad magic in " + path);
    }
    Checkpoint ckpt;
    model::FiLMConfig& c = ckpt.config;
    c.horizon = get_i64(in);
    const std::int64_t nf = get_i64(in);
    c.multiscale_factors.clear();
    for (std::int64_t i = 0; i < nf; ++i) c.multiscale_factors.push_back(get_i64(in));
    c.legendre_order = get_i64(in);
    c.mode_count = get_i64(in);
    c.mode_policy = static_cast<spectral::ModePolicy>(get_u8(in));
    c.rank = get_i64(in);
    c.revin_enabled = get_u8(in) != 0;
    c.epsilon_norm = get_f64(in);
    c.channels = get_i64(in);
    ckpt.seed = get_u64(in);

    const std::int64_t ne = get_i64(in);
    for (std::int64_t e = 0; e < ne; ++e) {
        const std::int64_t nm = get_i64(in);
        std::vector<Eigen::Index> modes;
        for (std::int64_t i = 0; i < nm; ++i) modes.push_back(get_i64(in));
        ckpt.mode_indices.push_back(std::move(modes));
    }

    const std::int64_t nw = get_i64(in);
    for (std::int64_t i = 0; i < nw; ++i) ckpt.params.expert_weights.push_back(get_weights(in));
    ckpt.params.merge_weights = get_vector(in);
    ckpt.params.revin.gamma = get_vector(in);
    ckpt.params.revin.beta = get_vector(in);

    if (get_u8(in) != 0) {
        data::Scaler s;
        s.mean = get_vector(in);
        s.std = get_vector(in);
        ckpt.scaler = std::move(s);
    }
    return ckpt;
}

model::ModelContext context_from(const Checkpoint& ckpt) {
    model::ModelContext ctx = model::build_context(ckpt.config, ckpt.seed);
    for (std::size_t e = 0; e < ctx.experts.size() && e < ckpt.mode_indices.size(); ++e) {
        ctx.experts[e].modes.indices = ckpt.mode_indices[e];
    }
    return ctx;
}

} // namespace film::checkpoint
