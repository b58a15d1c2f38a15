#include "peg/checkpoint.hpp"

#include <cstdint>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace peg {

namespace {

constexpr char kMagic[8] = {'P', 'E', 'G', 'C', 'K', 'P', 'T', '\x01'};

void write_u32(std::ostream& out, std::uint32_t v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof(v));
}

std::uint32_t read_u32(std::istream& in) {
    std::uint32_t v = 0;
    in.read(reinterpret_cast<char*>(&v), sizeof(v));
    if (!in) throw std::runtime_error("checkpoint: truncated file");
    return v;
}

void write_string(std::ostream& out, const std::string& s) {
    write_u32(out, static_cast<std::uint32_t>(s.size()));
    out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

std::string read_string(std::istream& in) {
    const auto n = read_u32(in);
    std::string s(n, '\0');
    in.read(s.data(), n);
    if (!in) throw std::runtime_error("checkpoint: truncated file");
    return s;
}

std::string config_blob(const TrainConfig& cfg) {
    std::ostringstream os;
    os.precision(17);
    os << "topics=" << cfg.topics << "\nd_phi=" << cfg.d_phi << "\nd_long=" << cfg.d_long
       << "\nd_short=" << cfg.d_short << "\nd_gnn=" << cfg.d_gnn
       << "\ngnn_layers=" << cfg.gnn_layers << "\nshort_window=" << cfg.short_window
       << "\nencoder_hidden=" << cfg.encoder_hidden << "\nphi_prior_std=" << cfg.phi_prior_std
       << "\nlambda=" << cfg.lambda << "\nneighbor_cap=" << cfg.neighbor_cap
       << "\nseed=" << cfg.seed << "\nmin_count=" << cfg.min_count
       << "\nobservation_window=" << cfg.observation_window << "\nvariant=" << cfg.variant
       << "\n";
    return os.str();
}

TrainConfig parse_config_blob(const std::string& blob) {
    TrainConfig cfg;
    std::istringstream is(blob);
    std::string line;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        const auto eq = line.find('=');
        apply_config_entry(cfg, line.substr(0, eq), line.substr(eq + 1));
    }
    return cfg;
}

}  // namespace

void save_checkpoint(const std::string& path, const TrainConfig& cfg,
                     const ad::ParamStore& params) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write checkpoint: " + path);
    out.write(kMagic, sizeof(kMagic));
    write_string(out, config_blob(cfg));
    write_u32(out, static_cast<std::uint32_t>(params.entries().size()));
    for (const auto& [name, t] : params.entries()) {
        write_string(out, name);
        write_u32(out, static_cast<std::uint32_t>(t->shape.size()));
        for (int d : t->shape) write_u32(out, static_cast<std::uint32_t>(d));
        out.write(reinterpret_cast<const char*>(t->value.data()),
                  static_cast<std::streamsize>(t->value.size() * sizeof(double)));
    }
    if (!out) throw std::runtime_error("checkpoint write failed: " + path);
}

TrainConfig peek_checkpoint_config(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open checkpoint: " + path);
    char magic[8];
    in.read(magic, sizeof(magic));
    if (!in || std::string(magic, 8) != std::string(kMagic, 8))
        throw std::runtime_error("not a checkpoint file: " + path);
    return parse_config_blob(read_string(in));
}

TrainConfig load_checkpoint(const std::string& path, ad::ParamStore& params) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open checkpoint: " + path);
    char magic[8];
    in.read(magic, sizeof(magic));
    if (!in || std::string(magic, 8) != std::string(kMagic, 8))
        throw std::runtime_error("not a checkpoint file: " + path);
    TrainConfig cfg = parse_config_blob(read_string(in));
    const auto count = read_u32(in);
    for (std::uint32_t i = 0; i < count; ++i) {
        const std::string name = read_string(in);
        const auto ndim = read_u32(in);
        std::vector<int> shape(ndim);
        for (auto& d : shape) d = static_cast<int>(read_u32(in));
        const int n = ad::shape_size(shape);
        std::vector<double> data(static_cast<size_t>(n));
        in.read(reinterpret_cast<char*>(data.data()),
                static_cast<std::streamsize>(data.size() * sizeof(double)));
        if (!in) throw std::runtime_error("checkpoint: truncated tensor " + name);
        auto t = params.get(name);
        if (t->shape != shape)
            throw std::runtime_error("checkpoint: shape mismatch for " + name + ": file has " +
                                     ad::shape_str(shape) + ", model has " +
                                     ad::shape_str(t->shape));
        t->value = std::move(data);
    }
    return cfg;
}

}  // namespace peg
