#include "sbd/checkpoint.hpp"

#include <charconv>
#include <cstring>
#include <fstream>
#include <map>
#include <sstream>
#include <vector>

#include "sbd/errors.hpp"

namespace sbd::model {

namespace {

constexpr const char* kMagic = "sbdkit-checkpoint 1";

void write_f64_le(std::ostream& out, const double* values, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) {
        std::uint64_t bits;
        std::memcpy(&bits, &values[i], sizeof bits);
        unsigned char b[8];
        for (int k = 0; k < 8; ++k) b[k] = static_cast<unsigned char>(bits >> (8 * k));
        out.write(reinterpret_cast<char*>(b), 8);
    }
}

void read_f64_le(std::istream& in, double* values, std::size_t n, const std::string& path) {
    std::vector<unsigned char> buf(n * 8);
    in.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
    if (static_cast<std::size_t>(in.gcount()) != buf.size())
        throw FormatError(path + ": truncated parameter data");
    for (std::size_t i = 0; i < n; ++i) {
        std::uint64_t bits = 0;
        for (int k = 0; k < 8; ++k) bits |= static_cast<std::uint64_t>(buf[i * 8 + k]) << (8 * k);
        std::memcpy(&values[i], &bits, sizeof bits);
    }
}

std::string format_double(double v) {
    char buf[32];
    auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

double parse_double_kv(const std::string& s, const std::string& key, const std::string& path) {
    double v = 0.0;
    auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size())
        throw FormatError(path + ": bad value for '" + key + "'");
    return v;
}

long long parse_int_kv(const std::string& s, const std::string& key, const std::string& path) {
    long long v = 0;
    auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size())
        throw FormatError(path + ": bad value for '" + key + "'");
    return v;
}

struct BlockRef {
    std::string name;
    const nn::Tensor2* tensor;
};

std::vector<BlockRef> model_blocks(const SbdModel& m) {
    std::vector<BlockRef> blocks = {
        {"embedding", &m.embedding},
        {"conv.filters", &m.conv.filters},
        {"conv.bias", &m.conv.bias},
        {"lstm_fwd.W_i", &m.lstm_fwd.W_i}, {"lstm_fwd.W_f", &m.lstm_fwd.W_f},
        {"lstm_fwd.W_o", &m.lstm_fwd.W_o}, {"lstm_fwd.W_g", &m.lstm_fwd.W_g},
        {"lstm_fwd.b_i", &m.lstm_fwd.b_i}, {"lstm_fwd.b_f", &m.lstm_fwd.b_f},
        {"lstm_fwd.b_o", &m.lstm_fwd.b_o}, {"lstm_fwd.b_g", &m.lstm_fwd.b_g},
        {"lstm_bwd.W_i", &m.lstm_bwd.W_i}, {"lstm_bwd.W_f", &m.lstm_bwd.W_f},
        {"lstm_bwd.W_o", &m.lstm_bwd.W_o}, {"lstm_bwd.W_g", &m.lstm_bwd.W_g},
        {"lstm_bwd.b_i", &m.lstm_bwd.b_i}, {"lstm_bwd.b_f", &m.lstm_bwd.b_f},
        {"lstm_bwd.b_o", &m.lstm_bwd.b_o}, {"lstm_bwd.b_g", &m.lstm_bwd.b_g},
        {"out.W", &m.out.W},
        {"out.b", &m.out.b},
    };
    if (m.subword) blocks.push_back({"subword.buckets", &m.subword->buckets});
    return blocks;
}

nn::Tensor2* mutable_block(SbdModel& m, const std::string& name) {
    for (const BlockRef& b : model_blocks(m))
        if (b.name == name) return const_cast<nn::Tensor2*>(b.tensor);
    return nullptr;
}

} // namespace

void save_checkpoint(const SbdModel& model, const std::string& path) {
    model.validate();
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open '" + path + "' for writing");

    const ModelConfig& c = model.cfg;
    out << kMagic << '\n';
    out << "phi=" << c.phi << '\n';
    out << "dim=" << c.dim << '\n';
    out << "n_f=" << c.n_f << '\n';
    out << "h_c=" << c.h_c << '\n';
    out << "h_m=" << c.h_m << '\n';
    out << "n_r=" << c.n_r << '\n';
    out << "dropout=" << format_double(c.dropout) << '\n';
    out << "epochs=" << c.epochs << '\n';
    out << "batch_size=" << c.batch_size << '\n';
    out << "class_weight_mode="
        << (c.class_weight_mode == ClassWeightMode::kManual ? "manual" : "inverse") << '\n';
    out << "w_b=" << format_double(c.w_b) << '\n';
    out << "w_nb=" << format_double(c.w_nb) << '\n';
    out << "fine_tune=" << (c.fine_tune ? 1 : 0) << '\n';
    out << "train_stride=" << c.train_stride << '\n';
    out << "threshold=" << format_double(c.threshold) << '\n';
    out << "seed=" << c.seed << '\n';
    out << "lr=" << format_double(c.optim.lr) << '\n';
    out << "rho=" << format_double(c.optim.rho) << '\n';
    out << "eps=" << format_double(c.optim.eps) << '\n';
    out << "embedding_tag=" << model.embedding_tag << '\n';

    out << "vocab " << model.words.size() << '\n';
    for (const std::string& w : model.words) out << w << '\n';

    if (model.subword)
        out << "subword " << model.subword->bucket_count() << ' ' << model.subword->n_min << ' '
            << model.subword->n_max << ' ' << model.subword->hash_seed << '\n';

    std::vector<BlockRef> blocks = model_blocks(model);
    out << "blocks " << blocks.size() << '\n';
    for (const BlockRef& b : blocks)
        out << b.name << ' ' << b.tensor->rows() << ' ' << b.tensor->cols() << '\n';
    out << "binary\n";
    for (const BlockRef& b : blocks) write_f64_le(out, b.tensor->data(), b.tensor->size());
    if (!out) throw IoError("write failed on '" + path + "'");
}

SbdModel load_checkpoint(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path + "' for reading");

    std::string line;
    if (!std::getline(in, line) || line != kMagic)
        throw FormatError(path + ": not a checkpoint file");

    std::map<std::string, std::string> kv;
    while (std::getline(in, line)) {
        if (line.rfind("vocab ", 0) == 0) break;
        auto eq = line.find('=');
        if (eq == std::string::npos)
            throw FormatError(path + ": malformed manifest line '" + line + "'");
        kv[line.substr(0, eq)] = line.substr(eq + 1);
    }
    if (line.rfind("vocab ", 0) != 0) throw FormatError(path + ": missing vocabulary section");

    auto need = [&](const char* key) -> const std::string& {
        auto it = kv.find(key);
        if (it == kv.end()) throw FormatError(path + ": manifest misses '" + std::string(key) + "'");
        return it->second;
    };

    SbdModel model;
    ModelConfig& c = model.cfg;
    c.phi = static_cast<int>(parse_int_kv(need("phi"), "phi", path));
    c.dim = static_cast<int>(parse_int_kv(need("dim"), "dim", path));
    c.n_f = static_cast<int>(parse_int_kv(need("n_f"), "n_f", path));
    c.h_c = static_cast<int>(parse_int_kv(need("h_c"), "h_c", path));
    c.h_m = static_cast<int>(parse_int_kv(need("h_m"), "h_m", path));
    c.n_r = static_cast<int>(parse_int_kv(need("n_r"), "n_r", path));
    c.dropout = parse_double_kv(need("dropout"), "dropout", path);
    c.epochs = static_cast<int>(parse_int_kv(need("epochs"), "epochs", path));
    c.batch_size = static_cast<int>(parse_int_kv(need("batch_size"), "batch_size", path));
    c.class_weight_mode =
        need("class_weight_mode") == "manual" ? ClassWeightMode::kManual
                                              : ClassWeightMode::kInverseFrequency;
    c.w_b = parse_double_kv(need("w_b"), "w_b", path);
    c.w_nb = parse_double_kv(need("w_nb"), "w_nb", path);
    c.fine_tune = parse_int_kv(need("fine_tune"), "fine_tune", path) != 0;
    c.train_stride = static_cast<int>(parse_int_kv(need("train_stride"), "train_stride", path));
    c.threshold = parse_double_kv(need("threshold"), "threshold", path);
    c.seed = static_cast<std::uint64_t>(parse_int_kv(need("seed"), "seed", path));
    c.optim.lr = parse_double_kv(need("lr"), "lr", path);
    c.optim.rho = parse_double_kv(need("rho"), "rho", path);
    c.optim.eps = parse_double_kv(need("eps"), "eps", path);
    if (auto it = kv.find("embedding_tag"); it != kv.end()) model.embedding_tag = it->second;

    long long n_words = parse_int_kv(line.substr(6), "vocab", path);
    if (n_words < 1) throw FormatError(path + ": empty vocabulary");
    model.words.reserve(n_words);
    for (long long i = 0; i < n_words; ++i) {
        if (!std::getline(in, line)) throw FormatError(path + ": vocabulary ends early");
        model.words.push_back(line);
    }

    if (!std::getline(in, line)) throw FormatError(path + ": manifest ends early");
    if (line.rfind("subword ", 0) == 0) {
        std::istringstream ss(line.substr(8));
        long long buckets = 0;
        int n_min = 0, n_max = 0;
        std::uint64_t hseed = 0;
        if (!(ss >> buckets >> n_min >> n_max >> hseed) || buckets < 1)
            throw FormatError(path + ": malformed subword line");
        emb::SubwordTable sw;
        sw.buckets = nn::Tensor2(static_cast<int>(buckets), c.dim);
        sw.n_min = n_min;
        sw.n_max = n_max;
        sw.hash_seed = hseed;
        model.subword = std::move(sw);
        if (!std::getline(in, line)) throw FormatError(path + ": manifest ends early");
    }

    if (line.rfind("blocks ", 0) != 0) throw FormatError(path + ": missing blocks section");
    long long n_blocks = parse_int_kv(line.substr(7), "blocks", path);

    // allocate the layers so expected shapes exist, then overwrite
    model.embedding = nn::Tensor2(2 + static_cast<int>(model.words.size()), c.dim);
    model.conv = nn::ConvLayer(c.n_f, c.h_c, c.dim);
    model.lstm_fwd = nn::LstmCell(c.n_r, c.n_f);
    model.lstm_bwd = nn::LstmCell(c.n_r, c.n_f);
    model.out = nn::DenseLayer(2, 2 * c.n_r);

    std::vector<BlockRef> expected = model_blocks(model);
    if (n_blocks != static_cast<long long>(expected.size()))
        throw FormatError(path + ": expected " + std::to_string(expected.size()) +
                          " parameter blocks, manifest has " + std::to_string(n_blocks));

    struct PendingBlock {
        std::string name;
        int rows, cols;
    };
    std::vector<PendingBlock> pending;
    for (long long i = 0; i < n_blocks; ++i) {
        if (!std::getline(in, line)) throw FormatError(path + ": block list ends early");
        std::istringstream ss(line);
        PendingBlock pb;
        if (!(ss >> pb.name >> pb.rows >> pb.cols))
            throw FormatError(path + ": malformed block line '" + line + "'");
        const BlockRef& exp = expected[i];
        if (pb.name != exp.name || pb.rows != exp.tensor->rows() || pb.cols != exp.tensor->cols())
            throw FormatError(path + ": block '" + pb.name + "' (" + std::to_string(pb.rows) + "x" +
                              std::to_string(pb.cols) + ") does not match expected '" + exp.name +
                              "' (" + std::to_string(exp.tensor->rows()) + "x" +
                              std::to_string(exp.tensor->cols()) + ")");
        pending.push_back(pb);
    }
    if (!std::getline(in, line) || line != "binary")
        throw FormatError(path + ": missing binary marker");

    for (const PendingBlock& pb : pending) {
        nn::Tensor2* t = mutable_block(model, pb.name);
        read_f64_le(in, t->data(), t->size(), path);
    }
    model.validate();
    return model;
}

} // namespace sbd::model
