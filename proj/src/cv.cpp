#include "sbd/cv.hpp"

#include <atomic>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "sbd/checkpoint.hpp"
#include "sbd/embedding_trainer.hpp"
#include "sbd/errors.hpp"
#include "sbd/predictor.hpp"
#include "sbd/sbd_trainer.hpp"
#include "sbd/subword.hpp"

namespace fs = std::filesystem;

namespace sbd::eval {

std::vector<GridCell> parse_grid(const std::string& spec) {
    std::vector<GridCell> cells;
    std::stringstream groups(spec);
    std::string group;
    while (std::getline(groups, group, ';')) {
        if (group.empty()) continue;
        std::stringstream parts(group);
        std::string method, strategy, dims;
        if (!std::getline(parts, method, ':') || !std::getline(parts, strategy, ':') ||
            !std::getline(parts, dims))
            throw ArgumentError("grid: malformed group '" + group +
                                "' (expected method:strategy:d1,d2,...)");
        emb::parse_family(method);  // validates the names
        emb::parse_mode(strategy);
        std::stringstream ds(dims);
        std::string dim_str;
        bool any = false;
        while (std::getline(ds, dim_str, ',')) {
            int dim = 0;
            try {
                dim = std::stoi(dim_str);
            } catch (const std::exception&) {
                throw ArgumentError("grid: bad dimension '" + dim_str + "'");
            }
            if (dim < 1) throw ArgumentError("grid: dimension must be positive");
            cells.push_back({method, strategy, dim});
            any = true;
        }
        if (!any) throw ArgumentError("grid: group '" + group + "' lists no dimensions");
    }
    if (cells.empty()) throw ArgumentError("grid: empty specification");
    return cells;
}

std::vector<GridCell> full_grid(const std::vector<int>& dims) {
    std::vector<GridCell> cells;
    for (const char* method : {"w2v", "order", "subword"})
        for (const char* strategy : {"cbow", "sg"})
            for (int d : dims) cells.push_back({method, strategy, d});
    return cells;
}

// --------------------------- embedding source -------------------------

namespace {

std::string substitute(const std::string& pattern, const GridCell& cell) {
    std::string out = pattern;
    auto replace_all = [&](const std::string& key, const std::string& value) {
        std::size_t pos = 0;
        while ((pos = out.find(key, pos)) != std::string::npos) {
            out.replace(pos, key.size(), value);
            pos += value.size();
        }
    };
    replace_all("{method}", cell.method);
    replace_all("{strategy}", cell.strategy);
    replace_all("{dim}", std::to_string(cell.dim));
    return out;
}

std::uint64_t hash_corpus(const emb::TokenCorpus& corpus) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (const auto& doc : corpus.documents) {
        for (const std::string& tok : doc) {
            h = emb::fnv1a64(tok, h);
            h = emb::fnv1a64(" ", h);
        }
        h = emb::fnv1a64("\n", h);
    }
    return h;
}

emb::InductionConfig cell_induction_config(const emb::InductionConfig& base,
                                           const GridCell& cell) {
    emb::Family family = emb::parse_family(cell.method);
    emb::Mode mode = emb::parse_mode(cell.strategy);
    emb::InductionConfig defaults = emb::InductionConfig::defaults(family, mode);
    emb::InductionConfig cfg = base;
    cfg.family = family;
    cfg.mode = mode;
    cfg.dim = cell.dim;
    // family/mode-sensitive fields follow their conventions unless the
    // base config moved them off the generic defaults
    emb::InductionConfig generic;
    if (base.window == generic.window) cfg.window = defaults.window;
    if (base.initial_lr == generic.initial_lr) cfg.initial_lr = defaults.initial_lr;
    return cfg;
}

std::uint64_t hash_induction(const emb::InductionConfig& cfg) {
    std::ostringstream ss;
    ss << emb::family_name(cfg.family) << ' ' << emb::mode_name(cfg.mode) << ' ' << cfg.dim << ' '
       << cfg.window << ' ' << cfg.negatives << ' ' << cfg.epochs << ' ' << cfg.initial_lr << ' '
       << cfg.min_count << ' ' << cfg.subsample << ' ' << cfg.noise_power << ' ' << cfg.ngram_min
       << ' ' << cfg.ngram_max << ' ' << cfg.buckets << ' ' << cfg.seed;
    return emb::fnv1a64(ss.str());
}

} // namespace

EmbeddingSource EmbeddingSource::from_pattern(std::string pattern) {
    EmbeddingSource s;
    s.pattern_ = std::move(pattern);
    return s;
}

EmbeddingSource EmbeddingSource::from_corpus(emb::TokenCorpus corpus, emb::InductionConfig base) {
    EmbeddingSource s;
    s.corpus_ = std::move(corpus);
    s.base_ = base;
    s.corpus_hash_ = hash_corpus(*s.corpus_);
    return s;
}

std::optional<emb::EmbeddingTable> EmbeddingSource::get(const GridCell& cell,
                                                        const std::string& cache_dir,
                                                        std::string* why) const {
    if (!pattern_.empty()) {
        std::string path = substitute(pattern_, cell);
        if (!fs::exists(path)) {
            if (why) *why = "embedding file '" + path + "' not found";
            return std::nullopt;
        }
        emb::EmbeddingTable table = emb::load_embeddings(path);
        if (table.dim != cell.dim) {
            if (why)
                *why = "embedding file '" + path + "' has d=" + std::to_string(table.dim) +
                       ", cell wants d=" + std::to_string(cell.dim);
            return std::nullopt;
        }
        return table;
    }
    if (!corpus_) {
        if (why) *why = "no embedding source configured";
        return std::nullopt;
    }

    emb::InductionConfig cfg = cell_induction_config(base_, cell);
    if (!cache_dir.empty()) {
        std::uint64_t h = corpus_hash_ ^ hash_induction(cfg);
        std::ostringstream name;
        name << cell.tag() << "-" << std::hex << h << ".vec";
        fs::path cached = fs::path(cache_dir) / "emb" / name.str();
        if (fs::exists(cached)) return emb::load_embeddings(cached.string());
        fs::create_directories(cached.parent_path());
        emb::EmbeddingTable table = emb::train_embeddings(*corpus_, cfg);
        emb::save_embeddings(table, cached.string());
        return table;
    }
    return emb::train_embeddings(*corpus_, cfg);
}

// ------------------------------- run_cv -------------------------------

namespace {

std::uint64_t hash_dataset(const corpus::Dataset& d) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (const corpus::Transcript& t : d.transcripts) {
        h = emb::fnv1a64(t.id, h);
        for (std::size_t i = 0; i < t.tokens.size(); ++i) {
            h = emb::fnv1a64(t.tokens[i], h);
            h = emb::fnv1a64(t.labels[i] == corpus::Label::B ? "|B" : "|N", h);
        }
    }
    return h;
}

std::uint64_t hash_model_cfg(const model::ModelConfig& c) {
    std::ostringstream ss;
    ss << c.phi << ' ' << c.dim << ' ' << c.n_f << ' ' << c.h_c << ' ' << c.h_m << ' ' << c.n_r
       << ' ' << c.dropout << ' ' << c.epochs << ' ' << c.batch_size << ' '
       << static_cast<int>(c.class_weight_mode) << ' ' << c.w_b << ' ' << c.w_nb << ' '
       << c.fine_tune << ' ' << c.train_stride << ' ' << c.threshold << ' ' << c.seed << ' '
       << c.optim.lr << ' ' << c.optim.rho << ' ' << c.optim.eps;
    return emb::fnv1a64(ss.str());
}

std::uint64_t hash_table(const emb::EmbeddingTable& t) {
    std::uint64_t h = emb::fnv1a64(t.method_tag);
    for (int i = 0; i < t.size(); ++i) h = emb::fnv1a64(t.vocab.entry(i).word, h);
    h = emb::fnv1a64(
        std::string_view(reinterpret_cast<const char*>(t.vectors.data()), t.vectors.size() * 8), h);
    if (t.subword) {
        const auto& b = t.subword->buckets;
        h = emb::fnv1a64(std::string_view(reinterpret_cast<const char*>(b.data()), b.size() * 8),
                         h);
    }
    return h;
}

struct CachedMetrics {
    bool valid = false;
    MetricsReport report;
};

CachedMetrics try_load_cached(const fs::path& dir, std::uint64_t input_hash) {
    CachedMetrics out;
    fs::path file = dir / "metrics.json";
    std::ifstream in(file);
    if (!in) return out;
    try {
        nlohmann::json j = nlohmann::json::parse(in);
        if (j.at("input_hash").get<std::string>() != std::to_string(input_hash)) return out;
        out.report.precision = j.at("precision").get<double>();
        out.report.recall = j.at("recall").get<double>();
        out.report.f1 = j.at("f1").get<double>();
        out.report.counts.tp = j.at("tp").get<long long>();
        out.report.counts.fp = j.at("fp").get<long long>();
        out.report.counts.fn = j.at("fn").get<long long>();
        out.report.counts.tn = j.at("tn").get<long long>();
        out.report.degenerate = j.value("degenerate", false);
        out.valid = true;
    } catch (const nlohmann::json::exception&) {
        return {};
    }
    return out;
}

void store_cached(const fs::path& dir, std::uint64_t input_hash, const MetricsReport& r) {
    fs::create_directories(dir);
    nlohmann::ordered_json j;
    j["input_hash"] = std::to_string(input_hash);
    j["precision"] = r.precision;
    j["recall"] = r.recall;
    j["f1"] = r.f1;
    j["tp"] = r.counts.tp;
    j["fp"] = r.counts.fp;
    j["fn"] = r.counts.fn;
    j["tn"] = r.counts.tn;
    j["degenerate"] = r.degenerate;
    std::ofstream out(dir / "metrics.json");
    out << j.dump(2) << '\n';
}

std::uint64_t mix(std::uint64_t a, std::uint64_t b) {
    Rng r(a ^ (b * 0x9e3779b97f4a7c15ULL));
    return r.next_u64();
}

} // namespace

CvResults run_cv(const corpus::Dataset& dataset, const GridSpec& grid,
                 const EmbeddingSource& source, const model::ModelConfig& model_cfg,
                 const CvOptions& options) {
    if (grid.cells.empty()) throw ArgumentError("run_cv: empty grid");
    dataset.validate();
    corpus::FoldSplit split = corpus::kfold(dataset, grid.k, grid.seed);

    const std::uint64_t dataset_hash = hash_dataset(dataset);
    const std::uint64_t cfg_hash = hash_model_cfg(model_cfg);

    CvResults results;
    results.k = grid.k;
    results.seed = grid.seed;
    results.cells.resize(grid.cells.size());

    std::atomic<std::size_t> next_cell{0};
    auto run_cell = [&](std::size_t ci) {
        CellResult& result = results.cells[ci];
        result.cell = grid.cells[ci];

        std::string why;
        std::optional<emb::EmbeddingTable> table =
            source.get(result.cell, options.cache_dir, &why);
        if (!table) {
            result.skipped = true;
            result.skip_reason = why;
            return;
        }
        const std::uint64_t table_hash = hash_table(*table);

        model::ModelConfig cfg = model_cfg;
        cfg.dim = result.cell.dim;

        for (int fold = 0; fold < grid.k; ++fold) {
            std::uint64_t input_hash = dataset_hash;
            input_hash = mix(input_hash, cfg_hash);
            input_hash = mix(input_hash, table_hash);
            input_hash = mix(input_hash, emb::fnv1a64(result.cell.tag()));
            input_hash = mix(input_hash, static_cast<std::uint64_t>(fold));
            input_hash = mix(input_hash, grid.seed);
            input_hash = mix(input_hash, static_cast<std::uint64_t>(grid.k));

            fs::path cell_dir;
            if (!options.cache_dir.empty()) {
                cell_dir = fs::path(options.cache_dir) /
                           (result.cell.tag() + "-fold" + std::to_string(fold));
                CachedMetrics cached = try_load_cached(cell_dir, input_hash);
                if (cached.valid) {
                    result.folds.push_back({fold, cached.report});
                    continue;
                }
            }

            std::vector<const corpus::Transcript*> train_set;
            std::vector<const corpus::Transcript*> test_set;
            for (const corpus::Transcript& t : dataset.transcripts)
                (split.fold_of(t.id) == fold ? test_set : train_set).push_back(&t);

            model::ModelConfig fold_cfg = cfg;
            fold_cfg.seed = mix(cfg.seed, input_hash);
            model::SbdModel trained = model::train_sbd(train_set, *table, fold_cfg);

            ConfusionCounts counts;
            for (const corpus::Transcript* t : test_set) {
                std::vector<double> p = model::predict_boundaries(trained, t->tokens);
                std::vector<corpus::Label> pred =
                    model::labels_from_probabilities(p, fold_cfg.threshold);
                MetricsReport m = compute_metrics(pred, t->labels);
                counts += m.counts;
            }
            MetricsReport fold_report = metrics_from_counts(counts);
            result.folds.push_back({fold, fold_report});

            if (!options.cache_dir.empty()) {
                fs::create_directories(cell_dir);
                model::save_checkpoint(trained, (cell_dir / "checkpoint.ckpt").string());
                store_cached(cell_dir, input_hash, fold_report);
            }
        }
        result.finalize();
    };

    if (options.workers <= 1) {
        for (std::size_t ci = 0; ci < grid.cells.size(); ++ci) run_cell(ci);
    } else {
        std::size_t n_threads = std::min<std::size_t>(options.workers, grid.cells.size());
        std::vector<std::thread> pool;
        for (std::size_t w = 0; w < n_threads; ++w)
            pool.emplace_back([&] {
                while (true) {
                    std::size_t ci = next_cell.fetch_add(1);
                    if (ci >= grid.cells.size()) break;
                    run_cell(ci);
                }
            });
        for (auto& t : pool) t.join();
    }
    return results;
}

} // namespace sbd::eval
