#include "sbd/predictor.hpp"

#include <unordered_map>

#include "sbd/errors.hpp"

namespace sbd::model {

namespace {

// Per-call lookup: known surfaces map to matrix rows; unknown ones
// compose through the subword table (frozen) or fall back to the unknown
// row. Keeps prediction free of shared mutable state.
struct PredictLookup {
    const SbdModel& model;
    std::unordered_map<std::string, int> map;
    std::vector<std::vector<double>> local_rows;
    std::unordered_map<std::string, int> local_ids;

    explicit PredictLookup(const SbdModel& m) : model(m) {
        map.reserve(m.words.size());
        for (int i = 0; i < static_cast<int>(m.words.size()); ++i) map[m.words[i]] = 2 + i;
    }

    int id_for(const corpus::Token& tok) {
        auto it = map.find(tok);
        if (it != map.end()) return it->second;
        if (!model.subword) return TokenIndexer::kUnkId;
        auto lit = local_ids.find(tok);
        if (lit != local_ids.end()) return lit->second;
        std::vector<double> vec(model.cfg.dim, 0.0);
        model.subword->add_ngram_rows(tok, vec.data());
        int id = model.embedding.rows() + static_cast<int>(local_rows.size());
        local_rows.push_back(std::move(vec));
        local_ids[tok] = id;
        return id;
    }
};

} // namespace

std::vector<double> predict_boundaries(const SbdModel& model,
                                       const std::vector<corpus::Token>& tokens) {
    if (tokens.empty()) return {};
    const int phi = model.cfg.phi;
    const int stride = (phi + 1) / 2;
    const int n = static_cast<int>(tokens.size());

    PredictLookup lookup(model);
    std::vector<int> ids(n);
    for (int i = 0; i < n; ++i) ids[i] = lookup.id_for(tokens[i]);

    std::vector<double> sum(n, 0.0);
    std::vector<int> hits(n, 0);

    Rng no_dropout_rng(0); // inference mode never draws from it
    int start = 0;
    std::vector<int> window_ids(phi);
    while (true) {
        std::fill(window_ids.begin(), window_ids.end(), TokenIndexer::kPadId);
        int real = 0;
        for (int j = 0; j < phi && start + j < n; ++j, ++real) window_ids[j] = ids[start + j];

        nn::Tensor2 input = gather_window(model, window_ids, &lookup.local_rows);
        RcnnCache cache;
        nn::Tensor2 probs = rcnn_forward(model, input, false, no_dropout_rng, cache);
        for (int j = 0; j < real; ++j) {
            sum[start + j] += probs(j, class_index(corpus::Label::B));
            ++hits[start + j];
        }
        if (start + phi >= n) break;
        start += stride;
    }

    std::vector<double> out(n);
    for (int i = 0; i < n; ++i) out[i] = sum[i] / hits[i];
    return out;
}

std::vector<corpus::Label> labels_from_probabilities(const std::vector<double>& p_boundary,
                                                     double threshold) {
    std::vector<corpus::Label> labels(p_boundary.size());
    for (std::size_t i = 0; i < p_boundary.size(); ++i)
        labels[i] = p_boundary[i] >= threshold ? corpus::Label::B : corpus::Label::NB;
    return labels;
}

std::vector<std::vector<corpus::Token>> segment(const std::vector<corpus::Token>& tokens,
                                                const std::vector<double>& p_boundary,
                                                double threshold) {
    if (tokens.size() != p_boundary.size())
        throw ArgumentError("segment: token/probability length mismatch");
    if (!(threshold > 0.0 && threshold < 1.0))
        throw ArgumentError("segment: threshold must be in (0, 1)");

    std::vector<std::vector<corpus::Token>> sentences;
    std::vector<corpus::Token> current;
    for (std::size_t t = 0; t < tokens.size(); ++t) {
        current.push_back(tokens[t]);
        if (p_boundary[t] >= threshold) {
            sentences.push_back(std::move(current));
            current.clear();
        }
    }
    if (!current.empty()) sentences.push_back(std::move(current));
    return sentences;
}

} // namespace sbd::model
