#include "sbd/report.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "sbd/errors.hpp"

namespace sbd::eval {

std::string GridCell::tag() const {
    return method + "-" + strategy + "-d" + std::to_string(dim);
}

void CellResult::finalize() {
    mean_f1 = 0.0;
    std_f1 = 0.0;
    ConfusionCounts total;
    if (folds.empty()) {
        pooled = MetricsReport{};
        return;
    }
    for (const FoldMetrics& f : folds) {
        mean_f1 += f.report.f1;
        total += f.report.counts;
    }
    mean_f1 /= static_cast<double>(folds.size());
    if (folds.size() > 1) {
        double ss = 0.0;
        for (const FoldMetrics& f : folds) {
            double d = f.report.f1 - mean_f1;
            ss += d * d;
        }
        std_f1 = std::sqrt(ss / static_cast<double>(folds.size() - 1));
    }
    pooled = metrics_from_counts(total);
}

namespace {

std::string fmt(double v) {
    char buf[32];
    auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

void require_nonempty(const CvResults& results) {
    if (results.cells.empty()) throw ArgumentError("report: no results to emit");
}

} // namespace

void write_report_csv(const CvResults& results, const std::string& path) {
    require_nonempty(results);
    std::ofstream out(path);
    if (!out) throw IoError("cannot open '" + path + "' for writing");
    out << "method,strategy,dim,fold,precision,recall,f1,tp,fp,fn,tn\n";
    for (const CellResult& cell : results.cells) {
        if (cell.skipped) continue;
        for (const FoldMetrics& f : cell.folds) {
            const MetricsReport& r = f.report;
            out << cell.cell.method << ',' << cell.cell.strategy << ',' << cell.cell.dim << ','
                << f.fold << ',' << fmt(r.precision) << ',' << fmt(r.recall) << ',' << fmt(r.f1)
                << ',' << r.counts.tp << ',' << r.counts.fp << ',' << r.counts.fn << ','
                << r.counts.tn << '\n';
        }
    }
    if (!out) throw IoError("write failed on '" + path + "'");
}

void write_report_json(const CvResults& results, const std::string& path) {
    require_nonempty(results);
    nlohmann::ordered_json doc;
    doc["k"] = results.k;
    doc["seed"] = results.seed;
    doc["cells"] = nlohmann::ordered_json::array();
    for (const CellResult& cell : results.cells) {
        nlohmann::ordered_json jc;
        jc["method"] = cell.cell.method;
        jc["strategy"] = cell.cell.strategy;
        jc["dim"] = cell.cell.dim;
        if (cell.skipped) {
            jc["skipped"] = true;
            jc["reason"] = cell.skip_reason;
            doc["cells"].push_back(std::move(jc));
            continue;
        }
        jc["folds"] = nlohmann::ordered_json::array();
        for (const FoldMetrics& f : cell.folds) {
            const MetricsReport& r = f.report;
            jc["folds"].push_back({{"fold", f.fold},
                                   {"precision", r.precision},
                                   {"recall", r.recall},
                                   {"f1", r.f1},
                                   {"tp", r.counts.tp},
                                   {"fp", r.counts.fp},
                                   {"fn", r.counts.fn},
                                   {"tn", r.counts.tn},
                                   {"degenerate", r.degenerate}});
        }
        jc["mean_f1"] = cell.mean_f1;
        jc["std_f1"] = cell.std_f1;
        jc["pooled"] = {{"precision", cell.pooled.precision},
                        {"recall", cell.pooled.recall},
                        {"f1", cell.pooled.f1},
                        {"tp", cell.pooled.counts.tp},
                        {"fp", cell.pooled.counts.fp},
                        {"fn", cell.pooled.counts.fn},
                        {"tn", cell.pooled.counts.tn}};
        doc["cells"].push_back(std::move(jc));
    }
    std::ofstream out(path);
    if (!out) throw IoError("cannot open '" + path + "' for writing");
    out << doc.dump(2) << '\n';
    if (!out) throw IoError("write failed on '" + path + "'");
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            fields.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    fields.push_back(cur);
    return fields;
}

template <typename T>
T parse_num(const std::string& s, const std::string& path, std::size_t line_no) {
    T v{};
    auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size())
        throw FormatError(path + ": line " + std::to_string(line_no) + ": bad number '" + s + "'");
    return v;
}

} // namespace

std::vector<CsvRow> read_report_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open '" + path + "' for reading");
    std::string line;
    if (!std::getline(in, line) || line != "method,strategy,dim,fold,precision,recall,f1,tp,fp,fn,tn")
        throw FormatError(path + ": unexpected CSV header");
    std::vector<CsvRow> rows;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        auto fields = split_csv_line(line);
        if (fields.size() != 11)
            throw FormatError(path + ": line " + std::to_string(line_no) + ": expected 11 fields");
        CsvRow row;
        row.method = fields[0];
        row.strategy = fields[1];
        row.dim = parse_num<int>(fields[2], path, line_no);
        row.fold = parse_num<int>(fields[3], path, line_no);
        row.precision = parse_num<double>(fields[4], path, line_no);
        row.recall = parse_num<double>(fields[5], path, line_no);
        row.f1 = parse_num<double>(fields[6], path, line_no);
        row.tp = parse_num<long long>(fields[7], path, line_no);
        row.fp = parse_num<long long>(fields[8], path, line_no);
        row.fn = parse_num<long long>(fields[9], path, line_no);
        row.tn = parse_num<long long>(fields[10], path, line_no);
        rows.push_back(std::move(row));
    }
    return rows;
}

} // namespace sbd::eval
