#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "sbd/metrics.hpp"

namespace sbd::eval {

struct GridCell {
    std::string method;   // w2v | order | subword
    std::string strategy; // cbow | sg
    int dim = 0;

    std::string tag() const; // "<method>-<strategy>-d<dim>"
};

struct FoldMetrics {
    int fold = 0;
    MetricsReport report;
};

struct CellResult {
    GridCell cell;
    std::vector<FoldMetrics> folds;
    bool skipped = false;
    std::string skip_reason;

    // aggregates over folds
    double mean_f1 = 0.0;
    double std_f1 = 0.0; // sample standard deviation (n-1)
    MetricsReport pooled;

    void finalize();
};

struct CvResults {
    int k = 0;
    std::uint64_t seed = 0;
    std::vector<CellResult> cells;
};

// CSV columns: method,strategy,dim,fold,precision,recall,f1,tp,fp,fn,tn.
// Floats print in shortest round-trip form so a reload is exact.
// Skipped cells contribute no rows. Throws ArgumentError on empty
// results, IoError on unwritable paths.
void write_report_csv(const CvResults& results, const std::string& path);

// JSON variant with per-fold rows plus mean/std and pooled aggregates.
void write_report_json(const CvResults& results, const std::string& path);

struct CsvRow {
    std::string method;
    std::string strategy;
    int dim = 0;
    int fold = 0;
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    long long tp = 0, fp = 0, fn = 0, tn = 0;
};

std::vector<CsvRow> read_report_csv(const std::string& path);

} // namespace sbd::eval
