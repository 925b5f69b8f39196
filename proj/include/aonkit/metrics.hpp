#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace aonkit {

struct MetricRecord {
    std::string run_id;
    std::uint64_t seed = 0;
    int epoch = 0;
    double train_loss = 0.0;
    double train_acc = 0.0;
    double val_loss = 0.0;
    double val_acc = 0.0;
    double mean_orth_dev = 0.0;
    double mean_sigma = 0.0;
    double epoch_wall_seconds = 0.0;
};

// Column names in output order.
const std::vector<std::string>& metric_columns();

// Reals are rendered with 6 significant digits ("%.6g").
std::string format_real(double x);

void write_metrics_header(std::ostream& os);
void write_metrics_row(std::ostream& os, const MetricRecord& r);
void write_metrics_csv(std::ostream& os, const std::vector<MetricRecord>& records);

} // namespace aonkit
