#include "aonkit/metrics.hpp"

#include <cstdio>
#include <ostream>

namespace aonkit {

const std::vector<std::string>& metric_columns() {
    static const std::vector<std::string> cols{"run_id",   "seed",          "epoch",         "train_loss",
                                               "train_acc", "val_loss",     "val_acc",       "mean_orth_dev",
                                               "mean_sigma", "epoch_wall_seconds"};
    return cols;
}

std::string format_real(double x) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6g", x);
    return buf;
}

void write_metrics_header(std::ostream& os) {
    const auto& cols = metric_columns();
    for (std::size_t i = 0; i < cols.size(); ++i) os << (i ? "," : "") << cols[i];
    os << '\n';
}

void write_metrics_row(std::ostream& os, const MetricRecord& r) {
    os << r.run_id << ',' << r.seed << ',' << r.epoch << ',' << format_real(r.train_loss) << ','
       << format_real(r.train_acc) << ',' << format_real(r.val_loss) << ',' << format_real(r.val_acc) << ','
       << format_real(r.mean_orth_dev) << ',' << format_real(r.mean_sigma) << ','
       << format_real(r.epoch_wall_seconds) << '\n';
}

void write_metrics_csv(std::ostream& os, const std::vector<MetricRecord>& records) {
    write_metrics_header(os);
    for (const auto& r : records) write_metrics_row(os, r);
}

} // namespace aonkit
