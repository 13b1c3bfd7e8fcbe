#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

namespace picl {

struct prediction_record {
    std::int32_t predicted = 0;
    std::int32_t gold = 0;
    double confidence = 0.0;          // probability of the predicted label
    std::vector<double> probs;        // full distribution (optional, may be empty)
};

double accuracy(std::span<const prediction_record> records);

// One-vs-rest F1 per class averaged over all classes in [0, n_classes);
// a class absent from both gold and predictions contributes 0.
double macro_f1(std::span<const prediction_record> records, std::int32_t n_classes);

// Expected calibration error over m equal-width confidence bins
// ((j-1)/m, j/m], the first closed at 0: sum over bins of
// (bin size / n) * |bin accuracy - bin mean confidence|.
double ece1(std::span<const prediction_record> records, int n_bins = 10);

struct reliability_bins {
    int n_bins = 10;
    std::vector<std::int64_t> count;
    std::vector<double> mean_confidence;  // 0 for empty bins
    std::vector<double> bin_accuracy;     // 0 for empty bins
};

reliability_bins reliability(std::span<const prediction_record> records, int n_bins = 10);

// Confidence values split by correctness, for histogram plotting.
struct confidence_split {
    std::vector<double> correct;
    std::vector<double> wrong;
};
confidence_split split_confidences(std::span<const prediction_record> records);

// JSON-lines serialization; reading validates every field round-trips.
void write_records_jsonl(const std::filesystem::path& path,
                         std::span<const prediction_record> records);
std::vector<prediction_record> read_records_jsonl(const std::filesystem::path& path);

}  // namespace picl
