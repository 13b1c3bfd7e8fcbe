#include "picl/metrics.hpp"

#include <cmath>
#include <fstream>

#include "json.hpp"

#include "picl/common.hpp"

namespace picl {

namespace {

void check_nonempty(std::span<const prediction_record> records) {
    if (records.empty()) throw runtime_failure("metrics need at least one record");
}

void check_confidences(std::span<const prediction_record> records) {
    for (const prediction_record& r : records)
        if (!(r.confidence >= 0.0 && r.confidence <= 1.0))
            throw runtime_failure("confidence outside [0, 1]: " + std::to_string(r.confidence));
}

// Bin j (0-based) covers (j/m, (j+1)/m], except bin 0 which also contains 0.
int bin_index(double confidence, int n_bins) {
    for (int j = 1; j < n_bins; ++j)
        if (confidence <= static_cast<double>(j) / n_bins) return j - 1;
    return n_bins - 1;
}

}  // namespace

double accuracy(std::span<const prediction_record> records) {
    check_nonempty(records);
    std::int64_t correct = 0;
    for (const prediction_record& r : records)
        if (r.predicted == r.gold) ++correct;
    return static_cast<double>(correct) / static_cast<double>(records.size());
}

double macro_f1(std::span<const prediction_record> records, std::int32_t n_classes) {
    check_nonempty(records);
    if (n_classes < 2) throw runtime_failure("macro F1 needs at least two classes");
    for (const prediction_record& r : records)
        if (r.predicted < 0 || r.predicted >= n_classes || r.gold < 0 || r.gold >= n_classes)
            throw runtime_failure("label outside [0, n_classes) in records");

    double total = 0.0;
    for (std::int32_t c = 0; c < n_classes; ++c) {
        std::int64_t tp = 0, fp = 0, fn = 0;
        for (const prediction_record& r : records) {
            if (r.predicted == c && r.gold == c) ++tp;
            else if (r.predicted == c) ++fp;
            else if (r.gold == c) ++fn;
        }
        // No true or predicted instances at all: the class scores 0.
        const double denom = static_cast<double>(2 * tp + fp + fn);
        total += denom == 0.0 ? 0.0 : 2.0 * static_cast<double>(tp) / denom;
    }
    return total / static_cast<double>(n_classes);
}

double ece1(std::span<const prediction_record> records, int n_bins) {
    check_nonempty(records);
    check_confidences(records);
    if (n_bins < 1) throw runtime_failure("ECE needs at least one bin");

    const reliability_bins bins = reliability(records, n_bins);
    double total = 0.0;
    const double n = static_cast<double>(records.size());
    for (int j = 0; j < n_bins; ++j) {
        if (bins.count[static_cast<std::size_t>(j)] == 0) continue;
        const double weight = static_cast<double>(bins.count[static_cast<std::size_t>(j)]) / n;
        total += weight * std::abs(bins.bin_accuracy[static_cast<std::size_t>(j)] -
                                   bins.mean_confidence[static_cast<std::size_t>(j)]);
    }
    return total;
}

reliability_bins reliability(std::span<const prediction_record> records, int n_bins) {
    check_nonempty(records);
    check_confidences(records);
    if (n_bins < 1) throw runtime_failure("reliability needs at least one bin");

    reliability_bins out;
    out.n_bins = n_bins;
    out.count.assign(static_cast<std::size_t>(n_bins), 0);
    out.mean_confidence.assign(static_cast<std::size_t>(n_bins), 0.0);
    out.bin_accuracy.assign(static_cast<std::size_t>(n_bins), 0.0);

    for (const prediction_record& r : records) {
        const auto j = static_cast<std::size_t>(bin_index(r.confidence, n_bins));
        out.count[j] += 1;
        out.mean_confidence[j] += r.confidence;
        if (r.predicted == r.gold) out.bin_accuracy[j] += 1.0;
    }
    for (int j = 0; j < n_bins; ++j) {
        const auto ju = static_cast<std::size_t>(j);
        if (out.count[ju] == 0) continue;
        out.mean_confidence[ju] /= static_cast<double>(out.count[ju]);
        out.bin_accuracy[ju] /= static_cast<double>(out.count[ju]);
    }
    return out;
}

confidence_split split_confidences(std::span<const prediction_record> records) {
    confidence_split out;
    for (const prediction_record& r : records) {
        if (r.predicted == r.gold) out.correct.push_back(r.confidence);
        else out.wrong.push_back(r.confidence);
    }
    return out;
}

void write_records_jsonl(const std::filesystem::path& path,
                         std::span<const prediction_record> records) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw runtime_failure("cannot write records file: " + path.string());
    for (const prediction_record& r : records) {
        nlohmann::json j{{"predicted", r.predicted},
                         {"gold", r.gold},
                         {"confidence", r.confidence}};
        if (!r.probs.empty()) j["probs"] = r.probs;
        out << j.dump() << '\n';
    }
    if (!out) throw runtime_failure("write failed: " + path.string());
}

std::vector<prediction_record> read_records_jsonl(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw data_error("cannot open records file: " + path.string());
    std::vector<prediction_record> records;
    std::string line;
    std::int64_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        const std::string where = path.string() + ":" + std::to_string(lineno);
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(line);
        } catch (const nlohmann::json::exception& e) {
            throw data_error(where + ": malformed JSON: " + e.what());
        }
        prediction_record r;
        try {
            r.predicted = j.at("predicted").get<std::int32_t>();
            r.gold = j.at("gold").get<std::int32_t>();
            r.confidence = j.at("confidence").get<double>();
            if (j.contains("probs")) r.probs = j["probs"].get<std::vector<double>>();
        } catch (const nlohmann::json::exception& e) {
            throw data_error(where + ": bad record: " + e.what());
        }
        if (!(r.confidence >= 0.0 && r.confidence <= 1.0))
            throw data_error(where + ": confidence outside [0, 1]");
        records.push_back(std::move(r));
    }
    return records;
}

}  // namespace picl
