// picl: perturbed in-context-learning workbench.
//
// Subcommands:
//   evaluate       run the few-shot protocol and write manifest/records/metrics
//   search-lambda  grid-search the noise intensity on the validation split
//   probe-entropy  token- and label-entropy probes over a lambda list
//   report         recompute metrics and plot-ready CSVs from a records file
//   perturb        write a perturbed copy of a weight container
//
// Exit codes: 0 success, 1 config error, 2 data/weights error, 3 runtime failure.

#include <cinttypes>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "CLI11.hpp"
#include "json.hpp"

#include "picl/common.hpp"
#include "picl/csv.hpp"
#include "picl/dataset.hpp"
#include "picl/digest.hpp"
#include "picl/entropy.hpp"
#include "picl/harness.hpp"
#include "picl/lambda_search.hpp"
#include "picl/metrics.hpp"
#include "picl/model.hpp"
#include "picl/perturb.hpp"
#include "picl/safetensors.hpp"
#include "picl/toml.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr const char* kToolVersion = "1.0.0";

std::string num(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::string fixed4(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.4f", v);
    return buf;
}

std::string utc_now() {
    std::time_t t = std::time(nullptr);
    char buf[32];
    std::tm tm{};
    gmtime_r(&t, &tm);
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

std::optional<std::string> env_var(const char* name) {
    const char* v = std::getenv(name);
    if (!v || !*v) return std::nullopt;
    return std::string(v);
}

// ---- model bundle ---------------------------------------------------------

struct model_options {
    std::string model_dir;
    std::string weights, config, vocab, merges;
};

void add_model_flags(CLI::App* cmd, model_options& opts) {
    cmd->add_option("--model-dir", opts.model_dir,
                    "Directory holding config.json, model.safetensors, vocab.json, merges.txt "
                    "(default: $PICL_MODEL_DIR)");
    cmd->add_option("--weights", opts.weights, "Weight container path (overrides --model-dir)");
    cmd->add_option("--model-config", opts.config, "Model config.json path");
    cmd->add_option("--vocab", opts.vocab, "Tokenizer vocab.json path");
    cmd->add_option("--merges", opts.merges, "Tokenizer merges.txt path");
}

struct model_bundle {
    picl::model_config cfg;
    picl::tensor_map params;
    picl::bpe_vocab vocab;
    fs::path config_path, weights_path, vocab_path, merges_path;
};

model_bundle load_model_bundle(const model_options& opts) {
    std::string dir = opts.model_dir;
    if (dir.empty())
        if (auto e = env_var("PICL_MODEL_DIR")) dir = *e;

    auto resolve = [&](const std::string& explicit_path, const char* filename) -> fs::path {
        if (!explicit_path.empty()) return explicit_path;
        if (dir.empty())
            throw picl::config_error(std::string("no path for ") + filename +
                                     ": pass --model-dir or set PICL_MODEL_DIR");
        return fs::path(dir) / filename;
    };

    model_bundle b;
    b.config_path = resolve(opts.config, "config.json");
    b.weights_path = resolve(opts.weights, "model.safetensors");
    b.vocab_path = resolve(opts.vocab, "vocab.json");
    b.merges_path = resolve(opts.merges, "merges.txt");

    b.cfg = picl::model_config::from_json_file(b.config_path);
    b.params = picl::load_weights(b.weights_path, b.cfg);
    b.vocab = picl::bpe_vocab::load(b.vocab_path, b.merges_path);
    return b;
}

// ---- dataset resolution ----------------------------------------------------

fs::path resolve_dataset_config(const std::string& arg) {
    if (fs::exists(arg)) return arg;
    if (auto dir = env_var("PICL_DATA_DIR")) {
        const fs::path name_toml = fs::path(*dir) / (arg + ".toml");
        if (fs::exists(name_toml)) return name_toml;
        const fs::path direct = fs::path(*dir) / arg;
        if (fs::exists(direct)) return direct;
    }
    throw picl::data_error("cannot find dataset config: " + arg +
                           " (tried the path itself and $PICL_DATA_DIR)");
}

// Keys the flat experiment/dataset TOML may contain.
const std::vector<std::string> kknown_keys = {
    "name",       "path",         "format",       "category",    "text_field",
    "text2_field", "aspect_field", "label_field",  "labels",      "has_neutral",
    "max_len",    "lambda",       "sigma",        "k",           "tries",
    "repeats",    "seed",         "noise_seed",   "split",       "query_limit",
    "length_norm", "trailing_space"};

void check_known_keys(const picl::toml_table& t, const std::string& origin) {
    for (const std::string& key : t.keys()) {
        bool ok = false;
        for (const std::string& k : kknown_keys) ok = ok || k == key;
        if (!ok) throw picl::config_error(origin + ": unknown config key: " + key);
    }
}

// ---- evaluate --------------------------------------------------------------

struct evaluate_options {
    model_options model;
    std::string config;
    std::string replay;
    std::string out;
    std::string split = "test";
    std::int64_t k = 4;
    std::int64_t tries = 2;
    std::int64_t repeats = 10;
    std::int64_t repeat_offset = 0;
    double lambda = 0.0;
    double sigma = 0.02;
    std::uint64_t seed = 0;
    std::uint64_t noise_seed = 0;
    bool noise_seed_set = false;
    std::int64_t query_limit = -1;
    std::string length_norm = "sum";
    bool no_trailing_space = false;
    std::vector<std::string> include_tensors;
};

picl::experiment_spec build_spec(const evaluate_options& o) {
    picl::experiment_spec spec;
    spec.k = o.k;
    spec.tries_per_query = o.tries;
    spec.n_repeats = o.repeats;
    spec.repeat_offset = o.repeat_offset;
    spec.master_seed = o.seed;
    spec.query_limit = o.query_limit;
    spec.noise.lambda = o.lambda;
    spec.noise.sigma = o.sigma;
    spec.noise.master_seed = o.noise_seed_set ? o.noise_seed : o.seed;
    spec.noise.include = o.include_tensors;
    if (o.length_norm == "sum") spec.scoring.norm = picl::length_norm::sum;
    else if (o.length_norm == "mean") spec.scoring.norm = picl::length_norm::mean;
    else throw picl::config_error("length_norm must be sum or mean, got: " + o.length_norm);
    spec.prompt.trailing_space = !o.no_trailing_space;
    if (o.split != "validation" && o.split != "test")
        throw picl::config_error("split must be validation or test, got: " + o.split);
    spec.validate();
    return spec;
}

// Flags win over config-file values; config values win over built-ins.
void apply_config_defaults(evaluate_options& o, const picl::toml_table& t, const CLI::App* cmd) {
    auto unset = [&](const char* flag) { return cmd->count(flag) == 0; };
    if (unset("--lambda")) {
        if (auto v = t.get_double("lambda")) o.lambda = *v;
    }
    if (unset("--sigma")) {
        if (auto v = t.get_double("sigma")) o.sigma = *v;
    }
    if (unset("--k")) {
        if (auto v = t.get_int("k")) o.k = *v;
    }
    if (unset("--tries")) {
        if (auto v = t.get_int("tries")) o.tries = *v;
    }
    if (unset("--repeats")) {
        if (auto v = t.get_int("repeats")) o.repeats = *v;
    }
    if (unset("--seed")) {
        if (auto v = t.get_int("seed")) o.seed = static_cast<std::uint64_t>(*v);
    }
    if (unset("--noise-seed")) {
        if (auto v = t.get_int("noise_seed")) {
            o.noise_seed = static_cast<std::uint64_t>(*v);
            o.noise_seed_set = true;
        }
    }
    if (unset("--split")) {
        if (auto v = t.get_string("split")) o.split = *v;
    }
    if (unset("--query-limit")) {
        if (auto v = t.get_int("query_limit")) o.query_limit = *v;
    }
    if (unset("--length-norm")) {
        if (auto v = t.get_string("length_norm")) o.length_norm = *v;
    }
    if (unset("--no-trailing-space")) {
        if (auto v = t.get_bool("trailing_space")) o.no_trailing_space = !*v;
    }
}

json spec_to_json(const picl::experiment_spec& spec, const std::string& split) {
    return json{{"split", split},
                {"k", spec.k},
                {"tries_per_query", spec.tries_per_query},
                {"n_repeats", spec.n_repeats},
                {"repeat_offset", spec.repeat_offset},
                {"master_seed", spec.master_seed},
                {"noise_seed", spec.noise.master_seed},
                {"lambda", spec.noise.lambda},
                {"sigma", spec.noise.sigma},
                {"include_tensors", spec.noise.include},
                {"query_limit", spec.query_limit},
                {"length_norm", spec.scoring.norm == picl::length_norm::sum ? "sum" : "mean"},
                {"trailing_space", spec.prompt.trailing_space}};
}

void spec_from_json(const json& j, evaluate_options& o) {
    o.split = j.at("split").get<std::string>();
    o.k = j.at("k").get<std::int64_t>();
    o.tries = j.at("tries_per_query").get<std::int64_t>();
    o.repeats = j.at("n_repeats").get<std::int64_t>();
    o.repeat_offset = j.at("repeat_offset").get<std::int64_t>();
    o.seed = j.at("master_seed").get<std::uint64_t>();
    o.noise_seed = j.at("noise_seed").get<std::uint64_t>();
    o.noise_seed_set = true;
    o.lambda = j.at("lambda").get<double>();
    o.sigma = j.at("sigma").get<double>();
    o.include_tensors = j.at("include_tensors").get<std::vector<std::string>>();
    o.query_limit = j.at("query_limit").get<std::int64_t>();
    o.length_norm = j.at("length_norm").get<std::string>();
    o.no_trailing_space = !j.at("trailing_space").get<bool>();
}

void write_metrics_csv(const fs::path& path, const picl::run_result& result,
                       std::int64_t repeat_offset) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw picl::runtime_failure("cannot write metrics file: " + path.string());
    const std::vector<std::string> header = {"repeat", "accuracy", "macro_f1", "ece1"};
    picl::write_csv_row(out, header);
    for (std::size_t r = 0; r < result.per_repeat.size(); ++r) {
        const picl::repeat_metrics& m = result.per_repeat[r];
        const std::vector<std::string> row = {
            std::to_string(repeat_offset + static_cast<std::int64_t>(r)), num(m.accuracy),
            num(m.macro_f1), num(m.ece1)};
        picl::write_csv_row(out, row);
    }
    const std::vector<std::string> mean_row = {"mean", num(result.mean.accuracy),
                                               num(result.mean.macro_f1), num(result.mean.ece1)};
    const std::vector<std::string> std_row = {"std", num(result.stddev.accuracy),
                                              num(result.stddev.macro_f1), num(result.stddev.ece1)};
    picl::write_csv_row(out, mean_row);
    picl::write_csv_row(out, std_row);
}

void write_run_records(const fs::path& path, const picl::run_result& result,
                       const picl::experiment_spec& spec) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw picl::runtime_failure("cannot write records file: " + path.string());

    // Records run over evaluated queries only; map positions back to split
    // indices by re-threading the skip list.
    const std::int64_t considered =
        result.queries_evaluated + static_cast<std::int64_t>(result.skipped_queries.size());
    std::vector<std::int64_t> split_index;
    split_index.reserve(static_cast<std::size_t>(result.queries_evaluated));
    std::size_t next_skip = 0;
    for (std::int64_t q = 0; q < considered; ++q) {
        if (next_skip < result.skipped_queries.size() &&
            result.skipped_queries[next_skip] == q) {
            ++next_skip;
            continue;
        }
        split_index.push_back(q);
    }

    for (std::size_t r = 0; r < result.records.size(); ++r) {
        const auto n_tries = static_cast<std::size_t>(spec.tries_per_query);
        for (std::size_t i = 0; i < result.records[r].size(); ++i) {
            const picl::prediction_record& rec = result.records[r][i];
            json line{{"repeat", spec.repeat_offset + static_cast<std::int64_t>(r)},
                      {"query", split_index[i / n_tries]},
                      {"try", i % n_tries},
                      {"predicted", rec.predicted},
                      {"gold", rec.gold},
                      {"confidence", rec.confidence},
                      {"probs", rec.probs}};
            out << line.dump() << '\n';
        }
    }
    if (!out) throw picl::runtime_failure("write failed: " + path.string());
}

int cmd_evaluate(evaluate_options& o, const CLI::App* cmd) {
    fs::path dataset_config_path;
    if (!o.replay.empty()) {
        std::ifstream in(o.replay);
        if (!in) throw picl::data_error("cannot open manifest: " + o.replay);
        json manifest;
        try {
            manifest = json::parse(in);
        } catch (const json::exception& e) {
            throw picl::data_error("malformed manifest: " + std::string(e.what()));
        }
        spec_from_json(manifest.at("spec"), o);
        const json& model = manifest.at("model");
        o.model.config = model.at("config").get<std::string>();
        o.model.weights = model.at("weights").get<std::string>();
        o.model.vocab = model.at("vocab").get<std::string>();
        o.model.merges = model.at("merges").get<std::string>();
        o.model.model_dir.clear();
        dataset_config_path = manifest.at("dataset").at("config").get<std::string>();

        // A replay must run against the exact bytes the manifest recorded.
        const std::string recorded = model.at("weights_sha256").get<std::string>();
        const std::string actual = picl::sha256_hex_file(o.model.weights);
        if (recorded != actual)
            throw picl::data_error("weights digest mismatch: manifest has " + recorded +
                                   ", file has " + actual);
    } else {
        if (o.config.empty())
            throw picl::config_error("evaluate needs --config (or --replay)");
        dataset_config_path = resolve_dataset_config(o.config);
    }

    const picl::toml_table table = picl::toml_table::parse_file(dataset_config_path);
    check_known_keys(table, dataset_config_path.string());
    if (o.replay.empty()) apply_config_defaults(o, table, cmd);

    const picl::dataset_config dcfg =
        picl::dataset_config::from_toml_file(dataset_config_path);
    const picl::task_dataset full = picl::load_dataset(dcfg);
    const picl::split_pair splits = picl::split_dataset(full);
    const picl::task_dataset& split =
        o.split == "validation" ? splits.validation : splits.test;

    const picl::experiment_spec spec = build_spec(o);
    const model_bundle bundle = load_model_bundle(o.model);

    if (o.out.empty()) throw picl::config_error("evaluate needs --out");
    fs::create_directories(o.out);

    const picl::run_result result =
        picl::run_experiment(bundle.params, bundle.cfg, bundle.vocab, split, spec);

    json manifest{
        {"tool", "picl"},
        {"version", kToolVersion},
        {"created", utc_now()},
        {"command", "evaluate"},
        {"model",
         {{"config", bundle.config_path.string()},
          {"weights", bundle.weights_path.string()},
          {"vocab", bundle.vocab_path.string()},
          {"merges", bundle.merges_path.string()},
          {"config_sha256", picl::sha256_hex_file(bundle.config_path)},
          {"weights_sha256", picl::sha256_hex_file(bundle.weights_path)},
          {"vocab_sha256", picl::sha256_hex_file(bundle.vocab_path)},
          {"merges_sha256", picl::sha256_hex_file(bundle.merges_path)}}},
        {"dataset",
         {{"config", dataset_config_path.string()},
          {"config_sha256", picl::sha256_hex_file(dataset_config_path)},
          {"data", dcfg.path.string()},
          {"data_sha256", picl::sha256_hex_file(dcfg.path)},
          {"name", dcfg.name}}},
        {"spec", spec_to_json(spec, o.split)},
        {"skipped_queries", result.skipped_queries}};

    {
        std::ofstream mout(fs::path(o.out) / "manifest.json", std::ios::trunc);
        mout << manifest.dump(2) << '\n';
        if (!mout) throw picl::runtime_failure("cannot write manifest");
    }
    write_run_records(fs::path(o.out) / "records.jsonl", result, spec);
    write_metrics_csv(fs::path(o.out) / "metrics.csv", result, spec.repeat_offset);

    // One table-style row: dataset, lambda, k, then mean +/- std percentages.
    std::printf("%-20s lambda=%-8g k=%" PRId64 "  acc %6.2f±%.2f  mf1 %6.2f±%.2f  ece %6.2f±%.2f\n",
                dcfg.name.c_str(), spec.noise.lambda, spec.k,
                100.0 * result.mean.accuracy, 100.0 * result.stddev.accuracy,
                100.0 * result.mean.macro_f1, 100.0 * result.stddev.macro_f1,
                100.0 * result.mean.ece1, 100.0 * result.stddev.ece1);
    if (!result.skipped_queries.empty())
        std::fprintf(stderr, "note: %zu queries skipped (prompt exceeded the model context)\n",
                     result.skipped_queries.size());
    return 0;
}

// ---- search-lambda ---------------------------------------------------------

struct search_options {
    model_options model;
    std::string config;
    std::string out;
    std::string grid;
    std::vector<std::int64_t> k_sweep;
    bool stability = false;
    std::int64_t k = 4;
    std::int64_t tries = 2;
    std::int64_t seeds = 10;
    double sigma = 0.02;
    std::uint64_t seed = 0;
    std::int64_t query_limit = -1;
    double synthetic_peak = -1.0;
    bool synthetic_set = false;
};

picl::lambda_grid parse_grid(const std::string& text) {
    if (text.empty()) return picl::lambda_grid::default_grid();
    picl::lambda_grid g;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const std::size_t comma = text.find(',', pos);
        const std::string item =
            text.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos);
        try {
            std::size_t used = 0;
            const double v = std::stod(item, &used);
            if (used != item.size()) throw std::invalid_argument(item);
            g.candidates.push_back(v);
        } catch (const std::exception&) {
            throw picl::config_error("bad lambda in --grid: '" + item + "'");
        }
        if (comma == std::string::npos) break;
        pos = comma + 1;
    }
    g.validate();
    return g;
}

int cmd_search_lambda(search_options& o) {
    const picl::lambda_grid grid = parse_grid(o.grid);
    if (o.out.empty()) throw picl::config_error("search-lambda needs --out");
    fs::create_directories(o.out);

    std::vector<std::int64_t> ks = o.k_sweep.empty() ? std::vector<std::int64_t>{o.k} : o.k_sweep;

    // Either the synthetic oracle (plumbing tests) or the real validation run.
    std::optional<model_bundle> bundle;
    std::optional<picl::task_dataset> validation;
    if (!o.synthetic_set) {
        if (o.config.empty())
            throw picl::config_error(
                "search-lambda needs --config (or --synthetic-oracle-peak)");
        const fs::path cfg_path = resolve_dataset_config(o.config);
        const picl::dataset_config dcfg = picl::dataset_config::from_toml_file(cfg_path);
        validation = picl::split_dataset(picl::load_dataset(dcfg)).validation;
        bundle = load_model_bundle(o.model);
    } else if (o.synthetic_peak < 0.0 || o.synthetic_peak > 1.0) {
        throw picl::config_error("--synthetic-oracle-peak must lie in [0, 1]");
    }

    std::ofstream eval_csv(fs::path(o.out) / "evaluations.csv",
                           std::ios::binary | std::ios::trunc);
    std::ofstream cand_csv(fs::path(o.out) / "candidates.csv",
                           std::ios::binary | std::ios::trunc);
    const std::vector<std::string> eval_header = {"k", "lambda", "seed_index", "accuracy"};
    const std::vector<std::string> cand_header = {"k", "lambda", "mean_accuracy"};
    picl::write_csv_row(eval_csv, eval_header);
    picl::write_csv_row(cand_csv, cand_header);

    std::vector<double> optima;
    json optimal_json{{"per_k", json::array()}};
    for (std::int64_t k : ks) {
        picl::lambda_evaluator evaluate;
        if (o.synthetic_set) {
            const double peak = o.synthetic_peak;
            evaluate = [peak](double lambda, std::uint64_t) {
                const double d = lambda - peak;
                return 1.0 - d * d;
            };
        } else {
            evaluate = [&, k](double lambda, std::uint64_t noise_seed) {
                picl::experiment_spec spec;
                spec.k = k;
                spec.tries_per_query = o.tries;
                spec.n_repeats = 1;
                spec.master_seed = o.seed;
                spec.query_limit = o.query_limit;
                spec.noise.lambda = lambda;
                spec.noise.sigma = o.sigma;
                spec.noise.master_seed = noise_seed;
                const picl::run_result r = picl::run_experiment(
                    bundle->params, bundle->cfg, bundle->vocab, *validation, spec);
                return r.mean.accuracy;
            };
        }

        const picl::lambda_search_result result = picl::grid_search(
            grid, static_cast<int>(o.seeds), picl::derive_seed(o.seed, static_cast<std::uint64_t>(k)),
            evaluate);
        for (const auto& c : result.per_candidate) {
            for (std::size_t s = 0; s < c.per_seed_accuracy.size(); ++s) {
                const std::vector<std::string> row = {std::to_string(k), num(c.lambda),
                                                      std::to_string(s),
                                                      num(c.per_seed_accuracy[s])};
                picl::write_csv_row(eval_csv, row);
            }
            const std::vector<std::string> row = {std::to_string(k), num(c.lambda),
                                                  num(c.mean_accuracy)};
            picl::write_csv_row(cand_csv, row);
        }
        optima.push_back(result.optimal_lambda);
        optimal_json["per_k"].push_back(json{{"k", k}, {"optimal_lambda", result.optimal_lambda}});
        std::printf("k=%" PRId64 " optimal lambda = %g\n", k, result.optimal_lambda);
    }

    if (o.stability) {
        const double grid_max =
            *std::max_element(grid.candidates.begin(), grid.candidates.end());
        const picl::stability_stats stats = picl::compute_stability(optima, grid_max);

        std::ofstream dist(fs::path(o.out) / "stability_distance.csv",
                           std::ios::binary | std::ios::trunc);
        std::vector<std::string> header = {"k"};
        for (std::int64_t k : ks) header.push_back(std::to_string(k));
        picl::write_csv_row(dist, header);
        for (std::size_t i = 0; i < ks.size(); ++i) {
            std::vector<std::string> row = {std::to_string(ks[i])};
            for (std::size_t j = 0; j < ks.size(); ++j)
                row.push_back(num(stats.distance_matrix[i][j]));
            picl::write_csv_row(dist, row);
        }

        std::ofstream range(fs::path(o.out) / "stability_range.csv",
                            std::ios::binary | std::ios::trunc);
        const std::vector<std::string> rheader = {"start_k", "normalized_range"};
        picl::write_csv_row(range, rheader);
        for (std::size_t i = 0; i < stats.remaining_range.size(); ++i) {
            const std::vector<std::string> row = {std::to_string(ks[i]),
                                                  num(stats.remaining_range[i])};
            picl::write_csv_row(range, row);
        }
        optimal_json["stability"] = {{"remaining_range", stats.remaining_range}};
    }

    std::ofstream oout(fs::path(o.out) / "optimal.json", std::ios::trunc);
    oout << optimal_json.dump(2) << '\n';
    if (!oout) throw picl::runtime_failure("cannot write optimal.json");
    return 0;
}

// ---- probe-entropy ---------------------------------------------------------

struct probe_options {
    model_options model;
    std::string kind = "both";
    std::string dataset;
    std::string lambdas = "0";
    std::int64_t seeds = 1;
    std::int64_t k = 4;
    std::int64_t tries = 512;
    double sigma = 0.02;
    std::uint64_t seed = 0;
    std::string tally = "argmax";
    std::string out;
};

int cmd_probe_entropy(probe_options& o) {
    if (o.kind != "token" && o.kind != "label" && o.kind != "both")
        throw picl::config_error("--kind must be token, label, or both");
    if (o.out.empty()) throw picl::config_error("probe-entropy needs --out");
    if (o.seeds < 1) throw picl::config_error("--seeds must be at least 1");

    picl::lambda_grid lg = parse_grid(o.lambdas);

    picl::label_tally tally;
    if (o.tally == "argmax") tally = picl::label_tally::argmax;
    else if (o.tally == "mean") tally = picl::label_tally::mean_probs;
    else throw picl::config_error("--tally must be argmax or mean");

    std::optional<picl::task_dataset> validation;
    if (o.kind != "token") {
        if (o.dataset.empty())
            throw picl::config_error("label entropy needs --dataset");
        const picl::dataset_config dcfg =
            picl::dataset_config::from_toml_file(resolve_dataset_config(o.dataset));
        if (dcfg.has_neutral)
            throw picl::config_error(
                "label entropy is undefined for datasets with a neutral label: " + dcfg.name);
        validation = picl::split_dataset(picl::load_dataset(dcfg)).validation;
    }

    const model_bundle bundle = load_model_bundle(o.model);

    fs::create_directories(o.out);
    std::ofstream csv(fs::path(o.out) / "entropy.csv", std::ios::binary | std::ios::trunc);
    const std::vector<std::string> header = {"lambda", "seed_index", "kind", "input", "value"};
    picl::write_csv_row(csv, header);

    const std::vector<std::string> token_inputs = {" ", "Label: "};
    for (double lambda : lg.candidates) {
        // lambda = 0 ignores the noise seed entirely; one model serves all.
        std::unique_ptr<picl::gpt2_model> shared;
        if (lambda == 0.0) shared = std::make_unique<picl::gpt2_model>(bundle.params, bundle.cfg);

        for (std::int64_t s = 0; s < o.seeds; ++s) {
            std::unique_ptr<picl::gpt2_model> perturbed_model;
            const picl::gpt2_model* model = shared.get();
            if (!model) {
                picl::noise_config ncfg;
                ncfg.lambda = lambda;
                ncfg.sigma = o.sigma;
                ncfg.master_seed = picl::repeat_noise_seed(o.seed, s);
                const picl::tensor_map perturbed = picl::perturb(bundle.params, ncfg);
                perturbed_model = std::make_unique<picl::gpt2_model>(perturbed, bundle.cfg);
                model = perturbed_model.get();
            }

            if (o.kind != "label") {
                for (const std::string& input : token_inputs) {
                    const double h = picl::token_entropy(*model, bundle.vocab, input);
                    const std::vector<std::string> row = {num(lambda), std::to_string(s),
                                                          "token", input, num(h)};
                    picl::write_csv_row(csv, row);
                }
            }
            if (o.kind != "token") {
                const double h = picl::label_entropy(
                    *model, bundle.vocab, *validation, o.k, o.tries,
                    picl::derive_seed(o.seed, "label-probe"), tally, {}, {});
                const std::vector<std::string> row = {num(lambda), std::to_string(s), "label",
                                                      validation->name, num(h)};
                picl::write_csv_row(csv, row);
            }
        }
    }
    if (!csv) throw picl::runtime_failure("cannot write entropy.csv");
    std::printf("entropy rows written to %s\n",
                (fs::path(o.out) / "entropy.csv").string().c_str());
    return 0;
}

// ---- report ----------------------------------------------------------------

struct report_options {
    std::string records;
    std::string out;
    int bins = 10;
};

int cmd_report(report_options& o) {
    if (o.records.empty()) throw picl::config_error("report needs --records");
    if (o.out.empty()) throw picl::config_error("report needs --out");
    const std::vector<picl::prediction_record> records =
        picl::read_records_jsonl(o.records);
    if (records.empty())
        throw picl::config_error("records file has no records: " + o.records);

    std::int32_t n_classes = 0;
    for (const picl::prediction_record& r : records) {
        n_classes = std::max(n_classes, r.predicted + 1);
        n_classes = std::max(n_classes, r.gold + 1);
        if (!r.probs.empty())
            n_classes = std::max(n_classes, static_cast<std::int32_t>(r.probs.size()));
    }
    n_classes = std::max(n_classes, 2);

    fs::create_directories(o.out);
    const picl::reliability_bins bins = picl::reliability(records, o.bins);
    {
        std::ofstream out(fs::path(o.out) / "reliability.csv",
                          std::ios::binary | std::ios::trunc);
        const std::vector<std::string> header = {"bin", "lo", "hi", "count",
                                                 "mean_confidence", "accuracy"};
        picl::write_csv_row(out, header);
        for (int j = 0; j < bins.n_bins; ++j) {
            const auto ju = static_cast<std::size_t>(j);
            const std::vector<std::string> row = {
                std::to_string(j + 1),
                num(static_cast<double>(j) / bins.n_bins),
                num(static_cast<double>(j + 1) / bins.n_bins),
                std::to_string(bins.count[ju]),
                num(bins.mean_confidence[ju]),
                num(bins.bin_accuracy[ju])};
            picl::write_csv_row(out, row);
        }
    }
    const picl::confidence_split split = picl::split_confidences(records);
    auto write_hist = [&](const char* name, const std::vector<double>& values) {
        std::ofstream out(fs::path(o.out) / name, std::ios::binary | std::ios::trunc);
        const std::vector<std::string> header = {"confidence"};
        picl::write_csv_row(out, header);
        for (double v : values) {
            const std::vector<std::string> row = {num(v)};
            picl::write_csv_row(out, row);
        }
    };
    write_hist("confidence_correct.csv", split.correct);
    write_hist("confidence_wrong.csv", split.wrong);

    std::printf("records %zu  accuracy %s  macro_f1 %s  ece1 %s\n", records.size(),
                fixed4(picl::accuracy(records)).c_str(),
                fixed4(picl::macro_f1(records, n_classes)).c_str(),
                fixed4(picl::ece1(records, o.bins)).c_str());
    return 0;
}

// ---- perturb ---------------------------------------------------------------

struct perturb_options {
    std::string weights;
    std::string out_weights;
    double lambda = 0.0;
    double sigma = 0.02;
    std::uint64_t seed = 0;
    std::vector<std::string> include;
};

int cmd_perturb(perturb_options& o) {
    if (o.weights.empty()) throw picl::config_error("perturb needs --weights");
    if (o.out_weights.empty()) throw picl::config_error("perturb needs --out-weights");
    picl::noise_config cfg;
    cfg.lambda = o.lambda;
    cfg.sigma = o.sigma;
    cfg.master_seed = o.seed;
    cfg.include = o.include;
    cfg.validate();

    const picl::tensor_map params = picl::read_safetensors(o.weights);
    const picl::tensor_map out = picl::perturb(params, cfg);
    picl::write_safetensors(o.out_weights, out);
    std::printf("perturbed %zu tensors (%" PRId64 " elements) -> %s\n", out.size(), out.numel(),
                o.out_weights.c_str());
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"perturbed in-context-learning workbench"};
    app.require_subcommand(1);
    int threads = 0;
    app.add_option("--threads", threads, "Cap worker threads (does not affect results)");

    evaluate_options eo;
    CLI::App* evaluate = app.add_subcommand(
        "evaluate", "Run the few-shot protocol; writes manifest, records, metrics");
    add_model_flags(evaluate, eo.model);
    evaluate->add_option("--config", eo.config, "Dataset/experiment TOML");
    evaluate->add_option("--replay", eo.replay, "Re-run bit-identically from a manifest.json");
    evaluate->add_option("--out", eo.out, "Output directory");
    evaluate->add_option("--split", eo.split, "validation or test (default test)");
    evaluate->add_option("--k", eo.k, "Demonstrations per prompt");
    evaluate->add_option("--tries", eo.tries, "Demo re-draws per query");
    evaluate->add_option("--repeats", eo.repeats, "Noise repeats");
    evaluate->add_option("--repeat-offset", eo.repeat_offset, "Absolute index of first repeat");
    evaluate->add_option("--lambda", eo.lambda, "Noise intensity in [0, 1]");
    evaluate->add_option("--sigma", eo.sigma, "Noise standard deviation");
    evaluate->add_option("--seed", eo.seed, "Master seed");
    evaluate->add_option("--noise-seed", eo.noise_seed, "Noise master seed (default: --seed)")
        ->each([&eo](const std::string&) { eo.noise_seed_set = true; });
    evaluate->add_option("--query-limit", eo.query_limit, "Evaluate only the first N queries");
    evaluate->add_option("--length-norm", eo.length_norm, "sum or mean");
    evaluate->add_flag("--no-trailing-space", eo.no_trailing_space,
                       "Query line ends 'Label:' instead of 'Label: '");
    evaluate->add_option("--include-tensors", eo.include_tensors,
                         "Perturb only tensors whose name contains any of these substrings");

    search_options so;
    CLI::App* search = app.add_subcommand("search-lambda",
                                          "Grid-search lambda on the validation split");
    add_model_flags(search, so.model);
    search->add_option("--config", so.config, "Dataset TOML");
    search->add_option("--out", so.out, "Output directory");
    search->add_option("--grid", so.grid, "Comma-separated candidates (default: built-in grid)");
    search->add_option("--k", so.k, "Demonstrations per prompt");
    search->add_option("--k-sweep", so.k_sweep, "Search once per k in this list")
        ->delimiter(',');
    search->add_flag("--stability", so.stability,
                     "Write distance-matrix and remaining-range CSVs over the k-sweep optima");
    search->add_option("--tries", so.tries, "Demo re-draws per query");
    search->add_option("--seeds", so.seeds, "Noise seeds per candidate");
    search->add_option("--sigma", so.sigma, "Noise standard deviation");
    search->add_option("--seed", so.seed, "Master seed");
    search->add_option("--query-limit", so.query_limit, "Evaluate only the first N queries");
    search->add_option("--synthetic-oracle-peak", so.synthetic_peak,
                       "Testing aid: score candidates with 1-(lambda-peak)^2 instead of the model")
        ->each([&so](const std::string&) { so.synthetic_set = true; });

    probe_options po;
    CLI::App* probe = app.add_subcommand("probe-entropy",
                                         "Token/label entropy probes over a lambda list");
    add_model_flags(probe, po.model);
    probe->add_option("--kind", po.kind, "token, label, or both");
    probe->add_option("--dataset", po.dataset, "Dataset TOML (label probes)");
    probe->add_option("--lambdas", po.lambdas, "Comma-separated lambda list");
    probe->add_option("--seeds", po.seeds, "Noise seeds per lambda");
    probe->add_option("--k", po.k, "Demonstrations per query-less prompt");
    probe->add_option("--tries", po.tries, "Query-less prompts per label-entropy estimate");
    probe->add_option("--sigma", po.sigma, "Noise standard deviation");
    probe->add_option("--seed", po.seed, "Master seed");
    probe->add_option("--tally", po.tally, "argmax or mean");
    probe->add_option("--out", po.out, "Output directory");

    report_options ro;
    CLI::App* report = app.add_subcommand("report",
                                          "Plot-ready CSVs and metrics from a records file");
    report->add_option("--records", ro.records, "records.jsonl from a prior run");
    report->add_option("--out", ro.out, "Output directory");
    report->add_option("--bins", ro.bins, "Reliability bins (default 10)");

    perturb_options xo;
    CLI::App* perturb = app.add_subcommand("perturb",
                                           "Write a perturbed copy of a weight container");
    perturb->add_option("--weights", xo.weights, "Input container");
    perturb->add_option("--out-weights", xo.out_weights, "Output container path");
    perturb->add_option("--lambda", xo.lambda, "Noise intensity in [0, 1]");
    perturb->add_option("--sigma", xo.sigma, "Noise standard deviation");
    perturb->add_option("--seed", xo.seed, "Noise master seed");
    perturb->add_option("--include", xo.include,
                        "Perturb only tensors whose name contains any of these substrings");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
#ifdef _OPENMP
        if (threads > 0) omp_set_num_threads(threads);
#endif
        if (*evaluate) return cmd_evaluate(eo, evaluate);
        if (*search) return cmd_search_lambda(so);
        if (*probe) return cmd_probe_entropy(po);
        if (*report) return cmd_report(ro);
        if (*perturb) return cmd_perturb(xo);
        throw picl::config_error("no subcommand given");
    } catch (const picl::config_error& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 1;
    } catch (const picl::data_error& e) {
        std::fprintf(stderr, "data error: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "runtime error: %s\n", e.what());
        return 3;
    }
}
