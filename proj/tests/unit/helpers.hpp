#pragma once

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "json.hpp"

#include "picl/bpe.hpp"
#include "picl/dataset.hpp"
#include "picl/model.hpp"

namespace picl_test {

inline std::filesystem::path fixture_dir() { return PICL_FIXTURE_DIR; }
inline std::filesystem::path demo_data_dir() { return PICL_DEMO_DATA_DIR; }
inline std::filesystem::path tiny_model_dir() { return fixture_dir() / "tiny_model"; }

inline nlohmann::json load_json(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("missing fixture: " + path.string());
    return nlohmann::json::parse(in);
}

// The tiny checkpoint and tokenizer, loaded once per process.
struct tiny_bundle {
    picl::model_config cfg;
    picl::tensor_map params;
    picl::bpe_vocab vocab;
    picl::gpt2_model model;
};

inline const tiny_bundle& tiny() {
    static const tiny_bundle bundle = [] {
        const auto dir = tiny_model_dir();
        picl::model_config cfg = picl::model_config::from_json_file(dir / "config.json");
        picl::tensor_map params = picl::load_weights(dir / "model.safetensors", cfg);
        picl::bpe_vocab vocab = picl::bpe_vocab::load(dir / "vocab.json", dir / "merges.txt");
        picl::gpt2_model model(params, cfg);
        return tiny_bundle{cfg, std::move(params), std::move(vocab), std::move(model)};
    }();
    return bundle;
}

inline const picl::task_dataset& demo_sentiment() {
    static const picl::task_dataset ds = picl::load_dataset(
        picl::dataset_config::from_toml_file(demo_data_dir() / "demo_sentiment.toml"));
    return ds;
}

inline std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace picl_test
