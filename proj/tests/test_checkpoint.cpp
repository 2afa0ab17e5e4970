#include <doctest.h>

#include <cstring>
#include <filesystem>

#include "ctvol/checkpoint.hpp"
#include "ctvol/rng.hpp"

#include <json.hpp>

using namespace ctvol;

namespace {

ModelConfig cfg_for_test() {
    ModelConfig cfg;
    cfg.stem_width = 4;
    cfg.stage_widths = {4, 8};
    cfg.stage_blocks = {1, 1};
    cfg.aspp_rates = {1, 2};
    cfg.aspp_width = 8;
    cfg.low_level_width = 4;
    cfg.decoder_width = 8;
    cfg.output_stride = 4;
    cfg.norm_groups = 2;
    return cfg;
}

}  // namespace

TEST_CASE("checkpoint round-trip restores config, params, step and seed") {
    SegModel model(cfg_for_test());
    model.init_params(123);
    auto bytes = serialize_checkpoint(model, 42, 123);

    LoadedCheckpoint loaded = checkpoint_from_bytes(bytes);
    CHECK(loaded.step == 42);
    CHECK(loaded.seed == 123);
    CHECK(loaded.config == cfg_for_test());

    std::vector<double> original, restored;
    model.visit_params([&original](const ParamView& p) {
        original.insert(original.end(), p.value, p.value + p.count);
    });
    loaded.model->visit_params([&restored](const ParamView& p) {
        restored.insert(restored.end(), p.value, p.value + p.count);
    });
    CHECK(original == restored);  // bitwise, float64 all the way
}

TEST_CASE("manifest offsets tile the blob exactly") {
    SegModel model(cfg_for_test());
    model.init_params(7);
    auto bytes = serialize_checkpoint(model, 0, 7);

    std::uint64_t len = 0;
    std::memcpy(&len, bytes.data(), 8);
    auto manifest = nlohmann::json::parse(bytes.begin() + 8, bytes.begin() + 8 + len);
    std::uint64_t expected = 0;
    for (const auto& e : manifest.at("params")) {
        CHECK(e.at("offset").get<std::uint64_t>() == expected);
        std::uint64_t count = 1;
        for (int d : e.at("shape").get<std::vector<int>>()) count *= d;
        expected += count;
    }
    CHECK(expected == manifest.at("total").get<std::uint64_t>());
    CHECK(bytes.size() == 8 + len + expected * 8);
}

TEST_CASE("corrupted checkpoints are rejected") {
    SegModel model(cfg_for_test());
    model.init_params(1);
    auto bytes = serialize_checkpoint(model, 1, 1);

    auto truncated = bytes;
    truncated.resize(truncated.size() - 9);
    CHECK_THROWS_AS(checkpoint_from_bytes(truncated), TruncatedPayload);

    CHECK_THROWS_AS(checkpoint_from_bytes({1, 2, 3}), TruncatedPayload);
}

TEST_CASE("save and load through the filesystem") {
    namespace fs = std::filesystem;
    const auto path = fs::temp_directory_path() / "ctvol_ckpt_test.bin";
    SegModel model(cfg_for_test());
    model.init_params(55);
    save_checkpoint(path.string(), model, 9, 55);
    LoadedCheckpoint loaded = load_checkpoint(path.string());
    CHECK(loaded.step == 9);
    fs::remove(path);

    CHECK_THROWS_AS(load_checkpoint("/nonexistent/nowhere.bin"), MissingArtifact);
}
