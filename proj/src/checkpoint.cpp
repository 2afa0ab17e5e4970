#include "ctvol/checkpoint.hpp"

#include <cstring>
#include <fstream>

#include <json.hpp>

namespace ctvol {

namespace {

using json = nlohmann::json;

std::vector<std::uint8_t> read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw MissingArtifact("checkpoint: cannot open " + path);
    return std::vector<std::uint8_t>(std::istreambuf_iterator<char>(in),
                                     std::istreambuf_iterator<char>());
}

}  // namespace

std::vector<std::uint8_t> serialize_checkpoint(SegModel& model, std::uint64_t step,
                                               std::uint64_t seed) {
    json manifest;
    manifest["config"] = json::parse(model_config_to_json(model.config()));
    manifest["step"] = step;
    manifest["seed"] = seed;
    manifest["params"] = json::array();

    std::vector<double> blob;
    std::uint64_t offset = 0;
    model.visit_params([&](const ParamView& p) {
        json entry;
        entry["name"] = p.name;
        entry["offset"] = offset;
        entry["shape"] = p.shape;
        manifest["params"].push_back(std::move(entry));
        blob.insert(blob.end(), p.value, p.value + p.count);
        offset += p.count;
    });
    manifest["total"] = offset;

    const std::string text = manifest.dump();
    const std::uint64_t len = text.size();
    std::vector<std::uint8_t> out(8 + text.size() + blob.size() * 8);
    std::memcpy(out.data(), &len, 8);
    std::memcpy(out.data() + 8, text.data(), text.size());
    std::memcpy(out.data() + 8 + text.size(), blob.data(), blob.size() * 8);
    return out;
}

LoadedCheckpoint checkpoint_from_bytes(const std::vector<std::uint8_t>& bytes) {
    if (bytes.size() < 8) throw TruncatedPayload("checkpoint: too short");
    std::uint64_t len = 0;
    std::memcpy(&len, bytes.data(), 8);
    if (bytes.size() < 8 + len) throw TruncatedPayload("checkpoint: manifest truncated");

    json manifest;
    try {
        manifest = json::parse(bytes.begin() + 8, bytes.begin() + 8 + len);
    } catch (const json::exception& e) {
        throw DataError(std::string("checkpoint: bad manifest: ") + e.what());
    }

    LoadedCheckpoint loaded;
    loaded.config = model_config_from_json(manifest.at("config").dump());
    loaded.step = manifest.at("step").get<std::uint64_t>();
    loaded.seed = manifest.at("seed").get<std::uint64_t>();

    const std::uint64_t total = manifest.at("total").get<std::uint64_t>();
    if (bytes.size() != 8 + len + total * 8)
        throw TruncatedPayload("checkpoint: parameter blob size mismatch");
    const std::uint8_t* blob = bytes.data() + 8 + len;

    loaded.model = std::make_unique<SegModel>(loaded.config);

    // walk the model in visit order and demand an exact manifest tiling
    std::size_t entry_idx = 0;
    std::uint64_t expected_offset = 0;
    const auto& entries = manifest.at("params");
    loaded.model->visit_params([&](const ParamView& p) {
        if (entry_idx >= entries.size())
            throw DataError("checkpoint: manifest has fewer params than the model");
        const auto& e = entries[entry_idx++];
        if (e.at("name").get<std::string>() != p.name)
            throw DataError("checkpoint: param name mismatch at " + p.name);
        if (e.at("offset").get<std::uint64_t>() != expected_offset)
            throw DataError("checkpoint: offsets do not tile the blob at " + p.name);
        std::size_t count = 1;
        for (int d : e.at("shape").get<std::vector<int>>()) count *= static_cast<std::size_t>(d);
        if (count != p.count) throw DataError("checkpoint: shape mismatch at " + p.name);
        std::memcpy(p.value, blob + expected_offset * 8, p.count * 8);
        expected_offset += p.count;
    });
    if (entry_idx != entries.size())
        throw DataError("checkpoint: manifest has more params than the model");
    if (expected_offset != total)
        throw DataError("checkpoint: manifest total does not match the blob");
    return loaded;
}

void save_checkpoint(const std::string& path, SegModel& model, std::uint64_t step,
                     std::uint64_t seed) {
    const auto bytes = serialize_checkpoint(model, step, seed);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("checkpoint: cannot write " + path);
    out.write(reinterpret_cast<const char*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
}

LoadedCheckpoint load_checkpoint(const std::string& path) {
    return checkpoint_from_bytes(read_file(path));
}

}  // namespace ctvol
