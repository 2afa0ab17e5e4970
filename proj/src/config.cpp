#include "ctvol/config.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

namespace ctvol {

namespace {

using json = nlohmann::json;

json augment_section(const RunConfig& cfg) {
    json a = json::parse(augspec_to_json(cfg.augment));
    a["enabled"] = cfg.augment_enabled;
    return a;
}

}  // namespace

void RunConfig::validate() const {
    if (input_dir.empty() || work_dir.empty())
        throw ConfigInvalid("config: input_dir and work_dir must be set");
    const double sum = split_fractions[0] + split_fractions[1] + split_fractions[2];
    if (std::abs(sum - 1.0) > 1e-9) throw BadFractions("config: split fractions must sum to 1");
    if (!(window.lo < window.hi)) throw DegenerateWindow("config: window lo must be < hi");
    if (train_batch_size < 1) throw ConfigInvalid("config: batch size must be >= 1");
    if (train_steps < 0) throw ConfigInvalid("config: steps must be >= 0");
    if (!(train_lr >= 0.0)) throw ConfigInvalid("config: lr must be >= 0");
    if (phantom_count < 1) throw ConfigInvalid("config: phantom count must be >= 1");
    if (!(triage_thresholds.t1 >= 0.0 && triage_thresholds.t1 < triage_thresholds.t2 &&
          triage_thresholds.t2 <= 100.0))
        throw BadThresholds("config: need 0 <= t1 < t2 <= 100");
    model.validate();
    augment.validate();
    phantoms.validate();
}

std::string run_config_to_json(const RunConfig& cfg) {
    json j;
    j["paths"]["input_dir"] = cfg.input_dir;
    j["paths"]["work_dir"] = cfg.work_dir;
    j["paths"]["checkpoint"] =
        cfg.checkpoint_path.empty() ? cfg.work_dir + "/model.ckpt" : cfg.checkpoint_path;
    j["window"] = {cfg.window.lo, cfg.window.hi};
    j["split"]["fractions"] = cfg.split_fractions;
    j["split"]["seed"] = cfg.split_seed;
    j["augment"] = augment_section(cfg);
    j["model"] = json::parse(model_config_to_json(cfg.model));
    j["train"]["lr"] = cfg.train_lr;
    j["train"]["batch_size"] = cfg.train_batch_size;
    j["train"]["steps"] = cfg.train_steps;
    j["train"]["seed"] = cfg.train_seed;
    j["triage"]["thresholds"] = {cfg.triage_thresholds.t1, cfg.triage_thresholds.t2};

    json& p = j["phantoms"];
    p["count"] = cfg.phantom_count;
    p["shape"] = {cfg.phantoms.nx, cfg.phantoms.ny, cfg.phantoms.nz};
    p["spacing"] = {cfg.phantoms.dx, cfg.phantoms.dy, cfg.phantoms.dz};
    p["blob_count"] = {cfg.phantoms.blob_count_min, cfg.phantoms.blob_count_max};
    p["blob_radius"] = {cfg.phantoms.blob_radius_min, cfg.phantoms.blob_radius_max};
    p["noise_hu"] = cfg.phantoms.noise_hu;
    p["seed"] = cfg.phantoms.seed;
    return j.dump(2);
}

RunConfig run_config_from_json(const std::string& json_text) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::exception& e) {
        throw ConfigInvalid(std::string("config: bad JSON: ") + e.what());
    }

    RunConfig cfg;
    try {
        if (j.contains("paths")) {
            const auto& p = j.at("paths");
            cfg.input_dir = p.value("input_dir", cfg.input_dir);
            cfg.work_dir = p.value("work_dir", cfg.work_dir);
            cfg.checkpoint_path = p.value("checkpoint", std::string{});
        }
        if (j.contains("window")) {
            const auto& w = j.at("window");
            cfg.window.lo = w.at(0).get<double>();
            cfg.window.hi = w.at(1).get<double>();
        }
        if (j.contains("split")) {
            const auto& s = j.at("split");
            if (s.contains("fractions")) {
                cfg.split_fractions = {s.at("fractions").at(0).get<double>(),
                                       s.at("fractions").at(1).get<double>(),
                                       s.at("fractions").at(2).get<double>()};
            }
            cfg.split_seed = s.value("seed", cfg.split_seed);
        }
        if (j.contains("augment")) {
            json a = j.at("augment");
            cfg.augment_enabled = a.value("enabled", true);
            a.erase("enabled");
            // "transforms": "default" (or omitted) selects the built-in pipeline
            if (a.value("transforms", json("default")) == json("default")) {
                cfg.augment = AugSpec::defaults(a.value("seed", 11ULL));
            } else {
                cfg.augment = augspec_from_json(a.dump());
            }
        } else {
            cfg.augment = AugSpec::defaults(11);
        }
        if (j.contains("model"))
            cfg.model = model_config_from_json(j.at("model").dump());
        if (j.contains("train")) {
            const auto& t = j.at("train");
            cfg.train_lr = t.value("lr", cfg.train_lr);
            cfg.train_batch_size = t.value("batch_size", cfg.train_batch_size);
            cfg.train_steps = t.value("steps", cfg.train_steps);
            cfg.train_seed = t.value("seed", cfg.train_seed);
        }
        if (j.contains("triage")) {
            const auto& th = j.at("triage").at("thresholds");
            cfg.triage_thresholds.t1 = th.at(0).get<double>();
            cfg.triage_thresholds.t2 = th.at(1).get<double>();
        }
        if (j.contains("phantoms")) {
            const auto& p = j.at("phantoms");
            cfg.phantom_count = p.value("count", cfg.phantom_count);
            if (p.contains("shape")) {
                cfg.phantoms.nx = p.at("shape").at(0).get<int>();
                cfg.phantoms.ny = p.at("shape").at(1).get<int>();
                cfg.phantoms.nz = p.at("shape").at(2).get<int>();
            }
            if (p.contains("spacing")) {
                cfg.phantoms.dx = p.at("spacing").at(0).get<double>();
                cfg.phantoms.dy = p.at("spacing").at(1).get<double>();
                cfg.phantoms.dz = p.at("spacing").at(2).get<double>();
            }
            if (p.contains("blob_count")) {
                cfg.phantoms.blob_count_min = p.at("blob_count").at(0).get<int>();
                cfg.phantoms.blob_count_max = p.at("blob_count").at(1).get<int>();
            }
            if (p.contains("blob_radius")) {
                cfg.phantoms.blob_radius_min = p.at("blob_radius").at(0).get<double>();
                cfg.phantoms.blob_radius_max = p.at("blob_radius").at(1).get<double>();
            }
            cfg.phantoms.noise_hu = p.value("noise_hu", cfg.phantoms.noise_hu);
            cfg.phantoms.seed = p.value("seed", cfg.phantoms.seed);
        }
    } catch (const json::exception& e) {
        throw ConfigInvalid(std::string("config: ") + e.what());
    }
    cfg.validate();
    return cfg;
}

RunConfig load_run_config(const std::string& path, const std::vector<std::string>& overrides,
                          const std::uint64_t* master_seed) {
    std::ifstream in(path);
    if (!in) throw MissingArtifact("config: cannot open " + path);
    std::stringstream buf;
    buf << in.rdbuf();

    json j;
    try {
        j = json::parse(buf.str());
    } catch (const json::exception& e) {
        throw ConfigInvalid(std::string("config: bad JSON: ") + e.what());
    }

    for (const std::string& kv : overrides) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos)
            throw ConfigInvalid("config: --set expects key=value, got \"" + kv + "\"");
        const std::string key = kv.substr(0, eq);
        const std::string raw = kv.substr(eq + 1);
        json value;
        try {
            value = json::parse(raw);
        } catch (const json::exception&) {
            value = raw;  // plain string
        }
        // walk/extend the dotted path
        json* node = &j;
        std::size_t start = 0;
        while (true) {
            const auto dot = key.find('.', start);
            const std::string part = key.substr(start, dot - start);
            if (part.empty()) throw ConfigInvalid("config: empty key segment in \"" + key + "\"");
            if (dot == std::string::npos) {
                (*node)[part] = value;
                break;
            }
            node = &(*node)[part];
            start = dot + 1;
        }
    }

    if (master_seed) {
        j["split"]["seed"] = *master_seed;
        j["train"]["seed"] = *master_seed;
        j["phantoms"]["seed"] = *master_seed;
        j["augment"]["seed"] = *master_seed;
    }
    return run_config_from_json(j.dump());
}

std::string default_run_config_json() {
    RunConfig cfg;
    cfg.augment = AugSpec::defaults(11);
    return run_config_to_json(cfg);
}

}  // namespace ctvol
