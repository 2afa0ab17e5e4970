#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "ctvol/augment.hpp"
#include "ctvol/model.hpp"
#include "ctvol/phantom.hpp"
#include "ctvol/slices.hpp"
#include "ctvol/volumetry.hpp"

namespace ctvol {

// Everything a pipeline run needs, read from one JSON file. `--set a.b=v`
// overrides individual keys; `--seed N` replaces every seed at once.
struct RunConfig {
    // paths
    std::string input_dir = "data";
    std::string work_dir = "work";
    std::string checkpoint_path;  // defaults to <work_dir>/model.ckpt

    Window window;

    std::array<double, 3> split_fractions{0.82, 0.10, 0.08};
    std::uint64_t split_seed = 7;

    bool augment_enabled = true;
    AugSpec augment;

    ModelConfig model;

    double train_lr = 1e-3;
    int train_batch_size = 4;
    int train_steps = 600;
    std::uint64_t train_seed = 21;

    TriageThresholds triage_thresholds;

    PhantomSpec phantoms;
    int phantom_count = 24;

    void validate() const;
};

RunConfig run_config_from_json(const std::string& json_text);
std::string run_config_to_json(const RunConfig& cfg);

// Parse the file, apply dotted-path overrides ("train.lr=0.01",
// "split.fractions=[0.8,0.1,0.1]"; values parse as JSON, else as strings),
// then the optional master seed.
RunConfig load_run_config(const std::string& path, const std::vector<std::string>& overrides,
                          const std::uint64_t* master_seed);

// Default config text, used by `ctvol init-config` style bootstrapping and
// the tests.
std::string default_run_config_json();

}  // namespace ctvol
