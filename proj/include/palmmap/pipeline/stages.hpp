#pragma once

#include <string>
#include <vector>

#include "palmmap/optical/series.hpp"
#include "palmmap/pipeline/config.hpp"

namespace palmmap {

// A stage failure that names the stage whose output is missing or broken.
struct StageError : std::runtime_error {
    StageError(const std::string& stage_name, const std::string& msg)
        : std::runtime_error("[" + stage_name + "] " + msg), stage(stage_name) {}
    std::string stage;
};

// Throws StageError naming the producing stage when a required input is absent.
void require_input(const std::string& path, const std::string& producing_stage);

// Every stage writes its artifacts plus .prov.json sidecars and removes
// partial outputs if it fails. Paths returned are the primary artifacts.

std::string stage_synth(const std::string& spec_path, const std::string& out_dir, int workers);

std::string stage_composite(const std::string& manifest_path, int year,
                            const CompositeParams& params, const std::string& out_dir,
                            uint64_t seed);

std::string stage_texture(const std::string& composite_path,
                          const std::vector<std::string>& band_names, const GlcmParams& params,
                          const std::string& out_path, int workers);

std::string stage_indices_annual(const std::string& manifest_path, IndexKind kind,
                                 const QaSpec& qa, int year, const std::string& out_path,
                                 int workers);

std::string stage_indices_series(const std::string& manifest_path, IndexKind kind,
                                 const QaSpec& qa, int window_days, int min_obs,
                                 const std::string& out_dir, int tile, int workers);

struct ClassifyFitResult {
    std::string models_dir;
    std::vector<int> cell_ids;
};

ClassifyFitResult stage_classify_fit(const std::string& composite_path,
                                     const std::string& textures_path,
                                     const ClassifyConfig& config, uint64_t seed,
                                     const std::string& models_dir, int workers);

std::string stage_classify_label_from_truth(const std::string& models_dir,
                                            const std::string& truth_path, double min_fraction,
                                            const std::string& out_csv);

std::vector<std::string> stage_classify_predict(const std::string& models_dir,
                                                const std::string& composite_path,
                                                const std::string& textures_path,
                                                const std::string& classes_dir, int workers);

std::string stage_classify_vote(const std::string& classes_dir, const std::string& labels_csv,
                                int threshold, const std::string& out_path);

std::string stage_postproc(const std::string& voted_path, const std::string& ndvi_path,
                           const PostprocConfig& config, const std::string& out_path);

struct AgeOutputs {
    std::string closure_path;
    std::string age_class_path;
    std::string expansion_csv;
    std::string consistency_csv;  // empty when no loss raster given
    double threshold_used = 0.0;
};

AgeOutputs stage_age(const std::string& extent_path, const std::string& series_dir,
                     const std::string& loss_path, const AgeConfig& config,
                     const std::string& out_dir, int workers);

struct ValidateOutputs {
    std::string samples_csv;
    std::string report_csv;  // empty when no interpretations were supplied
};

ValidateOutputs stage_validate(const std::string& extent_path, const ValidateConfig& config,
                               const std::string& out_dir, uint64_t seed);

std::string stage_report(const std::string& extent_path, const std::string& closure_path,
                         const ReportConfig& config, const AgeConfig& age,
                         double meters_per_unit, const std::string& out_dir);

// Full pipeline in dependency order. `stages` filters by name (composite,
// texture, indices, classify, postproc, age, validate, report, synth);
// empty = everything applicable.
int run_pipeline(const RunConfig& config, const std::vector<std::string>& stages);

}  // namespace palmmap
